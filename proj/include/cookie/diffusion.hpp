#pragma once

#include <cstdint>
#include <vector>

#include "cookie/environment.hpp"
#include "cookie/field.hpp"

namespace cookie
{

//! Standard normal quantile (Wichura's AS 241, about 1e-16 relative error).
double normal_quantile(double p);

struct DiffusionParams
{
    double alpha = 0;
    double y0 = 1;
    double h = 1e-4;
    double horizon = 1e3;
    //! Absorb at the first step ending at or below this level.
    double absorb_level = 0;
    //! Each step's Brownian increment is the sum of this many sub-increments
    //! drawn at index step * refinement + i, so a run with (h, r) and a run
    //! with (h / r, 1) share one Brownian path.
    std::int64_t noise_refinement = 1;
    //! When >= 0, record Y(probe_time ∧ sigma).
    double probe_time = -1;
};

//! One Euler–Maruyama path of dY = alpha dt + sqrt(2|Y|) dB.
struct DiffusionRun
{
    double alpha = 0;
    double y0 = 0;
    double h = 0;
    double horizon = 0;
    bool absorbed = false;
    double sigma0 = 0;    //!< interpolated hit time (valid when absorbed)
    double integral = 0;  //!< trapezoid integral of Y up to sigma ∧ horizon
    double terminal = 0;  //!< Y at the stopping time (absorb_level if absorbed)
    double probe = 0;     //!< Y(probe_time ∧ sigma)
};

/*!
 * Simulate one path. Gaussian increments come from the "diffusion" stream at
 * site = replica, so each replica is reproducible on its own. The hit time is
 * linearly interpolated inside the crossing step and the last partial segment
 * is included in the integral. Throws std::invalid_argument for y0 <= level,
 * h <= 0 or horizon <= 0.
 */
DiffusionRun simulate_Y(DiffusionParams const& params, RandomField const& field,
                        std::uint64_t replica);

struct FunctionalSamples
{
    std::vector<double> lifetimes;
    std::vector<double> areas;
    std::int64_t horizon_exceeded = 0;
};

//! Samples of (sigma_0, integral of Y up to sigma_0); needs alpha < 1.
FunctionalSamples lifetime_and_area(DiffusionParams const& params,
                                    std::int64_t replicas,
                                    RandomField const& field,
                                    unsigned workers = 1);

enum class ConvergenceKind
{
    Z,             //!< alpha = -delta
    ConditionedW,  //!< alpha = 2 - delta
    VStopped,      //!< alpha = 1 - delta, stopped at epsilon * n
};

struct ConvergenceOptions
{
    double h = 1e-4;
    double horizon = 1e3;
    double epsilon = 0.25;          //!< stopping level for VStopped
    std::int64_t escape_factor = 64;  //!< rejection escape level / n for W
    std::int64_t max_restarts = 1'000'000;
    unsigned workers = 1;
};

struct ConvergenceReport
{
    double alpha = 0;
    double ks_lifetime = 0;
    double ks_progeny = 0;
    FunctionalSamples branching;  //!< sigma / n and progeny / n^2
    FunctionalSamples diffusion;
    std::int64_t rejected = 0;    //!< W attempts that did not die
};

/*!
 * KS distances between rescaled branching functionals started at n and the
 * matching diffusion functionals started at 1.
 */
ConvergenceReport convergence_check(EnvironmentModel const& model,
                                    ConvergenceKind kind, std::int64_t n,
                                    std::int64_t replicas,
                                    RandomField const& field,
                                    ConvergenceOptions const& options = {});

}  // namespace cookie
