#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cookie/branching.hpp"
#include "cookie/environment.hpp"
#include "cookie/field.hpp"
#include "cookie/stats.hpp"
#include "cookie/walk.hpp"

namespace cookie
{

//! A fitted tail curve with its theoretical exponent and verdict.
struct TailEstimate
{
    std::string label;
    std::vector<TailPoint> points;  //!< sorted by n, zero-success points included
    SlopeFit fit;
    bool fitted = false;
    double target = 0;
    double tolerance = 0;
    bool verdict = false;           //!< |slope - target| <= tolerance
    //! n^{-target} p_hat per point; prefactor diagnostics only.
    std::vector<double> prefactors;
};

/*!
 * Fit the points and fill the verdict. Fewer than two positive points give an
 * unfitted estimate with verdict false.
 */
TailEstimate make_tail_estimate(std::string label, std::vector<TailPoint> points,
                                double target, double tolerance);

enum class SlowdownEvent
{
    T,  //!< T_floor(n^gamma) > n
    X,  //!< X_n < n^gamma
};

/*!
 * Exponent of the slowdown probability.
 *
 * For 1/2 < gamma < min(1, delta/2) both events decay like n^{gamma - delta/2}.
 * For gamma <= 1/2 the T event decays like n^{2 gamma - (1 + delta)/2} and the
 * X event like n^{(1 - delta)/2}. Throws std::invalid_argument outside these
 * ranges or for delta <= 1.
 */
double slowdown_target(SlowdownEvent event, double delta, double gamma);

struct ExperimentConfig
{
    double gamma = 0.3;
    std::vector<std::int64_t> n_grid;
    //! One count per grid point, or one count for all. Empty asks for pilot
    //! sizing at the top n.
    std::vector<std::int64_t> replicas;
    double tolerance = 0.1;
    unsigned workers = 1;
    std::int64_t min_successes = 200;
    std::int64_t pilot_replicas = 20'000;
    std::int64_t max_replicas = 20'000'000;
    //! Check the config; throws std::invalid_argument.
    void check() const;
    std::int64_t replicas_at(std::size_t index) const;
};

//! Dyadic grid 2^lo .. 2^hi.
std::vector<std::int64_t> dyadic_grid(int lo, int hi);

struct SlowdownResult
{
    SlowdownEvent event = SlowdownEvent::T;
    TailEstimate tail;
    std::vector<SlowdownEstimate> estimates;  //!< one per grid point
    std::int64_t contradictions = 0;
    std::int64_t pilot_successes = -1;        //!< -1 when no pilot ran
    std::int64_t pilot_trials = 0;
};

/*!
 * Slowdown tail over the grid. The model must satisfy the non-degeneracy
 * condition and delta > 1. Grid point i draws replicas field.replica(i << 40),
 * field.replica((i << 40) + 1), ...; the pilot uses a separate block.
 */
SlowdownResult slowdown_experiment(EnvironmentModel const& model,
                                   SlowdownEvent event,
                                   ExperimentConfig const& config,
                                   RandomField const& field);

struct RegenerationResult
{
    TailEstimate r1;  //!< target -delta
    TailEstimate s1;  //!< target -delta / 2
    MeanEstimate r_bar;
    double lag1 = 0;  //!< lag-1 autocorrelation of r_1
    std::int64_t cycles = 0;
    std::int64_t budget_exceeded = 0;
    std::int64_t max_r1 = 0;
};

RegenerationResult regeneration_exponents(
    EnvironmentModel const& model, RandomField const& field, std::int64_t cycles,
    std::vector<double> const& r_thresholds, std::vector<double> const& s_thresholds,
    double r_tolerance = 0.2, double s_tolerance = 0.15, unsigned workers = 1);

struct HittingResult
{
    HittingProfile profile;
    //! log P(u) against log 2^{u - m} for the requested offsets.
    TailEstimate tail;
};

HittingResult hitting_profile_experiment(EnvironmentModel const& model,
                                         RandomField const& field, std::int64_t m,
                                         std::int64_t ell, int offset_lo,
                                         int offset_hi, std::int64_t replicas,
                                         double tolerance = 0.3,
                                         unsigned workers = 1);

struct SpeedEstimate
{
    std::int64_t n = 0;
    MeanEstimate speed;  //!< X_n / n over replicas
    Interval ci;
};

//! Long-run X_n / n; replica r uses field.replica(r) of the "speed" stream.
SpeedEstimate estimate_speed(EnvironmentModel const& model,
                             RandomField const& field, std::int64_t n,
                             std::int64_t replicas, unsigned workers = 1);

struct LdResult
{
    SpeedEstimate speed;
    double v = 0;
    TailEstimate tail;  //!< P(X_n < v n), target 1 - delta / 2
};

/*!
 * Sub-ballistic slowdown P(X_n < v n) for delta > 2. With v <= 0 the level is
 * half the estimated speed. Throws std::invalid_argument for delta <= 2 or when
 * v is not at least 3 standard errors below the estimated speed.
 */
LdResult ld_slowdown_experiment(EnvironmentModel const& model,
                                RandomField const& field, double v,
                                ExperimentConfig const& config,
                                std::int64_t speed_n, std::int64_t speed_replicas);

}  // namespace cookie
