#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cookie/field.hpp"
#include "cookie/stats.hpp"
#include "cookie/walk.hpp"

namespace cookie
{

//! Exact Pareto law: P(xi > t) = (t / t0)^{-alpha} for t >= t0.
struct ParetoSpec
{
    double alpha = 1;
    double t0 = 1;

    bool has_mean() const noexcept { return alpha > 1; }
    //! alpha t0 / (alpha - 1); NaN when alpha <= 1.
    double mean() const noexcept;
    //! C_0 = t0^alpha.
    double c0() const noexcept;
    //! Throws std::invalid_argument unless alpha > 0 and t0 > 0.
    void check() const;
};

//! Inverse CDF at u in (0, 1]; u = 1 gives t0.
double pareto_quantile(ParetoSpec const& spec, double u) noexcept;

//! Sample at (site, index) of the "heavytail" stream.
double sample_pareto(ParetoSpec const& spec, RandomField const& field,
                     std::int64_t site, std::uint64_t index);

struct SumTailPoint
{
    std::int64_t n = 0;
    std::int64_t terms = 0;     //!< n for part 1, floor(n^gamma) for part 2
    double threshold = 0;       //!< x n
    ProportionEstimate estimate;
    double theory = 0;
    double ratio = 0;           //!< p_hat / theory
};

struct SumTailResult
{
    ParetoSpec spec;
    int part = 1;
    double gamma = 1;
    double x = 0;
    double target_slope = 0;    //!< 1 - alpha, or gamma - alpha
    std::vector<SumTailPoint> points;
    std::optional<SlopeFit> fit;  //!< empty with fewer than two positive points
};

/*!
 * P(xi_1 + ... + xi_N > x n) by Monte Carlo.
 *
 * Part 1 sums N = n terms and compares with C_0 (x - mean)^{-alpha} n^{1-alpha};
 * it needs alpha > 1 and x > mean. Part 2 sums N = floor(n^gamma) terms and
 * compares with C_0 x^{-alpha} n^{gamma-alpha}; it needs 0 < gamma < min(alpha, 1)
 * and x > 0. Invalid combinations throw std::invalid_argument.
 *
 * Replica r at grid index i reads its own engine, so results do not depend on
 * the worker count.
 */
SumTailResult sum_tail_experiment(ParetoSpec const& spec, int part,
                                  std::vector<std::int64_t> const& n_grid,
                                  double x, double gamma, std::int64_t replicas,
                                  RandomField const& field, unsigned workers = 1);

}  // namespace cookie
