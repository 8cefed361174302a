#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cookie
{

inline constexpr double kZ95 = 1.959963984540054;

struct Interval
{
    double lo = 0;
    double hi = 0;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    bool overlaps(Interval const& o) const noexcept
    {
        return lo <= o.hi && o.lo <= hi;
    }
};

//! Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials,
                         double z = kZ95);

//! One point of a tail curve: p_hat estimated at scale n.
struct TailPoint
{
    double n = 0;
    double p_hat = 0;
    double se = 0;
    std::int64_t replicas = 0;
    std::int64_t successes = 0;
    Interval ci;  //!< Wilson interval
};

struct SlopeFit
{
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
    Interval ci;
    std::size_t used = 0;
    std::size_t dropped = 0;  //!< points with p_hat = 0
};

/*!
 * Variance-weighted least squares of log p_hat on log n.
 *
 * Weights come from the delta method, var(log p_hat) = (se / p_hat)^2. Points
 * with p_hat = 0 are dropped and counted. If any surviving point has se = 0
 * the fit is unweighted with a residual-based standard error. Throws
 * std::invalid_argument when fewer than two points survive.
 */
SlopeFit loglog_slope(std::span<TailPoint const> points, double z = kZ95);

//! sup |F_a - F_b| between two empirical distributions.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

//! sup |F_n - F| against a continuous reference CDF.
double ks_one_sample(std::vector<double> sample,
                     std::function<double(double)> const& cdf);

//! Upper tail probability of a chi-square statistic.
double chi_square_sf(double statistic, double dof);

//! Pearson chi-square of observed counts against expected probabilities.
//! Cells with expected count below `min_expected` are pooled into their
//! neighbour. Returns the p-value.
double chi_square_gof(std::span<std::int64_t const> observed,
                      std::span<double const> probs, double min_expected = 5);

//! Total variation distance between two probability vectors (zero-padded).
double total_variation(std::span<double const> p, std::span<double const> q);

//! Empirical law of integer samples as a probability vector over 0..max.
std::vector<double> empirical_pmf(std::span<std::int64_t const> samples);

struct MeanEstimate
{
    double mean = 0;
    double se = 0;
    std::size_t count = 0;
};

MeanEstimate mean_and_se(std::span<double const> xs);

//! Pearson correlation of paired samples.
double correlation(std::span<double const> x, std::span<double const> y);

//! Lag-1 autocorrelation.
double lag1_autocorrelation(std::span<double const> x);

}  // namespace cookie
