#include "cookie/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

namespace cookie
{

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z)
{
    if (trials < 1 || successes < 0 || successes > trials)
        throw std::invalid_argument("wilson_interval needs 0 <= k <= n, n >= 1");
    double n = static_cast<double>(trials);
    double p = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double centre = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    if (successes == 0)
        ci.lo = 0;
    if (successes == trials)
        ci.hi = 1;
    return ci;
}

SlopeFit loglog_slope(std::span<TailPoint const> points, double z)
{
    SlopeFit fit;
    std::vector<double> xs, ys, ws;
    bool weighted = true;
    for (auto const& pt : points)
    {
        if (!(pt.p_hat > 0))
        {
            ++fit.dropped;
            continue;
        }
        if (!(pt.n > 0))
            throw std::invalid_argument("loglog_slope needs n > 0");
        xs.push_back(std::log(pt.n));
        ys.push_back(std::log(pt.p_hat));
        double rel = pt.se / pt.p_hat;
        if (!(rel > 0))
            weighted = false;
        ws.push_back(rel > 0 ? 1 / (rel * rel) : 1.0);
    }
    fit.used = xs.size();
    if (fit.used < 2)
        throw std::invalid_argument("loglog_slope needs two points with p_hat > 0");
    if (!weighted)
        std::fill(ws.begin(), ws.end(), 1.0);

    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
    }
    double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        sxx += ws[i] * (xs[i] - xbar) * (xs[i] - xbar);
        sxy += ws[i] * (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (!(sxx > 0))
        throw std::invalid_argument("loglog_slope needs distinct n values");
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;

    if (weighted)
    {
        fit.slope_se = std::sqrt(1 / sxx);
    }
    else if (xs.size() > 2)
    {
        double rss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            double r = ys[i] - fit.intercept - fit.slope * xs[i];
            rss += r * r;
        }
        fit.slope_se = std::sqrt(rss / static_cast<double>(xs.size() - 2) / sxx);
    }
    fit.ci = {fit.slope - z * fit.slope_se, fit.slope + z * fit.slope_se};
    return fit;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na
                                 - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_one_sample(std::vector<double> sample,
                     std::function<double(double)> const& cdf)
{
    if (sample.empty())
        throw std::invalid_argument("ks_one_sample needs a nonempty sample");
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i)
    {
        double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f,
                      f - static_cast<double>(i) / n});
    }
    return d;
}

double chi_square_sf(double statistic, double dof)
{
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, std::max(0.0, statistic)));
}

double chi_square_gof(std::span<std::int64_t const> observed,
                      std::span<double const> probs, double min_expected)
{
    if (observed.size() != probs.size() || observed.empty())
        throw std::invalid_argument("chi_square_gof needs matching cells");
    double total = 0;
    for (auto o : observed)
        total += static_cast<double>(o);

    // Pool cells left to right until each pooled cell is large enough; the
    // remainder is folded into the last pooled cell.
    std::vector<double> obs, expct;
    double o_acc = 0, e_acc = 0;
    for (std::size_t i = 0; i < observed.size(); ++i)
    {
        o_acc += static_cast<double>(observed[i]);
        e_acc += probs[i] * total;
        if (e_acc >= min_expected)
        {
            obs.push_back(o_acc);
            expct.push_back(e_acc);
            o_acc = e_acc = 0;
        }
    }
    if (!obs.empty())
    {
        obs.back() += o_acc;
        expct.back() += e_acc;
    }
    if (obs.size() < 2)
        return 1.0;
    double stat = 0;
    for (std::size_t i = 0; i < obs.size(); ++i)
        stat += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
    return chi_square_sf(stat, static_cast<double>(obs.size() - 1));
}

double total_variation(std::span<double const> p, std::span<double const> q)
{
    std::size_t n = std::max(p.size(), q.size());
    double d = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double a = i < p.size() ? p[i] : 0;
        double b = i < q.size() ? q[i] : 0;
        d += std::abs(a - b);
    }
    return d / 2;
}

std::vector<double> empirical_pmf(std::span<std::int64_t const> samples)
{
    std::int64_t hi = 0;
    for (auto s : samples)
    {
        if (s < 0)
            throw std::invalid_argument("empirical_pmf needs nonnegative samples");
        hi = std::max(hi, s);
    }
    std::vector<double> pmf(static_cast<std::size_t>(hi) + 1, 0.0);
    for (auto s : samples)
        pmf[static_cast<std::size_t>(s)] += 1;
    for (auto& v : pmf)
        v /= static_cast<double>(samples.size());
    return pmf;
}

MeanEstimate mean_and_se(std::span<double const> xs)
{
    MeanEstimate m;
    m.count = xs.size();
    if (xs.empty())
        return m;
    double sum = 0;
    for (double x : xs)
        sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1)
    {
        double ss = 0;
        for (double x : xs)
            ss += (x - m.mean) * (x - m.mean);
        m.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)
                         / static_cast<double>(xs.size()));
    }
    return m;
}

double correlation(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("correlation needs paired samples");
    auto mx = mean_and_se(x).mean, my = mean_and_se(y).mean;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double lag1_autocorrelation(std::span<double const> x)
{
    if (x.size() < 3)
        throw std::invalid_argument("lag1_autocorrelation needs 3 samples");
    return correlation(x.first(x.size() - 1), x.subspan(1));
}

}  // namespace cookie
