#include "cookie/kernel.hpp"

#include <algorithm>
#include <boost/math/distributions/negative_binomial.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace cookie
{
namespace
{
//! NegBin(r, 1/2) pmf on 0..len-1, by the log-space ratio recurrence.
std::vector<double> fair_negbin_pmf(std::int64_t r, std::int64_t len)
{
    std::vector<double> pmf(static_cast<std::size_t>(std::max<std::int64_t>(len, 0)));
    double lp = -static_cast<double>(r) * std::log(2.0);
    for (std::int64_t x = 0; x < len; ++x)
    {
        pmf[static_cast<std::size_t>(x)] = std::exp(lp);
        lp += std::log(static_cast<double>(x + r) / static_cast<double>(x + 1))
              - std::log(2.0);
    }
    return pmf;
}

//! P(NegBin(r, 1/2) > t).
double fair_negbin_tail(std::int64_t r, std::int64_t t)
{
    if (t < 0)
        return 1.0;
    boost::math::negative_binomial_distribution<double> dist(
        static_cast<double>(r), 0.5);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(t)));
}

KernelDistribution kernel_at(EnvironmentModel const& model, ProcessKind kind,
                             std::int64_t k, std::int64_t trunc)
{
    KernelDistribution out;
    out.mass.assign(static_cast<std::size_t>(trunc) + 1, 0.0);
    auto rule = offspring_rule(kind, k);
    auto cookies = static_cast<std::int64_t>(model.cookies());

    if (rule.needed == 0)
    {
        out.mass[0] = 1.0;
        return out;
    }

    // Running states after the cookie trials, indexed by [stops][count].
    auto dim = static_cast<std::size_t>(cookies + 1);
    std::vector<double> running(dim * dim, 0.0);

    for (std::size_t i = 0; i < model.components(); ++i)
    {
        auto const& stack = model.stacks()[i];
        std::vector<double> cur(dim * dim, 0.0), next(dim * dim, 0.0);
        cur[0] = model.weights()[i];
        for (std::int64_t j = 1; j <= cookies; ++j)
        {
            double p = stack.at(static_cast<std::uint64_t>(j));
            double q_stop = rule.stop_on_success ? p : 1 - p;
            std::fill(next.begin(), next.end(), 0.0);
            for (std::int64_t s = 0; s < std::min(rule.needed, j); ++s)
            {
                for (std::int64_t c = 0; c + s < j; ++c)
                {
                    double w = cur[static_cast<std::size_t>(s) * dim
                                   + static_cast<std::size_t>(c)];
                    if (w == 0)
                        continue;
                    if (s + 1 == rule.needed)
                    {
                        if (c <= trunc)
                            out.mass[static_cast<std::size_t>(c)] += w * q_stop;
                        else
                            out.lost_mass += w * q_stop;
                    }
                    else
                    {
                        next[static_cast<std::size_t>(s + 1) * dim
                             + static_cast<std::size_t>(c)] += w * q_stop;
                    }
                    next[static_cast<std::size_t>(s) * dim
                         + static_cast<std::size_t>(c + 1)] += w * (1 - q_stop);
                }
            }
            std::swap(cur, next);
        }
        for (std::size_t idx = 0; idx < cur.size(); ++idx)
            running[idx] += cur[idx];
    }

    // Fair continuation: r = needed - stops outcomes still required.
    for (std::int64_t s = 0; s < std::min(rule.needed, cookies + 1); ++s)
    {
        std::vector<double> pmf;
        for (std::int64_t c = 0; c <= cookies; ++c)
        {
            double w = running[static_cast<std::size_t>(s) * dim
                               + static_cast<std::size_t>(c)];
            if (w == 0)
                continue;
            std::int64_t r = rule.needed - s;
            if (pmf.empty())
                pmf = fair_negbin_pmf(r, trunc + 1);
            for (std::int64_t m = c; m <= trunc; ++m)
                out.mass[static_cast<std::size_t>(m)]
                    += w * pmf[static_cast<std::size_t>(m - c)];
            out.lost_mass += w * fair_negbin_tail(r, trunc - c);
        }
    }
    return out;
}
}  // namespace

double KernelDistribution::total() const noexcept
{
    double t = 0;
    for (double m : mass)
        t += m;
    return t;
}

double KernelDistribution::mean() const noexcept
{
    double t = 0;
    for (std::size_t i = 0; i < mass.size(); ++i)
        t += static_cast<double>(i) * mass[i];
    return t;
}

KernelDistribution exact_kernel(EnvironmentModel const& model, ProcessKind kind,
                                std::int64_t k, KernelOptions const& options)
{
    if (k < 0)
        throw std::invalid_argument("exact_kernel needs k >= 0");
    std::int64_t trunc = options.trunc > 0
                             ? options.trunc
                             : std::max<std::int64_t>(
                                   64, 4 * (k + 1)
                                           + static_cast<std::int64_t>(model.cookies())
                                           + 64);
    for (;;)
    {
        auto dist = kernel_at(model, kind, k, trunc);
        if (!options.auto_grow || dist.lost_mass < options.max_lost)
            return dist;
        if (trunc >= options.trunc_cap)
            throw std::runtime_error("exact_kernel: truncation cap reached");
        trunc = std::min(trunc * 2, options.trunc_cap);
    }
}

KernelCache::KernelCache(EnvironmentModel const& model, ProcessKind kind,
                         std::int64_t trunc)
    : model_(model), kind_(kind), trunc_(trunc)
{
}

std::shared_ptr<KernelDistribution const> KernelCache::get(std::int64_t k)
{
    {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(k);
        if (it != cache_.end())
            return it->second;
    }
    auto dist = std::make_shared<KernelDistribution const>(
        kernel_at(model_, kind_, k, trunc_));
    std::unique_lock lock(mutex_);
    return cache_.emplace(k, std::move(dist)).first->second;
}

KernelDistribution n_step_distribution(EnvironmentModel const& model,
                                       ProcessKind kind, std::int64_t start,
                                       std::int64_t n, NStepOptions const& options)
{
    if (start < 0 || n < 0)
        throw std::invalid_argument("n_step_distribution needs start, n >= 0");
    std::int64_t trunc = options.trunc > 0
                             ? options.trunc
                             : std::max<std::int64_t>(64, 2 * start + 32);
    while (trunc < start)
        trunc *= 2;

    for (;;)
    {
        KernelCache cache(model, kind, trunc);
        KernelDistribution dist;
        dist.mass.assign(static_cast<std::size_t>(trunc) + 1, 0.0);
        dist.mass[static_cast<std::size_t>(start)] = 1.0;
        for (std::int64_t step = 0; step < n; ++step)
        {
            std::vector<double> next(dist.mass.size(), 0.0);
            for (std::int64_t k = 0; k <= trunc; ++k)
            {
                double w = dist.mass[static_cast<std::size_t>(k)];
                if (w == 0)
                    continue;
                auto kern = cache.get(k);
                for (std::size_t m = 0; m < next.size(); ++m)
                    next[m] += w * kern->mass[m];
                dist.lost_mass += w * kern->lost_mass;
            }
            dist.mass = std::move(next);
        }
        if (dist.lost_mass < options.max_lost)
            return dist;
        if (trunc >= options.trunc_cap)
            throw std::runtime_error("n_step_distribution: lost mass exceeds tolerance");
        trunc = std::min(trunc * 2, options.trunc_cap);
    }
}

double phi_iterate(std::int64_t k, double s)
{
    auto kd = static_cast<double>(k);
    return (kd - (kd - 1) * s) / (kd + 1 - kd * s);
}

double vngf_rhs(std::int64_t cookies, std::int64_t v, std::int64_t n, double s)
{
    auto nd = static_cast<double>(n);
    double a = nd - (nd - 1) * s;
    double b = nd + 1 - nd * s;
    return std::pow(s, static_cast<double>(cookies))
           * std::pow(1 / a, static_cast<double>(cookies + 1))
           * std::pow(a / b, static_cast<double>(v + 1));
}

VngfCheck vngf_bound_check(EnvironmentModel const& model, std::int64_t v,
                           std::int64_t n, double s)
{
    if (n < 1 || v < 0)
        throw std::invalid_argument("vngf_bound_check needs n >= 1, v >= 0");
    double s_max = 1 + 1 / static_cast<double>(n);
    if (!(s > 0 && s < s_max))
        throw std::invalid_argument("vngf_bound_check needs 0 < s < 1 + 1/n");
    auto cookies = static_cast<std::int64_t>(model.cookies());

    VngfCheck out;
    out.rhs = vngf_rhs(cookies, v, n, s);
    NStepOptions opts;
    for (;;)
    {
        auto dist = n_step_distribution(model, ProcessKind::V, v, n, opts);
        out.trunc = dist.trunc();
        out.lhs = 0;
        for (std::size_t m = 0; m < dist.mass.size(); ++m)
            out.lhs += dist.mass[m] * std::pow(s, static_cast<double>(m));  // 0^0 = 1

        auto edge = static_cast<double>(out.trunc + 1);
        if (s <= 1)
        {
            out.tail_bound = dist.lost_mass * std::pow(s, edge);
        }
        else
        {
            out.tail_bound = std::numeric_limits<double>::infinity();
            for (double f : {0.25, 0.5, 0.75})
            {
                double t = s + (s_max - s) * f;
                out.tail_bound = std::min(
                    out.tail_bound,
                    std::pow(s / t, edge) * vngf_rhs(cookies, v, n, t));
            }
        }
        double slack = 1e-12 * out.rhs;
        out.holds = out.lhs + out.tail_bound <= out.rhs + slack;
        if (out.holds || out.lhs > out.rhs + slack)
            return out;
        if (out.trunc >= opts.trunc_cap)
            throw std::runtime_error("vngf_bound_check: truncated mass too large to certify");
        opts.trunc = std::min<std::int64_t>(out.trunc * 2, opts.trunc_cap);
    }
}

}  // namespace cookie
