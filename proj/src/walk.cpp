#include "cookie/walk.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

#include "cookie/parallel.hpp"
#include "cookie/stats.hpp"

namespace cookie
{
namespace
{
using boost::multiprecision::cpp_int;

//! Best rational approximation p/q of x with q <= max_den, by continued fractions.
bool as_rational(double x, std::int64_t max_den, std::int64_t& p, std::int64_t& q)
{
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int iter = 0; iter < 64; ++iter)
    {
        double a = std::floor(r);
        auto ai = static_cast<std::int64_t>(a);
        std::int64_t h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_den)
            break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) < 1e-12)
        {
            p = h1;
            q = k1;
            return true;
        }
        double frac = r - a;
        if (frac < 1e-15)
            break;
        r = 1 / frac;
    }
    return false;
}

cpp_int ipow(std::int64_t base, std::int64_t e)
{
    cpp_int result = 1, b = base;
    while (e > 0)
    {
        if (e & 1)
            result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}
}  // namespace

PowerFloor floor_power(std::int64_t n, double gamma)
{
    if (n < 1)
        throw std::invalid_argument("floor_power needs n >= 1");
    if (n == 1)
        return {1, true};

    long double approx = std::pow(static_cast<long double>(n),
                                  static_cast<long double>(gamma));
    std::int64_t p = 0, q = 1;
    if (gamma > 0 && as_rational(gamma, 1000, p, q))
    {
        cpp_int target = ipow(n, p);
        auto m = static_cast<std::int64_t>(std::floor(approx));
        while (m > 0 && ipow(m, q) > target)
            --m;
        while (ipow(m + 1, q) <= target)
            ++m;
        return {m, ipow(m, q) == target};
    }

    // Irrational exponent: n^gamma is never an integer, but a value within a
    // few ulps of one is snapped so the floor is stable across libm versions.
    long double nearest = std::round(approx);
    long double ulp = std::nextafter(approx, approx * 2) - approx;
    if (std::abs(approx - nearest) <= 4 * ulp)
        return {static_cast<std::int64_t>(nearest), false};
    return {static_cast<std::int64_t>(std::floor(approx)), false};
}

std::int64_t WalkRecord::hitting_time(std::int64_t level) const noexcept
{
    if (level < 0 || level >= std::ssize(hitting_times))
        return -1;
    return hitting_times[static_cast<std::size_t>(level)];
}

Walker::Walker(EnvironmentModel const& model, RandomField const& field)
    : model_(model), field_(field)
{
}

std::int64_t Walker::step()
{
    std::int64_t x = rec_.position;
    auto& c = rec_.counts[x];
    auto visit = static_cast<std::uint64_t>(c.up + c.down + 1);

    double p = 0.5;
    if (visit <= model_.cookies())
    {
        if (c.component == 0)
            c.component = static_cast<std::int32_t>(model_.component_at(x, field_)) + 1;
        p = model_.stacks()[static_cast<std::size_t>(c.component - 1)].at(visit);
    }

    if (field_.bernoulli_at(x, visit, p))
    {
        ++c.up;
        ++x;
    }
    else
    {
        ++c.down;
        --x;
    }
    ++rec_.steps;
    rec_.position = x;
    if (x > rec_.max_site)
    {
        rec_.max_site = x;
        rec_.hitting_times.push_back(rec_.steps);
    }
    else if (x < rec_.min_site)
    {
        rec_.min_site = x;
    }
    if (x == 0)
        rec_.return_times.push_back(rec_.steps);
    return x;
}

WalkRecord run_to_hitting(EnvironmentModel const& model,
                          RandomField const& field, std::int64_t target,
                          std::int64_t budget)
{
    if (target < 1)
        throw std::invalid_argument("hitting target must be positive");
    Walker w(model, field);
    while (w.record().max_site < target)
    {
        if (w.record().steps >= budget)
        {
            w.record().status = WalkStatus::budget_exceeded;
            break;
        }
        w.step();
    }
    return std::move(w.record());
}

WalkRecord run_fixed_steps(EnvironmentModel const& model,
                           RandomField const& field, std::int64_t n)
{
    if (n < 0)
        throw std::invalid_argument("step count must be nonnegative");
    Walker w(model, field);
    for (std::int64_t i = 0; i < n; ++i)
        w.step();
    return std::move(w.record());
}

WalkRecord returns_and_excursions(EnvironmentModel const& model,
                                  RandomField const& field, std::int64_t k,
                                  std::int64_t budget)
{
    if (k < 1)
        throw std::invalid_argument("return count must be positive");
    Walker w(model, field);
    while (std::ssize(w.record().return_times) < k)
    {
        if (w.record().steps >= budget)
        {
            w.record().status = WalkStatus::budget_exceeded;
            break;
        }
        w.step();
    }
    return std::move(w.record());
}

std::int64_t right_excursion_count(EnvironmentModel const& model,
                                   RandomField const& field, std::int64_t k)
{
    auto const& stack = model.sample_stack(0, field);
    std::int64_t r = 0;
    for (std::int64_t j = 1; j <= k; ++j)
    {
        auto visit = static_cast<std::uint64_t>(j);
        r += field.bernoulli_at(0, visit, stack.at(visit)) ? 1 : 0;
    }
    return r;
}

SlowdownOutcome slowdown_replica(EnvironmentModel const& model,
                                 RandomField const& field, std::int64_t n,
                                 PowerFloor level, SlowdownMode mode)
{
    SlowdownOutcome out;
    out.seed = field.seed();
    Walker w(model, field);
    auto const& rec = w.record();
    bool hit = level.value <= 0;
    std::int64_t t_value = hit ? 0 : n + 1;
    for (std::int64_t i = 0; i < n; ++i)
    {
        w.step();
        if (!hit && rec.max_site >= level.value)
        {
            hit = true;
            t_value = rec.steps;
            if (mode == SlowdownMode::t_only)
                break;
        }
    }
    out.event_t = !hit;
    out.t_value = t_value;
    out.x_n = rec.position;
    out.ran_full = rec.steps == n;
    if (out.ran_full)
    {
        out.event_x = rec.position < level.value
                      || (rec.position == level.value && !level.exact);
    }
    return out;
}

ProportionEstimate make_proportion(std::int64_t successes, std::int64_t trials,
                                   double z)
{
    ProportionEstimate e;
    e.successes = successes;
    e.trials = trials;
    if (trials <= 0)
        return e;
    e.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
    e.se = std::sqrt(e.p_hat * (1 - e.p_hat) / static_cast<double>(trials));
    auto ci = wilson_interval(successes, trials, z);
    e.lo = ci.lo;
    e.hi = ci.hi;
    return e;
}

SlowdownEstimate slowdown_event_mc(EnvironmentModel const& model, double gamma,
                                   std::int64_t n, std::int64_t replicas,
                                   RandomField const& field,
                                   SlowdownOptions const& options)
{
    if (!(gamma > 0 && gamma < 1))
        throw std::invalid_argument("gamma must lie in (0,1)");
    if (n < 1 || replicas < 1)
        throw std::invalid_argument("n and replicas must be positive");

    SlowdownEstimate est;
    est.n = n;
    est.gamma = gamma;
    est.level = floor_power(n, gamma);
    est.replicas = replicas;

    std::vector<SlowdownOutcome> outcomes(static_cast<std::size_t>(replicas));
    parallel_for(outcomes.size(), options.workers, [&](std::size_t r) {
        outcomes[r] = slowdown_replica(
            model, field.replica(options.replica_offset + r), n, est.level,
            options.mode);
    });

    std::int64_t t_count = 0, x_count = 0, x_trials = 0;
    for (auto const& o : outcomes)
    {
        t_count += o.event_t;
        if (o.ran_full)
        {
            ++x_trials;
            x_count += o.event_x;
            if (o.event_t && o.x_n >= est.level.value)
                ++est.contradictions;
        }
    }
    est.t_event = make_proportion(t_count, replicas);
    if (options.mode == SlowdownMode::both)
        est.x_event = make_proportion(x_count, x_trials);
    if (options.keep_outcomes)
        est.outcomes = std::move(outcomes);
    return est;
}

}  // namespace cookie
