#include "cookie/branching.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cookie/parallel.hpp"

namespace cookie
{
namespace
{
CookieStack const& draw_stack(EnvironmentModel const& model, CounterEngine& engine)
{
    if (model.is_deterministic())
        return model.stacks().front();
    return model.stacks()[model.component_for(engine.uniform())];
}

std::int64_t fast_step(EnvironmentModel const& model, ProcessKind kind,
                       std::int64_t current, CounterEngine& engine)
{
    auto rule = offspring_rule(kind, current);
    if (rule.needed == 0)
        return 0;
    return offspring_fast(draw_stack(model, engine), rule, engine);
}

IdentityCheck mismatch(std::int64_t site, std::string what)
{
    return IdentityCheck{false, site, std::move(what)};
}
}  // namespace

char const* to_string(ProcessKind kind) noexcept
{
    switch (kind)
    {
        case ProcessKind::W: return "W";
        case ProcessKind::Z: return "Z";
        case ProcessKind::V: return "V";
        case ProcessKind::ZAfterV: return "Z_after_V";
    }
    return "?";
}

OffspringRule offspring_rule(ProcessKind kind, std::int64_t current) noexcept
{
    switch (kind)
    {
        case ProcessKind::W: return {false, current};
        case ProcessKind::V: return {true, current + 1};
        case ProcessKind::Z:
        case ProcessKind::ZAfterV: return {true, current};
    }
    return {};
}

std::int64_t offspring_from_bits(CookieStack const& stack,
                                 RandomField const& field, std::int64_t site,
                                 OffspringRule rule)
{
    std::int64_t stops = 0, count = 0;
    for (std::uint64_t j = 1; stops < rule.needed; ++j)
    {
        bool success = field.bernoulli_at(site, j, stack.at(j));
        if (success == rule.stop_on_success)
            ++stops;
        else
            ++count;
    }
    return count;
}

std::int64_t fair_negative_binomial(std::int64_t r, CounterEngine& engine)
{
    if (r <= 0)
        return 0;
    if (r <= 64)
    {
        // Each word is 64 fair trials; trailing zeros are failures.
        std::int64_t failures = 0;
        for (std::int64_t k = 0; k < r; ++k)
        {
            for (;;)
            {
                auto w = engine();
                if (w != 0)
                {
                    failures += std::countr_zero(w);
                    break;
                }
                failures += 64;
            }
        }
        return failures;
    }
    std::negative_binomial_distribution<std::int64_t> dist(r, 0.5);
    return dist(engine);
}

std::int64_t offspring_fast(CookieStack const& stack, OffspringRule rule,
                            CounterEngine& engine)
{
    std::int64_t stops = 0, count = 0;
    for (std::uint64_t j = 1; j <= stack.size() && stops < rule.needed; ++j)
    {
        bool success = engine.bernoulli(stack.at(j));
        if (success == rule.stop_on_success)
            ++stops;
        else
            ++count;
    }
    // Beyond the cookies the trials are fair, so the count of either outcome
    // before the remaining stops is NegBin(remaining, 1/2).
    return count + fair_negative_binomial(rule.needed - stops, engine);
}

std::int64_t BranchingTrace::sigma(std::int64_t level) const noexcept
{
    for (std::size_t i = 0; i < generations.size(); ++i)
    {
        if (generations[i] <= level)
            return static_cast<std::int64_t>(i);
    }
    return -1;
}

std::int64_t BranchingTrace::tau(std::int64_t level) const noexcept
{
    for (std::size_t i = 0; i < generations.size(); ++i)
    {
        if (generations[i] >= level)
            return static_cast<std::int64_t>(i);
    }
    return -1;
}

std::int64_t BranchingTrace::progeny() const noexcept
{
    std::int64_t s = 0;
    for (auto g : generations)
        s += g;
    return s;
}

OffspringSampler::OffspringSampler(EnvironmentModel const& model,
                                   RandomField const& field, Sampling sampling)
    : model_(model), field_(field), sampling_(sampling),
      engine_(field.stream("branch").engine(0, 0))
{
}

std::int64_t OffspringSampler::next(ProcessKind kind, std::int64_t current,
                                    std::int64_t site)
{
    if (sampling_ == Sampling::fast)
        return fast_step(model_, kind, current, engine_);
    auto rule = offspring_rule(kind, current);
    if (rule.needed == 0)
        return 0;
    return offspring_from_bits(model_.sample_stack(site, field_), field_, site,
                               rule);
}

namespace
{
BranchingTrace run_absorbing(ProcessKind kind, EnvironmentModel const& model,
                             RandomField const& field, std::int64_t start,
                             std::int64_t budget, Sampling sampling, int direction)
{
    if (start < 0)
        throw std::invalid_argument("initial population must be nonnegative");
    BranchingTrace t;
    t.kind = kind;
    t.generations.push_back(start);
    OffspringSampler sampler(model, field, sampling);
    std::int64_t current = start;
    for (std::int64_t i = 1; current > 0; ++i)
    {
        if (i > budget)
        {
            t.budget_exceeded = true;
            break;
        }
        current = sampler.next(kind, current, direction * i);
        t.generations.push_back(current);
    }
    return t;
}
}  // namespace

BranchingTrace run_W(EnvironmentModel const& model, RandomField const& field,
                     std::int64_t w0, std::int64_t budget, Sampling sampling)
{
    return run_absorbing(ProcessKind::W, model, field, w0, budget, sampling, 1);
}

BranchingTrace run_Z(EnvironmentModel const& model, RandomField const& field,
                     std::int64_t z0, std::int64_t budget, Sampling sampling)
{
    return run_absorbing(ProcessKind::Z, model, field, z0, budget, sampling, -1);
}

BranchingTrace run_V(EnvironmentModel const& model, RandomField const& field,
                     std::int64_t v0, std::int64_t generations, Sampling sampling)
{
    if (v0 < 0 || generations < 0)
        throw std::invalid_argument("run_V needs v0 >= 0 and generations >= 0");
    BranchingTrace t;
    t.kind = ProcessKind::V;
    t.generations.reserve(static_cast<std::size_t>(generations) + 1);
    t.generations.push_back(v0);
    OffspringSampler sampler(model, field, sampling);
    std::int64_t current = v0;
    for (std::int64_t i = 0; i < generations; ++i)
    {
        current = sampler.next(ProcessKind::V, current, i);
        t.generations.push_back(current);
    }
    return t;
}

ConditionedTrace run_W_conditioned_to_die(EnvironmentModel const& model,
                                          RandomField const& field,
                                          std::int64_t w0, std::int64_t budget,
                                          std::int64_t max_restarts,
                                          std::int64_t escape_level,
                                          Sampling sampling)
{
    if (w0 < 0)
        throw std::invalid_argument("initial population must be nonnegative");
    ConditionedTrace out;
    out.trace.kind = ProcessKind::W;
    if (w0 == 0)
    {
        out.trace.generations = {0};
        out.accepted = true;
        return out;
    }
    for (std::int64_t attempt = 0; attempt <= max_restarts; ++attempt)
    {
        auto sub = field.replica(static_cast<std::uint64_t>(attempt));
        OffspringSampler sampler(model, sub, sampling);
        std::vector<std::int64_t> gens{w0};
        std::int64_t current = w0;
        bool rejected = false;
        for (std::int64_t i = 1; current > 0; ++i)
        {
            if (i > budget || (escape_level > 0 && current >= escape_level))
            {
                rejected = true;
                break;
            }
            current = sampler.next(ProcessKind::W, current, i);
            gens.push_back(current);
        }
        if (!rejected)
        {
            out.trace.generations = std::move(gens);
            out.rejections = attempt;
            out.accepted = true;
            return out;
        }
    }
    out.rejections = max_restarts + 1;
    return out;
}

//---------------------------------------------------------------------------//

Reconstruction reconstruct_from_walk(EnvironmentModel const& model,
                                     WalkRecord const& record,
                                     RandomField const& field, std::int64_t n)
{
    Reconstruction out;
    if (n < 1 || std::ssize(record.return_times) < n
        || record.return_times[static_cast<std::size_t>(n - 1)] != record.steps)
    {
        out.check = mismatch(0, "record is not stopped at rho_n");
        return out;
    }

    std::int64_t r_n = right_excursion_count(model, field, n);
    std::int64_t span = record.max_site - record.min_site + 2;
    out.w = run_absorbing(ProcessKind::W, model, field, r_n, span,
                          Sampling::shared_bits, 1);
    out.z = run_absorbing(ProcessKind::Z, model, field, n - r_n, span,
                          Sampling::shared_bits, -1);
    out.w.kind = ProcessKind::W;
    out.z.kind = ProcessKind::Z;

    if (record.up(0) != r_n)
    {
        out.check = mismatch(0, "U_0 != R_n");
        return out;
    }
    if (record.local_time(0) != n)
    {
        out.check = mismatch(0, "L(0) != n at rho_n");
        return out;
    }
    auto gen = [](BranchingTrace const& t, std::int64_t i) -> std::int64_t {
        return i < std::ssize(t.generations) ? t.generations[static_cast<std::size_t>(i)]
                                             : 0;
    };
    for (std::int64_t i = 0; i <= record.max_site + 1; ++i)
    {
        if (gen(out.w, i) != record.up(i))
        {
            out.check = mismatch(i, "W_i != U_i");
            return out;
        }
        if (i > 0 && record.down(i) != record.up(i - 1))
        {
            out.check = mismatch(i, "D_x != U_{x-1}");
            return out;
        }
        if (i > 0 && record.local_time(i) != gen(out.w, i) + gen(out.w, i - 1))
        {
            out.check = mismatch(i, "L(x) != W_x + W_{x-1}");
            return out;
        }
    }
    for (std::int64_t i = 0; i <= -record.min_site + 1; ++i)
    {
        if (gen(out.z, i) != record.down(-i))
        {
            out.check = mismatch(-i, "Z_i != D_{-i}");
            return out;
        }
        if (i > 0 && record.up(-i) != record.down(-i + 1))
        {
            out.check = mismatch(-i, "U_x != D_{x+1}");
            return out;
        }
        if (i > 0 && record.local_time(-i) != gen(out.z, i) + gen(out.z, i - 1))
        {
            out.check = mismatch(-i, "L(x) != Z_{-x} + Z_{-x+1}");
            return out;
        }
    }
    if (!out.w.died() || !out.z.died())
    {
        out.check = mismatch(0, "forward process outlived the walk range");
        return out;
    }
    if (out.w.sigma(0) != record.max_site || out.z.sigma(0) != -record.min_site)
    {
        out.check = mismatch(0, "range != lifetimes");
        return out;
    }
    return out;
}

IdentityCheck verify_backward_recursion(EnvironmentModel const& model,
                                        WalkRecord const& record,
                                        RandomField const& field, std::int64_t n)
{
    if (n < 1 || record.max_site != n || record.hitting_time(n) != record.steps)
        return mismatch(n, "record is not stopped at T_n");
    if (record.down(n) != 0)
        return mismatch(n, "D_n != 0");

    std::int64_t prev = 0;  // D_{x+1}
    std::int64_t total = 0;
    for (std::int64_t x = n - 1; x >= record.min_site - 1; --x)
    {
        // 0 <= x < n carries the extra immigrant; x < 0 does not.
        OffspringRule rule{true, x >= 0 ? prev + 1 : prev};
        std::int64_t d = rule.needed == 0
                             ? 0
                             : offspring_from_bits(model.sample_stack(x, field),
                                                   field, x, rule);
        if (d != record.down(x))
        {
            std::ostringstream os;
            os << "D_" << x << ": recursion " << d << " vs walk " << record.down(x);
            return mismatch(x, os.str());
        }
        total += d;
        prev = d;
    }
    if (prev != 0)
        return mismatch(record.min_site - 1, "recursion alive below the range");
    if (record.steps != n + 2 * total)
        return mismatch(0, "T_n != n + 2 sum D");
    return {};
}

CoupledTail coupled_tail(EnvironmentModel const& model, RandomField const& field,
                         std::int64_t n, std::int64_t tail_budget)
{
    if (n < 1)
        throw std::invalid_argument("coupled_tail needs n >= 1");
    CoupledTail out;
    out.v.kind = ProcessKind::V;
    out.z_after.kind = ProcessKind::ZAfterV;
    OffspringSampler sampler(model, field, Sampling::shared_bits);

    std::int64_t v = 0, v_sum = 0;
    out.v.generations.push_back(0);
    for (std::int64_t g = 1; g <= n; ++g)
    {
        v = sampler.next(ProcessKind::V, v, n - g);
        out.v.generations.push_back(v);
        v_sum += v;
    }

    std::int64_t z = v, z_sum = 0;
    out.z_after.generations.push_back(z);
    for (std::int64_t i = 1; z > 0; ++i)
    {
        if (i > tail_budget)
        {
            out.z_after.budget_exceeded = true;
            break;
        }
        z = sampler.next(ProcessKind::Z, z, -i);
        v = sampler.next(ProcessKind::V, v, -i);
        out.z_after.generations.push_back(z);
        out.v.generations.push_back(v);
        z_sum += z;
        if (z > v && out.dominated)
        {
            out.dominated = false;
            out.violation_index = i;
        }
    }
    if (!out.z_after.budget_exceeded)
        out.hitting_time = n + 2 * v_sum + 2 * z_sum;
    return out;
}

MonotonePair monotone_pair(EnvironmentModel const& model, RandomField const& field,
                           std::int64_t z, std::int64_t z_upper,
                           std::int64_t generations)
{
    if (z < 1 || z > z_upper)
        throw std::invalid_argument("monotone_pair needs 1 <= z <= z'");
    MonotonePair out;
    out.lower = run_Z(model, field, z, generations);
    out.upper = run_Z(model, field, z_upper, generations);
    auto const& lo = out.lower.generations;
    auto const& hi = out.upper.generations;
    for (std::size_t i = 0; i < std::max(lo.size(), hi.size()); ++i)
    {
        std::int64_t a = i < lo.size() ? lo[i] : 0;
        std::int64_t b = i < hi.size() ? hi[i] : 0;
        if (a > b)
            out.ordered = false;
    }
    return out;
}

//---------------------------------------------------------------------------//

RegenerationSummary regeneration_sampler(EnvironmentModel const& model,
                                         RandomField const& field,
                                         std::int64_t cycles, unsigned workers,
                                         std::int64_t cycle_budget)
{
    if (cycles < 1)
        throw std::invalid_argument("regeneration_sampler needs cycles >= 1");
    RegenerationSummary out;
    auto count = static_cast<std::size_t>(cycles);
    out.cycle_lengths.resize(count);
    out.progenies.resize(count);
    out.max_within_cycle.resize(count);
    std::vector<char> exceeded(count, 0);
    auto stream = field.stream("regen");

    parallel_for(count, workers, [&](std::size_t c) {
        auto engine = stream.engine(static_cast<std::int64_t>(c), 0);
        std::int64_t v = 0, len = 0, progeny = 0, peak = 0;
        do
        {
            progeny += v;
            peak = std::max(peak, v);
            v = fast_step(model, ProcessKind::V, v, engine);
            ++len;
            if (len >= cycle_budget && v != 0)
            {
                exceeded[c] = 1;
                break;
            }
        } while (v != 0);
        out.cycle_lengths[c] = len;
        out.progenies[c] = progeny;
        out.max_within_cycle[c] = peak;
    });

    std::vector<double> lengths(out.cycle_lengths.begin(), out.cycle_lengths.end());
    out.r_bar = mean_and_se(lengths);
    for (char e : exceeded)
        out.budget_exceeded += e;
    return out;
}

std::vector<TailPoint> empirical_tail(std::vector<std::int64_t> const& samples,
                                      std::vector<double> const& thresholds)
{
    std::vector<std::int64_t> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    std::vector<TailPoint> pts;
    auto total = static_cast<std::int64_t>(sorted.size());
    for (double t : thresholds)
    {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), t,
                                   [](double v, std::int64_t s) {
                                       return v < static_cast<double>(s);
                                   });
        auto above = static_cast<std::int64_t>(sorted.end() - it);
        auto est = make_proportion(above, total);
        pts.push_back({t, est.p_hat, est.se, total, above, {est.lo, est.hi}});
    }
    return pts;
}

//---------------------------------------------------------------------------//

std::vector<double> HittingProfile::ratios() const
{
    std::vector<double> out;
    for (std::size_t j = 0; j + 1 < estimates.size(); ++j)
    {
        double next = estimates[j + 1].p_hat;
        out.push_back(next > 0 ? estimates[j].p_hat / next : 0.0);
    }
    return out;
}

HittingProfile hitting_profile_Z(EnvironmentModel const& model,
                                 RandomField const& field, std::int64_t m,
                                 std::int64_t ell, std::int64_t u_max,
                                 std::int64_t replicas, unsigned workers)
{
    if (!(0 <= ell && ell < m && m <= u_max && u_max < 62))
        throw std::invalid_argument("hitting_profile_Z needs ell < m <= u_max");
    HittingProfile out;
    out.m = m;
    out.ell = ell;
    out.replicas = replicas;
    std::int64_t low = std::int64_t{1} << ell;
    std::int64_t high = std::int64_t{1} << u_max;
    auto stream = field.stream("hitting");

    std::vector<std::int64_t> peaks(static_cast<std::size_t>(replicas));
    parallel_for(peaks.size(), workers, [&](std::size_t r) {
        auto engine = stream.engine(static_cast<std::int64_t>(r), 0);
        std::int64_t z = std::int64_t{1} << m, peak = z;
        while (z > low && z < high)
        {
            z = fast_step(model, ProcessKind::Z, z, engine);
            peak = std::max(peak, z);
        }
        peaks[r] = peak;
    });

    for (std::int64_t u = m; u <= u_max; ++u)
    {
        std::int64_t level = std::int64_t{1} << u;
        auto hits = std::count_if(peaks.begin(), peaks.end(),
                                  [&](std::int64_t p) { return p >= level; });
        out.estimates.push_back(make_proportion(hits, replicas));
    }
    return out;
}

ProportionEstimate z_progeny_tail(EnvironmentModel const& model,
                                  RandomField const& field, std::int64_t z,
                                  std::int64_t threshold, std::int64_t replicas,
                                  unsigned workers)
{
    auto stream = field.stream("progeny");
    std::vector<char> hit(static_cast<std::size_t>(replicas), 0);
    parallel_for(hit.size(), workers, [&](std::size_t r) {
        auto engine = stream.engine(static_cast<std::int64_t>(r), 0);
        std::int64_t cur = z, total = z;
        while (cur > 0 && total <= threshold)
        {
            cur = fast_step(model, ProcessKind::Z, cur, engine);
            total += cur;
        }
        hit[r] = total > threshold;
    });
    return make_proportion(std::count(hit.begin(), hit.end(), 1), replicas);
}

ProportionEstimate hitting_time_tail_via_branching(EnvironmentModel const& model,
                                                   RandomField const& field,
                                                   std::int64_t level,
                                                   std::int64_t n,
                                                   std::int64_t replicas,
                                                   unsigned workers)
{
    auto stream = field.stream("t-branching");
    std::vector<char> hit(static_cast<std::size_t>(replicas), 0);
    parallel_for(hit.size(), workers, [&](std::size_t r) {
        auto engine = stream.engine(static_cast<std::int64_t>(r), 0);
        std::int64_t v = 0, t = level;
        for (std::int64_t g = 1; g <= level; ++g)
        {
            v = fast_step(model, ProcessKind::V, v, engine);
            t += 2 * v;
        }
        std::int64_t z = v;
        while (z > 0 && t <= n)
        {
            z = fast_step(model, ProcessKind::Z, z, engine);
            t += 2 * z;
        }
        hit[r] = t > n;
    });
    return make_proportion(std::count(hit.begin(), hit.end(), 1), replicas);
}

}  // namespace cookie
