#include "cookie/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cookie/parallel.hpp"

namespace cookie
{
namespace
{
constexpr std::uint64_t kBlock = std::uint64_t{1} << 40;

void require_transient(EnvironmentModel const& model)
{
    auto report = model.validate();
    if (!report.nondegenerate)
        throw std::invalid_argument("model violates the non-degeneracy assumption");
    if (!(report.delta > 1))
        throw std::invalid_argument("experiment needs delta > 1");
}

//! Replicas giving about 1.5 * min_successes at success rate k / trials.
std::int64_t size_from_pilot(ExperimentConfig const& config, std::int64_t k,
                             std::int64_t trials)
{
    // With no pilot success fall back on the Wilson upper bound.
    double p = k > 0 ? static_cast<double>(k) / static_cast<double>(trials)
                     : wilson_interval(0, trials).hi;
    double want = 1.5 * static_cast<double>(config.min_successes) / p;
    auto r = static_cast<std::int64_t>(std::ceil(want));
    return std::clamp(r, config.pilot_replicas, config.max_replicas);
}

/*!
 * Pilot at the top grid point: blocks of fresh replicas are added, doubling the
 * total, until 30 successes are seen or max_replicas is reached.
 * run(count, offset) returns the estimate over replicas offset .. offset+count-1.
 */
template<class Run>
ProportionEstimate grow_pilot(ExperimentConfig const& config, std::uint64_t offset,
                              Run&& run)
{
    std::int64_t k = 0, trials = 0, block = config.pilot_replicas;
    while (k < 30 && trials < config.max_replicas)
    {
        auto e = run(block, offset + static_cast<std::uint64_t>(trials));
        k += e.successes;
        trials += e.trials;
        block = std::min(trials, config.max_replicas - trials);
    }
    return make_proportion(k, trials);
}

TailPoint to_point(double n, ProportionEstimate const& e)
{
    return TailPoint{n, e.p_hat, e.se, e.trials, e.successes, Interval{e.lo, e.hi}};
}
}  // namespace

TailEstimate make_tail_estimate(std::string label, std::vector<TailPoint> points,
                                double target, double tolerance)
{
    TailEstimate out;
    out.label = std::move(label);
    std::sort(points.begin(), points.end(),
              [](TailPoint const& a, TailPoint const& b) { return a.n < b.n; });
    out.points = std::move(points);
    out.target = target;
    out.tolerance = tolerance;
    for (auto const& p : out.points)
        out.prefactors.push_back(std::pow(p.n, -target) * p.p_hat);
    auto positive = std::count_if(out.points.begin(), out.points.end(),
                                  [](TailPoint const& p) { return p.p_hat > 0; });
    if (positive >= 2)
    {
        out.fit = loglog_slope(out.points);
        out.fitted = true;
        out.verdict = std::abs(out.fit.slope - target) <= tolerance;
    }
    return out;
}

double slowdown_target(SlowdownEvent event, double delta, double gamma)
{
    if (!(delta > 1))
        throw std::invalid_argument("slowdown exponents need delta > 1");
    if (!(gamma > 0 && gamma < std::min(1.0, delta / 2)))
        throw std::invalid_argument("gamma must lie in (0, min(1, delta/2))");
    if (gamma > 0.5)
        return gamma - delta / 2;
    return event == SlowdownEvent::T ? 2 * gamma - (1 + delta) / 2
                                     : (1 - delta) / 2;
}

void ExperimentConfig::check() const
{
    if (!(gamma > 0 && gamma < 1))
        throw std::invalid_argument("gamma must lie in (0,1)");
    if (n_grid.empty())
        throw std::invalid_argument("n_grid is empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i)
    {
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1]))
            throw std::invalid_argument("n_grid must be positive and strictly increasing");
    }
    if (!(tolerance > 0))
        throw std::invalid_argument("tolerance must be positive");
    if (!replicas.empty() && replicas.size() != 1 && replicas.size() != n_grid.size())
        throw std::invalid_argument("replicas must have one entry or one per grid point");
    for (auto r : replicas)
        if (r < 1)
            throw std::invalid_argument("replica counts must be positive");
}

std::int64_t ExperimentConfig::replicas_at(std::size_t index) const
{
    return replicas.size() == 1 ? replicas[0] : replicas.at(index);
}

std::vector<std::int64_t> dyadic_grid(int lo, int hi)
{
    if (lo < 0 || hi < lo || hi > 62)
        throw std::invalid_argument("dyadic grid needs 0 <= lo <= hi <= 62");
    std::vector<std::int64_t> grid;
    for (int e = lo; e <= hi; ++e)
        grid.push_back(std::int64_t{1} << e);
    return grid;
}

SlowdownResult slowdown_experiment(EnvironmentModel const& model,
                                   SlowdownEvent event,
                                   ExperimentConfig const& config,
                                   RandomField const& field)
{
    config.check();
    require_transient(model);
    double target = slowdown_target(event, model.delta(), config.gamma);
    SlowdownResult out;
    out.event = event;

    SlowdownOptions opts;
    opts.mode = event == SlowdownEvent::T ? SlowdownMode::t_only : SlowdownMode::both;
    opts.workers = config.workers;

    auto pick = [&](SlowdownEstimate const& e) {
        return event == SlowdownEvent::T ? e.t_event : e.x_event;
    };

    std::int64_t sized = 0;
    if (config.replicas.empty())
    {
        auto pilot = grow_pilot(config, config.n_grid.size() * kBlock,
                                [&](std::int64_t count, std::uint64_t offset) {
                                    opts.replica_offset = offset;
                                    return pick(slowdown_event_mc(
                                        model, config.gamma, config.n_grid.back(),
                                        count, field, opts));
                                });
        out.pilot_successes = pilot.successes;
        out.pilot_trials = pilot.trials;
        sized = size_from_pilot(config, pilot.successes, pilot.trials);
    }

    std::vector<TailPoint> points;
    for (std::size_t i = 0; i < config.n_grid.size(); ++i)
    {
        opts.replica_offset = i * kBlock;
        std::int64_t reps = sized > 0 ? sized : config.replicas_at(i);
        auto est = slowdown_event_mc(model, config.gamma, config.n_grid[i], reps,
                                     field, opts);
        out.contradictions += est.contradictions;
        points.push_back(to_point(static_cast<double>(config.n_grid[i]), pick(est)));
        out.estimates.push_back(std::move(est));
    }
    out.tail = make_tail_estimate(event == SlowdownEvent::T ? "slowdown-T" : "slowdown-X",
                                  std::move(points), target, config.tolerance);
    return out;
}

RegenerationResult regeneration_exponents(
    EnvironmentModel const& model, RandomField const& field, std::int64_t cycles,
    std::vector<double> const& r_thresholds, std::vector<double> const& s_thresholds,
    double r_tolerance, double s_tolerance, unsigned workers)
{
    require_transient(model);
    double delta = model.delta();
    auto summary = regeneration_sampler(model, field, cycles, workers);
    RegenerationResult out;
    out.cycles = cycles;
    out.budget_exceeded = summary.budget_exceeded;
    out.r_bar = summary.r_bar;
    std::vector<double> lengths(summary.cycle_lengths.begin(),
                                summary.cycle_lengths.end());
    out.lag1 = lag1_autocorrelation(lengths);
    out.max_r1 = *std::max_element(summary.cycle_lengths.begin(),
                                   summary.cycle_lengths.end());
    out.r1 = make_tail_estimate("r1", empirical_tail(summary.cycle_lengths, r_thresholds),
                                -delta, r_tolerance);
    out.s1 = make_tail_estimate("S1", empirical_tail(summary.progenies, s_thresholds),
                                -delta / 2, s_tolerance);
    return out;
}

HittingResult hitting_profile_experiment(EnvironmentModel const& model,
                                         RandomField const& field, std::int64_t m,
                                         std::int64_t ell, int offset_lo,
                                         int offset_hi, std::int64_t replicas,
                                         double tolerance, unsigned workers)
{
    require_transient(model);
    if (offset_lo < 0 || offset_hi < offset_lo)
        throw std::invalid_argument("hitting profile offsets must satisfy 0 <= lo <= hi");
    HittingResult out;
    out.profile = hitting_profile_Z(model, field, m, ell, m + offset_hi, replicas,
                                    workers);
    std::vector<TailPoint> points;
    for (int j = offset_lo; j <= offset_hi; ++j)
        points.push_back(to_point(std::ldexp(1.0, j),
                                  out.profile.estimates[static_cast<std::size_t>(j)]));
    out.tail = make_tail_estimate("hitting-profile", std::move(points),
                                  -(model.delta() + 1), tolerance);
    return out;
}

SpeedEstimate estimate_speed(EnvironmentModel const& model,
                             RandomField const& field, std::int64_t n,
                             std::int64_t replicas, unsigned workers)
{
    if (n < 1 || replicas < 2)
        throw std::invalid_argument("speed estimate needs n >= 1 and replicas >= 2");
    RandomField speed_field(field.stream("speed").bits_at(0, 0));
    std::vector<double> ratio(static_cast<std::size_t>(replicas));
    parallel_for(ratio.size(), workers, [&](std::size_t r) {
        Walker walker(model, speed_field.replica(r));
        std::int64_t x = 0;
        for (std::int64_t k = 0; k < n; ++k)
            x = walker.step();
        ratio[r] = static_cast<double>(x) / static_cast<double>(n);
    });
    SpeedEstimate out;
    out.n = n;
    out.speed = mean_and_se(ratio);
    out.ci = {out.speed.mean - kZ95 * out.speed.se, out.speed.mean + kZ95 * out.speed.se};
    return out;
}

LdResult ld_slowdown_experiment(EnvironmentModel const& model,
                                RandomField const& field, double v,
                                ExperimentConfig const& config,
                                std::int64_t speed_n, std::int64_t speed_replicas)
{
    if (config.n_grid.empty())
        throw std::invalid_argument("n_grid is empty");
    require_transient(model);
    double delta = model.delta();
    if (!(delta > 2))
        throw std::invalid_argument("large-deviation slowdown needs delta > 2");

    LdResult out;
    out.speed = estimate_speed(model, field, speed_n, speed_replicas, config.workers);
    out.v = v > 0 ? v : out.speed.speed.mean / 2;
    if (!(out.v > 0) || out.v >= out.speed.speed.mean - 3 * out.speed.speed.se)
        throw std::invalid_argument("v must be positive and below the estimated speed");

    RandomField ld_field(field.stream("ld").bits_at(0, 0));
    auto run = [&](std::int64_t n, std::int64_t reps, std::uint64_t offset) {
        std::vector<char> hit(static_cast<std::size_t>(reps), 0);
        double level = out.v * static_cast<double>(n);
        parallel_for(hit.size(), config.workers, [&](std::size_t r) {
            Walker walker(model, ld_field.replica(offset + r));
            std::int64_t x = 0;
            for (std::int64_t k = 0; k < n; ++k)
                x = walker.step();
            hit[r] = static_cast<double>(x) < level;
        });
        return make_proportion(std::count(hit.begin(), hit.end(), 1), reps);
    };

    std::int64_t sized = 0;
    if (config.replicas.empty())
    {
        auto pilot = grow_pilot(config, config.n_grid.size() * kBlock,
                                [&](std::int64_t count, std::uint64_t offset) {
                                    return run(config.n_grid.back(), count, offset);
                                });
        sized = size_from_pilot(config, pilot.successes, pilot.trials);
    }
    std::vector<TailPoint> points;
    for (std::size_t i = 0; i < config.n_grid.size(); ++i)
    {
        std::int64_t reps = sized > 0 ? sized : config.replicas_at(i);
        points.push_back(to_point(static_cast<double>(config.n_grid[i]),
                                  run(config.n_grid[i], reps, i * kBlock)));
    }
    out.tail = make_tail_estimate("ld-slowdown", std::move(points), 1 - delta / 2,
                                  config.tolerance);
    return out;
}

}  // namespace cookie
