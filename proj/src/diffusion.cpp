#include "cookie/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "cookie/branching.hpp"
#include "cookie/parallel.hpp"
#include "cookie/stats.hpp"

namespace cookie
{

double normal_quantile(double p)
{
    if (!(p > 0 && p < 1))
        throw std::domain_error("normal_quantile needs 0 < p < 1");
    double q = p - 0.5;
    if (std::abs(q) <= 0.425)
    {
        double r = 0.180625 - q * q;
        return q
               * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                       + 67265.770927008700853) * r + 45921.953931549871457) * r
                     + 13731.693765509461125) * r + 1971.5909503065514427) * r
                   + 133.14166789178437745) * r + 3.387132872796366608)
               / (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                       + 39307.89580009271061) * r + 21213.794301586595867) * r
                     + 5394.1960214247511077) * r + 687.1870074920579083) * r
                   + 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0 ? p : 1 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5)
    {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
              / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                      + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                    + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                  + 2.05319162663775882187) * r + 1.0);
    }
    else
    {
        r -= 5;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
              / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                      + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                    + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                  + 0.59983220655588793769) * r + 1.0);
    }
    return q < 0 ? -val : val;
}

DiffusionRun simulate_Y(DiffusionParams const& params, RandomField const& field,
                        std::uint64_t replica)
{
    if (!(params.h > 0) || !(params.horizon > 0))
        throw std::invalid_argument("simulate_Y needs h > 0 and horizon > 0");
    if (!(params.y0 > params.absorb_level))
        throw std::invalid_argument("simulate_Y needs y0 above the absorbing level");
    if (params.noise_refinement < 1)
        throw std::invalid_argument("noise_refinement must be positive");

    DiffusionRun run;
    run.alpha = params.alpha;
    run.y0 = params.y0;
    run.h = params.h;
    run.horizon = params.horizon;

    auto stream = field.stream("diffusion");
    auto site = static_cast<std::int64_t>(replica);
    auto refine = static_cast<std::uint64_t>(params.noise_refinement);
    double sub_sd = std::sqrt(params.h / static_cast<double>(refine));
    auto steps = static_cast<std::uint64_t>(std::ceil(params.horizon / params.h - 1e-9));
    std::int64_t probe_step = params.probe_time >= 0
                                  ? std::llround(params.probe_time / params.h)
                                  : -1;
    double level = params.absorb_level;

    double y = params.y0;
    if (probe_step == 0)
        run.probe = y;
    for (std::uint64_t k = 0; k < steps; ++k)
    {
        double db = 0;
        for (std::uint64_t i = 0; i < refine; ++i)
            db += normal_quantile(to_open_unit(stream.bits_at(site, k * refine + i + 1)));
        db *= sub_sd;
        double next = y + params.alpha * params.h + std::sqrt(2 * std::abs(y)) * db;
        double t = static_cast<double>(k) * params.h;
        if (next <= level)
        {
            double frac = (y - level) / (y - next);
            run.absorbed = true;
            run.sigma0 = t + frac * params.h;
            run.integral += 0.5 * (y + level) * frac * params.h;
            run.terminal = level;
            if (probe_step > static_cast<std::int64_t>(k))
                run.probe = level;
            return run;
        }
        run.integral += 0.5 * (y + next) * params.h;
        y = next;
        if (static_cast<std::int64_t>(k + 1) == probe_step)
            run.probe = y;
    }
    run.terminal = y;
    return run;
}

FunctionalSamples lifetime_and_area(DiffusionParams const& params,
                                    std::int64_t replicas,
                                    RandomField const& field, unsigned workers)
{
    if (!(params.alpha < 1))
        throw std::invalid_argument("lifetime_and_area needs alpha < 1");
    std::vector<DiffusionRun> runs(static_cast<std::size_t>(replicas));
    parallel_for(runs.size(), workers, [&](std::size_t r) {
        runs[r] = simulate_Y(params, field, r);
    });
    FunctionalSamples out;
    for (auto const& run : runs)
    {
        if (!run.absorbed)
        {
            ++out.horizon_exceeded;
            continue;
        }
        out.lifetimes.push_back(run.sigma0);
        out.areas.push_back(run.integral);
    }
    return out;
}

ConvergenceReport convergence_check(EnvironmentModel const& model,
                                    ConvergenceKind kind, std::int64_t n,
                                    std::int64_t replicas,
                                    RandomField const& field,
                                    ConvergenceOptions const& options)
{
    if (n < 1 || replicas < 1)
        throw std::invalid_argument("convergence_check needs n, replicas >= 1");
    double delta = model.delta();
    ConvergenceReport report;
    DiffusionParams dp;
    dp.y0 = 1;
    dp.h = options.h;
    dp.horizon = options.horizon;

    auto count = static_cast<std::size_t>(replicas);
    std::vector<double> life(count), area(count);
    std::vector<std::int64_t> rejected(count, 0);
    auto nd = static_cast<double>(n);
    auto branch_field = RandomField(field.stream("convergence").bits_at(0, 0));

    switch (kind)
    {
        case ConvergenceKind::Z:
            report.alpha = -delta;
            parallel_for(count, options.workers, [&](std::size_t r) {
                auto t = run_Z(model, branch_field.replica(r), n,
                               std::int64_t{1} << 40, Sampling::fast);
                life[r] = static_cast<double>(t.generations.size() - 1) / nd;
                area[r] = static_cast<double>(t.progeny()) / (nd * nd);
            });
            break;
        case ConvergenceKind::ConditionedW:
            report.alpha = 2 - delta;
            parallel_for(count, options.workers, [&](std::size_t r) {
                auto c = run_W_conditioned_to_die(
                    model, branch_field.replica(r), n, std::int64_t{1} << 40,
                    options.max_restarts, options.escape_factor * n);
                rejected[r] = c.rejections;
                life[r] = c.accepted ? static_cast<double>(c.trace.generations.size() - 1) / nd
                                     : std::nan("");
                area[r] = c.accepted ? static_cast<double>(c.trace.progeny()) / (nd * nd)
                                     : std::nan("");
            });
            break;
        case ConvergenceKind::VStopped:
        {
            report.alpha = 1 - delta;
            dp.absorb_level = options.epsilon;
            auto stop = static_cast<std::int64_t>(std::floor(options.epsilon * nd));
            parallel_for(count, options.workers, [&](std::size_t r) {
                OffspringSampler sampler(model, branch_field.replica(r), Sampling::fast);
                std::int64_t v = n, gens = 0, total = 0;
                while (v > stop)
                {
                    total += v;
                    v = sampler.next(ProcessKind::V, v, gens);
                    ++gens;
                }
                life[r] = static_cast<double>(gens) / nd;
                area[r] = static_cast<double>(total) / (nd * nd);
            });
            break;
        }
    }
    dp.alpha = report.alpha;

    for (std::size_t r = 0; r < count; ++r)
    {
        report.rejected += rejected[r];
        if (std::isnan(life[r]))
        {
            ++report.branching.horizon_exceeded;
            continue;
        }
        report.branching.lifetimes.push_back(life[r]);
        report.branching.areas.push_back(area[r]);
    }

    std::vector<DiffusionRun> runs(count);
    parallel_for(count, options.workers, [&](std::size_t r) {
        runs[r] = simulate_Y(dp, field, r);
    });
    for (auto const& run : runs)
    {
        if (!run.absorbed)
        {
            ++report.diffusion.horizon_exceeded;
            continue;
        }
        report.diffusion.lifetimes.push_back(run.sigma0);
        report.diffusion.areas.push_back(run.integral);
    }

    if (!report.branching.lifetimes.empty() && !report.diffusion.lifetimes.empty())
    {
        report.ks_lifetime = ks_two_sample(report.branching.lifetimes,
                                           report.diffusion.lifetimes);
        report.ks_progeny = ks_two_sample(report.branching.areas,
                                          report.diffusion.areas);
    }
    return report;
}

}  // namespace cookie
