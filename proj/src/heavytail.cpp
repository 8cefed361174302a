#include "cookie/heavytail.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cookie/parallel.hpp"

namespace cookie
{

double ParetoSpec::mean() const noexcept
{
    return has_mean() ? alpha * t0 / (alpha - 1)
                      : std::numeric_limits<double>::quiet_NaN();
}

double ParetoSpec::c0() const noexcept
{
    return std::pow(t0, alpha);
}

void ParetoSpec::check() const
{
    if (!(alpha > 0) || !(t0 > 0))
        throw std::invalid_argument("Pareto law needs alpha > 0 and t0 > 0");
}

double pareto_quantile(ParetoSpec const& spec, double u) noexcept
{
    return spec.t0 * std::pow(u, -1 / spec.alpha);
}

double sample_pareto(ParetoSpec const& spec, RandomField const& field,
                     std::int64_t site, std::uint64_t index)
{
    // 1 - [0,1) is (0,1]
    return pareto_quantile(spec, 1 - field.uniform_at("heavytail", site, index));
}

SumTailResult sum_tail_experiment(ParetoSpec const& spec, int part,
                                  std::vector<std::int64_t> const& n_grid,
                                  double x, double gamma, std::int64_t replicas,
                                  RandomField const& field, unsigned workers)
{
    spec.check();
    if (replicas < 1)
        throw std::invalid_argument("replicas must be positive");
    SumTailResult out;
    out.spec = spec;
    out.part = part;
    out.x = x;
    if (part == 1)
    {
        if (!spec.has_mean())
            throw std::invalid_argument("part 1 needs alpha > 1");
        if (!(x > spec.mean()))
            throw std::invalid_argument("part 1 needs x above the mean");
        out.gamma = 1;
        out.target_slope = 1 - spec.alpha;
    }
    else if (part == 2)
    {
        if (!(gamma > 0 && gamma < std::min(spec.alpha, 1.0)))
            throw std::invalid_argument("part 2 needs 0 < gamma < min(alpha, 1)");
        if (!(x > 0))
            throw std::invalid_argument("part 2 needs x > 0");
        out.gamma = gamma;
        out.target_slope = gamma - spec.alpha;
    }
    else
    {
        throw std::invalid_argument("part must be 1 or 2");
    }

    auto stream = field.stream("heavytail");
    std::vector<TailPoint> tail;
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi)
    {
        std::int64_t n = n_grid[gi];
        if (n < 1)
            throw std::invalid_argument("grid values must be positive");
        SumTailPoint pt;
        pt.n = n;
        pt.terms = part == 1 ? n : floor_power(n, gamma).value;
        pt.threshold = x * static_cast<double>(n);
        auto nd = static_cast<double>(n);
        pt.theory = part == 1
                        ? spec.c0() * std::pow(x - spec.mean(), -spec.alpha)
                              * std::pow(nd, 1 - spec.alpha)
                        : spec.c0() * std::pow(x, -spec.alpha)
                              * std::pow(nd, gamma - spec.alpha);

        std::vector<char> hit(static_cast<std::size_t>(replicas), 0);
        parallel_for(hit.size(), workers, [&](std::size_t r) {
            auto eng = stream.engine(static_cast<std::int64_t>(r), gi + 1);
            double sum = 0;
            for (std::int64_t i = 0; i < pt.terms; ++i)
            {
                sum += pareto_quantile(spec, 1 - eng.uniform());
                if (sum > pt.threshold)
                {
                    hit[r] = 1;
                    return;
                }
            }
        });
        std::int64_t k = 0;
        for (char h : hit)
            k += h;
        pt.estimate = make_proportion(k, replicas);
        pt.ratio = pt.estimate.p_hat / pt.theory;
        out.points.push_back(pt);
        tail.push_back(TailPoint{nd, pt.estimate.p_hat, pt.estimate.se, replicas, k,
                                 Interval{pt.estimate.lo, pt.estimate.hi}});
    }
    std::size_t positive = 0;
    for (auto const& t : tail)
        positive += t.p_hat > 0;
    if (positive >= 2)
        out.fit = loglog_slope(tail);
    return out;
}

}  // namespace cookie
