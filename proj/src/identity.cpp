#include "cookie/identity.hpp"

#include <stdexcept>

#include "cookie/branching.hpp"
#include "cookie/parallel.hpp"
#include "cookie/walk.hpp"

namespace cookie
{
namespace
{
enum Outcome : char
{
    kPass,
    kSkip,
    kFail,
};

struct Slot
{
    Outcome outcome = kPass;
    std::string detail;
};

IdentityTally fold(std::string name, std::vector<Slot> const& slots)
{
    IdentityTally t;
    t.name = std::move(name);
    for (std::size_t r = 0; r < slots.size(); ++r)
    {
        switch (slots[r].outcome)
        {
            case kPass: ++t.checked; break;
            case kSkip: ++t.skipped; break;
            case kFail:
                ++t.checked;
                ++t.violations;
                if (t.first_violation < 0)
                {
                    t.first_violation = static_cast<std::int64_t>(r);
                    t.detail = slots[r].detail;
                }
                break;
        }
    }
    return t;
}
}  // namespace

std::int64_t IdentitySuiteResult::violations() const noexcept
{
    std::int64_t v = 0;
    for (auto const& t : tallies)
        v += t.violations;
    return v;
}

IdentitySuiteParams default_identity_params(EnvironmentModel const& model)
{
    IdentitySuiteParams p;
    if (model.delta() > 1)
    {
        p.returns = 5;
        p.hitting_level = 1000;
        p.coupled_level = 1000;
        p.monotone_low = 5;
        p.monotone_high = 50;
    }
    return p;
}

IdentitySuiteResult identity_suite(EnvironmentModel const& model,
                                   RandomField const& field, std::int64_t seeds,
                                   IdentitySuiteParams const& params,
                                   unsigned workers)
{
    if (seeds < 1)
        throw std::invalid_argument("identity suite needs at least one seed");
    auto count = static_cast<std::size_t>(seeds);
    std::vector<Slot> recon(count), backward(count), coupling(count), hitting(count),
        monotone(count);

    parallel_for(count, workers, [&](std::size_t r) {
        auto f = field.replica(r);

        auto ret = returns_and_excursions(model, f, params.returns, params.return_budget);
        if (!ret.completed())
        {
            recon[r].outcome = kSkip;
        }
        else
        {
            auto rec = reconstruct_from_walk(model, ret, f, params.returns);
            if (!rec.check.pass)
                recon[r] = {kFail, rec.check.detail};
        }

        auto walk = run_to_hitting(model, f, params.hitting_level, params.hitting_budget);
        if (!walk.completed())
        {
            backward[r].outcome = kSkip;
        }
        else
        {
            auto chk = verify_backward_recursion(model, walk, f, params.hitting_level);
            if (!chk.pass)
                backward[r] = {kFail, chk.detail};
        }

        auto tail = coupled_tail(model, f, params.coupled_level, params.coupled_budget);
        if (!tail.dominated)
            coupling[r] = {kFail, "Z^(n) exceeds V at generation "
                                      + std::to_string(tail.violation_index)};
        auto tw = params.coupled_level == params.hitting_level
                      ? std::move(walk)
                      : run_to_hitting(model, f, params.coupled_level,
                                       params.hitting_budget);
        if (!tw.completed() || tail.hitting_time < 0)
        {
            // Both sides see the same bits, so one finishing without the other is
            // only possible through the separate budgets.
            hitting[r].outcome = kSkip;
        }
        else if (tail.hitting_time != tw.steps)
        {
            hitting[r] = {kFail, "T_n " + std::to_string(tw.steps) + " vs branching "
                                     + std::to_string(tail.hitting_time)};
        }

        auto pair = monotone_pair(model, f, params.monotone_low, params.monotone_high,
                                  params.monotone_generations);
        if (!pair.ordered)
            monotone[r] = {kFail, "monotone coupling violated"};
    });

    IdentitySuiteResult out;
    out.tallies.push_back(fold("reconstruction", recon));
    out.tallies.push_back(fold("backward-recursion", backward));
    out.tallies.push_back(fold("coupling-domination", coupling));
    out.tallies.push_back(fold("hitting-time-identity", hitting));
    out.tallies.push_back(fold("monotone-coupling", monotone));
    return out;
}

}  // namespace cookie
