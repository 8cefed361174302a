#include <doctest.h>

#include <cmath>
#include <vector>

#include "cookie/branching.hpp"
#include "cookie/stats.hpp"
#include "cookie/walk.hpp"

using namespace cookie;

namespace
{
auto const kRight = EnvironmentModel::homogeneous(1.0, 1);
auto const kFair = EnvironmentModel::homogeneous(0.5, 1);
auto const kDelta16 = EnvironmentModel::deterministic({0.9, 0.9});

std::int64_t down_sum(WalkRecord const& r)
{
    std::int64_t s = 0;
    for (auto x = r.min_site; x <= r.max_site; ++x)
        s += r.down(x);
    return s;
}

void check_step_invariants(WalkRecord const& r)
{
    std::int64_t local = 0, net = 0;
    for (auto x = r.min_site; x <= r.max_site; ++x)
    {
        local += r.local_time(x);
        net += r.up(x) - r.down(x);
    }
    CHECK(local == r.steps);
    CHECK(net == r.position);
    CHECK(((r.steps - r.position) % 2 + 2) % 2 == 0);
}
}  // namespace

TEST_CASE("floor_power")
{
    CHECK(floor_power(1000, 1.0 / 3).value == 10);
    CHECK(floor_power(1000, 1.0 / 3).exact);
    CHECK(floor_power(1024, 0.5).value == 32);
    CHECK(floor_power(1024, 0.5).exact);
    CHECK(floor_power(1023, 0.5).value == 31);
    CHECK_FALSE(floor_power(1023, 0.5).exact);
    CHECK(floor_power(8192, 0.3).value == 14);
    CHECK(floor_power(8192, 0.75).value == 861);
    CHECK(floor_power(256, 0.2).value == 3);
    CHECK(floor_power(1, 0.7).value == 1);
    // 2^{13*0.75} is irrational in exponent but the rational path is exact
    CHECK(floor_power(4096, 0.75).value == 512);
    CHECK(floor_power(4096, 0.75).exact);
    CHECK_THROWS(floor_power(0, 0.5));
}

TEST_CASE("right-only stacks hit n in n steps")
{
    RandomField f(1);
    auto r = run_to_hitting(kRight, f, 50, 1000);
    REQUIRE(r.completed());
    CHECK(r.steps == 50);
    CHECK(r.hitting_time(50) == 50);
    CHECK(down_sum(r) == 0);
}

TEST_CASE("T_n = n + 2 sum D_x at T_n")
{
    RandomField f(2);
    for (std::uint64_t s = 0; s < 200; ++s)
    {
        auto r = run_to_hitting(kDelta16, f.replica(s), 100, 10'000'000);
        REQUIRE(r.completed());
        CHECK(r.steps == 100 + 2 * down_sum(r));
        check_step_invariants(r);
    }
}

TEST_CASE("delta = 1.6 walks reach 10^3 within budget")
{
    RandomField f(3);
    int finished = 0;
    for (std::uint64_t s = 0; s < 1000; ++s)
        finished += run_to_hitting(kDelta16, f.replica(s), 1000, 10'000'000).completed();
    CHECK(finished == 1000);
}

TEST_CASE("fixed-step runs")
{
    RandomField f(4);
    for (std::uint64_t s = 0; s < 50; ++s)
    {
        auto r = run_fixed_steps(kDelta16, f.replica(s), 1001);
        CHECK(r.steps == 1001);
        check_step_invariants(r);
    }
    auto zero = run_fixed_steps(kDelta16, f, 0);
    CHECK(zero.steps == 0);
    CHECK(zero.position == 0);

    std::vector<double> xs;
    for (std::uint64_t s = 0; s < 100'000; ++s)
        xs.push_back(static_cast<double>(run_fixed_steps(kFair, f.replica(s), 50).position));
    auto m = mean_and_se(xs);
    CHECK(std::abs(m.mean) < 3 * m.se);
}

TEST_CASE("returns and excursions")
{
    RandomField f(5);
    int completed = 0;
    for (std::uint64_t s = 0; s < 300; ++s)
    {
        auto field = f.replica(s);
        auto r = returns_and_excursions(kFair, field, 6, 1'000'000);
        if (!r.completed())
            continue;
        ++completed;
        REQUIRE(r.return_times.size() == 6);
        CHECK(r.position == 0);
        CHECK(r.up(0) == r.right_excursions());
        CHECK(r.right_excursions() == right_excursion_count(kFair, field, 6));
        CHECK(r.local_time(0) == 6);
        // Edge balance at a return time.
        for (auto x = r.min_site; x < 0; ++x)
            CHECK(r.up(x) == r.down(x + 1));
        for (auto x = 1; x <= r.max_site; ++x)
            CHECK(r.down(x) == r.up(x - 1));
        check_step_invariants(r);
    }
    CHECK(completed > 250);

    auto transient = returns_and_excursions(kRight, f, 1, 100);
    CHECK_FALSE(transient.completed());
}

TEST_CASE("R_k - R_M is Binomial(k - M, 1/2)")
{
    RandomField f(6);
    const std::int64_t k = 12, m = 2;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k - m + 1), 0);
    for (std::uint64_t s = 0; s < 20'000; ++s)
    {
        auto field = f.replica(s);
        auto d = right_excursion_count(kDelta16, field, k)
                 - right_excursion_count(kDelta16, field, m);
        ++counts[static_cast<std::size_t>(d)];
    }
    std::vector<double> probs;
    for (std::int64_t j = 0; j <= k - m; ++j)
        probs.push_back(std::tgamma(11.0) / (std::tgamma(j + 1.0) * std::tgamma(11.0 - j))
                        / 1024.0);
    CHECK(chi_square_gof(counts, probs) > 0.001);
}

TEST_CASE("slowdown events")
{
    RandomField f(7);
    auto none = slowdown_event_mc(kRight, 0.5, 1024, 500, f);
    CHECK(none.t_event.successes == 0);
    CHECK(none.x_event.successes == 0);
    CHECK(none.t_event.lo == 0.0);
    CHECK(none.t_event.hi > 0.0);

    // n = 1, level 1: T_1 > 1 iff the first step goes left.
    const std::int64_t reps = 100'000;
    auto one = slowdown_event_mc(kDelta16, 0.5, 1, reps, f);
    double p = 0.1, sd = std::sqrt(p * (1 - p) / reps);
    CHECK(std::abs(one.t_event.p_hat - p) < 3 * sd);
    CHECK(one.contradictions == 0);

    auto both = slowdown_event_mc(kDelta16, 0.3, 512, 5000, f);
    CHECK(both.contradictions == 0);
    CHECK(both.x_event.trials == 5000);
    CHECK(both.x_event.successes >= both.t_event.successes);

    SlowdownOptions t_only;
    t_only.mode = SlowdownMode::t_only;
    auto t = slowdown_event_mc(kDelta16, 0.3, 512, 5000, f, t_only);
    CHECK(t.t_event.successes == both.t_event.successes);
    CHECK(t.x_event.trials == 0);
}

TEST_CASE("walk and branching estimators of P(T > n) agree")
{
    RandomField f(8);
    const std::int64_t n = 1024, reps = 100'000;
    auto level = floor_power(n, 0.3).value;
    SlowdownOptions opts;
    opts.mode = SlowdownMode::t_only;
    auto walk = slowdown_event_mc(kDelta16, 0.3, n, reps, f, opts);
    auto branch = hitting_time_tail_via_branching(kDelta16, f, level, n, reps);
    Interval a{walk.t_event.lo, walk.t_event.hi}, b{branch.lo, branch.hi};
    CHECK(a.overlaps(b));
    CHECK(walk.t_event.successes > 10);
}

TEST_CASE("slowdown results do not depend on the worker count")
{
    RandomField f(9);
    SlowdownOptions one, four;
    one.keep_outcomes = four.keep_outcomes = true;
    four.workers = 4;
    auto a = slowdown_event_mc(kDelta16, 0.3, 256, 3000, f, one);
    auto b = slowdown_event_mc(kDelta16, 0.3, 256, 3000, f, four);
    CHECK(a.t_event.successes == b.t_event.successes);
    CHECK(a.x_event.successes == b.x_event.successes);
    for (std::size_t i = 0; i < a.outcomes.size(); ++i)
        CHECK(a.outcomes[i].x_n == b.outcomes[i].x_n);
}
