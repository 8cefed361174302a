#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cookie/branching.hpp"
#include "cookie/kernel.hpp"
#include "cookie/stats.hpp"
#include "cookie/walk.hpp"

using namespace cookie;

namespace
{
auto const kFair = EnvironmentModel::homogeneous(0.5, 1);
auto const kRight = EnvironmentModel::homogeneous(1.0, 1);
auto const kDelta16 = EnvironmentModel::deterministic({0.9, 0.9});

std::vector<std::int64_t> one_generation(EnvironmentModel const& model, ProcessKind kind,
                                         std::int64_t k, std::int64_t samples,
                                         Sampling sampling, std::uint64_t seed)
{
    RandomField f(seed);
    OffspringSampler sampler(model, f, sampling);
    std::vector<std::int64_t> out;
    for (std::int64_t i = 0; i < samples; ++i)
        out.push_back(sampler.next(kind, k, i));
    return out;
}

double mean_of(std::vector<std::int64_t> const& xs)
{
    double s = 0;
    for (auto x : xs)
        s += static_cast<double>(x);
    return s / static_cast<double>(xs.size());
}

double sd_of(std::vector<std::int64_t> const& xs)
{
    double m = mean_of(xs), s = 0;
    for (auto x : xs)
        s += (static_cast<double>(x) - m) * (static_cast<double>(x) - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}
}  // namespace

TEST_CASE("absorbing starts")
{
    RandomField f(1);
    auto w = run_W(kDelta16, f, 0, 100);
    CHECK(w.generations == std::vector<std::int64_t>{0});
    auto z = run_Z(kDelta16, f, 0, 100);
    CHECK(z.generations == std::vector<std::int64_t>{0});
    auto c = run_W_conditioned_to_die(kDelta16, f, 0, 100, 10);
    CHECK(c.accepted);
    CHECK(c.rejections == 0);
}

TEST_CASE("W offspring from one particle")
{
    // successes before the first failure: prod_{j<=m} omega_j (1 - omega_{m+1}),
    // with fair coins past the stack
    for (double p : {0.3, 0.5, 0.7})
    {
        auto model = EnvironmentModel::homogeneous(p, 3);
        auto const& stack = model.stacks()[0];
        std::vector<double> probs(64, 0);
        double run = 1, tail = 1;
        for (std::size_t m = 0; m < 63; ++m)
        {
            probs[m] = run * (1 - stack.at(m + 1));
            run *= stack.at(m + 1);
            tail -= probs[m];
        }
        probs[63] = tail;
        for (auto sampling : {Sampling::shared_bits, Sampling::fast})
        {
            auto xs = one_generation(model, ProcessKind::W, 1, 100'000, sampling, 2);
            std::vector<std::int64_t> counts(64, 0);
            for (auto x : xs)
                ++counts[static_cast<std::size_t>(std::min<std::int64_t>(x, 63))];
            CHECK(chi_square_gof(counts, probs) > 0.001);
        }
    }
    // the fair case is Geometric(1/2)
    auto xs = one_generation(kFair, ProcessKind::W, 1, 100'000, Sampling::fast, 3);
    std::vector<double> geo;
    for (int m = 0; m < 60; ++m)
        geo.push_back(std::ldexp(1.0, -m - 1));
    CHECK(total_variation(empirical_pmf(xs), geo) < 0.01);
}

TEST_CASE("one-step drifts on the delta = 1.6 model")
{
    const std::int64_t samples = 100'000;
    auto w = one_generation(kDelta16, ProcessKind::W, 100, samples, Sampling::fast, 3);
    CHECK(std::abs(mean_of(w) - 100 - 1.6) < 3 * sd_of(w) / std::sqrt(samples));
    auto z = one_generation(kDelta16, ProcessKind::Z, 10, samples, Sampling::fast, 4);
    CHECK(std::abs(mean_of(z) - 10 + 1.6) < 3 * sd_of(z) / std::sqrt(samples));
    auto v = one_generation(kDelta16, ProcessKind::V, 10, samples, Sampling::shared_bits, 5);
    CHECK(std::abs(mean_of(v) - 10 + 0.6) < 3 * sd_of(v) / std::sqrt(samples));
}

TEST_CASE("fair one-generation laws")
{
    const std::int64_t samples = 1'000'000;
    auto z = one_generation(kFair, ProcessKind::Z, 4, samples, Sampling::fast, 6);
    auto exact_z = exact_kernel(kFair, ProcessKind::Z, 4);
    CHECK(total_variation(empirical_pmf(z), exact_z.mass) < 0.01);
    // NegBin(4, 1/2) failures, by the closed form
    std::vector<double> nb;
    for (int m = 0; m < 200; ++m)
        nb.push_back(std::exp(std::lgamma(m + 4.0) - std::lgamma(m + 1.0) - std::lgamma(4.0))
                     * std::pow(0.5, m + 4));
    CHECK(total_variation(empirical_pmf(z), nb) < 0.01);

    auto v = one_generation(kFair, ProcessKind::V, 0, samples, Sampling::fast, 7);
    std::vector<double> geo;
    for (int m = 0; m < 200; ++m)
        geo.push_back(std::pow(0.5, m + 1));
    CHECK(total_variation(empirical_pmf(v), geo) < 0.01);

    auto v1 = run_V(EnvironmentModel::homogeneous(1.0, 10), RandomField(8), 3, 50);
    CHECK(std::all_of(v1.generations.begin() + 1, v1.generations.end(),
                      [](std::int64_t g) { return g == 0; }));
}

TEST_CASE("MC one-step law against the exact kernel")
{
    const std::int64_t samples = 1'000'000;
    auto mix = EnvironmentModel::mixture({{0.9, 0.2, 0.7}, {0.4, 1.0}}, {0.3, 0.7});
    for (auto kind : {ProcessKind::W, ProcessKind::Z, ProcessKind::V})
    {
        auto xs = one_generation(mix, kind, 5, samples, Sampling::fast, 9);
        auto exact = exact_kernel(mix, kind, 5);
        double bound = 4 * std::sqrt(static_cast<double>(exact.trunc()) / samples);
        CHECK(total_variation(empirical_pmf(xs), exact.mass) < bound);
    }
}

TEST_CASE("W conditioned to die")
{
    RandomField f(10);
    for (int i = 0; i < 20; ++i)
    {
        auto c = run_W_conditioned_to_die(kDelta16, f.replica(i), 8, 1'000'000, 100'000, 32);
        REQUIRE(c.accepted);
        CHECK(c.trace.died());
    }

    // Acceptance decays like n^{1 - delta}. Escaping at 4n keeps the
    // problem scale-free, so only the prefactor changes.
    std::vector<TailPoint> pts;
    for (int e = 3; e <= 7; ++e)
    {
        std::int64_t n = std::int64_t{1} << e;
        std::int64_t accepted = 0, attempts = 0;
        for (int i = 0; i < 1000; ++i)
        {
            auto c = run_W_conditioned_to_die(kDelta16, f.replica(1000 * e + i), n,
                                              1'000'000, 1'000'000, 4 * n);
            accepted += c.accepted;
            attempts += c.rejections + 1;
        }
        auto p = make_proportion(accepted, attempts);
        pts.push_back({static_cast<double>(n), p.p_hat, p.se, attempts, accepted, {}});
    }
    CHECK(loglog_slope(pts).slope == doctest::Approx(-0.6).epsilon(0.2 / 0.6));
}

TEST_CASE("reconstruction on a hand-checkable path")
{
    // Find a field whose walk goes right then straight back.
    for (std::uint64_t s = 0;; ++s)
    {
        RandomField f(s);
        auto r = returns_and_excursions(kFair, f, 1, 10);
        if (!r.completed() || r.steps != 2 || r.max_site != 1)
            continue;
        auto rec = reconstruct_from_walk(kFair, r, f, 1);
        CHECK(rec.check.pass);
        CHECK(rec.w.generations.front() == 1);
        CHECK(rec.w.generations[1] == r.up(1));
        CHECK(rec.z.generations.front() == 0);
        break;
    }
}

TEST_CASE("pathwise identities on seeded replicas")
{
    RandomField f(11);
    int recon = 0;
    for (std::uint64_t s = 0; s < 1000; ++s)
    {
        auto field = f.replica(s);
        auto r = returns_and_excursions(kFair, field, 10, 1'000'000);
        if (r.completed())
        {
            ++recon;
            CHECK(reconstruct_from_walk(kFair, r, field, 10).check.pass);
        }
    }
    CHECK(recon > 900);

    auto r = run_to_hitting(kRight, f, 30, 100);
    CHECK(verify_backward_recursion(kRight, r, f, 30).pass);

    for (std::uint64_t s = 0; s < 100; ++s)
    {
        auto field = f.replica(s);
        auto walk = run_to_hitting(kDelta16, field, 1000, 100'000'000);
        REQUIRE(walk.completed());
        CHECK(verify_backward_recursion(kDelta16, walk, field, 1000).pass);
        auto tail = coupled_tail(kDelta16, field, 1000, 100'000'000);
        CHECK(tail.dominated);
        CHECK(tail.hitting_time == walk.steps);
    }
}

TEST_CASE("couplings")
{
    RandomField f(12);
    // V_n = 0 gives Z^{(n)} = 0
    auto right = coupled_tail(kRight, f, 10, 100);
    CHECK(right.z_after.generations == std::vector<std::int64_t>{0});
    CHECK(right.dominated);
    CHECK(right.hitting_time == 10);

    for (std::uint64_t s = 0; s < 1000; ++s)
        CHECK(coupled_tail(kFair, f.replica(s), 20, 10'000).dominated);

    auto same = monotone_pair(kDelta16, f, 7, 7, 1000);
    CHECK(same.lower.generations == same.upper.generations);
    for (std::uint64_t s = 0; s < 1000; ++s)
        CHECK(monotone_pair(kDelta16, f.replica(s), 5, 50, 100'000).ordered);
    for (std::uint64_t s = 0; s < 10'000; ++s)
        CHECK(monotone_pair(kFair, f.replica(s), 1, 2, 100'000).ordered);
}

TEST_CASE("regeneration cycles")
{
    RandomField f(13);
    auto trivial = regeneration_sampler(kRight, f, 1000);
    CHECK(std::all_of(trivial.cycle_lengths.begin(), trivial.cycle_lengths.end(),
                      [](std::int64_t r) { return r == 1; }));
    CHECK(std::all_of(trivial.progenies.begin(), trivial.progenies.end(),
                      [](std::int64_t s) { return s == 0; }));

    auto sum = regeneration_sampler(kDelta16, f, 1'000'000);
    CHECK(sum.cycle_lengths.size() == 1'000'000);
    CHECK(sum.budget_exceeded == 0);
    CHECK(*std::min_element(sum.cycle_lengths.begin(), sum.cycle_lengths.end()) >= 1);
    std::vector<double> r(sum.cycle_lengths.begin(), sum.cycle_lengths.end());
    CHECK(std::abs(lag1_autocorrelation(r)) < 0.01);
    CHECK(sum.r_bar.mean > 1);

    auto pts = empirical_tail({1, 2, 3, 4}, {0.0, 2.0, 4.0});
    CHECK(pts[0].p_hat == 1.0);
    CHECK(pts[1].p_hat == 0.5);
    CHECK(pts[2].p_hat == 0.0);
}

TEST_CASE("hitting profiles")
{
    RandomField f(14);
    auto prof = hitting_profile_Z(kDelta16, f, 5, 3, 7, 1000);
    CHECK(prof.estimates[0].p_hat == 1.0);  // u = m

    // Critical fair case: each doubling roughly halves the probability.
    auto fair = hitting_profile_Z(kFair, f, 5, 3, 9, 200'000);
    auto ratios = fair.ratios();
    for (std::size_t j = 1; j < ratios.size(); ++j)
        CHECK(ratios[j] == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("progeny tail scales like z^{1+delta} n^{-(1+delta)/2}")
{
    RandomField f(15);
    const std::int64_t n = std::int64_t{1} << 16;
    std::vector<double> scaled;
    for (std::int64_t z : {16, 32, 64, 128})
    {
        // small starts need more replicas for the same number of successes
        auto p = z_progeny_tail(kDelta16, f, z, n, 2'000'000 / (z / 16));
        REQUIRE(p.successes > 50);
        scaled.push_back(p.p_hat * std::pow(static_cast<double>(z), -2.6)
                         * std::pow(static_cast<double>(n), 1.3));
    }
    double centre = 1;
    for (double s : scaled)
        centre *= s;
    centre = std::pow(centre, 1.0 / static_cast<double>(scaled.size()));
    for (double s : scaled)
    {
        CHECK(s / centre >= 0.2);
        CHECK(s / centre <= 5.0);
    }
}
