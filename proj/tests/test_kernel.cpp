#include <doctest.h>

#include <cmath>
#include <vector>

#include "cookie/kernel.hpp"
#include "cookie/stats.hpp"

using namespace cookie;

namespace
{
auto const kFair = EnvironmentModel::homogeneous(0.5, 1);
auto const kDelta16 = EnvironmentModel::deterministic({0.9, 0.9});

double fair_negbin(std::int64_t r, std::int64_t m)
{
    return std::exp(std::lgamma(static_cast<double>(m + r)) - std::lgamma(m + 1.0)
                    - std::lgamma(static_cast<double>(r))
                    - static_cast<double>(m + r) * std::log(2.0));
}

/*!
 * Enumerate every bit string of length `len`, weight it by the mixture, and
 * apply the offspring rule. Outcomes decided within `len` trials are exact.
 */
std::vector<double> brute_force(EnvironmentModel const& model, ProcessKind kind,
                                std::int64_t k, int len)
{
    auto rule = offspring_rule(kind, k);
    std::vector<double> mass(static_cast<std::size_t>(len) + 1, 0.0);
    if (rule.needed == 0)
    {
        mass[0] = 1;
        return mass;
    }
    for (std::size_t c = 0; c < model.components(); ++c)
    {
        auto const& stack = model.stacks()[c];
        for (std::uint32_t bits = 0; bits < (1u << len); ++bits)
        {
            double w = model.weights()[c];
            std::int64_t stops = 0, count = 0;
            bool decided = false;
            for (int j = 0; j < len; ++j)
            {
                bool success = (bits >> j) & 1u;
                double p = stack.at(static_cast<std::uint64_t>(j + 1));
                w *= success ? p : 1 - p;
                if (success == rule.stop_on_success)
                    ++stops;
                else
                    ++count;
                if (stops == rule.needed)
                {
                    decided = true;
                    // the remaining bits are free: weight them out
                    break;
                }
            }
            if (!decided)
                continue;
            // bits beyond the decision point were enumerated too; keep only the
            // string whose tail is all zeros to count each prefix once
            int used = static_cast<int>(stops + count);
            if (used < len && (bits >> used) != 0)
                continue;
            mass[static_cast<std::size_t>(count)] += w;
        }
    }
    return mass;
}
}  // namespace

TEST_CASE("fair V kernel at k = 0 against bit enumeration")
{
    auto kern = exact_kernel(kFair, ProcessKind::V, 0);
    auto brute = brute_force(kFair, ProcessKind::V, 0, 20);
    for (std::size_t m = 0; m < 19; ++m)
    {
        CHECK(kern.mass[m] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(m) - 1)).epsilon(1e-14));
        CHECK(kern.mass[m] == doctest::Approx(brute[m]).epsilon(1e-12));
    }
}

TEST_CASE("cookie and mixture kernels against bit enumeration")
{
    auto const mix = EnvironmentModel::mixture({{0.9, 0.2, 0.7}, {0.4, 1.0}}, {0.3, 0.7});
    const int len = 18;
    for (auto const* model : {&kDelta16, &mix})
        for (auto kind : {ProcessKind::W, ProcessKind::Z, ProcessKind::V})
            for (std::int64_t k : {0, 1, 2, 3, 5})
            {
                auto kern = exact_kernel(*model, kind, k);
                auto brute = brute_force(*model, kind, k, len);
                auto needed = offspring_rule(kind, k).needed;
                for (std::int64_t m = 0; m + needed <= len; ++m)
                    CHECK(kern.mass[static_cast<std::size_t>(m)]
                          == doctest::Approx(brute[static_cast<std::size_t>(m)]).epsilon(1e-12));
            }
}

TEST_CASE("fair V kernel is NegBin(k+1, 1/2)")
{
    for (std::int64_t k = 0; k <= 100; ++k)
    {
        auto kern = exact_kernel(kFair, ProcessKind::V, k);
        std::vector<double> nb;
        for (std::int64_t m = 0; m <= kern.trunc(); ++m)
            nb.push_back(fair_negbin(k + 1, m));
        CHECK(total_variation(kern.mass, nb) < 1e-9);
        CHECK(kern.mean() == doctest::Approx(static_cast<double>(k + 1)).epsilon(1e-9));
    }
}

TEST_CASE("kernel drifts on the delta = 1.6 model")
{
    for (std::int64_t k = 2; k <= 60; ++k)
        CHECK(std::abs(exact_kernel(kDelta16, ProcessKind::V, k).mean() - (k - 0.6)) < 1e-9);
    for (std::int64_t k = 3; k <= 60; ++k)
    {
        CHECK(std::abs(exact_kernel(kDelta16, ProcessKind::Z, k).mean() - (k - 1.6)) < 1e-9);
        CHECK(std::abs(exact_kernel(kDelta16, ProcessKind::W, k).mean() - (k + 1.6)) < 1e-9);
    }
}

TEST_CASE("kernel conservation")
{
    auto const mix = EnvironmentModel::mixture({{1, 1}, {0, 0}, {0.3}}, {0.25, 0.25, 0.5});
    for (auto const* model : {&kFair, &kDelta16, &mix})
        for (auto kind : {ProcessKind::W, ProcessKind::Z, ProcessKind::V})
            for (std::int64_t k = 0; k <= 200; k += 7)
            {
                auto kern = exact_kernel(*model, kind, k);
                for (double m : kern.mass)
                    CHECK(m >= 0);
                CHECK(std::abs(kern.total() + kern.lost_mass - 1) < 1e-12);
                CHECK(kern.lost_mass < 1e-12);
            }
    // A fixed small window reports its lost mass honestly.
    KernelOptions small;
    small.trunc = 10;
    small.auto_grow = false;
    auto cut = exact_kernel(kFair, ProcessKind::V, 5, small);
    CHECK(cut.lost_mass > 0.1);
    CHECK(std::abs(cut.total() + cut.lost_mass - 1) < 1e-12);
}

TEST_CASE("n-step laws")
{
    auto zero = n_step_distribution(kDelta16, ProcessKind::V, 7, 0);
    CHECK(zero.mass[7] == 1.0);
    CHECK(zero.total() == 1.0);

    // Two fair V steps from 0, by explicit convolution of NegBin kernels.
    auto two = n_step_distribution(kFair, ProcessKind::V, 0, 2);
    for (std::int64_t m = 0; m < 60; ++m)
    {
        double conv = 0;
        for (std::int64_t j = 0; j < 400; ++j)
            conv += fair_negbin(1, j) * fair_negbin(j + 1, m);
        CHECK(two.mass[static_cast<std::size_t>(m)] == doctest::Approx(conv).epsilon(1e-10));
    }
    CHECK(std::abs(two.total() + two.lost_mass - 1) < 1e-12);

    auto z = n_step_distribution(kDelta16, ProcessKind::Z, 10, 30);
    CHECK(std::abs(z.total() + z.lost_mass - 1) < 1e-12);
    CHECK(z.mass[0] > 0.1);  // absorbing state collects mass
}

TEST_CASE("iterates of s -> 1/(2 - s)")
{
    CHECK(phi_iterate(2, 0.5) == doctest::Approx(0.75));
    for (double s : {0.1, 0.5, 0.9, 1.0})
    {
        double it = s;
        for (std::int64_t k = 1; k <= 10; ++k)
        {
            it = 1 / (2 - it);
            CHECK(phi_iterate(k, s) == doctest::Approx(it).epsilon(1e-12));
        }
    }
}

TEST_CASE("generating-function bound at s = 1 and just above")
{
    for (std::int64_t v : {0, 5, 20})
        for (std::int64_t n : {1, 5, 20})
        {
            auto at_one = vngf_bound_check(kDelta16, v, n, 1.0);
            CHECK(at_one.rhs == doctest::Approx(1.0));
            CHECK(at_one.holds);
            auto above = vngf_bound_check(kDelta16, v, n, 1 + 0.5 / static_cast<double>(n));
            CHECK(above.holds);
            CHECK(above.tail_bound >= 0);
        }
    CHECK_THROWS_AS(vngf_bound_check(kDelta16, 0, 5, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(vngf_bound_check(kDelta16, 0, 5, 0.0), std::invalid_argument);
}

TEST_CASE("below s = 1 the left side is at least P(V_n = 0)")
{
    // s^0 = 1 contributes P(V_n = 0) in full, which the closed form undercuts.
    auto chk = vngf_bound_check(kDelta16, 0, 1, 0.5);
    auto law = n_step_distribution(kDelta16, ProcessKind::V, 0, 1);
    CHECK(chk.lhs >= law.mass[0]);
    CHECK(law.mass[0] == doctest::Approx(0.9));
    CHECK(chk.rhs == doctest::Approx(0.25 / 1.5));
}

TEST_CASE("lower bound on P(V_n >= n) and exponential tail in y")
{
    std::vector<double> scaled;
    for (std::int64_t n : {4, 8, 16, 32, 64})
    {
        auto law = n_step_distribution(kDelta16, ProcessKind::V, 0, n);
        double p = law.lost_mass;
        for (std::int64_t m = n; m <= law.trunc(); ++m)
            p += law.mass[static_cast<std::size_t>(m)];
        scaled.push_back(std::pow(static_cast<double>(n), 0.6) * p);
    }
    double lo = *std::min_element(scaled.begin(), scaled.end());
    double hi = *std::max_element(scaled.begin(), scaled.end());
    CHECK(lo > 0.01);
    // the decrease flattens out
    CHECK(scaled[4] / scaled[3] > 0.9);
    CHECK(hi / lo < 3);

    const std::int64_t n = 16;
    auto law = n_step_distribution(kDelta16, ProcessKind::V, 0, n);
    std::vector<TailPoint> tail;
    for (std::int64_t y = 5; y <= 10; ++y)
    {
        double p = 0;
        for (std::int64_t m = y * n + 1; m <= law.trunc(); ++m)
            p += law.mass[static_cast<std::size_t>(m)];
        tail.push_back({static_cast<double>(y), p, 0, 0, 0, {}});
    }
    // log-linear in y: successive log-differences stay negative and do not flatten
    for (std::size_t i = 1; i < tail.size(); ++i)
    {
        double step = std::log(tail[i].p_hat) - std::log(tail[i - 1].p_hat);
        CHECK(step < -0.5);
    }
}
