#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cookie/environment.hpp"

using namespace cookie;

TEST_CASE("delta")
{
    CHECK(EnvironmentModel::deterministic({0.9, 0.9}).delta() == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(EnvironmentModel::homogeneous(0.5, 1).delta() == 0.0);
    CHECK(EnvironmentModel::homogeneous(0.5, 7).delta() == 0.0);
    CHECK(EnvironmentModel::mixture({{1, 1}, {0, 0}}, {0.5, 0.5}).delta() == 0.0);
    CHECK(EnvironmentModel::deterministic({0.875, 0.875, 0.875, 0.875}).delta() == 3.0);
}

TEST_CASE("delta is linear in mixtures")
{
    std::vector<std::vector<double>> stacks{{0.9, 0.7}, {0.2}, {1.0, 0.5, 0.8}};
    std::vector<double> w{0.25, 0.5, 0.25};
    double expected = 0;
    for (std::size_t i = 0; i < stacks.size(); ++i)
        expected += w[i] * EnvironmentModel::deterministic(stacks[i]).delta();
    CHECK(EnvironmentModel::mixture(stacks, w).delta()
          == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("validate")
{
    auto ok = EnvironmentModel::deterministic({0.9, 0.9}).validate();
    CHECK(ok.all_pass());
    CHECK(ok.mean_prod_right == doctest::Approx(0.81));
    CHECK(ok.mean_prod_left == doctest::Approx(0.01));
    CHECK(ok.transient_right);

    auto bad = EnvironmentModel::deterministic({1, 1}).validate();
    CHECK_FALSE(bad.nondegenerate);
    CHECK(bad.mean_prod_left == 0.0);
    CHECK(bad.bounded_cookies);
    CHECK(bad.iid_sites);

    auto mix = EnvironmentModel::mixture({{1, 1}, {0, 0}}, {0.5, 0.5}).validate();
    CHECK(mix.nondegenerate);
    CHECK(mix.mean_prod_right == doctest::Approx(0.5));
    CHECK(mix.mean_prod_left == doctest::Approx(0.5));

    // Non-degeneracy fails iff one of the two products has zero mean.
    auto left_only = EnvironmentModel::mixture({{0, 0.5}, {0.3, 0.2}}, {0.5, 0.5}).validate();
    CHECK(left_only.nondegenerate);
    auto zero_right = EnvironmentModel::mixture({{0, 0.5}, {0.3, 0.0}}, {0.5, 0.5}).validate();
    CHECK_FALSE(zero_right.nondegenerate);
}

TEST_CASE("construction errors")
{
    CHECK_THROWS_AS(EnvironmentModel::mixture({{0.5}, {0.5}}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(EnvironmentModel::mixture({{0.5}, {0.5}}, {1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(EnvironmentModel::deterministic({1.2}), std::invalid_argument);
    CHECK_THROWS_AS(EnvironmentModel::mixture({{0.5}}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("stacks are padded to M with 1/2")
{
    auto m = EnvironmentModel::mixture({{0.9}, {0.1, 0.8, 0.7}}, {0.5, 0.5});
    CHECK(m.cookies() == 3);
    CHECK(m.stacks()[0].probs.size() == 3);
    CHECK(m.stacks()[0].at(2) == 0.5);
    CHECK(m.stacks()[1].at(4) == 0.5);
}

TEST_CASE("sample_stack")
{
    RandomField f(17);
    auto det = EnvironmentModel::deterministic({0.9, 0.9});
    for (std::int64_t x = -5; x <= 5; ++x)
        CHECK(det.sample_stack(x, f).probs == std::vector<double>{0.9, 0.9});

    auto mix = EnvironmentModel::mixture({{1, 1}, {0, 0}, {0.5, 0.5}}, {0.2, 0.3, 0.5});
    CHECK(&mix.sample_stack(12, f) == &mix.sample_stack(12, f));
    std::int64_t counts[3] = {0, 0, 0};
    const std::int64_t sites = 100'000;
    for (std::int64_t x = 0; x < sites; ++x)
        ++counts[mix.component_at(x, f)];
    for (int i = 0; i < 3; ++i)
    {
        double w = mix.weights()[static_cast<std::size_t>(i)];
        double sd = std::sqrt(w * (1 - w) / static_cast<double>(sites));
        CHECK(std::abs(static_cast<double>(counts[i]) / sites - w) < 3 * sd);
    }
}
