#include <doctest.h>

#include <cmath>
#include <vector>

#include "cookie/heavytail.hpp"

using namespace cookie;

TEST_CASE("Pareto quantile and moments")
{
    ParetoSpec s{2.5, 3.0};
    CHECK(pareto_quantile(s, 1.0) == 3.0);
    CHECK(pareto_quantile(s, std::pow(2.0, -2.5)) == doctest::Approx(6.0));
    CHECK(ParetoSpec{2, 1}.mean() == doctest::Approx(2.0));
    CHECK(std::isnan(ParetoSpec{0.5, 1}.mean()));
    CHECK(s.c0() == doctest::Approx(std::pow(3.0, 2.5)));
    CHECK_THROWS_AS((ParetoSpec{0, 1}.check()), std::invalid_argument);
    CHECK_THROWS_AS((ParetoSpec{1, -1}.check()), std::invalid_argument);
}

TEST_CASE("empirical Pareto tails")
{
    RandomField f(1);
    for (ParetoSpec s : {ParetoSpec{2.5, 1}, ParetoSpec{0.5, 2}})
    {
        const int samples = 1'000'000;
        std::vector<double> xs;
        for (int i = 0; i < samples; ++i)
        {
            xs.push_back(sample_pareto(s, f, 0, static_cast<std::uint64_t>(i)));
            CHECK(xs.back() >= s.t0);
        }
        for (double t : {2.0, 4.0, 8.0})
        {
            double tt = t * s.t0;
            double emp = 0;
            for (double x : xs)
                emp += x > tt;
            emp /= samples;
            CHECK(emp / std::pow(t, -s.alpha) == doctest::Approx(1.0).epsilon(0.1));
        }
    }

    // an infinite-mean running average keeps growing
    ParetoSpec heavy{0.5, 1};
    double sum = 0;
    std::vector<double> means;
    for (int i = 1; i <= 1'000'000; ++i)
    {
        sum += sample_pareto(heavy, f, 1, static_cast<std::uint64_t>(i));
        if (i == 1000 || i == 1'000'000)
            means.push_back(sum / i);
    }
    CHECK(means[1] > 10 * means[0]);
}

TEST_CASE("sum tail argument checks")
{
    RandomField f(2);
    ParetoSpec light{2.5, 1}, heavy{0.5, 1};
    CHECK_THROWS_AS(sum_tail_experiment(heavy, 1, {10}, 5, 1, 10, f), std::invalid_argument);
    CHECK_THROWS_AS(sum_tail_experiment(light, 1, {10}, 1.5, 1, 10, f), std::invalid_argument);
    CHECK_THROWS_AS(sum_tail_experiment(heavy, 2, {10}, 2, 0.6, 10, f), std::invalid_argument);
    CHECK_THROWS_AS(sum_tail_experiment(light, 2, {10}, -1, 0.4, 10, f), std::invalid_argument);
    CHECK_THROWS_AS(sum_tail_experiment(light, 3, {10}, 5, 0.4, 10, f), std::invalid_argument);
}

TEST_CASE("sum tails")
{
    RandomField f(3);
    ParetoSpec light{2.5, 1};
    auto far = sum_tail_experiment(light, 1, {100}, 1e9, 1, 10'000, f);
    CHECK(far.points[0].estimate.successes == 0);
    CHECK(far.points[0].estimate.hi < 1e-3);

    auto a = sum_tail_experiment(light, 1, {50, 100}, light.mean() + 1, 1, 100'000, f);
    auto b = sum_tail_experiment(light, 1, {50, 100}, light.mean() + 2, 1, 100'000, f);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(a.points[i].estimate.p_hat >= b.points[i].estimate.p_hat);
    CHECK(a.target_slope == doctest::Approx(-1.5));
    REQUIRE(a.fit);

    auto w = sum_tail_experiment(light, 1, {50, 100}, light.mean() + 1, 1, 20'000, f, 1);
    auto w4 = sum_tail_experiment(light, 1, {50, 100}, light.mean() + 1, 1, 20'000, f, 4);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(w.points[i].estimate.successes == w4.points[i].estimate.successes);

    auto part2 = sum_tail_experiment(ParetoSpec{0.5, 1}, 2, {10'000}, 2, 0.4, 200'000, f);
    CHECK(part2.points[0].terms == 39);
    CHECK(part2.points[0].ratio == doctest::Approx(1.0).epsilon(0.25));
}
