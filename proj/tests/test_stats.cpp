#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "isopurity/rng.hpp"
#include "isopurity/stats.hpp"

using namespace isopurity;
using namespace isopurity::stats;

namespace {

// population cumulants of a finite list viewed as a discrete distribution
std::vector<double> population_cumulants(const std::vector<double>& pop) {
    const double n = static_cast<double>(pop.size());
    double mu = 0.0;
    for (const double x : pop) mu += x;
    mu /= n;
    double m2 = 0, m3 = 0, m4 = 0, m5 = 0;
    for (const double x : pop) {
        const double d = x - mu;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        m5 += d * d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m5 /= n;
    return {mu, m2, m3, m4 - 3 * m2 * m2, m5 - 10 * m2 * m3};
}

}  // namespace

TEST_CASE("k-statistics on tiny samples") {
    const std::vector<double> s{1.0, 2.0, 3.0};
    const auto sum2 = k_statistics(s, 2);
    CHECK(sum2.mean == 2.0);
    CHECK(sum2.k_stats.at(1).estimate == sum2.mean);
    CHECK(sum2.k_stats.at(2).estimate == Catch::Approx(1.0).margin(1e-14));

    const auto sum3 = k_statistics(s, 3);
    CHECK(sum3.k_stats.at(3).estimate == Catch::Approx(0.0).margin(1e-14));

    CHECK_THROWS_AS(k_statistics(std::vector<double>{1.0, 2.0}, 3), TooFewSamples);
    CHECK_THROWS_AS(k_statistics(s, 6), UnsupportedOrder);
}

TEST_CASE("k-statistics are exactly unbiased (enumeration oracle)") {
    // average of k_r over all size-m iid draws from a small population equals
    // the population cumulant, exactly, for r <= 4 (and 5 with m >= 5)
    const std::vector<double> pop{0.0, 1.0, 3.0, 7.0};
    const auto kappa = population_cumulants(pop);
    const std::size_t p = pop.size();

    for (int m : {3, 4, 5}) {
        const int max_order = std::min(m, 5);
        std::vector<double> sums(max_order, 0.0);
        std::size_t total = 1;
        for (int i = 0; i < m; ++i) total *= p;

        std::vector<std::size_t> idx(m, 0);
        std::vector<double> draw(m);
        for (std::size_t code = 0; code < total; ++code) {
            std::size_t rem = code;
            for (int i = 0; i < m; ++i) {
                draw[i] = pop[rem % p];
                rem /= p;
            }
            const auto summary = k_statistics(draw, max_order);
            for (int r = 1; r <= max_order; ++r) sums[r - 1] += summary.k_stats.at(r).estimate;
        }
        for (int r = 1; r <= max_order; ++r) {
            const double mean_kr = sums[r - 1] / static_cast<double>(total);
            CHECK(mean_kr == Catch::Approx(kappa[r - 1]).margin(1e-9));
        }
    }
}

TEST_CASE("k-statistics on exponential draws match known cumulants") {
    // exponential(1): kappa_r = (r-1)!
    auto eng = rng::make_engine(314159, 0);
    std::vector<double> draws(200000);
    for (double& x : draws) x = -std::log(rng::uniform_open(eng));

    const auto summary = k_statistics(draws, 3, /*block_len=*/100);
    const auto& k2 = summary.k_stats.at(2);
    const auto& k3 = summary.k_stats.at(3);
    CHECK(std::abs(k2.estimate - 1.0) < 3.0 * k2.std_error);
    CHECK(std::abs(k3.estimate - 2.0) < 3.0 * k3.std_error);
    CHECK(std::abs(summary.mean - 1.0) < 3.0 * summary.k_stats.at(1).std_error);
}

TEST_CASE("jackknife error of the mean matches sigma/sqrt(n)") {
    auto eng = rng::make_engine(99, 0);
    std::vector<double> draws(50000);
    for (double& x : draws) x = rng::gaussian_pair(eng).first;
    const auto summary = k_statistics(draws, 2);
    const double expected_se = 1.0 / std::sqrt(50000.0);
    CHECK(summary.k_stats.at(1).std_error ==
          Catch::Approx(expected_se).epsilon(0.10));
}

TEST_CASE("order-5 flag") {
    std::vector<double> xs(100);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i % 7);
    CHECK(k_statistics(xs, 5).order5_high_variance);
    CHECK_FALSE(k_statistics(xs, 4).order5_high_variance);
}

TEST_CASE("empirical density basics") {
    const std::vector<double> vals{0.5, 1.5};
    const auto h = empirical_density(vals, 2, 0.0, 2.0);
    CHECK(h.densities[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(h.densities[1] == Catch::Approx(0.5).margin(1e-15));
    CHECK(h.count == 2);
    CHECK(h.out_of_range == 0);

    CHECK_THROWS_AS(empirical_density(std::vector<double>{}, 4, 0.0, 1.0), EmptyInput);
    CHECK_THROWS_AS(empirical_density(vals, 1, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(empirical_density(vals, 4, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(empirical_density(std::vector<double>{5.0}, 4, 0.0, 1.0), EmptyInput);

    const auto part = empirical_density(std::vector<double>{0.5, 9.0}, 2, 0.0, 2.0);
    CHECK(part.out_of_range == 1);
}

TEST_CASE("empirical density integrates to one") {
    auto eng = rng::make_engine(7, 0);
    std::vector<double> vals(20000);
    for (double& x : vals) x = 4.0 * rng::uniform_unit(eng) - 1.0;
    const auto h = empirical_density(vals, 37, 0.0, 2.0);  // some mass out of range
    double integral = 0.0;
    for (std::size_t i = 0; i < h.densities.size(); ++i)
        integral += h.densities[i] * (h.edges[i + 1] - h.edges[i]);
    CHECK(integral == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("uniform histogram hits the flat density") {
    auto eng = rng::make_engine(2025, 0);
    std::vector<double> vals(100000);
    for (double& x : vals) x = 4.0 * rng::uniform_unit(eng);
    const auto h = empirical_density(vals, 40, 0.0, 4.0);
    for (const double d : h.densities) CHECK(d == Catch::Approx(0.25).epsilon(0.05));
}

TEST_CASE("l1 distance") {
    const std::vector<double> vals{0.25, 0.75};
    const auto h = empirical_density(vals, 2, 0.0, 1.0);
    CHECK(l1_distance(h, [](double) { return 1.0; }) == Catch::Approx(0.0).margin(1e-15));

    // uniform empirical vs analytic 2*lambda: exact L1 of |1-2x| is 1/2
    auto eng = rng::make_engine(55, 0);
    std::vector<double> u(200000);
    for (double& x : u) x = rng::uniform_unit(eng);
    const auto hu = empirical_density(u, 10, 0.0, 1.0);
    CHECK(l1_distance(hu, [](double x) { return 2.0 * x; }) == Catch::Approx(0.5).margin(0.05));
}

TEST_CASE("l1 decreases with sample size") {
    const auto draw = [](std::size_t count, std::uint64_t seed) {
        auto eng = rng::make_engine(seed, 0);
        std::vector<double> v(count);
        for (double& x : v) x = rng::uniform_unit(eng);
        return v;
    };
    const auto flat = [](double) { return 1.0; };
    const double coarse = l1_distance(empirical_density(draw(1000, 3), 20, 0, 1), flat);
    const double fine = l1_distance(empirical_density(draw(100000, 3), 20, 0, 1), flat);
    CHECK(fine < coarse);
}

TEST_CASE("two-sample KS") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(ks_two_sample(a, a) == 0.0);
    CHECK(ks_two_sample(std::vector<double>{1.0}, std::vector<double>{2.0}) == 1.0);
    CHECK_THROWS_AS(ks_two_sample(a, std::vector<double>{}), EmptyInput);

    auto eng = rng::make_engine(17, 0);
    std::vector<double> u1(10000), u2(10000);
    for (double& x : u1) x = rng::uniform_unit(eng);
    for (double& x : u2) x = rng::uniform_unit(eng);
    CHECK(ks_two_sample(u1, u2) < 0.03);
}
