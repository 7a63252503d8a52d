#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "isopurity/coulomb.hpp"
#include "isopurity/haar.hpp"
#include "isopurity/stats.hpp"
#include "isopurity/theory.hpp"

using namespace isopurity;
using namespace isopurity::coulomb;

TEST_CASE("log weight closed-form values") {
    const std::vector<double> l{0.75, 0.25};
    CHECK(log_weight(l, 0.0, Rational(0), 2) ==
          Catch::Approx(2.0 * std::log(0.5)).margin(1e-12));
    CHECK(log_weight(l, 1.0, Rational(0), 2) ==
          Catch::Approx(2.0 * std::log(0.5) - 8.0 * 0.625).margin(1e-12));

    const std::vector<double> coincident{0.5, 0.5};
    CHECK(std::isinf(log_weight(coincident, 1.0, Rational(0), 2)));
    CHECK(log_weight(coincident, 1.0, Rational(0), 2) < 0);

    CHECK_THROWS_AS(log_weight(std::vector<double>{1.5, -0.5}, 0.0, Rational(0), 2),
                    DomainError);

    // mu term: + mu*n*sum(log lambda)
    const double with_mu = log_weight(l, 0.0, Rational(1), 2);
    CHECK(with_mu ==
          Catch::Approx(2.0 * std::log(0.5) + 2.0 * (std::log(0.75) + std::log(0.25)))
              .margin(1e-12));
}

TEST_CASE("init modes") {
    const auto jitter = init_chain(8, 0.0, Rational(0), 5, InitMode::UniformJitter);
    double sum = 0.0;
    for (const double l : jitter.lambdas) {
        CHECK(l > 0.9 / 8.0);
        CHECK(l < 1.1 / 8.0);
        sum += l;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-14));

    const auto again = init_chain(8, 0.0, Rational(0), 5, InitMode::UniformJitter);
    CHECK(again.lambdas == jitter.lambdas);

    const auto haar_init = init_chain(8, 0.0, Rational(0), 5, InitMode::HaarDraw);
    double hsum = 0.0;
    for (const double l : haar_init.lambdas) {
        CHECK(l > 0.0);
        hsum += l;
    }
    CHECK(hsum == Catch::Approx(1.0).margin(1e-12));

    CHECK_THROWS_AS(init_chain(1, 0.0, Rational(0), 5, InitMode::UniformJitter), InvalidDims);
    CHECK_THROWS_AS(init_chain(8, 0.0, Rational(1, 3), 5, InitMode::HaarDraw), InvalidDims);
    // mu = 1/2 works at n=8: m = 12
    CHECK_NOTHROW(init_chain(8, 0.0, Rational(1, 2), 5, InitMode::HaarDraw));
}

TEST_CASE("incremental weight updates agree with recomputation") {
    auto chain = init_chain(12, 1.0, Rational(1, 2), 77, InitMode::UniformJitter);
    for (int block = 0; block < 20; ++block) {
        for (int k = 0; k < 25; ++k) sweep_once(chain, /*adapt=*/true);
        const double fresh = log_weight(chain.lambdas, chain.beta, chain.mu, chain.n);
        CHECK(chain.log_weight_cached() == Catch::Approx(fresh).margin(1e-9));
    }
}

TEST_CASE("simplex and positivity are preserved exactly") {
    auto chain = init_chain(6, -0.02, Rational(0), 13, InitMode::UniformJitter);
    chain.step = 50.0;  // violent proposals hammer the positivity wall
    for (int s = 0; s < 2000; ++s) sweep_once(chain, false);
    double sum = 0.0;
    for (const double l : chain.lambdas) {
        CHECK(l > 0.0);
        sum += l;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("step adaptation reaches the target window") {
    auto chain = init_chain(16, 0.0, Rational(0), 21, InitMode::UniformJitter);
    RunOptions opts;
    opts.sweeps = 6000;
    opts.burn_in = 1000;
    const auto out = run(chain, opts);
    CHECK(out.diagnostics.acceptance > 0.2);
    CHECK(out.diagnostics.acceptance < 0.5);
    CHECK(out.diagnostics.max_cache_drift < 1e-9);
}

TEST_CASE("haar-draw init starts in equilibrium at beta=0") {
    auto chain = init_chain(8, 0.0, Rational(0), 2024, InitMode::HaarDraw);
    RunOptions opts;
    opts.sweeps = 2001;
    opts.burn_in = 1;  // no relaxation allowed: the start must already be right
    const auto out = run(chain, opts);
    std::vector<double> purities;
    for (const auto& rec : out.purity_series) purities.push_back(rec.purity);
    const auto mc = stats::k_statistics(purities, 2, 50);

    const auto reference = haar::purity_batch(BipartitionDims(8, 8), 4000, 555, 2);
    const double se = std::hypot(mc.k_stats.at(1).std_error,
                                 reference.summary.k_stats.at(1).std_error);
    CHECK(std::abs(mc.mean - reference.summary.mean) < 4.0 * se);
}

TEST_CASE("run records respect burn-in and thinning") {
    auto chain = init_chain(4, 0.0, Rational(0), 3, InitMode::UniformJitter);
    RunOptions opts;
    opts.sweeps = 110;
    opts.burn_in = 10;
    opts.thin = 10;
    opts.record = Record::Both;
    const auto out = run(chain, opts);
    CHECK(out.purity_series.size() == 10);
    CHECK(out.rescaled_spectra.size() == 10);
    for (const auto& spec : out.rescaled_spectra) {
        double sum = 0.0;
        for (const double v : spec) sum += v;
        CHECK(sum == Catch::Approx(4.0).margin(1e-9));  // sum of n*lambda = n
        CHECK(std::is_sorted(spec.rbegin(), spec.rend()));
    }

    CHECK_THROWS_AS(run(chain, RunOptions{.sweeps = 5, .burn_in = 5}), DomainError);
    CHECK_THROWS_AS(run(chain, RunOptions{.sweeps = 10, .burn_in = 1, .thin = 0}), DomainError);
}

TEST_CASE("deterministic replay") {
    const auto drive = [] {
        auto chain = init_chain(10, 0.5, Rational(0), 88, InitMode::UniformJitter);
        RunOptions opts;
        opts.sweeps = 500;
        opts.burn_in = 100;
        return run(chain, opts);
    };
    const auto a = drive();
    const auto b = drive();
    REQUIRE(a.purity_series.size() == b.purity_series.size());
    for (std::size_t i = 0; i < a.purity_series.size(); ++i)
        CHECK(a.purity_series[i].purity == b.purity_series[i].purity);
}

TEST_CASE("autocorrelation time") {
    auto eng = rng::make_engine(1001, 0);

    std::vector<double> iid(10000);
    for (double& x : iid) x = rng::gaussian_pair(eng).first;
    const auto r_iid = autocorrelation_time(iid);
    CHECK(r_iid.tau > 0.4);
    CHECK(r_iid.tau < 0.7);
    CHECK_FALSE(r_iid.zero_variance);

    // AR(1), coefficient 0.9: tau = (1+0.9)/(2(1-0.9)) = 9.5
    std::vector<double> ar(100000);
    double x = 0.0;
    for (double& v : ar) {
        x = 0.9 * x + rng::gaussian_pair(eng).first;
        v = x;
    }
    const auto r_ar = autocorrelation_time(ar);
    CHECK(r_ar.tau == Catch::Approx(9.5).epsilon(0.20));

    const std::vector<double> constant(500, 3.25);
    const auto r_const = autocorrelation_time(constant);
    CHECK(r_const.tau == 0.5);
    CHECK(r_const.zero_variance);

    CHECK_THROWS_AS(autocorrelation_time(std::vector<double>(50, 1.0)), SeriesTooShort);
}

TEST_CASE("evaporation monitor") {
    auto state = init_chain(64, -1.0 / 27.0, Rational(0), 6, InitMode::UniformJitter);
    const auto params = theory::support_params(-1.0 / 27.0);

    CHECK_FALSE(evaporation_monitor(state, params));  // jittered flat start

    // force an escaped eigenvalue: 64 * 0.9 = 57.6 > 2a for any a <= 6
    state.lambdas[0] = 0.9;
    const double rest = 0.1 / 63.0;
    for (int i = 1; i < 64; ++i) state.lambdas[i] = rest * (1.0 + 1e-6 * i);
    const auto edge6 = theory::support_params(theory::kBetaMinus);
    CHECK(evaporation_monitor(state, edge6));

    // a beta > 0 run never engages the monitor
    auto warm = init_chain(16, 1.0, Rational(0), 7, InitMode::UniformJitter);
    RunOptions opts;
    opts.sweeps = 300;
    opts.burn_in = 100;
    const auto out = run(warm, opts);
    CHECK_FALSE(out.diagnostics.evaporation_flagged);
}

TEST_CASE("metastable negative-beta chain stays on the analytic branch") {
    auto chain = init_chain(64, -1.0 / 27.0, Rational(0), 404, InitMode::HaarDraw);
    RunOptions opts;
    opts.sweeps = 5000;
    opts.burn_in = 1000;
    const auto out = run(chain, opts);
    CHECK_FALSE(out.diagnostics.evaporation_flagged);
    CHECK_FALSE(out.diagnostics.first_escape_sweep.has_value());
}

TEST_CASE("equilibrium mean purity tracks r(beta)/n") {
    struct Point {
        double beta;
        std::uint64_t seed;
    };
    for (const auto& pt : {Point{0.0, 31}, Point{2.0, 32}}) {
        auto chain = init_chain(32, pt.beta, Rational(0), pt.seed, InitMode::HaarDraw);
        RunOptions opts;
        opts.sweeps = 14000;
        opts.burn_in = 4000;
        const auto out = run(chain, opts);

        std::vector<double> purities;
        for (const auto& rec : out.purity_series) purities.push_back(rec.purity);
        const std::size_t block =
            static_cast<std::size_t>(std::max(1.0, 10.0 * out.diagnostics.tau));
        const auto mc = stats::k_statistics(purities, 2, block);

        const double target = theory::mean_purity_coeff(pt.beta) / 32.0;
        CHECK(std::abs(mc.mean - target) <
              std::max(3.0 * mc.k_stats.at(1).std_error, 0.05 * target));
    }
}
