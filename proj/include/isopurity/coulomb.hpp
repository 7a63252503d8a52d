#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "isopurity/core.hpp"
#include "isopurity/haar.hpp"
#include "isopurity/rational.hpp"
#include "isopurity/rng.hpp"
#include "isopurity/theory.hpp"

namespace isopurity::coulomb {

// log of the unnormalized eigenvalue weight at inverse temperature beta:
//   2 sum_{i<j} ln|l_i - l_j| + mu*n sum_i ln l_i - beta n^3 sum_i l_i^2.
// A coincident pair returns -infinity, a rejectable sentinel, never NaN.
inline double log_weight(std::span<const double> lambdas, double beta, const Rational& mu, int n) {
    const double mu_n = mu.to_double() * n;
    const double n3 = static_cast<double>(n) * n * n;
    double logvdm = 0.0, sumlog = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] <= 0.0) throw DomainError("log_weight: eigenvalues must be positive");
        sumlog += std::log(lambdas[i]);
        sumsq += lambdas[i] * lambdas[i];
        for (std::size_t j = i + 1; j < lambdas.size(); ++j) {
            const double d = lambdas[i] - lambdas[j];
            if (d == 0.0) return -std::numeric_limits<double>::infinity();
            logvdm += 2.0 * std::log(std::abs(d));
        }
    }
    double w = logvdm - beta * n3 * sumsq;
    if (mu_n != 0.0) w += mu_n * sumlog;
    return w;
}

// Kahan-compensated accumulator; the chain caches take ~10^7 incremental
// updates per run and plain summation would drift past the 1e-9 check.
struct CompensatedSum {
    double value = 0.0;
    double comp = 0.0;

    void set(double v) {
        value = v;
        comp = 0.0;
    }
    void add(double d) {
        const double y = d - comp;
        const double t = value + y;
        comp = (t - value) - y;
        value = t;
    }
};

enum class InitMode { UniformJitter, HaarDraw };
enum class Record { Purity, Spectrum, Both };

struct ChainState {
    std::vector<double> lambdas;  // strictly positive, sum 1
    double beta = 0.0;
    Rational mu;
    int n = 0;
    CompensatedSum cached_logvdm;  // 2 sum_{i<j} ln|l_i-l_j|
    CompensatedSum cached_sumsq;
    CompensatedSum cached_sumlog;
    double step = 0.5;  // proposal half-width in units of 1/n
    std::mt19937_64 rng;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
    std::uint64_t sweep_index = 0;

    double log_weight_cached() const {
        const double mu_n = mu.to_double() * n;
        double w = cached_logvdm.value -
                   beta * static_cast<double>(n) * n * n * cached_sumsq.value;
        if (mu_n != 0.0) w += mu_n * cached_sumlog.value;
        return w;
    }
};

namespace detail {

inline void refresh_caches(ChainState& s) {
    double logvdm = 0.0, sumsq = 0.0, sumlog = 0.0;
    for (int i = 0; i < s.n; ++i) {
        sumlog += std::log(s.lambdas[i]);
        sumsq += s.lambdas[i] * s.lambdas[i];
        for (int j = i + 1; j < s.n; ++j)
            logvdm += 2.0 * std::log(std::abs(s.lambdas[i] - s.lambdas[j]));
    }
    s.cached_logvdm.set(logvdm);
    s.cached_sumsq.set(sumsq);
    s.cached_sumlog.set(sumlog);
}

}  // namespace detail

inline ChainState init_chain(int n, double beta, const Rational& mu, std::uint64_t seed,
                             InitMode mode, std::uint64_t stream = 0) {
    if (n < 2) throw InvalidDims("chain needs n >= 2 eigenvalues");
    if (mu < Rational(0)) throw InvalidDims("mu must be >= 0");

    ChainState s;
    s.n = n;
    s.beta = beta;
    s.mu = mu;
    s.rng = rng::make_engine(seed, stream);

    if (mode == InitMode::UniformJitter) {
        s.lambdas.resize(n);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            s.lambdas[i] = 1.0 + rng::uniform_range(s.rng, -0.01, 0.01);
            sum += s.lambdas[i];
        }
        for (double& l : s.lambdas) l /= sum;
    } else {
        // haar-draw needs integer m = n(1+mu)
        const Rational m_rat = (Rational(1) + mu) * Rational(n);
        if (m_rat.den() != 1) throw InvalidDims("haar-draw init needs integer m = n(1+mu)");
        const BipartitionDims dims(n, static_cast<int>(m_rat.num()));
        const auto spectrum = haar::reduced_spectrum(haar::sample_state(dims, s.rng));
        s.lambdas.assign(spectrum.values().begin(), spectrum.values().end());
        // exact zeros can only come from the round-off clamp; mix with the
        // flat vector to restore strict positivity without leaving the simplex
        if (s.lambdas.back() <= 0.0) {
            const double t = 1e-9;
            for (double& l : s.lambdas) l = (1.0 - t) * l + t / n;
        }
    }
    detail::refresh_caches(s);
    return s;
}

// One sweep = n pair-transfer Metropolis proposals. A proposal moves mass
// delta between two coordinates, so the simplex constraint is preserved
// exactly and the weight change is O(n): only rows i and j of the pairwise
// log-distance sum change. Step adaptation runs during burn-in only (the
// driver passes adapt=false afterward, preserving detailed balance).
inline void sweep_once(ChainState& s, bool adapt, double target_accept = 0.35) {
    const int n = s.n;
    const double n3 = static_cast<double>(n) * n * n;
    const double mu_n = s.mu.to_double() * n;
    auto& l = s.lambdas;
    std::uint64_t accepted_before = s.accepted;

    for (int prop = 0; prop < n; ++prop) {
        ++s.proposed;
        const int i = static_cast<int>(rng::bounded(s.rng, n));
        int j = static_cast<int>(rng::bounded(s.rng, n - 1));
        if (j >= i) ++j;

        const double delta = rng::uniform_range(s.rng, -s.step / n, s.step / n);
        const double li = l[i], lj = l[j];
        const double li_new = li + delta;
        const double lj_new = lj - delta;
        if (li_new <= 0.0 || lj_new <= 0.0) continue;  // positivity wall

        double dv = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            const double lk = l[k];
            dv += std::log(std::abs(li_new - lk)) - std::log(std::abs(li - lk)) +
                  std::log(std::abs(lj_new - lk)) - std::log(std::abs(lj - lk));
        }
        dv += std::log(std::abs(li_new - lj_new)) - std::log(std::abs(li - lj));
        const double d_logvdm = 2.0 * dv;

        const double d_sumsq = li_new * li_new + lj_new * lj_new - li * li - lj * lj;
        const double d_sumlog =
            std::log(li_new) + std::log(lj_new) - std::log(li) - std::log(lj);

        double d_logw = d_logvdm - s.beta * n3 * d_sumsq;
        if (mu_n != 0.0) d_logw += mu_n * d_sumlog;

        if (d_logw >= 0.0 || rng::uniform_unit(s.rng) < std::exp(d_logw)) {
            l[i] = li_new;
            l[j] = lj_new;
            s.cached_logvdm.add(d_logvdm);
            s.cached_sumsq.add(d_sumsq);
            s.cached_sumlog.add(d_sumlog);
            ++s.accepted;
        }
    }

    ++s.sweep_index;
    if (adapt) {
        const double rate = static_cast<double>(s.accepted - accepted_before) / n;
        s.step *= rate > target_accept ? 1.05 : 0.95;
        s.step = std::clamp(s.step, 1e-6, 100.0);
    }
}

// Integrated autocorrelation time with automatic windowing: the window is
// the smallest W with W >= 5 * tau_hat(W). tau = 1/2 for an iid series.
struct AutocorrResult {
    double tau = 0.5;
    std::size_t window = 0;
    bool zero_variance = false;
};

inline AutocorrResult autocorrelation_time(std::span<const double> series) {
    const std::size_t t_len = series.size();
    if (t_len < 100) throw SeriesTooShort("autocorrelation_time needs at least 100 points");

    double mean = 0.0;
    for (const double x : series) mean += x;
    mean /= static_cast<double>(t_len);

    double c0 = 0.0;
    for (const double x : series) c0 += (x - mean) * (x - mean);
    c0 /= static_cast<double>(t_len);
    if (c0 <= 0.0 || !std::isfinite(c0)) return {0.5, 0, true};

    const std::size_t w_max = t_len / 2;
    double tau = 0.5;
    std::size_t window = w_max;
    for (std::size_t w = 1; w <= w_max; ++w) {
        double cw = 0.0;
        for (std::size_t s = 0; s + w < t_len; ++s)
            cw += (series[s] - mean) * (series[s + w] - mean);
        cw /= static_cast<double>(t_len);
        tau += cw / c0;
        if (static_cast<double>(w) >= 5.0 * tau) {
            window = w;
            break;
        }
    }
    return {std::max(tau, 0.5), window, false};
}

// Non-perturbative instability monitor for beta < 0: flags when the largest
// eigenvalue escapes the analytic support edge by a factor 2.
inline bool evaporation_monitor(const ChainState& s, const theory::PhaseParams& params) {
    double max_l = 0.0;
    for (const double l : s.lambdas) max_l = std::max(max_l, l);
    return static_cast<double>(s.n) * max_l > 2.0 * params.a;
}

struct Diagnostics {
    double acceptance = 0.0;  // post-burn-in acceptance rate
    double tau = std::numeric_limits<double>::quiet_NaN();
    double ess = std::numeric_limits<double>::quiet_NaN();
    bool zero_variance = false;
    bool evaporation_flagged = false;
    std::optional<std::uint64_t> first_escape_sweep;
    double max_cache_drift = 0.0;       // incremental vs fresh log-weight
    double max_renorm_correction = 0.0; // |sum lambda - 1| at renormalization
};

struct ChainOutput {
    std::vector<PurityRecord> purity_series;
    std::vector<std::vector<double>> rescaled_spectra;  // n*lambda, sorted descending
    Diagnostics diagnostics;
    int n = 0;
    double beta = 0.0;
};

struct RunOptions {
    std::uint64_t sweeps = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thin = 1;
    Record record = Record::Purity;
    std::uint64_t renorm_interval = 1000;
    double target_accept = 0.35;
};

// Drives the chain: burn-in with step adaptation, then recording every
// thin-th sweep. Every renorm_interval sweeps the caches are checked against
// a from-scratch recomputation (1e-9) and the simplex sum drift is cancelled.
inline ChainOutput run(ChainState& s, const RunOptions& opts) {
    if (opts.sweeps <= opts.burn_in) throw DomainError("run: sweeps must exceed burn_in");
    if (opts.thin < 1) throw DomainError("run: thin must be >= 1");

    ChainOutput out;
    out.n = s.n;
    out.beta = s.beta;

    // evaporation reference edge: a(beta) on the analytic branch; runs below
    // beta_minus monitor against the beta_minus edge a=6
    std::optional<theory::PhaseParams> edge;
    if (s.beta < 0.0)
        edge = theory::support_params(std::max(s.beta, theory::kBetaMinus));

    std::uint64_t acc_mark = 0, prop_mark = 0;
    for (std::uint64_t sweep = 0; sweep < opts.sweeps; ++sweep) {
        const bool in_burn_in = sweep < opts.burn_in;
        if (sweep == opts.burn_in) {
            acc_mark = s.accepted;
            prop_mark = s.proposed;
        }
        sweep_once(s, in_burn_in, opts.target_accept);

        if (opts.renorm_interval > 0 && (sweep + 1) % opts.renorm_interval == 0) {
            const double cached = s.log_weight_cached();
            const double fresh = log_weight(s.lambdas, s.beta, s.mu, s.n);
            const double drift = std::abs(cached - fresh);
            if (drift > 1e-9)
                throw NumericalError("incremental log-weight drifted " + std::to_string(drift) +
                                     " from the from-scratch value");
            out.diagnostics.max_cache_drift = std::max(out.diagnostics.max_cache_drift, drift);
            double sum = 0.0;
            for (const double l : s.lambdas) sum += l;
            out.diagnostics.max_renorm_correction =
                std::max(out.diagnostics.max_renorm_correction, std::abs(sum - 1.0));
            for (double& l : s.lambdas) l /= sum;
            detail::refresh_caches(s);
        }

        if (edge && !out.diagnostics.evaporation_flagged && evaporation_monitor(s, *edge)) {
            out.diagnostics.evaporation_flagged = true;
            out.diagnostics.first_escape_sweep = s.sweep_index;
        }

        if (!in_burn_in && (sweep - opts.burn_in) % opts.thin == 0) {
            if (opts.record == Record::Purity || opts.record == Record::Both)
                out.purity_series.push_back(make_purity_record(s.cached_sumsq.value, s.n));
            if (opts.record == Record::Spectrum || opts.record == Record::Both) {
                std::vector<double> spec(s.lambdas);
                std::sort(spec.begin(), spec.end(), std::greater<double>());
                for (double& v : spec) v *= s.n;
                out.rescaled_spectra.push_back(std::move(spec));
            }
        }
    }

    const std::uint64_t accepted_pb = s.accepted - acc_mark;
    const std::uint64_t proposed_pb = s.proposed - prop_mark;
    out.diagnostics.acceptance =
        proposed_pb > 0 ? static_cast<double>(accepted_pb) / static_cast<double>(proposed_pb) : 0.0;

    if (out.purity_series.size() >= 100) {
        std::vector<double> purities;
        purities.reserve(out.purity_series.size());
        for (const auto& rec : out.purity_series) purities.push_back(rec.purity);
        const auto acf = autocorrelation_time(purities);
        out.diagnostics.tau = acf.tau;
        out.diagnostics.zero_variance = acf.zero_variance;
        out.diagnostics.ess = static_cast<double>(purities.size()) / (2.0 * acf.tau);
    }
    return out;
}

}  // namespace isopurity::coulomb
