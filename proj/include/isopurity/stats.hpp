#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "isopurity/errors.hpp"

namespace isopurity::stats {

struct KStat {
    double estimate = 0.0;
    double std_error = std::numeric_limits<double>::quiet_NaN();
};

struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    std::map<int, KStat> k_stats;
    bool order5_high_variance = false;  // set when order 5 was requested
};

namespace detail {

// k-statistics (minimum-variance unbiased cumulant estimators) from power
// sums about a fixed center. Centering on the global mean keeps the repeated
// leave-one-block-out evaluations numerically stable.
struct PowerSums {
    double n = 0.0;
    double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0, p5 = 0.0;

    void add(double x, int max_order) {
        n += 1.0;
        double t = x;
        p1 += t;
        t *= x;
        p2 += t;
        if (max_order >= 3) {
            t *= x;
            p3 += t;
        }
        if (max_order >= 4) {
            t *= x;
            p4 += t;
        }
        if (max_order >= 5) {
            t *= x;
            p5 += t;
        }
    }

    PowerSums minus(const PowerSums& o) const {
        return {n - o.n, p1 - o.p1, p2 - o.p2, p3 - o.p3, p4 - o.p4, p5 - o.p5};
    }
};

inline void k_from_power_sums(const PowerSums& s, int max_order, double center, double* out) {
    const double n = s.n;
    const double mu = s.p1 / n;
    const double m2 = s.p2 / n - mu * mu;
    out[0] = center + mu;
    if (max_order >= 2) out[1] = n > 1 ? n / (n - 1) * m2 : std::numeric_limits<double>::quiet_NaN();
    if (max_order >= 3) {
        const double m3 = s.p3 / n - 3.0 * mu * s.p2 / n + 2.0 * mu * mu * mu;
        out[2] = n > 2 ? n * n / ((n - 1) * (n - 2)) * m3 : std::numeric_limits<double>::quiet_NaN();
        if (max_order >= 4) {
            const double m4 =
                s.p4 / n - 4.0 * mu * s.p3 / n + 6.0 * mu * mu * s.p2 / n - 3.0 * mu * mu * mu * mu;
            out[3] = n > 3 ? n * n * ((n + 1) * m4 - 3.0 * (n - 1) * m2 * m2) /
                                 ((n - 1) * (n - 2) * (n - 3))
                           : std::numeric_limits<double>::quiet_NaN();
            if (max_order >= 5) {
                const double m5 = s.p5 / n - 5.0 * mu * s.p4 / n + 10.0 * mu * mu * s.p3 / n -
                                  10.0 * mu * mu * mu * s.p2 / n + 4.0 * std::pow(mu, 5);
                out[4] = n > 4 ? n * n * n * ((n + 5) * m5 - 10.0 * (n - 1) * m2 * m3) /
                                     ((n - 1) * (n - 2) * (n - 3) * (n - 4))
                               : std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
}

}  // namespace detail

// Unbiased cumulant estimates k_1..k_max with leave-one-block-out jackknife
// standard errors. block_len = 1 is the classic delete-1 jackknife; MCMC
// callers pass block_len ~ 10*tau so the blocks are effectively independent.
inline SampleSummary k_statistics(std::span<const double> samples, int max_order,
                                  std::size_t block_len = 1) {
    if (max_order < 1 || max_order > 5)
        throw UnsupportedOrder("k_statistics supports orders 1..5");
    const std::size_t count = samples.size();
    if (count < static_cast<std::size_t>(max_order))
        throw TooFewSamples("need at least max_order samples");
    if (block_len < 1) block_len = 1;

    double center = 0.0;
    for (const double x : samples) center += x;
    center /= static_cast<double>(count);

    detail::PowerSums total;
    for (const double x : samples) total.add(x - center, max_order);

    double est[5];
    detail::k_from_power_sums(total, max_order, center, est);

    SampleSummary out;
    out.count = count;
    out.mean = est[0];
    out.order5_high_variance = max_order >= 5;

    // jackknife over contiguous blocks; the last block absorbs the remainder
    const std::size_t n_blocks = std::max<std::size_t>(1, count / block_len);
    std::vector<std::array<double, 5>> theta;
    if (n_blocks >= 2) {
        theta.reserve(n_blocks);
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const std::size_t lo = b * block_len;
            const std::size_t hi = (b + 1 == n_blocks) ? count : lo + block_len;
            detail::PowerSums blk;
            for (std::size_t i = lo; i < hi; ++i) blk.add(samples[i] - center, max_order);
            const detail::PowerSums rest = total.minus(blk);
            if (rest.n < max_order) continue;
            std::array<double, 5> t{};
            detail::k_from_power_sums(rest, max_order, center, t.data());
            theta.push_back(t);
        }
    }
    for (int r = 1; r <= max_order; ++r) {
        KStat k;
        k.estimate = est[r - 1];
        const std::size_t b_count = theta.size();
        if (b_count >= 2) {
            double mean_t = 0.0;
            for (const auto& t : theta) mean_t += t[r - 1];
            mean_t /= static_cast<double>(b_count);
            double ss = 0.0;
            for (const auto& t : theta) {
                const double d = t[r - 1] - mean_t;
                ss += d * d;
            }
            k.std_error =
                std::sqrt(ss * (static_cast<double>(b_count) - 1.0) / static_cast<double>(b_count));
        }
        out.k_stats.emplace(r, k);
    }
    return out;
}

// Normalized histogram of rescaled eigenvalues (n * lambda units).
// Out-of-range observations are counted and reported, never binned, and the
// densities are normalized over the in-range mass so the integral is 1.
struct EmpiricalDensity {
    std::vector<double> edges;      // bins+1 ascending boundaries
    std::vector<double> densities;  // per-bin probability density
    std::size_t count = 0;          // total observations seen
    std::size_t out_of_range = 0;
};

inline EmpiricalDensity empirical_density(std::span<const double> values, int bins, double lo,
                                          double hi) {
    if (values.empty()) throw EmptyInput("empirical_density: no observations");
    if (bins < 2) throw DomainError("empirical_density: bins must be >= 2");
    if (!(hi > lo)) throw DomainError("empirical_density: need hi > lo");

    EmpiricalDensity out;
    out.count = values.size();
    out.edges.resize(bins + 1);
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) out.edges[i] = lo + width * i;

    std::vector<std::size_t> counts(bins, 0);
    std::size_t in_range = 0;
    for (const double v : values) {
        if (v < lo || v > hi) {
            ++out.out_of_range;
            continue;
        }
        int idx = static_cast<int>((v - lo) / width);
        if (idx >= bins) idx = bins - 1;  // v == hi lands in the last bin
        ++counts[idx];
        ++in_range;
    }
    if (in_range == 0) throw EmptyInput("empirical_density: all observations out of range");

    out.densities.resize(bins);
    for (int i = 0; i < bins; ++i)
        out.densities[i] = static_cast<double>(counts[i]) / (static_cast<double>(in_range) * width);
    return out;
}

// L1 distance between a histogram and an analytic density, with the analytic
// side evaluated at bin midpoints (documented midpoint bias).
inline double l1_distance(const EmpiricalDensity& emp,
                          const std::function<double(double)>& analytic) {
    double dist = 0.0;
    for (std::size_t i = 0; i + 1 < emp.edges.size(); ++i) {
        const double w = emp.edges[i + 1] - emp.edges[i];
        const double mid = 0.5 * (emp.edges[i] + emp.edges[i + 1]);
        dist += std::abs(emp.densities[i] - analytic(mid)) * w;
    }
    return dist;
}

// Two-sample Kolmogorov-Smirnov statistic by merge scan.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptyInput("ks_two_sample: empty sample");
    std::vector<double> xa(a.begin(), a.end());
    std::vector<double> xb(b.begin(), b.end());
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());

    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double x = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] <= x) ++i;
        while (j < xb.size() && xb[j] <= x) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return sup;
}

}  // namespace isopurity::stats
