#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <vector>

#include "isopurity/errors.hpp"
#include "isopurity/rational.hpp"

namespace isopurity {

// Hilbert-space dimensions of the bipartition, convention n <= m.
// mu = (m-n)/n is kept as an exact rational.
class BipartitionDims {
  public:
    BipartitionDims(int n, int m) : n_(n), m_(m) {
        if (n < 1) throw InvalidDims("subsystem dimension n must be >= 1");
        if (m < n) throw InvalidDims("convention requires m >= n");
        mu_ = Rational(static_cast<std::int64_t>(m) - n, n);
    }

    int n() const { return n_; }
    int m() const { return m_; }
    const Rational& mu() const { return mu_; }

  private:
    int n_;
    int m_;
    Rational mu_;
};

// The n nonnegative eigenvalues of a reduced density matrix, stored sorted
// descending, summing to 1 within 1e-12 * n. Immutable after construction.
class SchmidtSpectrum {
  public:
    static double default_tolerance(std::size_t n) { return 1e-12 * static_cast<double>(n); }

    std::span<const double> values() const { return values_; }
    std::size_t n() const { return values_.size(); }
    double max_value() const { return values_.front(); }

    // For producers that already guarantee the invariants (sorted descending,
    // nonnegative, unit sum); skips the validation pass.
    static SchmidtSpectrum trusted(std::vector<double> sorted_desc) {
        SchmidtSpectrum s;
        s.values_ = std::move(sorted_desc);
        return s;
    }

    friend SchmidtSpectrum validate_simplex(std::span<const double> values, double tol);

  private:
    SchmidtSpectrum() = default;
    std::vector<double> values_;
};

// Checks the simplex constraints and returns the sorted spectrum.
// Negatives within tol are eigensolver round-off: clamped to zero and the
// vector renormalized. Anything worse is an error.
inline SchmidtSpectrum validate_simplex(std::span<const double> values, double tol) {
    if (values.empty()) throw SpectrumInvalid("empty spectrum");
    double sum = 0.0;
    double min = values[0];
    for (const double v : values) {
        sum += v;
        min = std::min(min, v);
    }
    if (min < -tol)
        throw NegativeEigenvalue("eigenvalue " + std::to_string(min) + " below -tol");
    if (std::abs(sum - 1.0) > tol)
        throw SumOutOfTolerance("spectrum sums to " + std::to_string(sum) + ", not 1");

    std::vector<double> v(values.begin(), values.end());
    if (min < 0.0) {
        double s = 0.0;
        for (double& x : v) {
            if (x < 0.0) x = 0.0;
            s += x;
        }
        for (double& x : v) x /= s;
    }
    std::sort(v.begin(), v.end(), std::greater<double>());
    SchmidtSpectrum out;
    out.values_ = std::move(v);
    return out;
}

inline SchmidtSpectrum validate_simplex(std::span<const double> values) {
    return validate_simplex(values, SchmidtSpectrum::default_tolerance(values.size()));
}

// Purity pi = sum lambda_i^2 in [1/n, 1], and its rescaled companion
// R = n^3 * pi, the scaling for which the cumulants are O(n^2).
struct PurityRecord {
    double purity;
    double rescaled;
    int n;
};

inline PurityRecord make_purity_record(double pi, int n) {
    return {pi, static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(n) * pi, n};
}

inline PurityRecord purity(const SchmidtSpectrum& spectrum) {
    const auto vals = spectrum.values();
    double sum_sq = 0.0;
    for (const double v : vals) sum_sq += v * v;

    const int n = static_cast<int>(spectrum.n());
    const double lo = 1.0 / static_cast<double>(n);
    constexpr double slack = 1e-12;
    if (sum_sq < lo - slack || sum_sq > 1.0 + slack)
        throw SpectrumInvalid("purity " + std::to_string(sum_sq) + " outside [1/n, 1]");
    if (sum_sq < lo || sum_sq > 1.0) {
        std::fprintf(stderr, "isopurity: purity %.17g clamped to [1/n, 1] (n=%d)\n", sum_sq, n);
        sum_sq = std::clamp(sum_sq, lo, 1.0);
    }
    return make_purity_record(sum_sq, n);
}

}  // namespace isopurity
