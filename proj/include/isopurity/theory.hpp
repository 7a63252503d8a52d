#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isopurity/errors.hpp"
#include "isopurity/rational.hpp"

namespace isopurity::theory {

// Critical inverse temperatures of the eigenvalue-density phase diagram.
inline constexpr double kBetaMinus = -2.0 / 27.0;
inline constexpr double kBetaPlus = 2.0;

inline std::pair<double, double> critical_betas() { return {kBetaMinus, kBetaPlus}; }

enum class Phase { HighTemp, Semicircle };

inline const char* phase_name(Phase p) {
    return p == Phase::HighTemp ? "high_temp" : "semicircle";
}

// Support parameters of the limiting eigenvalue density in rescaled units.
// The high-temperature branch is parameterized by (a, c = beta*b) because b
// diverges at beta=0 while c -> 1; the density (c/2 + beta*lambda) stays
// regular there. b and the Lagrange-multiplier diagnostic xi_im = beta*(a-b)
// are only defined when beta != 0.
struct PhaseParams {
    double beta;
    Phase phase;
    double a;                     // right support edge
    double c;                     // beta * b
    std::optional<double> b;      // left edge parameter, c/beta when beta != 0
    std::optional<double> xi_im;  // beta*(a-b) = beta*a - c
};

namespace detail {

// Integer Taylor coefficients of a(beta) in powers of beta: 4, -8, 48, ...
// via the term ratio of the closed-form expansion.
inline std::vector<Rational> a_series_beta_coeffs(int order) {
    std::vector<Rational> a;
    a.reserve(order + 1);
    a.emplace_back(4);
    if (order >= 1) a.emplace_back(-8);
    for (int l = 1; l + 1 <= order; ++l) {
        const Rational ratio =
            Rational(-2) * Rational(3 * l) * Rational(3 * l + 1) * Rational(3 * l + 2) /
            (Rational(l) * Rational(2 * l + 2) * Rational(2 * l + 3));
        a.push_back(a.back() * ratio);
    }
    return a;
}

inline std::vector<Rational> series_mul(const std::vector<Rational>& x,
                                        const std::vector<Rational>& y, int order) {
    std::vector<Rational> out(order + 1, Rational(0));
    for (int i = 0; i <= order; ++i)
        for (int j = 0; i + j <= order; ++j) out[i + j] += x[i] * y[j];
    return out;
}

inline double series_a_sum(double beta, int terms) {
    // same term-ratio recurrence in double; the integer coefficients grow
    // like 13.5^l and would overflow exact 64-bit rationals past l ~ 15
    double sum = 4.0;
    if (terms == 1) return sum;
    double term = -8.0 * beta;
    sum += term;
    for (int l = 1; l + 1 < terms; ++l) {
        term *= -2.0 * (3.0 * l) * (3.0 * l + 1.0) * (3.0 * l + 2.0) /
                (static_cast<double>(l) * (2.0 * l + 2.0) * (2.0 * l + 3.0)) * beta;
        sum += term;
    }
    return sum;
}

template <typename F>
double integrate(F&& f, double lo, double hi, const char* what) {
    using boost::math::quadrature::gauss_kronrod;
    if (lo == hi) return 0.0;
    double error = 0.0;
    const double v = gauss_kronrod<double, 15>::integrate(f, lo, hi, 18, 1e-13, &error);
    if (!(error <= 1e-8 * std::max(1.0, std::abs(v))))
        throw QuadratureFailure(std::string("adaptive quadrature did not converge for ") + what);
    return v;
}

}  // namespace detail

// Partial sum of the small-beta expansion of a(beta). The l=0 coefficient is
// the Gamma-function limit of the factorial-ratio coefficient, which equals 4.
inline double series_a(double beta, int terms) {
    if (terms < 1) throw SeriesTooShort("series_a needs at least one term");
    if (std::abs(beta / kBetaMinus) >= 1.0)
        throw OutsideConvergence("|beta/beta_minus| >= 1: outside convergence radius");
    return detail::series_a_sum(beta, terms);
}

// Support parameters at a given beta. High-temperature branch on
// [beta_minus, beta_plus], semicircle above. Below beta_minus there is no
// real positive-density solution.
inline PhaseParams support_params(double beta) {
    if (beta < kBetaMinus)
        throw BelowBetaMinus("beta below beta_minus=-2/27: no real positive-density solution");

    if (beta > kBetaPlus) {
        const double s = std::sqrt(kBetaPlus / beta);
        const double a = 1.0 + s;
        const double b = 1.0 - s;
        return {beta, Phase::Semicircle, a, beta * b, b, beta * (a - b)};
    }

    double a;
    if (std::abs(beta) < 1e-3) {
        // closed form is 0/0 near beta=0; the series is exact to round-off here
        a = detail::series_a_sum(beta, 24);
    } else if (beta > 0.0) {
        const double x = std::sqrt(27.0 * beta / 2.0);
        const double delta = std::cbrt(x + std::sqrt(1.0 + x * x));
        a = std::sqrt(8.0 / (3.0 * beta)) * (delta - 1.0 / delta);
    } else {
        // Delta is complex with unit modulus for beta<0; the trigonometric
        // equivalent keeps the arithmetic real
        const double ab = -beta;
        const double theta =
            std::atan2(std::sqrt(27.0 * ab / 2.0), std::sqrt(std::max(0.0, 1.0 - 27.0 * ab / 2.0)));
        a = 2.0 * std::sqrt(8.0 / (3.0 * ab)) * std::sin(theta / 3.0);
    }

    const double c = 4.0 / a - beta * a / 2.0;
    std::optional<double> b;
    std::optional<double> xi;
    if (beta != 0.0) {
        b = c / beta;
        xi = beta * a - c;
    }
    return {beta, Phase::HighTemp, a, c, b, xi};
}

// Limiting eigenvalue density in rescaled units (lambda ~ N * lambda_i).
inline double density(const PhaseParams& p, double lambda) {
    constexpr double pi = 3.141592653589793238462643383279;
    if (p.phase == Phase::HighTemp) {
        if (lambda <= 0.0 || lambda > p.a) return 0.0;
        return (p.c / 2.0 + p.beta * lambda) * std::sqrt((p.a - lambda) / lambda) / pi;
    }
    const double b = *p.b;
    if (lambda < b || lambda > p.a) return 0.0;
    return p.beta * std::sqrt((lambda - b) * (p.a - lambda)) / pi;
}

inline double density(double beta, double lambda) { return density(support_params(beta), lambda); }

// Normalization and first moment of the density, both identically 1.
// The substitution lambda = a sin^2 t (resp. b + (a-b) sin^2 t) removes the
// inverse-square-root endpoints before quadrature.
inline std::pair<double, double> density_moments(double beta) {
    constexpr double pi = 3.141592653589793238462643383279;
    const PhaseParams p = support_params(beta);
    const double half_pi = pi / 2.0;
    if (p.phase == Phase::HighTemp) {
        const auto weight = [&](double t) {
            const double s = std::sin(t), co = std::cos(t);
            return (2.0 * p.a / pi) * (p.c / 2.0 + p.beta * p.a * s * s) * co * co;
        };
        const double norm = detail::integrate(weight, 0.0, half_pi, "density norm");
        const double mean = detail::integrate(
            [&](double t) {
                const double s = std::sin(t);
                return weight(t) * (p.a * s * s);
            },
            0.0, half_pi, "density mean");
        return {norm, mean};
    }
    const double b = *p.b;
    const double w = p.a - b;
    const auto weight = [&](double t) {
        const double s = std::sin(t), co = std::cos(t);
        return (2.0 * p.beta * w * w / pi) * s * s * co * co;
    };
    const double norm = detail::integrate(weight, 0.0, half_pi, "density norm");
    const double mean = detail::integrate(
        [&](double t) {
            const double s = std::sin(t);
            return weight(t) * (b + w * s * s);
        },
        0.0, half_pi, "density mean");
    return {norm, mean};
}

// r(beta) = N * <pi_AB> = R / N^2. The high-temperature form
// (3 beta a^4 + 16 a^2)/128 equals the equivalent beta a^3 (5a+4b)/128 after
// substituting b = 4/(beta a) - a/2; the tests verify the identity on a grid.
inline double mean_purity_coeff(double beta) {
    if (beta > kBetaPlus) return 1.0 + 1.0 / (2.0 * beta);
    const double a = support_params(beta).a;
    return (3.0 * beta * a * a * a * a + 16.0 * a * a) / 128.0;
}

// G(beta) = -(1/N^2) log <exp(-beta R)>, computed by thermodynamic
// integration G = int_0^beta r. Anchored at G(0) = 0; G' = r.
inline double log_mgf(double beta) {
    if (beta < kBetaMinus)
        throw BelowBetaMinus("beta below beta_minus=-2/27: no real positive-density solution");
    const auto r = [](double b) { return mean_purity_coeff(b); };
    if (beta >= 0.0) {
        if (beta <= kBetaPlus) return detail::integrate(r, 0.0, beta, "log_mgf");
        // r has a kink in its second derivative at beta_plus: split there
        return detail::integrate(r, 0.0, kBetaPlus, "log_mgf") +
               detail::integrate(r, kBetaPlus, beta, "log_mgf");
    }
    return -detail::integrate(r, beta, 0.0, "log_mgf");
}

// s(beta) - s(0) with s = S/N^2, via s_rel = beta*r - G. The reported
// free-energy branches disagree by an additive constant, so only derivative-
// and difference-level statements are meaningful; they all survive this form.
inline double entropy_rel(double beta) {
    return beta * mean_purity_coeff(beta) - log_mgf(beta);
}

// Taylor coefficients of r(beta) at beta=0 in exact rational arithmetic.
// Coefficient r_{n-1} relates to the n-th cumulant of R per N^2 by
// kappa_n / N^2 = (-1)^(n+1) (n-1)! r_{n-1}.
inline std::vector<Rational> purity_taylor_exact(int order) {
    if (order < 0) throw UnsupportedOrder("purity_taylor: order must be >= 0");
    const auto a = detail::a_series_beta_coeffs(order);
    const auto a2 = detail::series_mul(a, a, order);
    const auto a4 = detail::series_mul(a2, a2, order);
    std::vector<Rational> r(order + 1, Rational(0));
    for (int k = 0; k <= order; ++k) {
        r[k] += Rational(16) * a2[k];
        if (k >= 1) r[k] += Rational(3) * a4[k - 1];
        r[k] /= Rational(128);
    }
    return r;
}

inline std::vector<double> purity_taylor(int order) {
    const auto exact = purity_taylor_exact(order);
    std::vector<double> out;
    out.reserve(exact.size());
    for (const auto& x : exact) out.push_back(x.to_double());
    return out;
}

// Exact cumulant of the purity: <<pi^n>> = coefficient / N^n_power.
struct CumulantEntry {
    Rational coefficient;
    int n_power;
};

// Balanced bipartition (mu=0), all orders: 2^(n+1) (3n-3)!/(2n)!.
inline CumulantEntry cumulant_balanced(int n) {
    if (n < 1) throw UnsupportedOrder("cumulant order must be >= 1");
    Rational coeff(1);
    for (int k = 3 * n - 3; k > 2 * n; --k) coeff *= Rational(k);
    for (int k = 2 * n; k > 3 * n - 3; --k) coeff /= Rational(k);
    for (int i = 0; i < n + 1; ++i) coeff *= Rational(2);
    return {coeff, 3 * n - 2};
}

// Unbalanced bipartition, first five orders only.
inline CumulantEntry cumulant_unbalanced(int n, const Rational& mu) {
    if (mu < Rational(0)) throw InvalidDims("mu must be >= 0");
    const Rational one(1);
    const Rational opm = one + mu;
    switch (n) {
        case 1:
            return {(Rational(2) + mu) / opm, 1};
        case 2:
            return {Rational(2) / opm.pow(2), 4};
        case 3:
            return {Rational(8) * (Rational(2) + mu) / opm.pow(4), 7};
        case 4:
            return {Rational(48) * (Rational(6) + Rational(6) * mu + mu * mu) / opm.pow(6), 10};
        case 5:
            return {Rational(384) *
                        (Rational(22) + Rational(33) * mu + Rational(13) * mu * mu + mu.pow(3)) /
                        opm.pow(8),
                    13};
        default:
            throw UnsupportedOrder("unbalanced cumulants are known for orders 1..5 only");
    }
}

inline CumulantEntry cumulant_exact(int n, const Rational& mu) {
    if (mu < Rational(0)) throw InvalidDims("mu must be >= 0");
    if (mu == Rational(0)) return cumulant_balanced(n);
    return cumulant_unbalanced(n, mu);
}

struct CumulantSet {
    std::map<int, CumulantEntry> entries;
    Rational mu;
};

inline CumulantSet cumulant_set(int max_order, const Rational& mu) {
    CumulantSet set{{}, mu};
    for (int n = 1; n <= max_order; ++n) set.entries.emplace(n, cumulant_exact(n, mu));
    return set;
}

// Verbatim evaluation of the reported closed forms for F and S. Exposed for
// documentation and derivative-level checks only: the additive constants of
// the two branches are mutually inconsistent, so absolute values are not
// trusted anywhere else in the library.
inline double reported_free_energy(double beta) {
    if (beta < kBetaMinus)
        throw BelowBetaMinus("beta below beta_minus=-2/27: no real positive-density solution");
    if (beta >= kBetaPlus) return 1.0 + 3.0 / (4.0 * beta) + std::log(2.0 * beta) / (2.0 * beta);
    if (beta == 0.0)
        throw DomainError("reported high-temperature free energy is singular at beta=0");
    const double a = support_params(beta).a;
    return (6.0 - a) * a / 8.0 - (2.0 + a * std::log(a / 4.0)) / (a * beta) +
           3.0 * a * a * a * a * beta / 256.0;
}

inline double reported_entropy(double beta) {
    if (beta < kBetaPlus)
        throw DomainError("reported entropy closed form covers beta >= beta_plus only");
    return -0.25 - 0.5 * std::log(2.0 * beta);
}

// One evaluated grid point of the phase diagram; b_or_c carries c in the
// high-temperature phase (finite at beta=0) and b in the semicircle phase.
struct TheoryRow {
    double beta = 0.0;
    bool ok = false;
    Phase phase = Phase::HighTemp;
    double a = 0.0;
    double b_or_c = 0.0;
    double r = 0.0;
    double big_g = 0.0;
    double s_rel = 0.0;
    std::string error;
};

inline std::vector<TheoryRow> sweep(std::span<const double> betas) {
    std::vector<TheoryRow> rows;
    rows.reserve(betas.size());
    for (const double beta : betas) {
        TheoryRow row;
        row.beta = beta;
        try {
            const PhaseParams p = support_params(beta);
            row.phase = p.phase;
            row.a = p.a;
            row.b_or_c = p.phase == Phase::HighTemp ? p.c : *p.b;
            row.r = mean_purity_coeff(beta);
            row.big_g = log_mgf(beta);
            row.s_rel = beta * row.r - row.big_g;
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Only the exact cumulants are known for mu > 0; the density, r, G, and
// entropy columns all presuppose a balanced bipartition.
inline std::vector<TheoryRow> sweep(std::span<const double> betas, const Rational& mu) {
    if (mu != Rational(0))
        throw UnsupportedOrder("phase-diagram sweep is defined for mu=0 only");
    return sweep(betas);
}

}  // namespace isopurity::theory
