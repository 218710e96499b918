#pragma once

// Exact expansion coefficients of the accumulated generator along a binary kick
// word. With A1 = -i L1 and A2 = -i L2, after n kicks
//
//   U(n, 0) ~ exp( alpha A1 + beta A2 + delta [A2, A1]
//                  + eta1 [A1, [A1, A2]] + eta2 [A2, [A2, A1]] )
//
// to first order in tau. All coefficients live in (1/12) Z; they are carried as
// GMP rationals so golden comparisons are exact.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fqkr/errors.hpp"
#include "fqkr/kickseq.hpp"

namespace fqkr {

using Rational = mpq_class;

struct CoefficientState {
    std::uint64_t n = 0;
    Rational alpha{0}, beta{0}, delta{0}, eta1{0}, eta2{0};

    friend bool operator==(const CoefficientState& a, const CoefficientState& b) {
        return a.n == b.n && a.alpha == b.alpha && a.beta == b.beta && a.delta == b.delta &&
               a.eta1 == b.eta1 && a.eta2 == b.eta2;
    }
};

/// Normalized expansion coefficients (value / n) as doubles.
struct Necs {
    double alpha, beta, delta, eta1, eta2;
};

inline Necs normalized(const CoefficientState& c) {
    if (c.n == 0) throw DomainError("normalized coefficients need n >= 1");
    const Rational n(static_cast<unsigned long>(c.n));
    return {Rational(c.alpha / n).get_d(), Rational(c.beta / n).get_d(), Rational(c.delta / n).get_d(),
            Rational(c.eta1 / n).get_d(), Rational(c.eta2 / n).get_d()};
}

/// Coefficients after one more kick. Right-hand sides use the values at index n.
inline CoefficientState recursion_step(const CoefficientState& c, Kick kick) {
    static const Rational half(1, 2), twelfth(1, 12);
    CoefficientState r;
    r.n = c.n + 1;
    if (kick == Kick::K1) {
        r.alpha = c.alpha + 1;
        r.beta = c.beta;
        r.delta = c.delta - half * c.beta;
        r.eta1 = c.eta1 - half * c.delta + twelfth * c.beta * (1 - c.alpha);
        r.eta2 = c.eta2 + twelfth * c.beta * c.beta;
    } else {
        r.alpha = c.alpha;
        r.beta = c.beta + 1;
        r.delta = c.delta + half * c.alpha;
        r.eta1 = c.eta1 + twelfth * c.alpha * c.alpha;
        r.eta2 = c.eta2 + half * c.delta + twelfth * c.alpha * (1 - c.beta);
    }
    return r;
}

/// Iterates the recursion over a kick word.
inline CoefficientState coefficients_along(const std::vector<Kick>& word) {
    CoefficientState c;
    for (Kick k : word) c = recursion_step(c, k);
    return c;
}

/// Visits the recursion states n = 1..n_max along the Fibonacci word.
inline void for_each_recursion(std::uint64_t n_max, const std::function<void(const CoefficientState&)>& fn) {
    CoefficientState c;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        c = recursion_step(c, fibonacci_kick(n));
        fn(c);
    }
}

/// Visits the floor-function closed forms for n = 1..n_max. Each state is built
/// from running sums over gamma(n), floor(n/G) and floor(n/G^2) only; the
/// recursion is not consulted.
inline void for_each_closed_form(std::uint64_t n_max, const std::function<void(const CoefficientState&)>& fn) {
    mpz_class beta = 0, alpha = 0;
    mpz_class delta_sum = 0;  // sum of (gamma-1)(n-1) - floor(n/G); delta = -delta_sum / 2
    mpz_class eta1_sum = 0, eta2_sum = 0;  // 12 * eta
    CoefficientState c;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        const int g = gamma(n);
        const mpz_class nn(static_cast<unsigned long>(n));
        const mpz_class a(static_cast<unsigned long>(floor_n_over_golden(n)));     // floor(nG/(1+G))
        const mpz_class b(static_cast<unsigned long>(floor_n_over_golden_sq(n)));  // floor(n/(1+G))
        // 6 delta(n-1) = -3 delta_sum(n-1)
        const mpz_class six_delta_prev = -3 * delta_sum;
        eta1_sum += (2 - g) * a * a + (1 - g) * (six_delta_prev - (2 - nn) * b - b * b);
        eta2_sum += (g - 1) * b * b + (2 - g) * (six_delta_prev + (2 - nn) * a + a * a);
        delta_sum += (g - 1) * (nn - 1) - a;
        beta += 2 - g;
        alpha += g - 1;
        c.n = n;
        c.alpha = alpha;
        c.beta = beta;
        c.delta = Rational(-delta_sum, 2);
        c.eta1 = Rational(eta1_sum, 12);
        c.eta2 = Rational(eta2_sum, 12);
        c.delta.canonicalize();
        c.eta1.canonicalize();
        c.eta2.canonicalize();
        fn(c);
    }
}

inline CoefficientState coefficients_closed_form(std::uint64_t n) {
    if (n == 0) throw DomainError("closed form needs n >= 1");
    CoefficientState out;
    for_each_closed_form(n, [&](const CoefficientState& c) {
        if (c.n == n) out = c;
    });
    return out;
}

// ---------------------------------------------------------------------------

inline constexpr double kGolden = 1.6180339887498948482;

/// Asymptotic normalized coefficients at Fibonacci instants. eta1/eta2 oscillate
/// with the parity of the Fibonacci index; `*_even` is the (-1)^m = +1 branch.
struct SaturatedNecs {
    double alpha, beta;
    double delta;                  // printed asymptote, -1/G^3
    double delta_recursion_limit;  // limit the recursion actually reaches, +1/(2 G^3)
    double eta1_even, eta1_odd, eta2_even, eta2_odd;
    double eta1_mean, eta2_mean;
};

inline SaturatedNecs saturated_necs() {
    const double G = kGolden;
    const double G2 = G * G, G3 = G2 * G, G4 = G3 * G, G5 = G4 * G;
    SaturatedNecs s{};
    s.alpha = 1.0 / G;
    s.beta = 1.0 / G2;
    s.delta = -1.0 / G3;
    s.delta_recursion_limit = 0.5 / G3;
    auto eta1 = [&](double sgn) { return (1.0 / G4 + sgn * (2.0 / G + 1.0 / G2)) / 12.0; };
    auto eta2 = [&](double sgn) { return (1.0 / G5 - sgn * (2.0 / G2 + 1.0 / G3) + 1.0 / G2) / 12.0; };
    s.eta1_even = eta1(1.0);
    s.eta1_odd = eta1(-1.0);
    s.eta2_even = eta2(1.0);
    s.eta2_odd = eta2(-1.0);
    s.eta1_mean = 1.0 / (12.0 * G4);
    s.eta2_mean = (1.0 / G5 + 1.0 / G2) / 12.0;
    return s;
}

struct MuAsymptotics {
    int m;
    double mu1, mu2, mu3;  // mu_i(F(m)) / F(m)
};

/// Fourth-order normalized coefficients at Fibonacci index m, leading terms only
/// (corrections of order G^-(m+1) dropped).
inline MuAsymptotics mu_normalized(int m) {
    if (m < 1) throw DomainError("mu_normalized needs m >= 1");
    const double G = kGolden;
    const double s = (m % 2 == 0) ? 1.0 : -1.0;
    const double gm1 = std::pow(G, m - 1);
    const double pre = s / 120.0;
    return {m,
            pre * (gm1 + (s * (3 * G - 4) - 1 - 3 * G) / G),
            pre * (gm1 * (2 - G) + (s * (4 * G - 7) - 2 - G) / G),
            pre * (2 * gm1 * (1 - G) + (s * (3 - G) + 3 + 4 * G) / G)};
}

struct DelocalizationEstimate {
    int m_deloc;
    std::uint64_t n_deloc;
};

/// Smallest Fibonacci index m with tau^2 G^m / 120 >= 1, and F(m).
inline DelocalizationEstimate delocalization_time(double tau) {
    if (!(tau > 0.0) || tau >= 1.0) throw DomainError("delocalization estimate needs 0 < tau < 1");
    const long double target = 120.0L / (static_cast<long double>(tau) * tau);
    int m = 1;
    long double gm = kGolden;
    while (gm < target) {
        gm *= kGolden;
        ++m;
    }
    return {m, fibonacci_instant(m)};
}

}  // namespace fqkr
