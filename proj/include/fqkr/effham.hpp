#pragma once

// Per-kick generators L1, L2, the accumulated effective generator, the
// effective Fibonacci propagator and spectral localization diagnostics.

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fqkr/bchcoeff.hpp"
#include "fqkr/errors.hpp"
#include "fqkr/hilbert.hpp"

namespace fqkr {

/// Coefficient of sin^2(theta) inside the O(tau) bracket of L. Only `sixth`
/// matches the two-factor product to O(tau); `twelfth` is kept for comparison.
enum class SinSqCoefficient { sixth, twelfth };

/// L = K cos + (tau/2) [ l^2 + (K/2)(l sin + sin l) + c K^2 sin^2 ], c = 1/6.
inline OperatorMatrix build_L(double kick, double tau, const BasisWindow& w,
                              SinSqCoefficient c = SinSqCoefficient::sixth) {
    if (tau < 0.0) throw DomainError("tau must be >= 0");
    const double csq = c == SinSqCoefficient::sixth ? 1.0 / 6.0 : 1.0 / 12.0;
    CMatrix m = kick * build_cos_theta(w).entries;
    if (tau != 0.0) {
        m += 0.5 * tau *
             (build_l_squared(w).entries + 0.5 * kick * build_sym_lsin(w).entries +
              csq * kick * kick * build_sin_sq(w).entries);
    }
    return {w, std::move(m), Symmetry::hermitian};
}

/// ||exp(-i L) psi - exp(-i tau l^2/2) exp(-i K cos) psi||, both sides from exact
/// matrix exponentials on the window. O(tau^2) for the sixth variant, O(tau)
/// for twelfth, on interior-supported psi.
inline double splitting_residual(double kick, double tau, const RotorState& psi,
                                 SinSqCoefficient c = SinSqCoefficient::sixth);

/// Plain coefficients of the five generator terms.
struct GeneratorCoefficients {
    double alpha = 0, beta = 0, delta = 0, eta1 = 0, eta2 = 0;

    static GeneratorCoefficients from(const CoefficientState& c) {
        return {c.alpha.get_d(), c.beta.get_d(), c.delta.get_d(), c.eta1.get_d(), c.eta2.get_d()};
    }
};

enum class Provenance { per_step, word_accumulated, fibonacci_saturated };

struct EffectiveGenerator {
    BasisWindow window;
    OperatorMatrix matrix;  // anti-Hermitian
    Provenance provenance = Provenance::word_accumulated;
    long n = 0;

    /// Hermitian H with exp(G) = exp(-i H).
    OperatorMatrix hamiltonian() const {
        return {window, cplx{0.0, 1.0} * matrix.entries, Symmetry::hermitian};
    }
};

namespace detail {

inline Eigen::SparseMatrix<cplx> to_sparse(const CMatrix& m) {
    return m.sparseView(1.0, 0.0);
}

}  // namespace detail

/// G = alpha A1 + beta A2 + delta [A2,A1] + eta1 [A1,[A1,A2]] + eta2 [A2,[A2,A1]],
/// A_i = -i L_i. The L's are banded, so commutators are formed sparsely.
inline EffectiveGenerator accumulate_generator(const GeneratorCoefficients& c, const OperatorMatrix& l1,
                                               const OperatorMatrix& l2,
                                               Provenance provenance = Provenance::word_accumulated, long n = 0) {
    if (!(l1.window == l2.window)) throw UsageError("L1 and L2 live on different windows");
    const cplx mi{0.0, -1.0};
    using Sp = Eigen::SparseMatrix<cplx>;
    const Sp a1 = detail::to_sparse(mi * l1.entries);
    const Sp a2 = detail::to_sparse(mi * l2.entries);
    const Sp c21 = Sp(a2 * a1) - Sp(a1 * a2);  // [A2, A1]
    const Sp c12 = -c21;                       // [A1, A2]
    const Sp n1 = Sp(a1 * c12) - Sp(c12 * a1);  // [A1, [A1, A2]]
    const Sp n2 = Sp(a2 * c21) - Sp(c21 * a2);  // [A2, [A2, A1]]
    Sp g = c.alpha * a1 + c.beta * a2 + c.delta * c21 + c.eta1 * n1 + c.eta2 * n2;
    CMatrix dense = CMatrix(g);
    // Anti-Hermitian exactly up to rounding; symmetrize away the rounding.
    dense = 0.5 * (dense - dense.adjoint()).eval();
    OperatorMatrix op{l1.window, std::move(dense), Symmetry::anti_hermitian};
    return {l1.window, std::move(op), provenance, n};
}

inline EffectiveGenerator accumulate_generator(const CoefficientState& c, const OperatorMatrix& l1,
                                               const OperatorMatrix& l2) {
    return accumulate_generator(GeneratorCoefficients::from(c), l1, l2, Provenance::word_accumulated,
                                static_cast<long>(c.n));
}

// ---------------------------------------------------------------------------

struct SpectralData {
    BasisWindow window;
    Eigen::VectorXd energies;  // eigenvalues of H, ascending
    CMatrix vectors;           // columns are eigenvectors, V(l, m)

    /// Quasi-energies of exp(-i H): phases of exp(-i lambda), in (-pi, pi].
    Eigen::VectorXd eigenphases(double time = 1.0) const {
        Eigen::VectorXd out(energies.size());
        for (Eigen::Index i = 0; i < energies.size(); ++i) {
            double p = std::remainder(-energies(i) * time, 2.0 * std::numbers::pi);
            if (p <= -std::numbers::pi) p += 2.0 * std::numbers::pi;
            out(i) = p;
        }
        return out;
    }
};

/// Dense Hermitian eigendecomposition with a residual check ||HV - V Lambda|| <= 1e-8 ||H||.
inline SpectralData diagonalize(const OperatorMatrix& h) {
    if (h.tag != Symmetry::hermitian) throw UsageError("diagonalize needs a Hermitian-tagged operator");
    h.verify(1e-10);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.entries);
    if (solver.info() != Eigen::Success)
        throw NumericError("Hermitian eigensolver did not converge (dimension " +
                           std::to_string(h.entries.rows()) + ")");
    SpectralData s{h.window, solver.eigenvalues(), solver.eigenvectors()};
    const double scale = h.entries.norm();
    const double residual = (h.entries * s.vectors - s.vectors * s.energies.asDiagonal()).norm();
    if (residual > 1e-8 * std::max(scale, 1.0)) {
        const double span = s.energies.maxCoeff() - s.energies.minCoeff();
        throw NumericError("eigendecomposition residual " + std::to_string(residual) + " for ||H|| = " +
                           std::to_string(scale) + ", spectral span " + std::to_string(span));
    }
    return s;
}

/// exp(-i H t) psi from a spectral decomposition of H.
inline CVector evolve_spectral(const SpectralData& s, const CVector& psi, double t) {
    CVector coeff = s.vectors.adjoint() * psi;
    for (Eigen::Index m = 0; m < coeff.size(); ++m) coeff(m) *= std::polar(1.0, -s.energies(m) * t);
    return s.vectors * coeff;
}

/// exp(-i H t) as a dense matrix.
inline CMatrix unitary_from_spectrum(const SpectralData& s, double t = 1.0) {
    Eigen::VectorXcd phase(s.energies.size());
    for (Eigen::Index m = 0; m < phase.size(); ++m) phase(m) = std::polar(1.0, -s.energies(m) * t);
    return s.vectors * phase.asDiagonal() * s.vectors.adjoint();
}

/// exp(G) for anti-Hermitian G.
inline CMatrix exponentiate(const EffectiveGenerator& g) {
    return unitary_from_spectrum(diagonalize(g.hamiltonian()));
}

inline double splitting_residual(double kick, double tau, const RotorState& psi, SinSqCoefficient c) {
    const BasisWindow& w = psi.window;
    const CVector lhs = evolve_spectral(diagonalize(build_L(kick, tau, w, c)), psi.amplitudes, 1.0);
    CVector rhs = evolve_spectral(diagonalize(build_cos_theta(w)), psi.amplitudes, kick);
    for (long i = 0; i < w.size; ++i) {
        const double l = static_cast<double>(w.momentum(i));
        rhs(i) *= std::polar(1.0, -0.5 * tau * l * l);
    }
    return (lhs - rhs).norm();
}

// ---------------------------------------------------------------------------

enum class EtaBranch { mean, even, odd };
enum class DeltaSource { recursion_limit, printed };

inline std::string to_string(EtaBranch b) {
    switch (b) {
        case EtaBranch::mean: return "parity_mean";
        case EtaBranch::even: return "even";
        case EtaBranch::odd: return "odd";
    }
    return "?";
}

inline std::string to_string(DeltaSource d) {
    return d == DeltaSource::recursion_limit ? "recursion_limit" : "printed";
}

struct FibonacciOptions {
    EtaBranch eta = EtaBranch::mean;
    DeltaSource delta = DeltaSource::recursion_limit;
    SinSqCoefficient sin_sq = SinSqCoefficient::sixth;
};

inline GeneratorCoefficients saturated_coefficients(const FibonacciOptions& opt = {}) {
    const auto s = saturated_necs();
    GeneratorCoefficients c;
    c.alpha = s.alpha;
    c.beta = s.beta;
    c.delta = opt.delta == DeltaSource::recursion_limit ? s.delta_recursion_limit : s.delta;
    switch (opt.eta) {
        case EtaBranch::mean: c.eta1 = s.eta1_mean; c.eta2 = s.eta2_mean; break;
        case EtaBranch::even: c.eta1 = s.eta1_even; c.eta2 = s.eta2_even; break;
        case EtaBranch::odd: c.eta1 = s.eta1_odd; c.eta2 = s.eta2_odd; break;
    }
    return c;
}

struct FibonacciPropagator {
    OperatorMatrix h;  // H_fi, Hermitian
    SpectralData spectrum;
    FibonacciOptions options;

    /// U_fi = exp(-i H_fi), dense.
    OperatorMatrix unitary() const {
        return {h.window, unitary_from_spectrum(spectrum), Symmetry::unitary};
    }

    /// U_fi^n psi.
    CVector apply_power(const CVector& psi, double n) const { return evolve_spectral(spectrum, psi, n); }
};

/// Effective Fibonacci Hamiltonian from the saturated normalized coefficients.
inline FibonacciPropagator fibonacci_propagator(double k1, double k2, double tau, const BasisWindow& w,
                                                const FibonacciOptions& opt = {}) {
    const auto l1 = build_L(k1, tau, w, opt.sin_sq);
    const auto l2 = build_L(k2, tau, w, opt.sin_sq);
    const auto gen = accumulate_generator(saturated_coefficients(opt), l1, l2, Provenance::fibonacci_saturated);
    auto h = gen.hamiltonian();
    auto spec = diagonalize(h);
    return {std::move(h), std::move(spec), opt};
}

// ---------------------------------------------------------------------------

/// sum_{l,m} l^2 |V(l0,m)|^2 |V(l,m)|^2: long-time mean of <l^2> from |l0>
/// once all oscillating cross terms have dephased.
inline double plateau_estimate(const SpectralData& s, long l0) {
    if (!s.window.contains(l0)) throw DomainError("l0 outside the spectral window");
    const Eigen::Index row = s.window.index_of(l0);
    const Eigen::Index n = s.vectors.rows();
    Eigen::VectorXd l2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = static_cast<double>(s.window.momentum(i));
        l2(i) = l * l;
    }
    long double acc = 0.0L;
    for (Eigen::Index m = 0; m < s.vectors.cols(); ++m) {
        const double w0 = std::norm(s.vectors(row, m));
        if (w0 == 0.0) continue;
        acc += static_cast<long double>(w0) * s.vectors.col(m).cwiseAbs2().dot(l2);
    }
    return static_cast<double>(acc);
}

struct EigenvectorMetrics {
    long peak_l;
    double ipr;
    std::optional<double> tail_slope;  // d log|V|^2 / d|l - peak|; absent if under 10 fit points
};

struct LocalizationOptions {
    double fit_low = 1e-12;
    double fit_high = 1e-2;
    int min_points = 10;
};

inline EigenvectorMetrics vector_metrics(const BasisWindow& w, const CVector& v, const LocalizationOptions& opt = {}) {
    Eigen::VectorXd p = v.cwiseAbs2();
    const double total = p.sum();
    if (total > 0.0) p /= total;
    Eigen::Index peak = 0;
    p.maxCoeff(&peak);
    EigenvectorMetrics m{w.momentum(peak), p.squaredNorm(), std::nullopt};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < opt.fit_low || p(i) > opt.fit_high) continue;
        const double x = static_cast<double>(std::abs(i - peak));
        const double y = std::log(p(i));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count >= opt.min_points) {
        const double den = count * sxx - sx * sx;
        if (den > 0.0) m.tail_slope = (count * sxy - sx * sy) / den;
    }
    return m;
}

inline std::vector<EigenvectorMetrics> localization_profile(const SpectralData& s,
                                                            const LocalizationOptions& opt = {}) {
    std::vector<EigenvectorMetrics> out;
    out.reserve(static_cast<std::size_t>(s.vectors.cols()));
    for (Eigen::Index m = 0; m < s.vectors.cols(); ++m) out.push_back(vector_metrics(s.window, s.vectors.col(m), opt));
    return out;
}

struct RegularScales {
    double localization_length;
    double heisenberg_time;
};

/// Order-of-magnitude scales of the regular rotor, l_s ~ K^2 tau^2 and N* ~ l_s,
/// with both proportionality constants set to 1.
inline RegularScales regular_qkr_scales(double kick, double tau) {
    if (!(kick > 0.0) || !(tau > 0.0)) throw DomainError("regular_qkr_scales needs K, tau > 0");
    const double ls = kick * kick * tau * tau;
    return {ls, ls};
}

}  // namespace fqkr
