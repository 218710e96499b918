#pragma once

// Truncated angular-momentum basis, rotor states and dense operator matrices.
//
// Convention: psi(theta) = sum_l c_l exp(i l theta) / sqrt(2 pi), so that
// <l'|cos|l> = (d_{l',l+1} + d_{l',l-1}) / 2 and
// <l'|sin|l> = (d_{l',l+1} - d_{l',l-1}) / (2i).

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fqkr/errors.hpp"

namespace fqkr {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Momentum window l in [center - size/2, center + size/2 - 1].
struct BasisWindow {
    long center = 0;
    long size = 0;

    BasisWindow() = default;
    BasisWindow(long center, long size) : center(center), size(size) {
        if (size <= 0 || size % 2 != 0)
            throw DomainError("basis size must be a positive even integer, got " +
                              std::to_string(size));
    }

    long l_min() const { return center - size / 2; }
    long l_max() const { return center + size / 2 - 1; }
    long momentum(long index) const { return l_min() + index; }
    long index_of(long l) const { return l - l_min(); }
    bool contains(long l) const { return l >= l_min() && l <= l_max(); }

    friend bool operator==(const BasisWindow&, const BasisWindow&) = default;
};

struct RotorState {
    BasisWindow window;
    CVector amplitudes;

    RotorState() = default;
    RotorState(BasisWindow w, CVector a) : window(w), amplitudes(std::move(a)) {
        if (amplitudes.size() != window.size)
            throw IntegrityError("amplitude vector does not match basis size");
    }

    double norm() const { return amplitudes.norm(); }
};

/// Probability on the outermost `fraction` of the window, taken on each side.
inline double edge_probability(const RotorState& s, double fraction = 0.05) {
    const long n = s.window.size;
    auto band = static_cast<long>(std::ceil(fraction * static_cast<double>(n)));
    if (band <= 0) return 0.0;
    if (2 * band > n) band = n / 2;
    return s.amplitudes.head(band).squaredNorm() + s.amplitudes.tail(band).squaredNorm();
}

enum class Symmetry { hermitian, anti_hermitian, unitary, none };

struct OperatorMatrix {
    BasisWindow window;
    CMatrix entries;
    Symmetry tag = Symmetry::none;

    /// Max-entry deviation from the property named by the tag.
    double tag_defect() const {
        switch (tag) {
            case Symmetry::hermitian:
                return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
            case Symmetry::anti_hermitian:
                return (entries + entries.adjoint()).cwiseAbs().maxCoeff();
            case Symmetry::unitary:
                return (entries.adjoint() * entries - CMatrix::Identity(entries.rows(), entries.cols()))
                    .cwiseAbs()
                    .maxCoeff();
            case Symmetry::none:
                return 0.0;
        }
        return 0.0;
    }

    /// Throws unless the tag holds within tol * max(1, max|entry|).
    void verify(double tol = 1e-12) const {
        if (entries.rows() != window.size || entries.cols() != window.size)
            throw IntegrityError("operator shape does not match basis window");
        const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
        if (tag_defect() > tol * scale)
            throw IntegrityError("operator entries inconsistent with symmetry tag");
    }
};

inline OperatorMatrix build_cos_theta(const BasisWindow& w) {
    CMatrix m = CMatrix::Zero(w.size, w.size);
    for (long i = 0; i + 1 < w.size; ++i) {
        m(i + 1, i) = 0.5;
        m(i, i + 1) = 0.5;
    }
    return {w, std::move(m), Symmetry::hermitian};
}

inline OperatorMatrix build_sin_theta(const BasisWindow& w) {
    CMatrix m = CMatrix::Zero(w.size, w.size);
    const cplx up{0.0, -0.5};  // 1/(2i)
    for (long i = 0; i + 1 < w.size; ++i) {
        m(i + 1, i) = up;
        m(i, i + 1) = -up;
    }
    return {w, std::move(m), Symmetry::hermitian};
}

inline OperatorMatrix build_l_squared(const BasisWindow& w) {
    CMatrix m = CMatrix::Zero(w.size, w.size);
    for (long i = 0; i < w.size; ++i) {
        const double l = static_cast<double>(w.momentum(i));
        m(i, i) = l * l;
    }
    return {w, std::move(m), Symmetry::hermitian};
}

/// l sin(theta) + sin(theta) l.
inline OperatorMatrix build_sym_lsin(const BasisWindow& w) {
    CMatrix m = CMatrix::Zero(w.size, w.size);
    const cplx up{0.0, -0.5};
    for (long i = 0; i + 1 < w.size; ++i) {
        const double lsum = static_cast<double>(w.momentum(i) + w.momentum(i + 1));
        m(i + 1, i) = up * lsum;
        m(i, i + 1) = -up * lsum;
    }
    return {w, std::move(m), Symmetry::hermitian};
}

/// sin^2(theta) = 1/2 - cos(2 theta)/2.
inline OperatorMatrix build_sin_sq(const BasisWindow& w) {
    CMatrix m = CMatrix::Zero(w.size, w.size);
    for (long i = 0; i < w.size; ++i) m(i, i) = 0.5;
    for (long i = 0; i + 2 < w.size; ++i) {
        m(i + 2, i) = -0.25;
        m(i, i + 2) = -0.25;
    }
    return {w, std::move(m), Symmetry::hermitian};
}

/// <l'|exp(-i K cos theta)|l> = (-i)^(l'-l) J_{l'-l}(K), truncated to the window.
/// Unitary only on rows far (>> K) from the window edges.
inline OperatorMatrix kick_matrix_bessel(const BasisWindow& w, double kick) {
    if (kick < 0.0) throw DomainError("kick strength must be non-negative");
    const long n = w.size;
    // Coupling by offset d = l' - l, indexed d + n - 1.
    std::vector<cplx> band(2 * n - 1);
    static constexpr cplx phases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};  // (-i)^k
    for (long d = -(n - 1); d <= n - 1; ++d) {
        const long a = d < 0 ? -d : d;
        double j = kick == 0.0 ? (a == 0 ? 1.0 : 0.0) : std::cyl_bessel_j(static_cast<double>(a), kick);
        if (d < 0 && (a % 2 == 1)) j = -j;  // J_{-a} = (-1)^a J_a
        band[d + n - 1] = phases[((d % 4) + 4) % 4] * j;
    }
    CMatrix m(n, n);
    for (long c = 0; c < n; ++c)
        for (long r = 0; r < n; ++r) m(r, c) = band[r - c + n - 1];
    return {w, std::move(m), Symmetry::unitary};
}

inline RotorState momentum_eigenstate(const BasisWindow& w, long l) {
    if (!w.contains(l)) throw DomainError("momentum " + std::to_string(l) + " outside window");
    CVector a = CVector::Zero(w.size);
    a(w.index_of(l)) = 1.0;
    return {w, std::move(a)};
}

/// psi(l) proportional to exp(-(l - l0)^2), renormalized on the window.
inline RotorState gaussian_state(const BasisWindow& w, long l0) {
    constexpr long kMargin = 20;
    if (!w.contains(l0)) throw DomainError("Gaussian center " + std::to_string(l0) + " outside window");
    if (l0 - w.l_min() < kMargin || w.l_max() - l0 < kMargin)
        throw DomainError("Gaussian center needs 20 states of margin inside the window");
    CVector a(w.size);
    for (long i = 0; i < w.size; ++i) {
        const double d = static_cast<double>(w.momentum(i) - l0);
        a(i) = std::exp(-d * d);
    }
    a /= a.norm();
    return {w, std::move(a)};
}

/// <l^2> = sum_l l^2 |c_l|^2.
inline double kinetic_energy(const RotorState& s) {
    long double norm2 = 0.0L, acc = 0.0L;
    for (long i = 0; i < s.window.size; ++i) {
        const long double p = std::norm(s.amplitudes(i));
        const long double l = static_cast<long double>(s.window.momentum(i));
        norm2 += p;
        acc += l * l * p;
    }
    if (std::abs(std::sqrt(static_cast<double>(norm2)) - 1.0) > 1e-6)
        throw IntegrityError("kinetic_energy: state norm deviates from 1 by more than 1e-6");
    return static_cast<double>(acc);
}

}  // namespace fqkr
