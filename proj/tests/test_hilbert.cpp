#include <gtest/gtest.h>

#include <cmath>

#include "fqkr/hilbert.hpp"
#include "oracles.hpp"

using namespace fqkr;

TEST(BasisWindow, Geometry) {
    BasisWindow w(0, 8);
    EXPECT_EQ(w.l_min(), -4);
    EXPECT_EQ(w.l_max(), 3);
    EXPECT_EQ(w.momentum(0), -4);
    EXPECT_EQ(w.index_of(3), 7);
    EXPECT_TRUE(w.contains(-4));
    EXPECT_FALSE(w.contains(4));
    BasisWindow shifted(200, 64);
    EXPECT_EQ(shifted.l_min(), 168);
    EXPECT_THROW(BasisWindow(0, 7), DomainError);
    EXPECT_THROW(BasisWindow(0, 0), DomainError);
    EXPECT_THROW(BasisWindow(0, -4), DomainError);
}

TEST(RotorState, SizeMismatch) {
    EXPECT_THROW(RotorState(BasisWindow(0, 8), CVector::Zero(6)), IntegrityError);
}

TEST(Builders, MatchFourierQuadrature) {
    const BasisWindow w(3, 16);
    struct Case {
        OperatorMatrix op;
        std::function<cplx(double)> f;
    };
    const Case cases[] = {
        {build_cos_theta(w), [](double t) { return cplx(std::cos(t)); }},
        {build_sin_theta(w), [](double t) { return cplx(std::sin(t)); }},
        {build_sin_sq(w), [](double t) { return cplx(std::sin(t) * std::sin(t)); }},
    };
    for (const auto& c : cases) {
        for (long i = 0; i < w.size; ++i)
            for (long j = 0; j < w.size; ++j) {
                const cplx want = oracle::fourier_element(w.momentum(i), w.momentum(j), c.f, 64);
                ASSERT_LT(std::abs(c.op.entries(i, j) - want), 1e-14) << i << "," << j;
            }
        EXPECT_NO_THROW(c.op.verify());
    }
}

TEST(Builders, SymmetrizedLSinIsAnticommutator) {
    const BasisWindow w(-2, 20);
    CMatrix lop = CMatrix::Zero(w.size, w.size);
    for (long i = 0; i < w.size; ++i) lop(i, i) = static_cast<double>(w.momentum(i));
    const CMatrix s = build_sin_theta(w).entries;
    const CMatrix want = lop * s + s * lop;
    EXPECT_LT((build_sym_lsin(w).entries - want).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NO_THROW(build_sym_lsin(w).verify());
}

TEST(Builders, SinSqEqualsSinTimesSinInInterior) {
    const BasisWindow w(0, 32);
    const CMatrix s = build_sin_theta(w).entries;
    const CMatrix s2 = s * s;
    const CMatrix q = build_sin_sq(w).entries;
    for (long i = 1; i + 1 < w.size; ++i)
        for (long j = 1; j + 1 < w.size; ++j) ASSERT_LT(std::abs(s2(i, j) - q(i, j)), 1e-15);
}

TEST(KickMatrix, BesselMatchesSeriesAndQuadrature) {
    const BasisWindow w(0, 64);
    const double K = 12.0;
    const auto m = kick_matrix_bessel(w, K);
    for (long i = 0; i < w.size; i += 3)
        for (long j = 0; j < w.size; j += 5) {
            const long d = w.momentum(i) - w.momentum(j);
            const cplx phase = std::pow(cplx(0, -1), static_cast<double>(((d % 4) + 4) % 4));
            const cplx series = phase * oracle::bessel_j_series(static_cast<int>(d), K);
            ASSERT_LT(std::abs(m.entries(i, j) - series), 1e-12) << d;
            const cplx quad = oracle::fourier_element(w.momentum(i), w.momentum(j),
                                                      [K](double t) { return std::polar(1.0, -K * std::cos(t)); });
            ASSERT_LT(std::abs(m.entries(i, j) - quad), 1e-12) << d;
        }
}

TEST(KickMatrix, UnitaryInInteriorAndZeroKick) {
    const BasisWindow w(0, 128);
    const auto m = kick_matrix_bessel(w, 10.0);
    const CMatrix g = m.entries.adjoint() * m.entries;
    for (long i = 40; i < 88; ++i) EXPECT_NEAR(std::abs(g(i, i)), 1.0, 1e-12);
    const auto id = kick_matrix_bessel(w, 0.0);
    EXPECT_LT((id.entries - CMatrix::Identity(128, 128)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(kick_matrix_bessel(w, -1.0), DomainError);
}

TEST(OperatorMatrix, VerifyRejectsBrokenTag) {
    auto op = build_cos_theta(BasisWindow(0, 8));
    op.entries(0, 1) = cplx(0.5, 0.1);
    EXPECT_THROW(op.verify(), IntegrityError);
    auto bad_shape = build_cos_theta(BasisWindow(0, 8));
    bad_shape.window = BasisWindow(0, 10);
    EXPECT_THROW(bad_shape.verify(), IntegrityError);
}

TEST(States, MomentumEigenstate) {
    const BasisWindow w(0, 16);
    const auto s = momentum_eigenstate(w, 3);
    EXPECT_DOUBLE_EQ(kinetic_energy(s), 9.0);
    EXPECT_THROW(momentum_eigenstate(w, 8), DomainError);
}

TEST(States, GaussianMarginAndEnergy) {
    const BasisWindow w(0, 128);
    const auto g = gaussian_state(w, 0);
    EXPECT_NEAR(g.norm(), 1.0, 1e-15);
    // sum l^2 e^{-2 l^2} / sum e^{-2 l^2}
    double num = 0, den = 0;
    for (int l = -30; l <= 30; ++l) {
        num += l * l * std::exp(-2.0 * l * l);
        den += std::exp(-2.0 * l * l);
    }
    EXPECT_NEAR(kinetic_energy(g), num / den, 1e-14);
    const BasisWindow shifted(200, 128);
    EXPECT_NEAR(kinetic_energy(gaussian_state(shifted, 200)), 40000.0 + num / den, 1e-8);
    EXPECT_THROW(gaussian_state(w, 50), DomainError);
    EXPECT_THROW(gaussian_state(w, 100), DomainError);
}

TEST(States, KineticEnergyDirectSumAndNormGuard) {
    const BasisWindow w(5, 10);
    CVector a(10);
    for (int i = 0; i < 10; ++i) a(i) = cplx(i + 1, -i);
    a /= a.norm();
    RotorState s(w, a);
    double direct = 0;
    for (int i = 0; i < 10; ++i) direct += std::pow(w.momentum(i), 2) * std::norm(a(i));
    EXPECT_NEAR(kinetic_energy(s), direct, 1e-12);
    s.amplitudes *= 1.01;
    EXPECT_THROW(kinetic_energy(s), IntegrityError);
}

TEST(States, EdgeProbability) {
    const BasisWindow w(0, 100);
    EXPECT_NEAR(edge_probability(momentum_eigenstate(w, -50)), 1.0, 0);
    EXPECT_NEAR(edge_probability(momentum_eigenstate(w, 49)), 1.0, 0);
    EXPECT_EQ(edge_probability(momentum_eigenstate(w, -45)), 0.0);
    EXPECT_EQ(edge_probability(momentum_eigenstate(w, -46)), 1.0);
}
