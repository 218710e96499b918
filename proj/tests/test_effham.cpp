#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fqkr/effham.hpp"
#include "fqkr/evolve.hpp"

using namespace fqkr;

namespace {

const KickSequenceSpec kFib{SequenceKind::fibonacci, 10.0, 12.0, 0};

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CoefficientState word_coefficients(int n) {
    CoefficientState c;
    for (int k = 1; k <= n; ++k) c = recursion_step(c, fibonacci_kick(k));
    return c;
}

}  // namespace

TEST(BuildL, ZeroTauIsKickOperator) {
    const BasisWindow w(0, 64);
    const auto l = build_L(7.0, 0.0, w);
    EXPECT_EQ((l.entries - 7.0 * build_cos_theta(w).entries).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NO_THROW(build_L(10.0, 0.3, w).verify(1e-12));
    EXPECT_THROW(build_L(1.0, -0.1, w), DomainError);
}

TEST(BuildL, ResidualSlopeDiscriminatesSinSqCoefficient) {
    const BasisWindow w(0, 256);
    const auto psi = gaussian_state(w, 0);
    const std::vector<double> taus{0.04, 0.02, 0.01};
    std::vector<double> r6, r12;
    for (double t : taus) {
        r6.push_back(splitting_residual(10.0, t, psi, SinSqCoefficient::sixth));
        r12.push_back(splitting_residual(10.0, t, psi, SinSqCoefficient::twelfth));
    }
    EXPECT_NEAR(loglog_slope(taus, r6), 2.0, 0.3);
    EXPECT_LE(loglog_slope(taus, r12), 1.3);
}

TEST(Generator, SingleKickAndAntiHermitian) {
    const BasisWindow w(0, 128);
    const auto l1 = build_L(10.0, 0.01, w), l2 = build_L(12.0, 0.01, w);
    const auto g = accumulate_generator(GeneratorCoefficients{1, 0, 0, 0, 0}, l1, l2);
    EXPECT_LT((g.matrix.entries - cplx(0, -1) * l1.entries).cwiseAbs().maxCoeff(), 1e-14);
    for (int n : {2, 3, 5, 8, 13}) {
        const auto gn = accumulate_generator(word_coefficients(n), l1, l2);
        EXPECT_EQ(gn.n, n);
        EXPECT_LE((gn.matrix.entries + gn.matrix.entries.adjoint()).norm(), 1e-10 * gn.matrix.entries.norm());
        EXPECT_NO_THROW(gn.hamiltonian().verify(1e-10));
    }
    EXPECT_THROW(accumulate_generator(GeneratorCoefficients{}, l1, build_L(1, 0, BasisWindow(0, 64))), UsageError);
}

TEST(Generator, ThreeKickWordHasNoFirstCommutator) {
    const auto c = word_coefficients(3);
    EXPECT_EQ(c.delta, 0);
    const BasisWindow w(0, 64);
    const auto l1 = build_L(10.0, 0.05, w), l2 = build_L(12.0, 0.05, w);
    auto gc = GeneratorCoefficients::from(c);
    const auto full = accumulate_generator(gc, l1, l2);
    gc.delta = 123.0;
    const auto with_delta = accumulate_generator(gc, l1, l2);
    EXPECT_GT((full.matrix.entries - with_delta.matrix.entries).norm(), 1.0);
}

TEST(Generator, BchTruncationOnlyIsAtLeastSecondOrderInTau) {
    // Oracle: product of exact exponentials of the same L's; isolates the commutator algebra.
    const BasisWindow w(0, 256);
    const auto psi = gaussian_state(w, 0);
    std::vector<double> taus{0.02, 0.01, 0.005}, res;
    for (double tau : taus) {
        const auto l1 = build_L(10.0, tau, w), l2 = build_L(12.0, tau, w);
        const auto d1 = diagonalize(l1), d2 = diagonalize(l2);
        CVector s = psi.amplitudes;
        for (int k = 1; k <= 3; ++k) s = evolve_spectral(fibonacci_kick(k) == Kick::K1 ? d1 : d2, s, 1.0);
        const auto g = accumulate_generator(word_coefficients(3), l1, l2);
        res.push_back((evolve_spectral(diagonalize(g.hamiltonian()), psi.amplitudes, 1.0) - s).norm());
    }
    EXPECT_GE(loglog_slope(taus, res), 1.7);
}

TEST(Generator, WordGeneratorApproachesExactStepsAsTauShrinks) {
    const BasisWindow w(0, 512);
    const auto psi = gaussian_state(w, 0);
    std::vector<double> taus{0.02, 0.01, 0.005}, res;
    for (double tau : taus) {
        const auto g = accumulate_generator(word_coefficients(3), build_L(10.0, tau, w), build_L(12.0, tau, w));
        const CVector a = evolve_spectral(diagonalize(g.hamiltonian()), psi.amplitudes, 1.0);
        SplitStepPropagator prop(w, tau);
        auto s = psi;
        propagate(prop, s, kFib, 1, 3);
        res.push_back((a - s.amplitudes).norm());
    }
    EXPECT_GT(res[0], res[1]);
    EXPECT_GT(res[1], res[2]);
    EXPECT_NEAR(loglog_slope(taus, res), 2.0, 0.3);
}

TEST(Diagonalize, DiagonalInputAndReconstruction) {
    const BasisWindow w(0, 8);
    const auto s = diagonalize(build_l_squared(w));
    for (Eigen::Index m = 0; m < 8; ++m) {
        EXPECT_NEAR(s.vectors.col(m).norm(), 1.0, 1e-12);
        EXPECT_NEAR(s.vectors.col(m).cwiseAbs().maxCoeff(), 1.0, 1e-12);
    }
    EXPECT_THROW(diagonalize(kick_matrix_bessel(w, 1.0)), UsageError);
    auto bad = build_cos_theta(w);
    bad.entries(0, 1) += 1e-6;
    EXPECT_THROW(diagonalize(bad), IntegrityError);
}

TEST(Diagonalize, EigenphasesInRange) {
    const BasisWindow w(0, 64);
    const auto s = diagonalize(build_L(10.0, 0.5, w));
    const auto ph = s.eigenphases(3.0);
    EXPECT_EQ(ph.size(), 64);
    for (Eigen::Index i = 0; i < ph.size(); ++i) {
        EXPECT_GT(ph(i), -std::numbers::pi);
        EXPECT_LE(ph(i), std::numbers::pi);
    }
}

TEST(FibonacciPropagator, UnitaryAndDegenerateLimit) {
    const BasisWindow w(0, 128);
    const auto fp = fibonacci_propagator(10.0, 12.0, 0.01, w);
    EXPECT_LT(fp.unitary().tag_defect(), 1e-8);
    const CMatrix v = fp.spectrum.vectors;
    EXPECT_LT((v.adjoint() * v - CMatrix::Identity(128, 128)).cwiseAbs().maxCoeff(), 1e-8);
    // Equal amplitudes: commutators vanish and alpha + beta = 1.
    const auto same = fibonacci_propagator(11.0, 11.0, 0.02, w);
    EXPECT_LT((same.h.entries - build_L(11.0, 0.02, w).entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FibonacciPropagator, OptionsSelectCoefficients) {
    const auto s = saturated_necs();
    EXPECT_DOUBLE_EQ(saturated_coefficients().delta, s.delta_recursion_limit);
    EXPECT_DOUBLE_EQ(saturated_coefficients({EtaBranch::mean, DeltaSource::printed}).delta, s.delta);
    EXPECT_DOUBLE_EQ(saturated_coefficients({EtaBranch::odd}).eta1, s.eta1_odd);
    EXPECT_DOUBLE_EQ(saturated_coefficients({EtaBranch::even}).eta2, s.eta2_even);
}

TEST(Plateau, IdentityAndPermutationInvariance) {
    const BasisWindow w(0, 32);
    SpectralData id{w, Eigen::VectorXd::Zero(32), CMatrix::Identity(32, 32)};
    EXPECT_DOUBLE_EQ(plateau_estimate(id, 5), 25.0);
    EXPECT_THROW(plateau_estimate(id, 40), DomainError);

    const auto s = diagonalize(build_L(10.0, 0.3, w));
    SpectralData perm = s;
    std::vector<int> order(32);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937(1));
    for (int m = 0; m < 32; ++m) {
        perm.vectors.col(m) = s.vectors.col(order[m]) * std::polar(1.0, 0.3 * m);
        perm.energies(m) = s.energies(order[m]);
    }
    EXPECT_NEAR(plateau_estimate(perm, 2), plateau_estimate(s, 2), 1e-10);
}

TEST(Plateau, MatchesDephasedAverageOfPowers) {
    const BasisWindow w(0, 512);
    const auto fp = fibonacci_propagator(10.0, 12.0, 0.01, w);
    const auto psi = momentum_eigenstate(w, 0);
    double acc = 0;
    int count = 0;
    for (int n = 1000; n <= 10000; n += 50) {
        RotorState s(w, fp.apply_power(psi.amplitudes, n));
        acc += kinetic_energy(s);
        ++count;
    }
    const double est = plateau_estimate(fp.spectrum, 0);
    EXPECT_NEAR(acc / count, est, 0.1 * est);
}

TEST(Localization, MetricsOnSimpleVectors) {
    const BasisWindow w(0, 64);
    CVector e = CVector::Zero(64);
    e(10) = 1.0;
    const auto m = vector_metrics(w, e);
    EXPECT_DOUBLE_EQ(m.ipr, 1.0);
    EXPECT_EQ(m.peak_l, w.momentum(10));
    EXPECT_FALSE(m.tail_slope.has_value());
    const auto u = vector_metrics(w, CVector::Constant(64, 1.0 / 8.0));
    EXPECT_NEAR(u.ipr, 1.0 / 64.0, 1e-15);
    CVector x(64);
    for (int i = 0; i < 64; ++i) x(i) = std::exp(-0.4 * std::abs(i - 30));
    const auto ex = vector_metrics(w, x);
    ASSERT_TRUE(ex.tail_slope.has_value());
    EXPECT_NEAR(*ex.tail_slope, -0.8, 1e-9);
}

TEST(RegularScales, Scaling) {
    EXPECT_DOUBLE_EQ(regular_qkr_scales(15.0, 1.0).localization_length, 225.0);
    EXPECT_DOUBLE_EQ(regular_qkr_scales(30.0, 1.0).localization_length, 900.0);
    EXPECT_DOUBLE_EQ(regular_qkr_scales(30.0, 0.5).heisenberg_time, regular_qkr_scales(15.0, 1.0).heisenberg_time);
    EXPECT_THROW(regular_qkr_scales(0.0, 1.0), DomainError);
}
