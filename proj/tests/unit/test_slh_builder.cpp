#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "lornz/slh_builder.hpp"
#include "test_support.hpp"

using namespace lornz;
using lornz::testing::max_abs;

namespace {

const Complex kI(0.0, 1.0);

std::vector<Complex> sorted(Eigen::VectorXcd v) {
    std::vector<Complex> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

double set_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    // Greedy matching; fine for the small, well-separated spectra used here.
    std::vector<Complex> rest(b.data(), b.data() + b.size());
    double worst = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        auto it = std::min_element(rest.begin(), rest.end(), [&](Complex x, Complex y) {
            return std::abs(x - a(i)) < std::abs(y - a(i));
        });
        worst = std::max(worst, std::abs(*it - a(i)));
        rest.erase(it);
    }
    return worst;
}

}  // namespace

TEST(ModelParams, Validation) {
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    p.gamma_0 = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = ModelParams{};
    p.kappa = -0.1;
    EXPECT_THROW(p.validate(), ValidationError);
    p = ModelParams{};
    p.gamma_1 = std::nan("");
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(ModelParams, RotatingFrameShift) {
    ModelParams p;
    p.omega_0 = 9.0;
    EXPECT_DOUBLE_EQ(p.detuning(), 1.0);
    EXPECT_DOUBLE_EQ(p.frame_omega_s(), 0.0);
    EXPECT_DOUBLE_EQ(p.frame_omega_0(), -1.0);
    p.frame = Frame::Lab;
    EXPECT_DOUBLE_EQ(p.frame_omega_0(), 9.0);
}

TEST(SLHTriple, RejectsBadInputs) {
    const Operator a = annihilation(3);
    EXPECT_THROW(SLHTriple(CMatrix::Identity(2, 2), {a}, number(3)), InvalidDimension);
    EXPECT_THROW(SLHTriple(2.0 * CMatrix::Identity(1, 1), {a}, number(3)), ValidationError);
    EXPECT_THROW(SLHTriple(CMatrix::Identity(1, 1), {a}, a), ValidationError);
    EXPECT_THROW(SLHTriple(CMatrix::Identity(1, 1), {annihilation(4)}, number(3)), LayoutMismatch);
}

TEST(AncillaSLH, CouplingAndHamiltonian) {
    ModelParams p;
    p.gamma_0 = 0.49;
    p.frame = Frame::Lab;
    const SLHTriple g = ancilla_slh(p, 6);
    ASSERT_EQ(g.couplings().size(), 1u);
    for (Index n = 1; n < 6; ++n) EXPECT_NEAR(g.couplings()[0].matrix()(n - 1, n).real(), 0.7 * std::sqrt(double(n)), 1e-14);
    for (Index n = 0; n < 6; ++n) EXPECT_NEAR(g.hamiltonian().matrix()(n, n).real(), p.omega_0 * n, 1e-12);
}

TEST(AncillaSLH, GeneratorGivesDampedRotation) {
    ModelParams p;
    p.gamma_0 = 0.8;
    p.frame = Frame::Lab;
    const Index d = 8;
    const SLHTriple g = ancilla_slh(p, d);
    const Operator a0 = annihilation(d);
    const Operator expect = a0 * Complex(-0.5 * p.gamma_0, -p.omega_0);
    EXPECT_LT(masked_max_abs_diff(heisenberg_generator(g, a0), expect), 1e-12);
}

TEST(DirectCoupling, ZeroAndLinearity) {
    const HilbertLayout layout({3, 3});
    const Operator c = embed(annihilation(3), 1, layout) * -0.4;
    const Operator k = embed(annihilation(3), 0, layout);
    EXPECT_LT(max_abs(direct_coupling_hamiltonian(c, Operator::zero(layout)).matrix()), 1e-15);
    const CMatrix scaled = direct_coupling_hamiltonian(c, k * std::sqrt(0.6)).matrix();
    EXPECT_LT(max_abs(scaled - std::sqrt(0.6) * direct_coupling_hamiltonian(c, k).matrix()), 1e-14);
}

TEST(DirectCoupling, FictitiousOutputForm) {
    const ModelParams p = ModelParams::paper_example();
    const HilbertLayout layout({4, 4});
    const Operator as = embed(annihilation(4), 0, layout);
    const Operator a0 = embed(annihilation(4), 1, layout);
    const Operator hi = direct_coupling_hamiltonian(fictitious_output(p, layout), as * std::sqrt(p.kappa));
    const Operator expect = (a0.adjoint() * as - as.adjoint() * a0) * (kI * (-0.5 * std::sqrt(p.kappa * p.gamma_0)));
    EXPECT_LT(max_abs(hi.matrix() - expect.matrix()), 1e-14);
}

TEST(AugmentedSLH, HermitianAndDecouplesAtZeroKappa) {
    ModelParams p = ModelParams::paper_example();
    const ModeDims dims{4, 3};
    EXPECT_TRUE(augmented_slh(p, dims).hamiltonian().is_hermitian());
    p.kappa = 0.0;
    p.frame = Frame::Lab;
    const HilbertLayout layout({4, 3});
    const Operator expect = embed(number(4), 0, layout) * p.omega_s + embed(number(3), 1, layout) * p.omega_0;
    EXPECT_LT(max_abs(augmented_slh(p, dims).hamiltonian().matrix() - expect.matrix()), 1e-14);
}

TEST(AugmentedSLH, ModeDriftMatchesComplexDrift) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        ModelParams p = lornz::testing::random_params(rng);
        p.gamma_1 = 0.0;
        const CMatrix got = mode_drift_from_generator(augmented_slh(p, {3, 3}));
        EXPECT_LT(max_abs(got - CMatrix(complex_drift(p))), 1e-12);
    }
}

TEST(ProbedSLH, ChannelsAndGammaOneZero) {
    ModelParams p = ModelParams::paper_example();
    const SLHTriple probed = probed_slh(p, {4, 4});
    EXPECT_EQ(probed.couplings().size(), 2u);
    p.gamma_1 = 0.0;
    const SLHTriple zero = probed_slh(p, {4, 4});
    const SLHTriple aug = augmented_slh(p, {4, 4});
    EXPECT_LT(max_abs(zero.couplings()[1].matrix()), 1e-15);
    EXPECT_LT(max_abs(zero.couplings()[0].matrix() - aug.couplings()[0].matrix()), 1e-15);
    EXPECT_EQ(zero.hamiltonian().matrix(), aug.hamiltonian().matrix());
}

// G_T(X) = G_p(X) + G_a(X) - i[X, H_I] for the generators of the two parts.
TEST(ProbedSLH, GeneratorDecomposition) {
    std::mt19937_64 rng(22);
    const ModelParams p = lornz::testing::random_params(rng);
    const ModeDims dims{3, 3};
    const HilbertLayout layout({3, 3});
    const SLHTriple total = probed_slh(p, dims);
    const Operator as = embed(annihilation(3), 0, layout);
    const Operator a0 = embed(annihilation(3), 1, layout);
    const SLHTriple principal(CMatrix::Identity(1, 1), {as * std::sqrt(p.gamma_1)},
                              embed(number(3), 0, layout) * p.frame_omega_s());
    const SLHTriple ancilla(CMatrix::Identity(1, 1), {a0 * std::sqrt(p.gamma_0)},
                            embed(number(3), 1, layout) * p.frame_omega_0());
    const Operator hi = direct_coupling_hamiltonian(fictitious_output(p, layout), as * std::sqrt(p.kappa));
    for (int trial = 0; trial < 10; ++trial) {
        const Operator x(layout, lornz::testing::random_matrix(rng, 9));
        const Operator expect = heisenberg_generator(principal, x) + heisenberg_generator(ancilla, x) +
                                commutator(x, hi) * (-kI);
        EXPECT_LT(max_abs(heisenberg_generator(total, x).matrix() - expect.matrix()), 1e-10);
    }
}

TEST(QuadratureRealization, PaperBlocks) {
    const QuadratureModel m = quadrature_realization(ModelParams::paper_example());
    EXPECT_NEAR(m.A(0, 2), 0.3, 1e-15);
    EXPECT_NEAR(m.A(1, 3), 0.3, 1e-15);
    EXPECT_NEAR(m.A(2, 0), -0.3, 1e-15);
    EXPECT_NEAR(m.A(3, 1), -0.3, 1e-15);
    EXPECT_NEAR(m.A(0, 0), -0.4, 1e-15);
    EXPECT_NEAR(m.A(2, 2), -0.3, 1e-15);
    const Eigen::Vector4d b = m.B.diagonal();
    EXPECT_NEAR(b(0), -std::sqrt(0.8), 1e-15);
    EXPECT_NEAR(b(3), -std::sqrt(0.6), 1e-15);
    EXPECT_NEAR(m.C(0, 0), std::sqrt(0.8), 1e-15);
    EXPECT_EQ(m.C(0, 1), 0.0);
}

TEST(QuadratureRealization, DecoupledEigenvalues) {
    ModelParams p;
    p.kappa = 0.0;
    p.gamma_0 = 0.6;
    p.gamma_1 = 0.8;
    p.omega_0 = 7.0;
    p.frame = Frame::Lab;
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::Matrix4d>(quadrature_realization(p).A).eigenvalues();
    Eigen::VectorXcd expect(4);
    expect << Complex(-0.4, 10.0), Complex(-0.4, -10.0), Complex(-0.3, 7.0), Complex(-0.3, -7.0);
    EXPECT_LT(set_distance(ev, expect), 1e-12);
}

// Real and complex drifts are similar under Xi + Xi: eigenvalues of A are
// those of M together with their conjugates.
TEST(QuadratureRealization, SimilarToComplexDrift) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const ModelParams p = lornz::testing::random_params(rng);
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::Matrix4d>(quadrature_realization(p).A).eigenvalues();
        const Eigen::Vector2cd m = Eigen::ComplexEigenSolver<Eigen::Matrix2cd>(complex_drift(p)).eigenvalues();
        Eigen::VectorXcd expect(4);
        expect << m(0), m(1), std::conj(m(0)), std::conj(m(1));
        EXPECT_LT(set_distance(ev, expect), 1e-10);
    }
}

TEST(QuadratureRealization, HurwitzForPositiveRates) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 200; ++trial) {
        const ModelParams p = lornz::testing::random_params(rng);
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::Matrix4d>(quadrature_realization(p).A).eigenvalues();
        for (Index i = 0; i < 4; ++i) EXPECT_LT(ev(i).real(), 0.0);
    }
}

TEST(QuadratureRealization, DeterministicAndPure) {
    const ModelParams p = ModelParams::paper_example();
    const QuadratureModel a = quadrature_realization(p);
    const QuadratureModel b = quadrature_realization(p);
    EXPECT_EQ(a.A, b.A);
    EXPECT_EQ(a.B, b.B);
    EXPECT_EQ(a.params, p);
}

TEST(QuadratureRealization, GeneratorReproducesDriftRows) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 10; ++trial) {
        const ModelParams p = lornz::testing::random_params(rng);
        const Eigen::MatrixXd got = quadrature_drift_from_generator(probed_slh(p, {3, 3}));
        EXPECT_LT((got - quadrature_realization(p).A).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(QuadratureTransform, Unitary) {
    const Eigen::Matrix2cd xi = quadrature_transform();
    EXPECT_LT((xi * xi.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MarkovianLimit, Structure) {
    const ModelParams p = ModelParams::paper_example();
    const SLHTriple m = markovian_limit_slh(p, 5);
    ASSERT_EQ(m.couplings().size(), 2u);
    EXPECT_LT(max_abs(m.couplings()[0].matrix() - std::sqrt(p.kappa) * annihilation(5).matrix()), 1e-15);
    EXPECT_LT(max_abs(m.couplings()[1].matrix() - std::sqrt(p.gamma_1) * annihilation(5).matrix()), 1e-15);
}
