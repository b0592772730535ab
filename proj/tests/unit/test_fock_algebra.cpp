#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "lornz/fock_algebra.hpp"
#include "test_support.hpp"

using namespace lornz;
using lornz::testing::max_abs;

TEST(HilbertLayout, RejectsSmallDims) {
    EXPECT_THROW(HilbertLayout({1}), InvalidDimension);
    EXPECT_THROW(HilbertLayout({3, 1}), InvalidDimension);
    EXPECT_THROW(HilbertLayout(std::vector<Index>{}), InvalidDimension);
}

TEST(HilbertLayout, FlatIndexRoundTrip) {
    const HilbertLayout layout({3, 4});
    EXPECT_EQ(layout.total_dim(), 12);
    for (Index i = 0; i < 12; ++i) {
        const auto lv = layout.levels(i);
        EXPECT_EQ(layout.flat_index(lv), i);
    }
    const std::array<Index, 2> lv{2, 1};
    EXPECT_EQ(layout.flat_index(lv), 2 * 4 + 1);
}

TEST(Ladder, QubitAnnihilation) {
    CMatrix expect(2, 2);
    expect << 0.0, 1.0, 0.0, 0.0;
    EXPECT_EQ(annihilation(2).matrix(), expect);
    EXPECT_THROW(annihilation(1), InvalidDimension);
}

TEST(Ladder, SqrtRule) {
    EXPECT_NEAR(annihilation(3).matrix()(1, 2).real(), 1.41421356, 1e-8);
    const Operator a = annihilation(6);
    for (Index n = 0; n < 5; ++n) EXPECT_DOUBLE_EQ(a.matrix()(n, n + 1).real(), std::sqrt(n + 1.0));
}

TEST(Ladder, CommutatorBelowTruncation) {
    const Index d = 8;
    const Operator c = commutator(annihilation(d), creation(d));
    const CMatrix block = c.matrix().topLeftCorner(d - 1, d - 1);
    EXPECT_LT(max_abs(block - CMatrix::Identity(d - 1, d - 1)), 1e-14);
    // The top level carries the truncation defect.
    EXPECT_NEAR(c.matrix()(d - 1, d - 1).real(), -(d - 1.0), 1e-12);
}

TEST(Ladder, QuadraturesAreHermitian) {
    EXPECT_TRUE(position_quadrature(7).is_hermitian());
    EXPECT_TRUE(momentum_quadrature(7).is_hermitian());
    EXPECT_TRUE(number(7).is_hermitian());
}

TEST(OperatorAlgebra, AdjointIsInvolution) {
    std::mt19937_64 rng(1);
    const Operator x(HilbertLayout({3, 2}), lornz::testing::random_matrix(rng, 6));
    EXPECT_EQ(x.adjoint().adjoint().matrix(), x.matrix());
}

TEST(OperatorAlgebra, LayoutMismatchThrows) {
    const Operator a = annihilation(3);
    const Operator b = annihilation(4);
    EXPECT_THROW(a + b, LayoutMismatch);
    EXPECT_THROW(Operator(HilbertLayout({2, 2}), CMatrix::Zero(3, 3)), InvalidDimension);
}

TEST(Embed, IdentityMapsToIdentity) {
    const HilbertLayout layout({3, 4});
    for (Index slot : {0, 1}) {
        const Operator id = embed(Operator::identity(HilbertLayout::single(layout.dim(slot))), slot, layout);
        EXPECT_EQ(id.matrix(), CMatrix::Identity(12, 12));
    }
}

TEST(Embed, LowersOnlyItsSlot) {
    const HilbertLayout layout({2, 2});
    const Operator a0 = embed(annihilation(2), 0, layout);
    CVector ket = CVector::Zero(4);
    const std::array<Index, 2> one_zero{1, 0}, zero_zero{0, 0};
    ket(layout.flat_index(one_zero)) = 1.0;
    const CVector out = a0.matrix() * ket;
    CVector expect = CVector::Zero(4);
    expect(layout.flat_index(zero_zero)) = 1.0;
    EXPECT_LT((out - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Embed, DifferentSlotsCommute) {
    std::mt19937_64 rng(2);
    const HilbertLayout layout({3, 4});
    for (int trial = 0; trial < 20; ++trial) {
        const Operator x = embed(Operator(HilbertLayout::single(3), lornz::testing::random_matrix(rng, 3)), 0, layout);
        const Operator y = embed(Operator(HilbertLayout::single(4), lornz::testing::random_matrix(rng, 4)), 1, layout);
        EXPECT_LT(max_abs(commutator(x, y).matrix()), 1e-12);
    }
}

TEST(Embed, IsHomomorphism) {
    std::mt19937_64 rng(3);
    const HilbertLayout layout({3, 2});
    const Operator x(HilbertLayout::single(2), lornz::testing::random_matrix(rng, 2));
    const Operator y(HilbertLayout::single(2), lornz::testing::random_matrix(rng, 2));
    const CMatrix lhs = embed(x * y, 1, layout).matrix();
    const CMatrix rhs = (embed(x, 1, layout) * embed(y, 1, layout)).matrix();
    EXPECT_LT(max_abs(lhs - rhs), 1e-12);
}

TEST(Embed, WrongDimensionThrows) {
    EXPECT_THROW(embed(annihilation(3), 1, HilbertLayout({3, 4})), InvalidDimension);
    EXPECT_THROW(embed(annihilation(3), 2, HilbertLayout({3, 4})), InvalidDimension);
}

TEST(Lindblad, IdentityIsFixed) {
    std::mt19937_64 rng(4);
    const Operator n(HilbertLayout::single(5), lornz::testing::random_matrix(rng, 5));
    EXPECT_LT(max_abs(lindblad_heisenberg(n, Operator::identity(n.layout())).matrix()), 1e-12);
}

TEST(Lindblad, PhotonLossOnNumber) {
    const Index d = 10;
    const Operator out = lindblad_heisenberg(annihilation(d), number(d));
    EXPECT_LT(masked_max_abs_diff(out, -number(d)), 1e-12);
}

TEST(Lindblad, MatchesExpandedForm) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix N = lornz::testing::random_matrix(rng, 4);
        const CMatrix X = lornz::testing::random_matrix(rng, 4);
        const CMatrix Nd = N.adjoint();
        // N^dag X N - (1/2){N^dag N, X}
        const CMatrix expect = Nd * X * N - 0.5 * (Nd * N * X + X * Nd * N);
        const Operator got = lindblad_heisenberg(Operator(HilbertLayout::single(4), N), Operator(HilbertLayout::single(4), X));
        EXPECT_LT(max_abs(got.matrix() - expect), 1e-10);
    }
}

TEST(Lindblad, SchrodingerIsTraceless) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const Operator n(HilbertLayout::single(5), lornz::testing::random_matrix(rng, 5));
        const Operator rho(HilbertLayout::single(5), lornz::testing::random_density(rng, 5));
        EXPECT_LT(std::abs(lindblad_schrodinger(n, rho).trace()), 1e-10);
    }
}

TEST(Lindblad, VacuumIsDarkForLoss) {
    const DensityMatrix vac = fock_state(6, 0);
    EXPECT_LT(max_abs(lindblad_schrodinger(annihilation(6), vac.as_operator()).matrix()), 1e-15);
}

// Trace pairing tr[X L*(rho)] = tr[L(X) rho] on 200 random triples.
TEST(Lindblad, DualityOnRandomTriples) {
    std::mt19937_64 rng(7);
    const HilbertLayout layout({3, 2});
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Operator n(layout, lornz::testing::random_matrix(rng, 6));
        const Operator x(layout, lornz::testing::random_matrix(rng, 6));
        const Operator rho(layout, lornz::testing::random_density(rng, 6));
        const Complex lhs = (x * lindblad_schrodinger(n, rho)).trace();
        const Complex rhs = (lindblad_heisenberg(n, x) * rho).trace();
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(DensityMatrixType, ValidatesInvariants) {
    EXPECT_THROW(DensityMatrix(HilbertLayout::single(2), CMatrix::Identity(2, 2)), ValidationError);
    CMatrix neg(2, 2);
    neg << 1.2, 0.0, 0.0, -0.2;
    EXPECT_THROW(DensityMatrix(HilbertLayout::single(2), neg), ValidationError);
    CMatrix nonherm(2, 2);
    nonherm << 0.5, 0.1, 0.0, 0.5;
    EXPECT_THROW(DensityMatrix(HilbertLayout::single(2), nonherm), ValidationError);
}

TEST(PartialTrace, ProductState) {
    std::mt19937_64 rng(8);
    const DensityMatrix a(HilbertLayout::single(3), lornz::testing::random_density(rng, 3));
    const DensityMatrix b(HilbertLayout::single(4), lornz::testing::random_density(rng, 4));
    const DensityMatrix ab = tensor_product(a, b);
    EXPECT_LT(max_abs(partial_trace(ab, 0).matrix() - a.matrix()), 1e-12);
    EXPECT_LT(max_abs(partial_trace(ab, 1).matrix() - b.matrix()), 1e-12);
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
    const HilbertLayout layout({2, 2});
    CVector psi = CVector::Zero(4);
    psi(0) = psi(3) = M_SQRT1_2;
    const DensityMatrix bell(layout, psi * psi.adjoint());
    EXPECT_LT(max_abs(partial_trace(bell, 0).matrix() - 0.5 * CMatrix::Identity(2, 2)), 1e-15);
}

TEST(PartialTrace, MatchesIndexContraction) {
    std::mt19937_64 rng(9);
    const HilbertLayout layout({3, 4});
    const DensityMatrix rho(layout, lornz::testing::random_density(rng, 12));
    CMatrix expect = CMatrix::Zero(3, 3);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j)
            for (Index k = 0; k < 4; ++k) expect(i, j) += rho.matrix()(i * 4 + k, j * 4 + k);
    const DensityMatrix red = partial_trace(rho, 0);
    EXPECT_LT(max_abs(red.matrix() - expect), 1e-12);
    EXPECT_NEAR(red.matrix().trace().real(), 1.0, 1e-12);
    EXPECT_THROW(partial_trace(rho, 2), InvalidDimension);
}

TEST(TraceDistance, BasicValues) {
    const DensityMatrix a = fock_state(3, 0);
    const DensityMatrix b = fock_state(3, 1);
    EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-15);
    EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-12);
}

TEST(States, CoherentMeanAndDisplacedVacuum) {
    const Complex alpha(0.7, -0.3);
    const DensityMatrix coh = coherent_state(25, alpha);
    EXPECT_LT(std::abs(expectation(coh, annihilation(25)) - alpha), 1e-10);
    EXPECT_LT(max_abs(displaced_thermal_state(25, alpha, 0.0).matrix() - coh.matrix()), 1e-10);
    // Zero displacement must not produce NaN.
    EXPECT_LT(max_abs(displaced_thermal_state(6, 0.0, 0.0).matrix() - fock_state(6, 0).matrix()), 1e-15);
}

TEST(States, ThermalOccupation) {
    const DensityMatrix th = displaced_thermal_state(40, 0.0, 0.25);
    EXPECT_NEAR(expectation(th, number(40)).real(), 0.25, 1e-10);
}

TEST(States, EvenCatHasEvenParity) {
    const DensityMatrix cat = cat_state(16, 1.0, +1);
    for (Index n = 1; n < 16; n += 2) EXPECT_LT(std::abs(cat.matrix()(n, n)), 1e-14);
    EXPECT_NEAR(cat.purity(), 1.0, 1e-12);
}

TEST(Truncation, TopLevelPopulation) {
    const HilbertLayout layout({3, 2});
    const DensityMatrix rho = tensor_product(fock_state(3, 2), fock_state(2, 0));
    EXPECT_NEAR(top_level_population(rho, 0), 1.0, 1e-15);
    EXPECT_NEAR(top_level_population(rho, 1), 0.0, 1e-15);
}
