#include "lornz/fock_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lornz {

namespace {

std::string dims_to_string(const std::vector<Index>& dims) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << ']';
    return os.str();
}

CMatrix kron_matrix(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

void require_valid_dim(Index dim, const char* where) {
    if (dim < 2) {
        throw InvalidDimension(std::string(where) + ": truncation level must be >= 2, got " +
                               std::to_string(dim));
    }
}

DensityMatrix from_ket(const CVector& ket) {
    const CVector psi = ket / ket.norm();
    return DensityMatrix(HilbertLayout::single(psi.size()), psi * psi.adjoint());
}

CVector coherent_ket(Index dim, Complex alpha) {
    CVector ket(dim);
    // c_n = alpha^n / sqrt(n!), accumulated recursively; normalised by the caller.
    Complex c = 1.0;
    for (Index n = 0; n < dim; ++n) {
        if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
        ket(n) = c;
    }
    return ket * std::exp(-0.5 * std::norm(alpha));
}

// <m| D(alpha) |n> for the untruncated oscillator.
// std::pow(Complex, double) goes through log and is NaN at zero.
Complex int_pow(Complex z, unsigned k) {
    Complex out(1.0);
    for (unsigned i = 0; i < k; ++i) out *= z;
    return out;
}

Complex displacement_element(Index m, Index n, Complex alpha) {
    const double x = std::norm(alpha);
    const double envelope = std::exp(-0.5 * x);
    if (m >= n) {
        const auto k = static_cast<unsigned>(m - n);
        const double ratio = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
        return ratio * int_pow(alpha, k) * envelope *
               std::assoc_laguerre(static_cast<unsigned>(n), k, x);
    }
    const auto k = static_cast<unsigned>(n - m);
    const double ratio = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
    return ratio * int_pow(-std::conj(alpha), k) * envelope *
           std::assoc_laguerre(static_cast<unsigned>(m), k, x);
}

}  // namespace

// ---------------------------------------------------------------- HilbertLayout

HilbertLayout::HilbertLayout(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw InvalidDimension("HilbertLayout: at least one slot is required");
    for (Index d : dims_) {
        if (d < 2) throw InvalidDimension("HilbertLayout: all dims must be >= 2, got " + dims_to_string(dims_));
        total_ *= d;
    }
}

Index HilbertLayout::dim(Index slot) const {
    if (slot < 0 || slot >= slots()) {
        throw InvalidDimension("HilbertLayout: slot " + std::to_string(slot) + " out of range for " +
                               dims_to_string(dims_));
    }
    return dims_[static_cast<std::size_t>(slot)];
}

Index HilbertLayout::flat_index(std::span<const Index> levels) const {
    if (static_cast<Index>(levels.size()) != slots()) throw InvalidDimension("flat_index: wrong number of levels");
    Index flat = 0;
    for (std::size_t s = 0; s < dims_.size(); ++s) {
        if (levels[s] < 0 || levels[s] >= dims_[s]) throw InvalidDimension("flat_index: level out of range");
        flat = flat * dims_[s] + levels[s];
    }
    return flat;
}

std::vector<Index> HilbertLayout::levels(Index flat) const {
    std::vector<Index> out(dims_.size());
    for (std::size_t s = dims_.size(); s-- > 0;) {
        out[s] = flat % dims_[s];
        flat /= dims_[s];
    }
    return out;
}

// ---------------------------------------------------------------- Operator

Operator::Operator(HilbertLayout layout, CMatrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const Index n = layout_.total_dim();
    if (matrix_.rows() != n || matrix_.cols() != n) {
        throw InvalidDimension("Operator: matrix is " + std::to_string(matrix_.rows()) + "x" +
                               std::to_string(matrix_.cols()) + " but layout " + dims_to_string(layout_.dims()) +
                               " needs " + std::to_string(n));
    }
}

Operator Operator::identity(const HilbertLayout& layout) {
    return Operator(layout, CMatrix::Identity(layout.total_dim(), layout.total_dim()));
}

Operator Operator::zero(const HilbertLayout& layout) {
    return Operator(layout, CMatrix::Zero(layout.total_dim(), layout.total_dim()));
}

Operator Operator::adjoint() const { return Operator(layout_, matrix_.adjoint()); }

double Operator::hermiticity_error() const {
    if (matrix_.size() == 0) return 0.0;
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

Operator& Operator::operator+=(const Operator& rhs) {
    require_same_layout(*this, rhs, "Operator::operator+=");
    matrix_ += rhs.matrix_;
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
    require_same_layout(*this, rhs, "Operator::operator-=");
    matrix_ -= rhs.matrix_;
    return *this;
}

Operator& Operator::operator*=(Complex s) {
    matrix_ *= s;
    return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
    require_same_layout(lhs, rhs, "Operator::operator*");
    return Operator(lhs.layout_, lhs.matrix_ * rhs.matrix_);
}

Operator operator-(const Operator& op) { return Operator(op.layout_, -op.matrix_); }

void require_same_layout(const Operator& a, const Operator& b, const char* where) {
    if (!(a.layout() == b.layout())) {
        throw LayoutMismatch(std::string(where) + ": layouts " + dims_to_string(a.layout().dims()) + " and " +
                             dims_to_string(b.layout().dims()) + " differ");
    }
}

Operator commutator(const Operator& x, const Operator& y) { return x * y - y * x; }

Operator kron(const Operator& a, const Operator& b) {
    std::vector<Index> dims = a.layout().dims();
    dims.insert(dims.end(), b.layout().dims().begin(), b.layout().dims().end());
    return Operator(HilbertLayout(std::move(dims)), kron_matrix(a.matrix(), b.matrix()));
}

// ---------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(HilbertLayout layout, CMatrix matrix, TrustedTag)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != layout_.total_dim() || matrix_.cols() != layout_.total_dim()) {
        throw InvalidDimension("DensityMatrix: matrix size does not match layout " + dims_to_string(layout_.dims()));
    }
}

DensityMatrix::DensityMatrix(HilbertLayout layout, CMatrix matrix)
    : DensityMatrix(std::move(layout), std::move(matrix), TrustedTag{}) {
    const double trace_err = std::abs(matrix_.trace() - Complex(1.0, 0.0));
    if (trace_err > tol::kTrace) {
        throw ValidationError("DensityMatrix: trace deviates from 1 by " + std::to_string(trace_err));
    }
    const double herm_err = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > tol::kHermitian) {
        throw ValidationError("DensityMatrix: not Hermitian (max |rho - rho^dag| = " + std::to_string(herm_err) + ")");
    }
    const double lmin = min_eigenvalue();
    if (lmin < tol::kPositivityFloor) {
        throw ValidationError("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
    }
}

DensityMatrix DensityMatrix::trusted(HilbertLayout layout, CMatrix matrix) {
    return DensityMatrix(std::move(layout), std::move(matrix), TrustedTag{});
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

double DensityMatrix::min_eigenvalue() const { return min_hermitian_eigenvalue(matrix_); }

// ---------------------------------------------------------------- primitives

Operator annihilation(Index dim) {
    require_valid_dim(dim, "annihilation");
    CMatrix m = CMatrix::Zero(dim, dim);
    for (Index n = 0; n + 1 < dim; ++n) m(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
    return Operator(HilbertLayout::single(dim), std::move(m));
}

Operator creation(Index dim) { return annihilation(dim).adjoint(); }

Operator number(Index dim) {
    require_valid_dim(dim, "number");
    CMatrix m = CMatrix::Zero(dim, dim);
    for (Index n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
    return Operator(HilbertLayout::single(dim), std::move(m));
}

Operator position_quadrature(Index dim) {
    const Operator a = annihilation(dim);
    return (a + a.adjoint()) * Complex(M_SQRT1_2, 0.0);
}

Operator momentum_quadrature(Index dim) {
    const Operator a = annihilation(dim);
    return (a.adjoint() - a) * Complex(0.0, M_SQRT1_2);
}

Operator embed(const Operator& op, Index slot, const HilbertLayout& layout) {
    const Index d = layout.dim(slot);
    if (op.layout().slots() != 1 || op.dim() != d) {
        throw InvalidDimension("embed: operator of dimension " + std::to_string(op.dim()) +
                               " cannot act on slot " + std::to_string(slot) + " of size " + std::to_string(d));
    }
    CMatrix out = CMatrix::Identity(1, 1);
    for (Index s = 0; s < layout.slots(); ++s) {
        const Index ds = layout.dim(s);
        out = kron_matrix(out, s == slot ? op.matrix() : CMatrix::Identity(ds, ds));
    }
    return Operator(layout, std::move(out));
}

Operator lindblad_heisenberg(const Operator& n, const Operator& x) {
    require_same_layout(n, x, "lindblad_heisenberg");
    const Operator nd = n.adjoint();
    return (nd * commutator(x, n) + commutator(nd, x) * n) * Complex(0.5, 0.0);
}

Operator lindblad_schrodinger(const Operator& n, const Operator& rho) {
    require_same_layout(n, rho, "lindblad_schrodinger");
    const CMatrix& N = n.matrix();
    const CMatrix& R = rho.matrix();
    const CMatrix ndn = N.adjoint() * N;
    CMatrix out = N * R * N.adjoint() - 0.5 * (ndn * R + R * ndn);
    return Operator(rho.layout(), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, Index keep) {
    const HilbertLayout& layout = rho.layout();
    if (keep < 0 || keep >= layout.slots()) {
        throw InvalidDimension("partial_trace: slot " + std::to_string(keep) + " does not exist");
    }
    const Index dk = layout.dim(keep);
    CMatrix reduced = CMatrix::Zero(dk, dk);
    const CMatrix& m = rho.matrix();
    const Index n = layout.total_dim();
    // Contract every pair of basis states that agree on all traced-out slots.
    for (Index i = 0; i < n; ++i) {
        const auto li = layout.levels(i);
        for (Index j = 0; j < n; ++j) {
            const auto lj = layout.levels(j);
            bool same_env = true;
            for (Index s = 0; s < layout.slots() && same_env; ++s) {
                if (s != keep && li[s] != lj[s]) same_env = false;
            }
            if (same_env) reduced(li[keep], lj[keep]) += m(i, j);
        }
    }
    return DensityMatrix::trusted(HilbertLayout::single(dk), std::move(reduced));
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
    std::vector<Index> dims = a.layout().dims();
    dims.insert(dims.end(), b.layout().dims().begin(), b.layout().dims().end());
    return DensityMatrix::trusted(HilbertLayout(std::move(dims)), kron_matrix(a.matrix(), b.matrix()));
}

Complex expectation(const DensityMatrix& rho, const Operator& x) {
    if (!(rho.layout() == x.layout())) throw LayoutMismatch("expectation: state and observable layouts differ");
    // tr(rho X) without forming the product.
    return (rho.matrix().transpose().cwiseProduct(x.matrix())).sum();
}

double min_hermitian_eigenvalue(const CMatrix& m) {
    const CMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (!(a.layout() == b.layout())) throw LayoutMismatch("trace_distance: layouts differ");
    const CMatrix diff = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double top_level_population(const DensityMatrix& rho, Index slot) {
    const HilbertLayout& layout = rho.layout();
    const Index top = layout.dim(slot) - 1;
    double pop = 0.0;
    for (Index i = 0; i < layout.total_dim(); ++i) {
        if (layout.levels(i)[slot] == top) pop += rho.matrix()(i, i).real();
    }
    return pop;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> below_truncation_mask(const HilbertLayout& layout) {
    const Index n = layout.total_dim();
    std::vector<bool> inside(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const auto lv = layout.levels(i);
        bool ok = true;
        for (Index s = 0; s < layout.slots(); ++s) ok = ok && lv[s] < layout.dim(s) - 1;
        inside[static_cast<std::size_t>(i)] = ok;
    }
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) mask(i, j) = inside[static_cast<std::size_t>(i)] && inside[static_cast<std::size_t>(j)];
    return mask;
}

double masked_max_abs_diff(const Operator& a, const Operator& b) {
    require_same_layout(a, b, "masked_max_abs_diff");
    const auto mask = below_truncation_mask(a.layout());
    double worst = 0.0;
    for (Index i = 0; i < a.dim(); ++i)
        for (Index j = 0; j < a.dim(); ++j)
            if (mask(i, j)) worst = std::max(worst, std::abs(a.matrix()(i, j) - b.matrix()(i, j)));
    return worst;
}

// ---------------------------------------------------------------- states

DensityMatrix fock_state(Index dim, Index n) {
    require_valid_dim(dim, "fock_state");
    if (n < 0 || n >= dim) throw InvalidDimension("fock_state: level " + std::to_string(n) + " not below " + std::to_string(dim));
    CVector ket = CVector::Zero(dim);
    ket(n) = 1.0;
    return from_ket(ket);
}

DensityMatrix coherent_state(Index dim, Complex alpha) {
    require_valid_dim(dim, "coherent_state");
    return from_ket(coherent_ket(dim, alpha));
}

DensityMatrix cat_state(Index dim, Complex alpha, int sign) {
    require_valid_dim(dim, "cat_state");
    const CVector ket = coherent_ket(dim, alpha) + static_cast<double>(sign) * coherent_ket(dim, -alpha);
    if (ket.norm() < 1e-12) throw ValidationError("cat_state: superposition vanishes for this amplitude");
    return from_ket(ket);
}

DensityMatrix displaced_thermal_state(Index dim, Complex alpha, double nbar) {
    require_valid_dim(dim, "displaced_thermal_state");
    if (nbar < 0.0) throw ValidationError("displaced_thermal_state: nbar must be >= 0");
    // Sum over thermal levels until their weight is negligible.
    std::vector<double> weights;
    const double ratio = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    const Index max_levels = dim + 400;
    for (Index k = 0; k < max_levels; ++k) {
        weights.push_back(p);
        p *= ratio;
        if (p < 1e-18) break;
    }
    CMatrix rho = CMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        CVector col(dim);
        for (Index m = 0; m < dim; ++m) col(m) = displacement_element(m, static_cast<Index>(k), alpha);
        rho.noalias() += weights[k] * col * col.adjoint();
    }
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(HilbertLayout::single(dim), std::move(rho));
}

}  // namespace lornz
