#pragma once

// Dense operator algebra on truncated Fock spaces and their tensor products.
//
// Slot 0 of a two-slot layout is the principal cavity, slot 1 the ancilla.
// Every ladder operator is truncated at its layout's level, so the canonical
// commutator [a, a^dagger] = 1 fails on the top level of each slot; callers
// that compare against infinite-dimensional identities mask that level
// (see `below_truncation_mask`).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lornz/errors.hpp"

namespace lornz {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-9;
/// Smallest eigenvalue a density matrix may carry before it is rejected.
inline constexpr double kPositivityFloor = -1e-9;
/// Top-level population above which truncation is reported as suspect.
inline constexpr double kTopLevelWarning = 1e-6;
}  // namespace tol

class HilbertLayout {
public:
    explicit HilbertLayout(std::vector<Index> dims);

    static HilbertLayout single(Index dim) { return HilbertLayout({dim}); }

    const std::vector<Index>& dims() const noexcept { return dims_; }
    Index slots() const noexcept { return static_cast<Index>(dims_.size()); }
    Index dim(Index slot) const;
    Index total_dim() const noexcept { return total_; }

    /// Flat basis index of a product state |n_0> x |n_1> x ... (slot 0 most significant).
    Index flat_index(std::span<const Index> levels) const;
    std::vector<Index> levels(Index flat) const;

    bool operator==(const HilbertLayout&) const = default;

private:
    std::vector<Index> dims_;
    Index total_ = 1;
};

/// A square complex matrix acting on the space described by its layout.
class Operator {
public:
    Operator(HilbertLayout layout, CMatrix matrix);

    static Operator identity(const HilbertLayout& layout);
    static Operator zero(const HilbertLayout& layout);

    const HilbertLayout& layout() const noexcept { return layout_; }
    const CMatrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }

    Operator adjoint() const;
    Complex trace() const { return matrix_.trace(); }
    double hermiticity_error() const;
    bool is_hermitian(double tolerance = tol::kHermitian) const {
        return hermiticity_error() < tolerance;
    }

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(Complex s);

    friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
    friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
    friend Operator operator*(Operator lhs, Complex s) { return lhs *= s; }
    friend Operator operator*(Complex s, Operator rhs) { return rhs *= s; }
    friend Operator operator*(const Operator& lhs, const Operator& rhs);
    friend Operator operator-(const Operator& op);

private:
    HilbertLayout layout_;
    CMatrix matrix_;
};

Operator commutator(const Operator& x, const Operator& y);
Operator kron(const Operator& a, const Operator& b);
void require_same_layout(const Operator& a, const Operator& b, const char* where);

/// Trace-one, Hermitian, positive semidefinite operator.
class DensityMatrix {
public:
    /// Validates every invariant (trace, Hermiticity, spectrum); throws ValidationError.
    DensityMatrix(HilbertLayout layout, CMatrix matrix);
    explicit DensityMatrix(const Operator& op) : DensityMatrix(op.layout(), op.matrix()) {}

    /// Skips the eigenvalue check. Integrators use this on their own output,
    /// which they monitor separately.
    static DensityMatrix trusted(HilbertLayout layout, CMatrix matrix);

    const HilbertLayout& layout() const noexcept { return layout_; }
    const CMatrix& matrix() const noexcept { return matrix_; }
    Operator as_operator() const { return Operator(layout_, matrix_); }

    double purity() const;
    double min_eigenvalue() const;

private:
    struct TrustedTag {};
    DensityMatrix(HilbertLayout layout, CMatrix matrix, TrustedTag);

    HilbertLayout layout_;
    CMatrix matrix_;
};

// Ladder primitives on a single truncated mode.
Operator annihilation(Index dim);
Operator creation(Index dim);
Operator number(Index dim);
/// q = (a + a^dagger)/sqrt(2)
Operator position_quadrature(Index dim);
/// p = i(a^dagger - a)/sqrt(2)
Operator momentum_quadrature(Index dim);

/// Kronecker embedding of a single-slot operator into `layout`.
Operator embed(const Operator& op, Index slot, const HilbertLayout& layout);

/// Heisenberg-picture dissipator: N^dag [X, N]/2 + [N^dag, X] N/2.
Operator lindblad_heisenberg(const Operator& n, const Operator& x);

/// Schroedinger-picture dissipator, the trace-pairing adjoint of
/// `lindblad_heisenberg`: N rho N^dag - {N^dag N, rho}/2.
Operator lindblad_schrodinger(const Operator& n, const Operator& rho);

/// Reduced state on `keep` after tracing out every other slot.
DensityMatrix partial_trace(const DensityMatrix& rho, Index keep);

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

Complex expectation(const DensityMatrix& rho, const Operator& x);

/// Half the trace norm of the difference.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Smallest eigenvalue of the Hermitian part of `m`.
double min_hermitian_eigenvalue(const CMatrix& m);

/// Population of the highest retained Fock level of `slot`.
double top_level_population(const DensityMatrix& rho, Index slot);

/// Boolean matrix selecting entries whose row and column basis states keep
/// every slot strictly below its truncation level.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> below_truncation_mask(const HilbertLayout& layout);

/// Largest |a - b| over masked entries.
double masked_max_abs_diff(const Operator& a, const Operator& b);

// Single-mode states, renormalised after truncation.
DensityMatrix fock_state(Index dim, Index n);
DensityMatrix coherent_state(Index dim, Complex alpha);
/// D(alpha) rho_thermal(nbar) D(alpha)^dagger, built from exact displacement matrix elements.
DensityMatrix displaced_thermal_state(Index dim, Complex alpha, double nbar);
/// (|alpha> + sign |-alpha>) normalised; sign = +1 gives the even cat.
DensityMatrix cat_state(Index dim, Complex alpha, int sign = +1);

}  // namespace lornz
