#pragma once

// Diagonal-offset storage for the ladder-built operators the integrators apply
// thousands of times per trajectory. Each band holds X(r, r + offset) for all
// valid rows, so X*rho and rho*X reduce to scaled block copies of rho.

#include <vector>

#include "lornz/fock_algebra.hpp"

namespace lornz {

class BandedOperator {
public:
    struct Band {
        Index offset = 0;   // column - row
        CVector coeff;      // coeff(k) = X(row0 + k, row0 + k + offset), row0 = max(0, -offset)
    };

    BandedOperator() = default;
    explicit BandedOperator(Index dim) : dim_(dim) {}

    /// Keeps every diagonal that has an entry with modulus above `drop_tol`.
    static BandedOperator from_dense(const CMatrix& m, double drop_tol = 0.0);
    static BandedOperator from_operator(const Operator& op, double drop_tol = 0.0) {
        return from_dense(op.matrix(), drop_tol);
    }

    Index dim() const noexcept { return dim_; }
    const std::vector<Band>& bands() const noexcept { return bands_; }

    BandedOperator adjoint() const;
    CMatrix to_dense() const;

    /// this + s * other, merging bands with equal offsets.
    BandedOperator plus(const BandedOperator& other, Complex s = 1.0) const;
    BandedOperator scaled(Complex s) const;

    /// out += s * X * rho
    void add_left_product(const CMatrix& rho, CMatrix& out, Complex s = 1.0) const;
    /// out += s * rho * X
    void add_right_product(const CMatrix& rho, CMatrix& out, Complex s = 1.0) const;
    /// tr(X rho)
    Complex trace_product(const CMatrix& rho) const;

private:
    void add_band(Index offset, const CVector& coeff, Complex s);

    Index dim_ = 0;
    std::vector<Band> bands_;
};

}  // namespace lornz
