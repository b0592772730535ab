#include "lornz/banded_operator.hpp"

#include <algorithm>
#include <cstdlib>

namespace lornz {

namespace {

Index band_length(Index dim, Index offset) { return dim - std::abs(offset); }
Index first_row(Index offset) { return offset < 0 ? -offset : 0; }

}  // namespace

BandedOperator BandedOperator::from_dense(const CMatrix& m, double drop_tol) {
    if (m.rows() != m.cols()) throw InvalidDimension("BandedOperator: matrix must be square");
    const Index n = m.rows();
    BandedOperator out(n);
    for (Index offset = -(n - 1); offset <= n - 1; ++offset) {
        const Index len = band_length(n, offset);
        const Index r0 = first_row(offset);
        CVector coeff(len);
        bool keep = false;
        for (Index k = 0; k < len; ++k) {
            coeff(k) = m(r0 + k, r0 + k + offset);
            if (std::abs(coeff(k)) > drop_tol) keep = true;
        }
        if (keep) out.bands_.push_back({offset, std::move(coeff)});
    }
    return out;
}

BandedOperator BandedOperator::adjoint() const {
    BandedOperator out(dim_);
    for (const Band& b : bands_) {
        // X^dag(c, r) = conj X(r, c): the band moves to -offset with the same row-ordered entries.
        out.bands_.push_back({-b.offset, b.coeff.conjugate()});
    }
    return out;
}

CMatrix BandedOperator::to_dense() const {
    CMatrix m = CMatrix::Zero(dim_, dim_);
    for (const Band& b : bands_) {
        const Index r0 = first_row(b.offset);
        for (Index k = 0; k < b.coeff.size(); ++k) m(r0 + k, r0 + k + b.offset) = b.coeff(k);
    }
    return m;
}

void BandedOperator::add_band(Index offset, const CVector& coeff, Complex s) {
    for (Band& b : bands_) {
        if (b.offset == offset) {
            b.coeff += s * coeff;
            return;
        }
    }
    bands_.push_back({offset, s * coeff});
}

BandedOperator BandedOperator::plus(const BandedOperator& other, Complex s) const {
    if (dim_ != other.dim_) throw InvalidDimension("BandedOperator::plus: dimension mismatch");
    BandedOperator out = *this;
    for (const Band& b : other.bands_) out.add_band(b.offset, b.coeff, s);
    return out;
}

BandedOperator BandedOperator::scaled(Complex s) const {
    BandedOperator out = *this;
    for (Band& b : out.bands_) b.coeff *= s;
    return out;
}

void BandedOperator::add_left_product(const CMatrix& rho, CMatrix& out, Complex s) const {
    // (X rho)(r, :) += X(r, r+o) rho(r+o, :)
    for (const Band& b : bands_) {
        const Index len = b.coeff.size();
        const Index r0 = first_row(b.offset);
        out.middleRows(r0, len).noalias() += (s * b.coeff).asDiagonal() * rho.middleRows(r0 + b.offset, len);
    }
}

void BandedOperator::add_right_product(const CMatrix& rho, CMatrix& out, Complex s) const {
    // (rho X)(:, r+o) += rho(:, r) X(r, r+o)
    for (const Band& b : bands_) {
        const Index len = b.coeff.size();
        const Index r0 = first_row(b.offset);
        // Column by column: contiguous in column-major storage, unlike the diagonal-product expression.
        for (Index k = 0; k < len; ++k) {
            const Complex c = s * b.coeff(k);
            if (c != Complex(0.0)) out.col(r0 + b.offset + k) += c * rho.col(r0 + k);
        }
    }
}

Complex BandedOperator::trace_product(const CMatrix& rho) const {
    Complex acc = 0.0;
    for (const Band& b : bands_) {
        const Index r0 = first_row(b.offset);
        for (Index k = 0; k < b.coeff.size(); ++k) acc += b.coeff(k) * rho(r0 + k + b.offset, r0 + k);
    }
    return acc;
}

}  // namespace lornz
