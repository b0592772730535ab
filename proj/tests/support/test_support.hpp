#pragma once

#include <random>

#include <gtest/gtest.h>

#include "lornz/fock_algebra.hpp"
#include "lornz/slh_builder.hpp"

namespace lornz::testing {

inline CMatrix random_matrix(std::mt19937_64& rng, Index dim) {
    std::normal_distribution<double> g;
    CMatrix m(dim, dim);
    for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, Index dim) {
    const CMatrix m = random_matrix(rng, dim);
    return 0.5 * (m + m.adjoint());
}

/// G G^dag / tr, full rank with probability one.
inline CMatrix random_density(std::mt19937_64& rng, Index dim) {
    const CMatrix g = random_matrix(rng, dim);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

inline ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.kappa = 2.0 * u(rng);
    p.gamma_0 = 0.05 + 2.95 * u(rng);
    p.gamma_1 = 0.05 + 2.95 * u(rng);
    p.omega_0 = p.omega_s - (6.0 * u(rng) - 3.0);
    return p;
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace lornz::testing
