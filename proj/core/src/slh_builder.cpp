#include "lornz/slh_builder.hpp"

#include <cmath>

namespace lornz {

namespace {

constexpr Complex kI(0.0, 1.0);

Operator principal_lowering(const HilbertLayout& layout) { return embed(annihilation(layout.dim(0)), 0, layout); }
Operator ancilla_lowering(const HilbertLayout& layout) { return embed(annihilation(layout.dim(1)), 1, layout); }

// Basis state with a single excitation in `slot` (or the vacuum when slot < 0).
Index single_excitation(const HilbertLayout& layout, Index slot) {
    std::vector<Index> levels(static_cast<std::size_t>(layout.slots()), 0);
    if (slot >= 0) levels[static_cast<std::size_t>(slot)] = 1;
    return layout.flat_index(levels);
}

}  // namespace

std::string to_string(Frame frame) { return frame == Frame::Lab ? "lab" : "rotating"; }

void ModelParams::validate() const {
    for (double v : {omega_s, omega_0, kappa, gamma_0, gamma_1}) {
        if (!std::isfinite(v)) throw ValidationError("ModelParams: all parameters must be finite");
    }
    if (kappa < 0.0) throw ValidationError("ModelParams: kappa must be >= 0, got " + std::to_string(kappa));
    if (gamma_0 <= 0.0) throw ValidationError("ModelParams: gamma_0 must be > 0, got " + std::to_string(gamma_0));
    if (gamma_1 < 0.0) throw ValidationError("ModelParams: gamma_1 must be >= 0, got " + std::to_string(gamma_1));
}

ModelParams ModelParams::paper_example() { return ModelParams{10.0, 10.0, 0.6, 0.6, 0.8, Frame::Rotating}; }

SLHTriple::SLHTriple(CMatrix scattering, std::vector<Operator> couplings, Operator hamiltonian)
    : scattering_(std::move(scattering)), couplings_(std::move(couplings)), hamiltonian_(std::move(hamiltonian)) {
    const auto n = static_cast<Index>(couplings_.size());
    if (scattering_.rows() != n || scattering_.cols() != n) {
        throw InvalidDimension("SLHTriple: scattering matrix must be square with one row per coupling");
    }
    if ((scattering_.adjoint() * scattering_ - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > tol::kHermitian) {
        throw ValidationError("SLHTriple: scattering matrix is not unitary");
    }
    if (!hamiltonian_.is_hermitian()) {
        throw ValidationError("SLHTriple: Hamiltonian is not Hermitian (error " +
                              std::to_string(hamiltonian_.hermiticity_error()) + ")");
    }
    for (const Operator& l : couplings_) require_same_layout(l, hamiltonian_, "SLHTriple");
}

Operator heisenberg_generator(const SLHTriple& model, const Operator& x) {
    Operator out = commutator(x, model.hamiltonian()) * (-kI);
    for (const Operator& l : model.couplings()) out += lindblad_heisenberg(l, x);
    return out;
}

Operator schrodinger_generator(const SLHTriple& model, const Operator& rho) {
    Operator out = commutator(model.hamiltonian(), rho) * (-kI);
    for (const Operator& l : model.couplings()) out += lindblad_schrodinger(l, rho);
    return out;
}

SLHTriple ancilla_slh(const ModelParams& params, Index dim) {
    params.validate();
    const Operator a0 = annihilation(dim);
    return SLHTriple(CMatrix::Identity(1, 1), {a0 * std::sqrt(params.gamma_0)},
                     number(dim) * params.frame_omega_0());
}

Operator fictitious_output(const ModelParams& params, const HilbertLayout& layout) {
    return ancilla_lowering(layout) * (-0.5 * std::sqrt(params.gamma_0));
}

Operator direct_coupling_hamiltonian(const Operator& c, const Operator& z) {
    require_same_layout(c, z, "direct_coupling_hamiltonian");
    Operator h = (c.adjoint() * z - z.adjoint() * c) * kI;
    if (!h.is_hermitian()) {
        throw InternalConsistencyError("direct_coupling_hamiltonian: result not Hermitian (error " +
                                       std::to_string(h.hermiticity_error()) + ")");
    }
    return h;
}

Operator augmented_hamiltonian(const ModelParams& params, const ModeDims& dims) {
    params.validate();
    const HilbertLayout layout({dims.principal, dims.ancilla});
    const Operator as = principal_lowering(layout);
    const Operator a0 = ancilla_lowering(layout);
    const Operator hs = as.adjoint() * as * params.frame_omega_s();
    const Operator h0 = a0.adjoint() * a0 * params.frame_omega_0();
    const Operator hi = direct_coupling_hamiltonian(fictitious_output(params, layout), as * std::sqrt(params.kappa));
    return hs + hi + h0;
}

SLHTriple augmented_slh(const ModelParams& params, const ModeDims& dims) {
    const Operator h = augmented_hamiltonian(params, dims);
    const Operator a0 = ancilla_lowering(h.layout());
    return SLHTriple(CMatrix::Identity(1, 1), {a0 * std::sqrt(params.gamma_0)}, h);
}

SLHTriple probed_slh(const ModelParams& params, const ModeDims& dims) {
    const Operator h = augmented_hamiltonian(params, dims);
    const Operator a0 = ancilla_lowering(h.layout());
    const Operator as = principal_lowering(h.layout());
    return SLHTriple(CMatrix::Identity(2, 2), {a0 * std::sqrt(params.gamma_0), as * std::sqrt(params.gamma_1)}, h);
}

SLHTriple markovian_limit_slh(const ModelParams& params, Index principal_dim) {
    params.validate();
    const Operator as = annihilation(principal_dim);
    return SLHTriple(CMatrix::Identity(2, 2), {as * std::sqrt(params.kappa), as * std::sqrt(params.gamma_1)},
                     number(principal_dim) * params.frame_omega_s());
}

Eigen::Matrix2cd quadrature_transform() {
    Eigen::Matrix2cd xi;
    xi << 1.0, 1.0, -kI, kI;
    return xi * M_SQRT1_2;
}

Eigen::Matrix2cd complex_drift(const ModelParams& params) {
    params.validate();
    const double g = 0.5 * std::sqrt(params.kappa * params.gamma_0);
    Eigen::Matrix2cd m;
    m << -kI * params.frame_omega_s() - 0.5 * params.gamma_1, g,
         -g, -kI * params.frame_omega_0() - 0.5 * params.gamma_0;
    return m;
}

QuadratureModel quadrature_realization(const ModelParams& params) {
    params.validate();
    const double ws = params.frame_omega_s();
    const double w0 = params.frame_omega_0();
    const double g = 0.5 * std::sqrt(params.kappa * params.gamma_0);
    const double h1 = 0.5 * params.gamma_1;
    const double h0 = 0.5 * params.gamma_0;

    QuadratureModel model;
    model.params = params;
    model.A << -h1,  ws,   g, 0.0,
               -ws, -h1, 0.0,   g,
                -g, 0.0, -h0,  w0,
               0.0,  -g, -w0, -h0;
    const double s1 = std::sqrt(params.gamma_1);
    const double s0 = std::sqrt(params.gamma_0);
    model.B = Eigen::Vector4d(-s1, -s1, -s0, -s0).asDiagonal();
    model.C.setZero();
    model.C(0, 0) = s1;
    model.C(1, 1) = s1;
    return model;
}

CMatrix mode_drift_from_generator(const SLHTriple& model) {
    const HilbertLayout& layout = model.layout();
    const Index n = layout.slots();
    const Index vac = single_excitation(layout, -1);
    CMatrix coeffs(n, n);
    for (Index j = 0; j < n; ++j) {
        const Operator g = heisenberg_generator(model, embed(annihilation(layout.dim(j)), j, layout));
        // <vac| a_k |1_k> = 1, so <vac| G(a_j) |1_k> is the coefficient of a_k.
        for (Index k = 0; k < n; ++k) coeffs(j, k) = g.matrix()(vac, single_excitation(layout, k));
    }
    return coeffs;
}

std::vector<Operator> quadrature_operators(const HilbertLayout& layout) {
    std::vector<Operator> out;
    for (Index s = 0; s < layout.slots(); ++s) {
        out.push_back(embed(position_quadrature(layout.dim(s)), s, layout));
        out.push_back(embed(momentum_quadrature(layout.dim(s)), s, layout));
    }
    return out;
}

Eigen::MatrixXd quadrature_drift_from_generator(const SLHTriple& model) {
    const HilbertLayout& layout = model.layout();
    const Index n = layout.slots();
    const Index vac = single_excitation(layout, -1);
    const auto x = quadrature_operators(layout);
    Eigen::MatrixXd a(2 * n, 2 * n);
    for (Index j = 0; j < 2 * n; ++j) {
        const Operator g = heisenberg_generator(model, x[static_cast<std::size_t>(j)]);
        for (Index k = 0; k < n; ++k) {
            const Index one = single_excitation(layout, k);
            // <vac|G|1_k> = (A_q - i A_p)/sqrt2 and <1_k|G|vac> = (A_q + i A_p)/sqrt2.
            const Complex lower = g.matrix()(vac, one);
            const Complex upper = g.matrix()(one, vac);
            a(j, 2 * k) = ((lower + upper) * M_SQRT1_2).real();
            a(j, 2 * k + 1) = ((upper - lower) * M_SQRT1_2 / kI).real();
        }
    }
    return a;
}

}  // namespace lornz
