#pragma once

// (S, L, H) descriptions of the ancilla cavity, the ancilla-driven principal
// cavity, and the probed two-cavity network, plus the linear quadrature
// realisation x = [q_s, p_s, q_0, p_0] of the probed network.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lornz/fock_algebra.hpp"

namespace lornz {

/// Frame in which Hamiltonians and drift matrices are expressed. In the
/// rotating frame every frequency is shifted by -omega_s, so the principal
/// mode is at rest and the ancilla sits at -detuning.
enum class Frame { Rotating, Lab };

std::string to_string(Frame frame);

struct ModelParams {
    double omega_s = 10.0;   ///< principal angular frequency
    double omega_0 = 10.0;   ///< ancilla angular frequency
    double kappa = 0.6;      ///< direct principal-ancilla coupling rate
    double gamma_0 = 0.6;    ///< ancilla damping into the white-noise bath
    double gamma_1 = 0.8;    ///< principal damping into the probe field
    Frame frame = Frame::Rotating;

    double detuning() const noexcept { return omega_s - omega_0; }
    double frame_omega_s() const noexcept { return frame == Frame::Lab ? omega_s : 0.0; }
    double frame_omega_0() const noexcept { return frame == Frame::Lab ? omega_0 : omega_0 - omega_s; }

    /// Throws ValidationError unless kappa >= 0, gamma_0 > 0, gamma_1 >= 0 and all values are finite.
    void validate() const;

    /// Illustrative-example values: omega_s = omega_0 = 10, kappa = 0.6, gamma_0 = 0.6, gamma_1 = 0.8.
    static ModelParams paper_example();

    bool operator==(const ModelParams&) const = default;
};

struct ModeDims {
    Index principal = 12;
    Index ancilla = 12;
};

class SLHTriple {
public:
    SLHTriple(CMatrix scattering, std::vector<Operator> couplings, Operator hamiltonian);

    const CMatrix& scattering() const noexcept { return scattering_; }
    const std::vector<Operator>& couplings() const noexcept { return couplings_; }
    const Operator& hamiltonian() const noexcept { return hamiltonian_; }
    const HilbertLayout& layout() const noexcept { return hamiltonian_.layout(); }

private:
    CMatrix scattering_;
    std::vector<Operator> couplings_;
    Operator hamiltonian_;
};

/// Heisenberg generator: -i[X, H] + sum_k L_{L_k}(X).
Operator heisenberg_generator(const SLHTriple& model, const Operator& x);
/// Its trace-dual acting on states: -i[H, rho] + sum_k L*_{L_k}(rho).
Operator schrodinger_generator(const SLHTriple& model, const Operator& rho);

/// Ancilla cavity alone: (I, sqrt(gamma_0) a_0, omega_0 a_0^dag a_0) on a single slot.
SLHTriple ancilla_slh(const ModelParams& params, Index dim);

/// c = -(sqrt(gamma_0)/2) a_0 on the ancilla slot of `layout`.
Operator fictitious_output(const ModelParams& params, const HilbertLayout& layout);

/// H_I = i(c^dag Z - Z^dag c). Throws InternalConsistencyError if the result is not Hermitian.
Operator direct_coupling_hamiltonian(const Operator& c, const Operator& z);

/// H_S + H_I + omega_0 a_0^dag a_0 with Z = sqrt(kappa) a_s, H_S = omega_s a_s^dag a_s.
Operator augmented_hamiltonian(const ModelParams& params, const ModeDims& dims);

/// Principal plus ancilla with the single white-noise channel sqrt(gamma_0) a_0.
SLHTriple augmented_slh(const ModelParams& params, const ModeDims& dims);

/// Augmented system with the probe stacked as a second channel:
/// couplings = (sqrt(gamma_0) a_0, sqrt(gamma_1) a_s). Channel 1 is the measured one.
SLHTriple probed_slh(const ModelParams& params, const ModeDims& dims);
inline constexpr std::size_t kProbeChannel = 1;

/// Principal cavity alone with the ancilla eliminated in the broadband limit:
/// couplings (sqrt(kappa) a_s, sqrt(gamma_1) a_s), H = omega_s a_s^dag a_s.
SLHTriple markovian_limit_slh(const ModelParams& params, Index principal_dim);

/// Xi = [[1, 1], [-i, i]] / sqrt(2): maps (a, a^dag) to (q, p).
Eigen::Matrix2cd quadrature_transform();

/// Complex drift of (<a_s>, <a_0>) for the probed network.
Eigen::Matrix2cd complex_drift(const ModelParams& params);

struct QuadratureModel {
    Eigen::Matrix4d A;
    Eigen::Matrix4d B;
    Eigen::Matrix<double, 2, 4> C;
    ModelParams params;
};

/// Real (A, B, C) in the frame selected by params.frame.
QuadratureModel quadrature_realization(const ModelParams& params);

/// Complex coefficients c_jk with G(a_j) = sum_k c_jk a_k, read off from
/// vacuum/one-photon matrix elements of the Heisenberg generator.
CMatrix mode_drift_from_generator(const SLHTriple& model);

/// Real coefficients A_jk with G(x_j) = sum_k A_jk x_k for x = [q_0, p_0, q_1, p_1, ...].
Eigen::MatrixXd quadrature_drift_from_generator(const SLHTriple& model);

/// Quadrature operators [q_0, p_0, q_1, p_1, ...] embedded in `layout`.
std::vector<Operator> quadrature_operators(const HilbertLayout& layout);

}  // namespace lornz
