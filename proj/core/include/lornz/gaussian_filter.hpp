#pragma once

// Linear-Gaussian side of the model: quadrature means, classical simulation of
// homodyne records, the quantum Kalman filter and the memory-kernel form of
// the principal mean.
//
// Conventions (fixed project-wide):
//   dx = A x dt + B dU,   dU_i independent with variance dt/2
//   dY = f x dt + dQ,     dQ = sqrt(2) dU_0, variance dt
// where f = sqrt(2 gamma_1) [1, 0, 0, 0] is the measured row of F = E + conj(E).
// dQ is the probe input quadrature that also enters dq_s through B, so the
// process and measurement noises are correlated; the Kalman gain carries that
// correlation as Sigma^T Im(e)^T.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lornz/slh_builder.hpp"

namespace lornz {

struct KalmanMatrices {
    /// E = [sqrt(gamma_1) Xi^-1, 0]: rows give L and L^dag as linear forms in x.
    Eigen::Matrix<Complex, 2, 4> E = Eigen::Matrix<Complex, 2, 4>::Zero();
    /// F = E + conj(E)
    Eigen::Matrix<double, 2, 4> F = Eigen::Matrix<double, 2, 4>::Zero();
    Eigen::Matrix<double, 2, 4> ImE = Eigen::Matrix<double, 2, 4>::Zero();
    /// D = Sigma Re(E_c^dag E_c) Sigma^T summed over the probe and bath channels.
    Eigen::Matrix4d D = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d Sigma = Eigen::Matrix4d::Zero();
    /// Row of E used by the scalar record (the amplitude quadrature).
    Index measured_row = 0;

    Eigen::RowVector4d f() const { return F.row(measured_row); }
    Eigen::RowVector4d im_e() const { return ImE.row(measured_row); }
    /// Sigma^T Im(e)^T: the noise-correlation part of the gain.
    Eigen::Vector4d gain_offset() const { return Sigma.transpose() * im_e().transpose(); }
    Eigen::Vector4d gain(const Eigen::Matrix4d& V) const { return V * f().transpose() + gain_offset(); }
};

/// Symplectic form blockdiag([[0, 1], [-1, 0]], [[0, 1], [-1, 0]]).
Eigen::Matrix4d symplectic_form();

KalmanMatrices kalman_matrices(const QuadratureModel& model);

struct MeasurementRecord {
    std::vector<double> t_grid;                 // steps + 1 points
    std::vector<double> dY;                     // steps increments
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<Eigen::Vector4d> true_path;     // steps + 1 simulated states

    double dt() const { return t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 0.0; }
    Index steps() const noexcept { return static_cast<Index>(dY.size()); }
};

struct RecordConfig {
    double dt = 1e-2;
    Index steps = 2000;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    /// Debug mode: every noise increment is forced to zero.
    bool zero_noise = false;
    /// When set, x0 is the mean and the initial state is drawn from N(x0, V0).
    std::optional<Eigen::Matrix4d> initial_covariance;

    void validate() const;
};

struct FilterOutput {
    std::vector<Eigen::Vector4d> x_hat;         // steps + 1
    std::vector<Eigen::Matrix4d> V_hat;         // steps + 1
    std::vector<double> innovations;            // steps
};

/// V and gain K = V f^T + Sigma^T Im(e)^T on a uniform grid; independent of the record.
struct GainSchedule {
    double dt = 0.0;
    std::vector<Eigen::Matrix4d> V;             // steps + 1
    std::vector<Eigen::Vector4d> K;             // steps + 1
};

/// m(t) = expm(A t) m0 on every grid point.
std::vector<Eigen::Vector4d> propagate_mean(const QuadratureModel& model, const Eigen::Vector4d& m0,
                                            const std::vector<double>& t_grid);

std::vector<double> uniform_grid(double dt, Index steps, double t0 = 0.0);

/// Exact-drift Euler scheme x_{n+1} = expm(A dt) x_n + B dU_n with the record
/// increment dY_n = f x_n dt + sqrt(2) dU_{n,0}.
MeasurementRecord simulate_record(const QuadratureModel& model, const Eigen::Vector4d& x0, const RecordConfig& config);

/// Right-hand side A V + V A^T + D - K K^T.
Eigen::Matrix4d riccati_rhs(const QuadratureModel& model, const KalmanMatrices& km, const Eigen::Matrix4d& V);
/// Max-abs entry of riccati_rhs.
double riccati_residual(const QuadratureModel& model, const KalmanMatrices& km, const Eigen::Matrix4d& V);

/// RK4 integration of the Riccati equation; throws NumericalInstability if V
/// leaves the PSD cone by more than 1e-6.
GainSchedule riccati_trajectory(const QuadratureModel& model, const KalmanMatrices& km, const Eigen::Matrix4d& V0,
                                double dt, Index steps);

FilterOutput kalman_filter(const QuadratureModel& model, const KalmanMatrices& km, const MeasurementRecord& record,
                           const Eigen::Vector4d& x0, const Eigen::Matrix4d& V0);
/// Same filter with a precomputed schedule (shared across an ensemble of records).
FilterOutput kalman_filter(const QuadratureModel& model, const KalmanMatrices& km, const MeasurementRecord& record,
                           const Eigen::Vector4d& x0, const GainSchedule& schedule);

struct StationaryOptions {
    double dt = 1e-2;
    double horizon = 1e5;
    double tolerance = 1e-12;   // on max |dV/dt|
    Eigen::Matrix4d V0 = Eigen::Matrix4d::Zero();
};

/// Integrates the Riccati equation until max|dV/dt| < tolerance. Throws
/// ValidationError if (A, f) is not detectable and ConvergenceError if the
/// horizon runs out.
Eigen::Matrix4d riccati_stationary(const QuadratureModel& model, const KalmanMatrices& km,
                                   const StationaryOptions& options = {});

/// PBH test on the eigenvalues of A with nonnegative real part.
bool is_detectable(const QuadratureModel& model, const KalmanMatrices& km);

enum class HistoryMode { Accumulator, DirectQuadrature };

/// <a_s>(t) from the integro-differential equation
///   d<a_s>/dt = -(i w_s + gamma_1/2) <a_s> - (kappa gamma_0 / 4) int_0^t e^{-lambda (t - s)} <a_s>(s) ds,
/// lambda = gamma_0/2 + i w_0, integrated with the trapezoid rule on a uniform grid.
std::vector<Complex> memory_kernel_mean(const ModelParams& params, Complex a0, const std::vector<double>& t_grid,
                                        HistoryMode mode = HistoryMode::Accumulator);

/// Principal component of expm(M t) [a0, 0] for the two-mode complex drift M.
std::vector<Complex> augmented_mode_mean(const ModelParams& params, Complex a0, const std::vector<double>& t_grid);

}  // namespace lornz
