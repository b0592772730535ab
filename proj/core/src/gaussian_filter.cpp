#include "lornz/gaussian_filter.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "lornz/master_engine.hpp"

namespace lornz {

namespace {

constexpr Complex kI(0.0, 1.0);

void require_uniform(const std::vector<double>& t_grid, const char* where) {
    if (t_grid.size() < 2) return;
    const double dt = t_grid[1] - t_grid[0];
    if (!(dt > 0.0)) throw ValidationError(std::string(where) + ": time grid must be increasing");
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (std::abs((t_grid[i] - t_grid[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(t_grid[i]))) {
            throw ValidationError(std::string(where) + ": time grid must be uniform");
        }
    }
}

void check_covariance(Eigen::Matrix4d& V, const char* where, double t) {
    V = (0.5 * (V + V.transpose())).eval();
    if (!V.allFinite()) throw NumericalInstability(std::string(where) + ": covariance became non-finite; reduce dt");
    const double lowest = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(V, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lowest < -1e-6) {
        throw NumericalInstability(std::string(where) + ": covariance eigenvalue " + std::to_string(lowest) +
                                   " at t=" + std::to_string(t) + "; reduce dt");
    }
}

Eigen::Matrix4d riccati_rk4_step(const QuadratureModel& model, const KalmanMatrices& km, const Eigen::Matrix4d& V,
                                 double dt) {
    const Eigen::Matrix4d k1 = riccati_rhs(model, km, V);
    const Eigen::Matrix4d k2 = riccati_rhs(model, km, V + 0.5 * dt * k1);
    const Eigen::Matrix4d k3 = riccati_rhs(model, km, V + 0.5 * dt * k2);
    const Eigen::Matrix4d k4 = riccati_rhs(model, km, V + dt * k3);
    return V + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    s(0, 1) = 1.0;
    s(1, 0) = -1.0;
    s(2, 3) = 1.0;
    s(3, 2) = -1.0;
    return s;
}

KalmanMatrices kalman_matrices(const QuadratureModel& model) {
    const ModelParams& p = model.params;
    const Eigen::Matrix2cd xi_inv = quadrature_transform().inverse();

    KalmanMatrices km;
    km.Sigma = symplectic_form();
    km.E.leftCols<2>() = std::sqrt(p.gamma_1) * xi_inv;
    km.F = (km.E + km.E.conjugate()).real();
    km.ImE = km.E.imag();

    // One row per physical channel: the probe couples through a_s, the bath through a_0.
    Eigen::Matrix<Complex, 2, 4> channels = Eigen::Matrix<Complex, 2, 4>::Zero();
    channels.block<1, 2>(0, 0) = std::sqrt(p.gamma_1) * xi_inv.row(0);
    channels.block<1, 2>(1, 2) = std::sqrt(p.gamma_0) * xi_inv.row(0);
    km.D = km.Sigma * (channels.adjoint() * channels).real() * km.Sigma.transpose();
    km.D = (0.5 * (km.D + km.D.transpose())).eval();
    return km;
}

void RecordConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("RecordConfig: dt must be > 0");
    if (steps < 1) throw ValidationError("RecordConfig: steps must be >= 1");
    if (initial_covariance) {
        const Eigen::Matrix4d& v = *initial_covariance;
        if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw ValidationError("RecordConfig: initial covariance must be symmetric");
        }
        if (Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(v).eigenvalues()(0) < -1e-12) {
            throw ValidationError("RecordConfig: initial covariance must be positive semidefinite");
        }
    }
}

std::vector<double> uniform_grid(double dt, Index steps, double t0) {
    std::vector<double> grid(static_cast<std::size_t>(steps + 1));
    for (Index n = 0; n <= steps; ++n) grid[static_cast<std::size_t>(n)] = t0 + static_cast<double>(n) * dt;
    return grid;
}

std::vector<Eigen::Vector4d> propagate_mean(const QuadratureModel& model, const Eigen::Vector4d& m0,
                                            const std::vector<double>& t_grid) {
    std::vector<Eigen::Vector4d> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        const Eigen::Matrix4d phi = (model.A * t).exp();
        out.emplace_back(phi * m0);
    }
    return out;
}

MeasurementRecord simulate_record(const QuadratureModel& model, const Eigen::Vector4d& x0, const RecordConfig& config) {
    config.validate();
    const KalmanMatrices km = kalman_matrices(model);
    const Eigen::RowVector4d f = km.f();
    const Eigen::Matrix4d phi = (model.A * config.dt).exp();

    std::mt19937_64 rng(stream_seed(config.seed, config.stream));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = config.zero_noise ? 0.0 : std::sqrt(0.5 * config.dt);

    MeasurementRecord rec;
    rec.seed = config.seed;
    rec.stream = config.stream;
    rec.t_grid = uniform_grid(config.dt, config.steps);
    rec.dY.resize(static_cast<std::size_t>(config.steps));
    rec.true_path.resize(static_cast<std::size_t>(config.steps + 1));

    Eigen::Vector4d x = x0;
    if (config.initial_covariance && !config.zero_noise) {
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(*config.initial_covariance);
        const Eigen::Matrix4d root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        Eigen::Vector4d z;
        for (Index i = 0; i < 4; ++i) z(i) = normal(rng);
        x += root * z;
    }
    rec.true_path[0] = x;
    for (Index n = 0; n < config.steps; ++n) {
        Eigen::Vector4d dU;
        for (Index i = 0; i < 4; ++i) dU(i) = sd * normal(rng);
        rec.dY[static_cast<std::size_t>(n)] = f.dot(x) * config.dt + std::sqrt(2.0) * dU(0);
        x = phi * x + model.B * dU;
        rec.true_path[static_cast<std::size_t>(n + 1)] = x;
    }
    return rec;
}

Eigen::Matrix4d riccati_rhs(const QuadratureModel& model, const KalmanMatrices& km, const Eigen::Matrix4d& V) {
    const Eigen::Vector4d k = km.gain(V);
    return model.A * V + V * model.A.transpose() + km.D - k * k.transpose();
}

double riccati_residual(const QuadratureModel& model, const KalmanMatrices& km, const Eigen::Matrix4d& V) {
    return riccati_rhs(model, km, V).cwiseAbs().maxCoeff();
}

GainSchedule riccati_trajectory(const QuadratureModel& model, const KalmanMatrices& km, const Eigen::Matrix4d& V0,
                                double dt, Index steps) {
    if (!(dt > 0.0)) throw ValidationError("riccati_trajectory: dt must be > 0");
    GainSchedule s;
    s.dt = dt;
    s.V.reserve(static_cast<std::size_t>(steps + 1));
    s.K.reserve(static_cast<std::size_t>(steps + 1));
    Eigen::Matrix4d V = V0;
    check_covariance(V, "riccati_trajectory", 0.0);
    for (Index n = 0; n <= steps; ++n) {
        s.V.push_back(V);
        s.K.push_back(km.gain(V));
        if (n == steps) break;
        V = riccati_rk4_step(model, km, V, dt);
        check_covariance(V, "riccati_trajectory", static_cast<double>(n + 1) * dt);
    }
    return s;
}

FilterOutput kalman_filter(const QuadratureModel& model, const KalmanMatrices& km, const MeasurementRecord& record,
                           const Eigen::Vector4d& x0, const Eigen::Matrix4d& V0) {
    return kalman_filter(model, km, record, x0, riccati_trajectory(model, km, V0, record.dt(), record.steps()));
}

FilterOutput kalman_filter(const QuadratureModel& model, const KalmanMatrices& km, const MeasurementRecord& record,
                           const Eigen::Vector4d& x0, const GainSchedule& schedule) {
    const Index steps = record.steps();
    const double dt = record.dt();
    if (static_cast<Index>(schedule.K.size()) < steps + 1 || std::abs(schedule.dt - dt) > 1e-12 * dt) {
        throw ValidationError("kalman_filter: gain schedule does not match the record grid");
    }
    const Eigen::Matrix4d phi = (model.A * dt).exp();
    const Eigen::RowVector4d f = km.f();

    FilterOutput out;
    out.x_hat.reserve(static_cast<std::size_t>(steps + 1));
    out.innovations.reserve(static_cast<std::size_t>(steps));
    out.V_hat.assign(schedule.V.begin(), schedule.V.begin() + steps + 1);

    Eigen::Vector4d x = x0;
    out.x_hat.push_back(x);
    for (Index n = 0; n < steps; ++n) {
        const double dW = record.dY[static_cast<std::size_t>(n)] - f.dot(x) * dt;
        x = phi * x + schedule.K[static_cast<std::size_t>(n)] * dW;
        out.innovations.push_back(dW);
        out.x_hat.push_back(x);
    }
    return out;
}

bool is_detectable(const QuadratureModel& model, const KalmanMatrices& km) {
    const Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(model.A.cast<Complex>());
    for (Index i = 0; i < 4; ++i) {
        const Complex lambda = es.eigenvalues()(i);
        if (lambda.real() < -1e-12) continue;
        Eigen::Matrix<Complex, 5, 4> pbh;
        pbh.topRows<4>() = lambda * Eigen::Matrix4cd::Identity() - model.A.cast<Complex>();
        pbh.bottomRows<1>() = km.f().cast<Complex>();
        Eigen::JacobiSVD<Eigen::Matrix<Complex, 5, 4>> svd(pbh);
        if (svd.singularValues()(3) < 1e-10 * std::max(1.0, svd.singularValues()(0))) return false;
    }
    return true;
}

Eigen::Matrix4d riccati_stationary(const QuadratureModel& model, const KalmanMatrices& km,
                                   const StationaryOptions& options) {
    if (!is_detectable(model, km)) {
        throw ValidationError("riccati_stationary: (A, f) is not detectable; no stabilising solution exists");
    }
    Eigen::Matrix4d V = options.V0;
    double t = 0.0;
    while (t < options.horizon) {
        V = riccati_rk4_step(model, km, V, options.dt);
        check_covariance(V, "riccati_stationary", t);
        t += options.dt;
        if (riccati_residual(model, km, V) < options.tolerance) return V;
    }
    throw ConvergenceError("riccati_stationary: max|dV/dt| = " + std::to_string(riccati_residual(model, km, V)) +
                           " after horizon " + std::to_string(options.horizon));
}

std::vector<Complex> memory_kernel_mean(const ModelParams& params, Complex a0, const std::vector<double>& t_grid,
                                        HistoryMode mode) {
    params.validate();
    require_uniform(t_grid, "memory_kernel_mean");
    std::vector<Complex> a(t_grid.size());
    if (a.empty()) return a;
    a[0] = a0;
    if (a.size() == 1) return a;

    const double dt = t_grid[1] - t_grid[0];
    const Complex mu = kI * params.frame_omega_s() + 0.5 * params.gamma_1;
    const Complex lambda = 0.5 * params.gamma_0 + kI * params.frame_omega_0();
    const double g2 = 0.25 * params.kappa * params.gamma_0;
    const Complex decay = std::exp(-lambda * dt);
    const Complex denom = 1.0 + 0.5 * dt * mu + g2 * 0.25 * dt * dt;

    // I_n approximates int_0^{t_n} e^{-lambda (t_n - s)} a(s) ds; I_0 = 0.
    Complex history = 0.0;
    for (std::size_t n = 0; n + 1 < a.size(); ++n) {
        // J = I_{n+1} - (dt/2) a_{n+1}: the part of the next history integral already known.
        Complex known;
        if (mode == HistoryMode::Accumulator) {
            known = decay * (history + 0.5 * dt * a[n]);
        } else {
            known = 0.0;
            const double tn1 = t_grid[n + 1];
            for (std::size_t k = 0; k <= n; ++k) {
                const double w = (k == 0) ? 0.5 * dt : dt;
                known += w * std::exp(-lambda * (tn1 - t_grid[k])) * a[k];
            }
        }
        const Complex rate_n = -mu * a[n] - g2 * history;
        a[n + 1] = (a[n] + 0.5 * dt * rate_n - 0.5 * dt * g2 * known) / denom;
        history = known + 0.5 * dt * a[n + 1];
    }
    return a;
}

std::vector<Complex> augmented_mode_mean(const ModelParams& params, Complex a0, const std::vector<double>& t_grid) {
    const Eigen::Matrix2cd m = complex_drift(params);
    std::vector<Complex> out;
    out.reserve(t_grid.size());
    const Eigen::Vector2cd v0(a0, 0.0);
    for (double t : t_grid) {
        const Eigen::Matrix2cd phi = (m * t).exp();
        out.push_back((phi * v0)(0));
    }
    return out;
}

}  // namespace lornz
