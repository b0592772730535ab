#include "lornz/spectra.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

namespace lornz {

namespace {

constexpr Complex kI(0.0, 1.0);

void require_gamma(double gamma_0, const char* where) {
    if (!(gamma_0 > 0.0) || !std::isfinite(gamma_0)) {
        throw ValidationError(std::string(where) + ": gamma_0 must be > 0");
    }
}

Complex shared_denominator(double w, const ModelParams& p) {
    return (kI * w + 0.5 * p.gamma_1) * (kI * (w - p.detuning()) + 0.5 * p.gamma_0) + p.kappa * p.gamma_0;
}

// Crossing of `level` between samples i and j, linearly interpolated.
double crossing(const SpectrumCurve& c, std::size_t i, std::size_t j, double level) {
    const double v0 = c.values[i], v1 = c.values[j];
    const double s = (level - v0) / (v1 - v0);
    return c.omega[i] + s * (c.omega[j] - c.omega[i]);
}

template <class F>
SpectrumCurve tabulate(const ModelParams& params, const std::vector<double>& grid, const char* label, F fn) {
    params.validate();
    SpectrumCurve c;
    c.omega = grid;
    c.params = params;
    c.label = label;
    c.values.reserve(grid.size());
    for (double w : grid) c.values.push_back(fn(w, params));
    return c;
}

}  // namespace

double lorentzian_psd(double omega, double omega_0, double gamma_0) {
    require_gamma(gamma_0, "lorentzian_psd");
    const double h = 0.25 * gamma_0 * gamma_0;
    const double d = omega - omega_0;
    return h / (h + d * d);
}

Complex memory_kernel(double tau, double omega_0, double gamma_0) {
    require_gamma(gamma_0, "memory_kernel");
    const Complex value = 0.25 * gamma_0 * std::exp(-(0.5 * gamma_0 + kI * omega_0) * std::abs(tau));
    return tau >= 0.0 ? value : std::conj(value);
}

double kernel_half_life(double gamma_0) {
    require_gamma(gamma_0, "kernel_half_life");
    const double target = 0.5 * std::abs(memory_kernel(0.0, 0.0, gamma_0));
    double lo = 0.0, hi = 1.0 / gamma_0;
    while (std::abs(memory_kernel(hi, 0.0, gamma_0)) > target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::abs(memory_kernel(mid, 0.0, gamma_0)) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double omega_tilde_of(double omega, const ModelParams& params) { return params.omega_s - omega; }

TransferPair transfer_functions(double omega_tilde, const ModelParams& params) {
    params.validate();
    const ModelParams& p = params;
    const double w = omega_tilde;
    const Complex den = shared_denominator(w, p);
    const Complex num1 = (kI * w - 0.5 * p.gamma_1) * (kI * (w - p.detuning()) + 0.5 * p.gamma_0) + p.kappa * p.gamma_0;
    return {num1 / den, -p.gamma_0 * std::sqrt(p.kappa * p.gamma_1) / den};
}

TransferPair transfer_functions_state_space(double omega_tilde, const ModelParams& params) {
    ModelParams scaled = params;
    scaled.kappa = 4.0 * params.kappa;
    const QuadratureModel q = quadrature_realization(scaled);

    // Laplace variable of the annihilation component in the model's frame.
    const Complex s = kI * (omega_tilde - scaled.frame_omega_s());
    const Eigen::Matrix4cd resolvent = (s * Eigen::Matrix4cd::Identity() - q.A.cast<Complex>()).inverse();
    Eigen::Matrix<Complex, 2, 4> t = q.C.cast<Complex>() * resolvent * q.B.cast<Complex>();
    t.leftCols<2>() += Eigen::Matrix2cd::Identity();

    const Eigen::Matrix2cd xi = quadrature_transform();
    const Eigen::Matrix2cd xi_inv = xi.adjoint();
    const Eigen::Matrix2cd probe = xi_inv * t.leftCols<2>() * xi;
    const Eigen::Matrix2cd bath = xi_inv * t.rightCols<2>() * xi;
    return {probe(0, 0), bath(0, 0)};
}

double upsilon(double omega_tilde, const ModelParams& params) {
    const ModelParams& p = params;
    const double w = omega_tilde;
    const double wd = w - p.detuning();
    return (0.25 * p.gamma_1 * p.gamma_1 + w * w) * wd * wd + 0.25 * p.gamma_0 * p.gamma_0 * w * w -
           2.0 * p.kappa * p.gamma_0 * w * wd;
}

double g1_psd(double omega_tilde, const ModelParams& params) {
    params.validate();
    const ModelParams& p = params;
    const double u = upsilon(omega_tilde, p);
    const double minus = p.kappa * p.gamma_0 - 0.25 * p.gamma_0 * p.gamma_1;
    const double plus = p.kappa * p.gamma_0 + 0.25 * p.gamma_0 * p.gamma_1;
    return (u + minus * minus) / (u + plus * plus);
}

double g2_psd(double omega_tilde, const ModelParams& params) {
    params.validate();
    const ModelParams& p = params;
    const double plus = p.kappa * p.gamma_0 + 0.25 * p.gamma_0 * p.gamma_1;
    return p.kappa * p.gamma_1 * p.gamma_0 * p.gamma_0 / (upsilon(omega_tilde, p) + plus * plus);
}

double output_psd(double omega_tilde, const ModelParams& params) {
    const TransferPair g = transfer_functions(omega_tilde, params);
    return 0.25 * (std::norm(g.g1) + std::norm(g.g2));
}

std::vector<double> frequency_grid(Index points, double lo, double hi) {
    if (points < 2 || !(hi > lo)) throw ValidationError("frequency_grid: need points >= 2 and hi > lo");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (Index i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + static_cast<double>(i) * step;
    grid.back() = hi;
    return grid;
}

SpectrumCurve g2_curve(const ModelParams& params, const std::vector<double>& grid) {
    return tabulate(params, grid, "|G2|^2", g2_psd);
}

SpectrumCurve g1_curve(const ModelParams& params, const std::vector<double>& grid) {
    return tabulate(params, grid, "|G1|^2", g1_psd);
}

SpectrumCurve output_curve(const ModelParams& params, const std::vector<double>& grid) {
    return tabulate(params, grid, "S_out", output_psd);
}

TransferCurve transfer_curve(const ModelParams& params, const std::vector<double>& grid) {
    params.validate();
    TransferCurve c;
    c.omega = grid;
    c.params = params;
    c.values.reserve(grid.size());
    for (double w : grid) c.values.push_back(transfer_functions(w, params));
    return c;
}

std::size_t argmax(const SpectrumCurve& curve) {
    if (curve.values.empty()) throw ValidationError("argmax: empty curve");
    return static_cast<std::size_t>(std::max_element(curve.values.begin(), curve.values.end()) - curve.values.begin());
}

double fwhm(const SpectrumCurve& curve) {
    const std::size_t peak = argmax(curve);
    const double half = 0.5 * curve.values[peak];
    std::size_t left = peak;
    while (left > 0 && curve.values[left] > half) --left;
    std::size_t right = peak;
    while (right + 1 < curve.values.size() && curve.values[right] > half) ++right;
    if (curve.values[left] > half || curve.values[right] > half) {
        throw ValidationError("fwhm: half-maximum crossing lies outside the frequency grid");
    }
    return crossing(curve, right - 1, right, half) - crossing(curve, left, left + 1, half);
}

KernelSpectrum kernel_spectrum_fft(double omega_0, double gamma_0, int log2_points, double dtau) {
    require_gamma(gamma_0, "kernel_spectrum_fft");
    if (log2_points < 4 || log2_points > 24 || !(dtau > 0.0)) {
        throw ValidationError("kernel_spectrum_fft: need 4 <= log2_points <= 24 and dtau > 0");
    }
    const Index n = Index{1} << log2_points;
    // Sample n*dtau-periodically, negative lags wrapped to the upper half.
    std::vector<Complex> samples(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        const double tau = static_cast<double>(k < n / 2 ? k : k - n) * dtau;
        samples[static_cast<std::size_t>(k)] = std::conj(memory_kernel(tau, omega_0, gamma_0));
    }
    // sum_k M(tau_k) e^{+i w tau_k} = conj( sum_k conj M(tau_k) e^{-i w tau_k} )
    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum;
    fft.fwd(spectrum, samples);

    KernelSpectrum out;
    const double dw = 2.0 * M_PI / (static_cast<double>(n) * dtau);
    out.omega.resize(static_cast<std::size_t>(n));
    out.values.resize(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        // Reorder so the frequency axis is increasing.
        const Index src = (k + n / 2) % n;
        const Index signed_k = src < n / 2 ? src : src - n;
        out.omega[static_cast<std::size_t>(k)] = static_cast<double>(signed_k) * dw;
        out.values[static_cast<std::size_t>(k)] = dtau * std::conj(spectrum[static_cast<std::size_t>(src)]).real();
    }
    return out;
}

BroadbandReport broadband_limit_check(const std::vector<double>& gamma_0_values, const ModelParams& params,
                                      double band_half_width, Index points) {
    if (!(band_half_width > 0.0)) throw ValidationError("broadband_limit_check: band half-width must be > 0");
    BroadbandReport report;
    report.band_half_width = band_half_width;
    const std::vector<double> grid =
        frequency_grid(points, params.omega_0 - band_half_width, params.omega_0 + band_half_width);
    const double step = grid[1] - grid[0];

    for (double g0 : gamma_0_values) {
        BroadbandEntry e;
        e.gamma_0 = g0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double dev = std::abs(lorentzian_psd(grid[i], params.omega_0, g0) - 1.0);
            const double w = (i == 0 || i + 1 == grid.size()) ? 0.5 : 1.0;
            e.integrated_deviation += w * step * dev;
            e.max_deviation = std::max(e.max_deviation, dev);
        }
        e.kernel_half_life = kernel_half_life(g0);
        e.kernel_fwhm = 2.0 * e.kernel_half_life;
        if (!report.entries.empty()) {
            const BroadbandEntry& prev = report.entries.back();
            if (!(e.integrated_deviation < prev.integrated_deviation)) report.deviation_decreasing = false;
            if (!(e.kernel_fwhm < prev.kernel_fwhm)) report.width_shrinking = false;
        }
        report.entries.push_back(e);
    }
    return report;
}

}  // namespace lornz
