#pragma once

// Closed-form frequency-domain quantities. Public spectra take the offset
// frequency omega_tilde = omega_s - omega; `omega_tilde_of` converts an
// absolute frequency.

#include <string>
#include <vector>

#include "lornz/slh_builder.hpp"

namespace lornz {

/// (gamma_0^2/4) / (gamma_0^2/4 + (omega - omega_0)^2)
double lorentzian_psd(double omega, double omega_0, double gamma_0);

/// (gamma_0/4) exp(-(gamma_0/2 + i omega_0) tau) for tau >= 0, extended by M(-tau) = conj M(tau).
Complex memory_kernel(double tau, double omega_0, double gamma_0);

/// tau at which |M(tau)| has dropped to half of M(0), found by bisection.
double kernel_half_life(double gamma_0);

struct TransferPair {
    Complex g1;
    Complex g2;
};

double omega_tilde_of(double omega, const ModelParams& params);

/// G_1, G_2 in the closed form
///   G_1 = ((i w - g1/2)(i(w - D) + g0/2) + k g0) / ((i w + g1/2)(i(w - D) + g0/2) + k g0)
///   G_2 = -g0 sqrt(k g1) / ((i w + g1/2)(i(w - D) + g0/2) + k g0)
/// with w = omega_tilde, D = detuning.
TransferPair transfer_functions(double omega_tilde, const ModelParams& params);

/// The same pair from a quadrature realisation, C (sI - A)^-1 B + [I 0], read
/// off in the annihilation basis. The closed form above corresponds to a
/// beam-splitter rate sqrt(kappa gamma_0), so the realisation is built with
/// kappa scaled by 4 (see README, "Transfer functions").
TransferPair transfer_functions_state_space(double omega_tilde, const ModelParams& params);

double upsilon(double omega_tilde, const ModelParams& params);
/// |G_1|^2 and |G_2|^2 through Upsilon.
double g1_psd(double omega_tilde, const ModelParams& params);
double g2_psd(double omega_tilde, const ModelParams& params);
/// (|G_1|^2 + |G_2|^2) / 4
double output_psd(double omega_tilde, const ModelParams& params);

struct SpectrumCurve {
    std::vector<double> omega;   // strictly increasing
    std::vector<double> values;  // nonnegative for PSDs
    ModelParams params;
    std::string label;
};

struct TransferCurve {
    std::vector<double> omega;
    std::vector<TransferPair> values;
    ModelParams params;
};

/// `points` equally spaced values over [lo, hi]; default matches the figure axes.
std::vector<double> frequency_grid(Index points = 4096, double lo = -5.0, double hi = 5.0);

SpectrumCurve g2_curve(const ModelParams& params, const std::vector<double>& grid);
SpectrumCurve g1_curve(const ModelParams& params, const std::vector<double>& grid);
SpectrumCurve output_curve(const ModelParams& params, const std::vector<double>& grid);
TransferCurve transfer_curve(const ModelParams& params, const std::vector<double>& grid);

/// Position of the largest value (ties resolved to the first).
std::size_t argmax(const SpectrumCurve& curve);
/// Full width at half maximum with linear interpolation of the crossings;
/// throws ValidationError when a crossing falls outside the grid.
double fwhm(const SpectrumCurve& curve);

struct KernelSpectrum {
    std::vector<double> omega;
    std::vector<double> values;
};

/// int M(tau) e^{i omega tau} dtau by FFT of 2^log2_points samples spaced dtau.
KernelSpectrum kernel_spectrum_fft(double omega_0, double gamma_0, int log2_points = 14, double dtau = 1e-2);

struct BroadbandEntry {
    double gamma_0 = 0.0;
    double integrated_deviation = 0.0;   // int |S - 1| over the band
    double max_deviation = 0.0;
    double kernel_half_life = 0.0;
    double kernel_fwhm = 0.0;            // of |M(tau)| over the real line
};

struct BroadbandReport {
    double band_half_width = 0.0;
    std::vector<BroadbandEntry> entries;
    bool deviation_decreasing = true;
    bool width_shrinking = true;
};

/// Lorentzian whiteness on [omega_0 - W, omega_0 + W] for each gamma_0 (in the given order).
BroadbandReport broadband_limit_check(const std::vector<double>& gamma_0_values, const ModelParams& params,
                                      double band_half_width, Index points = 4001);

}  // namespace lornz
