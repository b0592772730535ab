#pragma once

// Flat key = value experiment configuration. Lines starting with '#' are
// comments; a `preset` expands to a full parameter set and explicit keys
// override it.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lornz/master_engine.hpp"
#include "lornz/slh_builder.hpp"

namespace lornz {

enum class ExperimentId { Fig4, FigKappa, FigDelta, FigGamma, SmeDemo, Simulate, Filter, Spectra, Acceptance };

std::string to_string(ExperimentId id);
ExperimentId parse_experiment(std::string_view name);

/// Which ModelParams field a figure sweep varies.
enum class SweepKind { None, Kappa, Detuning, Gamma0 };

struct ExperimentConfig {
    ExperimentId experiment = ExperimentId::Fig4;
    std::string preset;
    ModelParams params;
    ModeDims dims;
    SMEConfig sme;

    Index ensemble = 1000;
    double t_end = 20.0;
    /// Step of the Gaussian record simulator and Kalman filter.
    double dt = 1e-2;
    Eigen::Vector4d m0 = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    /// Principal thermal occupation of the Gaussian initial state (ancilla in vacuum).
    double initial_nbar = 0.25;

    SweepKind sweep_kind = SweepKind::None;
    std::vector<double> sweep;

    Index grid_points = 4096;
    double omega_min = -5.0;
    double omega_max = 5.0;

    std::string time_unit = "dimensionless";
    std::uint64_t seed = 7;
    std::string output_dir = "out";

    /// Initial covariance diag(nbar + 1/2, nbar + 1/2, 1/2, 1/2).
    Eigen::Matrix4d initial_covariance() const;
    void validate() const;
};

/// Parses and validates configuration text. Errors are ValidationError with
/// the offending line number and key.
ExperimentConfig validate_config(std::string_view text);

/// Config text equivalent to `preset = <name>` for the given experiment.
std::string preset_text(ExperimentId experiment);

/// Names accepted by the `preset` key.
std::vector<std::string> preset_names();

/// Key reference with defaults, for --help.
std::string config_reference();

}  // namespace lornz
