#pragma once

// Unconditional master equation and homodyne stochastic master equation on the
// truncated principal x ancilla space.
//
// Every integrator works on a CompiledGenerator: the (S, L, H) operators are
// stored band by band (see banded_operator.hpp) so that a step costs a few
// dozen scaled block copies of rho instead of dense matrix products.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lornz/banded_operator.hpp"
#include "lornz/fock_algebra.hpp"
#include "lornz/slh_builder.hpp"

namespace lornz {

enum class SMEScheme { EulerMaruyama, MilsteinDiagonal, PositiveMap };

std::string to_string(SMEScheme scheme);
/// Accepts "euler-maruyama", "milstein-diagonal" and "positive-map".
SMEScheme parse_sme_scheme(std::string_view name);

struct SMEConfig {
    double dt = 1e-3;
    Index steps = 1000;
    /// PositiveMap applies a normalised Kraus-type update, so positivity holds by
    /// construction; the two Ito-Taylor schemes can leave the cone by O(dt) near
    /// pure states and rely on the clipping below.
    SMEScheme scheme = SMEScheme::PositiveMap;
    bool renormalize = true;
    std::uint64_t seed = 0;
    std::size_t measured_channel = kProbeChannel;
    /// Eigenvalue check cadence in steps; 0 disables it, -1 picks the scheme
    /// default (10 for the Ito-Taylor schemes, whose negative eigenvalues must be
    /// caught while still above -1e-6, and 500 for the positive map).
    Index positivity_check_every = -1;

    Index positivity_cadence() const noexcept {
        if (positivity_check_every >= 0) return positivity_check_every;
        return scheme == SMEScheme::PositiveMap ? 500 : 10;
    }

    /// dt > 0, steps >= 1; renormalize = false is only meaningful for the Ito-Taylor schemes.
    void validate() const;
};

class CompiledGenerator {
public:
    /// `measured` selects the homodyne channel; std::nullopt compiles an unmonitored model.
    explicit CompiledGenerator(const SLHTriple& model, std::optional<std::size_t> measured = std::nullopt);

    const HilbertLayout& layout() const noexcept { return layout_; }
    Index dim() const noexcept { return layout_.total_dim(); }
    bool has_measurement() const noexcept { return measured_.has_value(); }

    /// out = -i[H, rho] + sum_k L*_{L_k}(rho)
    void lindblad(const CMatrix& rho, CMatrix& out) const;
    /// Measured L rho + rho L^dag (no trace subtraction).
    void measurement_action(const CMatrix& rho, CMatrix& out) const;
    /// tr[(L + L^dag) rho] for the measured channel.
    double measured_quadrature(const CMatrix& rho) const;

    const BandedOperator& effective() const noexcept { return effective_; }
    const BandedOperator& identity() const noexcept { return identity_; }
    const BandedOperator& measured_jump() const;
    /// L^2 for the measured channel.
    const BandedOperator& measured_square() const;
    /// Channels other than the measured one, with their adjoints at matching positions.
    const std::vector<BandedOperator>& unmeasured_jumps() const noexcept { return unmeasured_; }
    const std::vector<BandedOperator>& unmeasured_adjoints() const noexcept { return unmeasured_adj_; }

    /// [q_s, p_s, q_0, p_0] (fewer entries for single-slot layouts).
    Eigen::VectorXd quadrature_means(const CMatrix& rho) const;

private:
    HilbertLayout layout_;
    BandedOperator effective_;                 // K = -iH - (1/2) sum L^dag L
    BandedOperator effective_adj_;
    BandedOperator identity_;
    std::vector<BandedOperator> jumps_, jumps_adj_;
    std::vector<BandedOperator> unmeasured_, unmeasured_adj_;
    BandedOperator measured_sq_;
    std::optional<std::size_t> measured_;
    std::vector<BandedOperator> quadratures_;
};

struct ConditionalState {
    DensityMatrix rho;
    double time = 0.0;
    Index steps_taken = 0;
    /// Accumulated innovation W after each accepted step.
    std::vector<double> innovation_path;
    /// Ito-Taylor schemes: trace drift before renormalisation. Positive map:
    /// residual after normalisation (its raw trace is 1 + O(dY) by design).
    double last_trace_error = 0.0;
    /// Number of eigenvalue-floor repairs applied so far.
    Index positivity_repairs = 0;

    explicit ConditionalState(DensityMatrix rho0, double t0 = 0.0) : rho(std::move(rho0)), time(t0) {}

    double innovation() const noexcept { return innovation_path.empty() ? 0.0 : innovation_path.back(); }
};

struct UnconditionalOptions {
    /// Store every `record_every`-th state (the initial state is always stored).
    Index record_every = 1;
    /// Eigenvalue check on stored states only.
    bool check_positivity = true;
};

/// Classical RK4 on the Lindblad equation of `model`; returns steps/record_every + 1 states.
std::vector<DensityMatrix> evolve_unconditional(const SLHTriple& model, const DensityMatrix& rho0, double dt,
                                                Index steps, const UnconditionalOptions& options = {});
std::vector<DensityMatrix> evolve_unconditional(const CompiledGenerator& gen, const DensityMatrix& rho0, double dt,
                                                Index steps, const UnconditionalOptions& options = {});

/// One homodyne-conditioned step driven by the record increment dY.
/// The innovation dW = dY - tr[(L + L^dag) rho] dt is appended to the path.
ConditionalState sme_step(const ConditionalState& state, double dY, const SLHTriple& model, const SMEConfig& config);
void sme_step_inplace(ConditionalState& state, double dY, const CompiledGenerator& gen, const SMEConfig& config);

DensityMatrix conditional_principal_state(const ConditionalState& state);
Complex filter_expectation(const ConditionalState& state, const Operator& x);

/// Floor eigenvalues in [-1e-6, -1e-9) to zero and renormalise; throws
/// NumericalInstability below -1e-6. Returns true if a repair was applied.
bool enforce_positivity(CMatrix& rho, const char* where);

/// Largest top-level population across all slots.
double max_top_level_population(const CMatrix& rho, const HilbertLayout& layout);

/// Mixes (seed, stream) into a 64-bit engine seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

struct TrajectorySample {
    double t = 0.0;
    Eigen::Vector4d means = Eigen::Vector4d::Zero();   // Re<q_s>, Re<p_s>, Re<q_0>, Re<p_0>
    double trace_error = 0.0;
    double top_level_pop = 0.0;
    double innovation = 0.0;
};

using StepObserver = std::function<void(const ConditionalState&)>;

/// Runs config.steps SME steps. When `record` is empty the increments are
/// sampled under the filter's own statistics (dW ~ N(0, dt), stream
/// `trajectory` of config.seed); otherwise record[n] drives step n.
/// `observer` sees the initial state and every `sample_every`-th state.
std::vector<TrajectorySample> run_sme_trajectory(const CompiledGenerator& gen, const DensityMatrix& rho0,
                                                 const SMEConfig& config, std::uint64_t trajectory,
                                                 const std::vector<double>& record = {}, Index sample_every = 1,
                                                 const StepObserver& observer = {});

TrajectorySample sample_state(const CompiledGenerator& gen, const ConditionalState& state);

}  // namespace lornz
