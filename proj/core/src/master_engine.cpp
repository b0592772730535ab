#include "lornz/master_engine.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace lornz {

namespace {

constexpr Complex kI(0.0, 1.0);

// Trace drift a single Ito-Taylor step may show before it counts as unstable.
constexpr double kTraceDriftLimit = 1e-6;
constexpr double kPositivityHardLimit = -1e-6;

void hermitize(CMatrix& rho) {
    rho = (0.5 * (rho + rho.adjoint())).eval();
}

// out += L rho L^dag, with `scratch` as workspace.
void add_sandwich(const BandedOperator& l, const BandedOperator& l_adj, const CMatrix& rho, CMatrix& scratch,
                  CMatrix& out, Complex s = 1.0) {
    scratch.setZero(rho.rows(), rho.cols());
    l.add_left_product(rho, scratch, s);
    l_adj.add_right_product(scratch, out);
}

}  // namespace

std::string to_string(SMEScheme scheme) {
    switch (scheme) {
        case SMEScheme::EulerMaruyama: return "euler-maruyama";
        case SMEScheme::MilsteinDiagonal: return "milstein-diagonal";
        case SMEScheme::PositiveMap: return "positive-map";
    }
    return "unknown";
}

SMEScheme parse_sme_scheme(std::string_view name) {
    if (name == "euler-maruyama") return SMEScheme::EulerMaruyama;
    if (name == "milstein-diagonal") return SMEScheme::MilsteinDiagonal;
    if (name == "positive-map") return SMEScheme::PositiveMap;
    throw ValidationError("unknown SME scheme '" + std::string(name) +
                          "' (expected euler-maruyama, milstein-diagonal or positive-map)");
}

void SMEConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("SMEConfig: dt must be > 0");
    if (steps < 1) throw ValidationError("SMEConfig: steps must be >= 1");
    if (positivity_check_every < -1) throw ValidationError("SMEConfig: positivity_check_every must be >= -1");
    if (!renormalize && scheme == SMEScheme::PositiveMap) {
        throw ValidationError("SMEConfig: the positive-map scheme is normalised by construction; renormalize=false "
                              "applies to euler-maruyama and milstein-diagonal only");
    }
}

// ------------------------------------------------------------ CompiledGenerator

CompiledGenerator::CompiledGenerator(const SLHTriple& model, std::optional<std::size_t> measured)
    : layout_(model.layout()), measured_(measured) {
    const Index n = layout_.total_dim();
    CMatrix k = -kI * model.hamiltonian().matrix();
    for (std::size_t c = 0; c < model.couplings().size(); ++c) {
        const CMatrix& l = model.couplings()[c].matrix();
        k -= 0.5 * l.adjoint() * l;
        jumps_.push_back(BandedOperator::from_dense(l));
        jumps_adj_.push_back(jumps_.back().adjoint());
        if (!measured_ || *measured_ != c) {
            unmeasured_.push_back(jumps_.back());
            unmeasured_adj_.push_back(jumps_adj_.back());
        }
    }
    if (measured_ && *measured_ >= model.couplings().size()) {
        throw InvalidDimension("CompiledGenerator: measured channel " + std::to_string(*measured_) +
                               " out of range (model has " + std::to_string(model.couplings().size()) + ")");
    }
    effective_ = BandedOperator::from_dense(k);
    if (effective_.bands().empty()) effective_ = BandedOperator(n);
    effective_adj_ = effective_.adjoint();
    identity_ = BandedOperator::from_dense(CMatrix::Identity(n, n));
    if (measured_) {
        const CMatrix& l = model.couplings()[*measured_].matrix();
        measured_sq_ = BandedOperator::from_dense(l * l);
        if (measured_sq_.bands().empty()) measured_sq_ = BandedOperator(n);
    }

    for (const Operator& q : quadrature_operators(layout_)) quadratures_.push_back(BandedOperator::from_operator(q));
}

const BandedOperator& CompiledGenerator::measured_jump() const {
    if (!measured_) throw InvalidDimension("CompiledGenerator: model was compiled without a measured channel");
    return jumps_[*measured_];
}

const BandedOperator& CompiledGenerator::measured_square() const {
    measured_jump();
    return measured_sq_;
}

void CompiledGenerator::lindblad(const CMatrix& rho, CMatrix& out) const {
    out.setZero(rho.rows(), rho.cols());
    effective_.add_left_product(rho, out);
    effective_adj_.add_right_product(rho, out);
    CMatrix scratch;
    for (std::size_t c = 0; c < jumps_.size(); ++c) add_sandwich(jumps_[c], jumps_adj_[c], rho, scratch, out);
}

void CompiledGenerator::measurement_action(const CMatrix& rho, CMatrix& out) const {
    const BandedOperator& l = measured_jump();
    out.setZero(rho.rows(), rho.cols());
    l.add_left_product(rho, out);
    jumps_adj_[*measured_].add_right_product(rho, out);
}

double CompiledGenerator::measured_quadrature(const CMatrix& rho) const {
    return 2.0 * measured_jump().trace_product(rho).real();
}

Eigen::VectorXd CompiledGenerator::quadrature_means(const CMatrix& rho) const {
    Eigen::VectorXd out(static_cast<Index>(quadratures_.size()));
    for (std::size_t i = 0; i < quadratures_.size(); ++i) out(static_cast<Index>(i)) = quadratures_[i].trace_product(rho).real();
    return out;
}

// ------------------------------------------------------------------ helpers

bool enforce_positivity(CMatrix& rho, const char* where) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()));
    const double lowest = es.eigenvalues().minCoeff();
    if (lowest < kPositivityHardLimit) {
        throw NumericalInstability(std::string(where) + ": density matrix eigenvalue " + std::to_string(lowest) +
                                   " below -1e-6; reduce dt");
    }
    if (lowest >= tol::kPositivityFloor) return false;
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    rho = es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    rho /= rho.trace().real();
    return true;
}

double max_top_level_population(const CMatrix& rho, const HilbertLayout& layout) {
    double worst = 0.0;
    for (Index slot = 0; slot < layout.slots(); ++slot) {
        double pop = 0.0;
        for (Index i = 0; i < layout.total_dim(); ++i) {
            if (layout.levels(i)[static_cast<std::size_t>(slot)] == layout.dim(slot) - 1) pop += rho(i, i).real();
        }
        worst = std::max(worst, pop);
    }
    return worst;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    // SplitMix64 finaliser over a golden-ratio spaced sequence.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------- unconditional ME

std::vector<DensityMatrix> evolve_unconditional(const SLHTriple& model, const DensityMatrix& rho0, double dt,
                                                Index steps, const UnconditionalOptions& options) {
    return evolve_unconditional(CompiledGenerator(model), rho0, dt, steps, options);
}

std::vector<DensityMatrix> evolve_unconditional(const CompiledGenerator& gen, const DensityMatrix& rho0, double dt,
                                                Index steps, const UnconditionalOptions& options) {
    if (!(dt > 0.0)) throw ValidationError("evolve_unconditional: dt must be > 0");
    if (steps < 0) throw ValidationError("evolve_unconditional: steps must be >= 0");
    if (options.record_every < 1) throw ValidationError("evolve_unconditional: record_every must be >= 1");
    if (!(rho0.layout() == gen.layout())) throw LayoutMismatch("evolve_unconditional: state/model layout mismatch");

    std::vector<DensityMatrix> out;
    out.reserve(static_cast<std::size_t>(steps / options.record_every + 1));
    out.push_back(rho0);

    CMatrix rho = rho0.matrix();
    CMatrix k1, k2, k3, k4, tmp;
    for (Index n = 1; n <= steps; ++n) {
        gen.lindblad(rho, k1);
        tmp = rho + (0.5 * dt) * k1;
        gen.lindblad(tmp, k2);
        tmp = rho + (0.5 * dt) * k2;
        gen.lindblad(tmp, k3);
        tmp = rho + dt * k3;
        gen.lindblad(tmp, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (n % options.record_every == 0) {
            hermitize(rho);
            const double drift = std::abs(rho.trace().real() - 1.0);
            if (!std::isfinite(drift) || drift > kTraceDriftLimit) {
                throw NumericalInstability("evolve_unconditional: trace drift " + std::to_string(drift) +
                                           " at step " + std::to_string(n) + "; reduce dt");
            }
            if (options.check_positivity) enforce_positivity(rho, "evolve_unconditional");
            out.push_back(DensityMatrix::trusted(gen.layout(), rho));
        }
    }
    return out;
}

// ---------------------------------------------------------------------- SME

void sme_step_inplace(ConditionalState& state, double dY, const CompiledGenerator& gen, const SMEConfig& config) {
    const double dt = config.dt;
    const CMatrix& rho = state.rho.matrix();
    CMatrix next;
    double dW = 0.0;

    if (!gen.has_measurement()) {
        // No monitored channel: the record carries no information and the step is a plain ME step.
        CMatrix d;
        gen.lindblad(rho, d);
        next = rho + dt * d;
        dW = dY;
    } else {
        const double m = gen.measured_quadrature(rho);
        dW = dY - m * dt;
        const BandedOperator& l = gen.measured_jump();

        if (config.scheme == SMEScheme::PositiveMap) {
            // M = I + K dt + L dY + L^2 (dY^2 - dt)/2
            BandedOperator step = gen.identity()
                                      .plus(gen.effective(), dt)
                                      .plus(l, dY)
                                      .plus(gen.measured_square(), 0.5 * (dY * dY - dt));
            CMatrix scratch;
            next.setZero(rho.rows(), rho.cols());
            add_sandwich(step, step.adjoint(), rho, scratch, next);
            const auto& jumps = gen.unmeasured_jumps();
            const auto& adjoints = gen.unmeasured_adjoints();
            for (std::size_t c = 0; c < jumps.size(); ++c) add_sandwich(jumps[c], adjoints[c], rho, scratch, next, dt);
        } else {
            CMatrix d, h;
            gen.lindblad(rho, d);
            gen.measurement_action(rho, h);
            h -= m * rho;
            next = rho + dt * d + dW * h;
            if (config.scheme == SMEScheme::MilsteinDiagonal) {
                // Directional derivative of H(rho) = L rho + rho L^dag - tr[(L+L^dag) rho] rho along H(rho).
                CMatrix dh;
                gen.measurement_action(h, dh);
                const double mh = gen.measured_quadrature(h);
                dh -= mh * rho + m * h;
                next += (0.5 * (dW * dW - dt)) * dh;
            }
        }
    }

    hermitize(next);
    const double tr = next.trace().real();
    if (!std::isfinite(tr) || tr <= 0.0) {
        throw NumericalInstability("sme_step: non-finite or non-positive trace at t=" + std::to_string(state.time) +
                                   "; reduce dt");
    }
    if (config.scheme == SMEScheme::PositiveMap && gen.has_measurement()) {
        next /= tr;
        state.last_trace_error = std::abs(next.trace().real() - 1.0);
    } else {
        const double drift = std::abs(tr - 1.0);
        if (drift > kTraceDriftLimit) {
            throw NumericalInstability("sme_step: trace drift " + std::to_string(drift) + " at t=" +
                                       std::to_string(state.time) + " exceeds 1e-6; reduce dt");
        }
        state.last_trace_error = drift;
        if (config.renormalize) next /= tr;
    }

    ++state.steps_taken;
    const Index cadence = config.positivity_cadence();
    if (cadence > 0 && state.steps_taken % cadence == 0) {
        if (enforce_positivity(next, "sme_step")) ++state.positivity_repairs;
    }
    state.rho = DensityMatrix::trusted(gen.layout(), std::move(next));
    state.time += dt;
    state.innovation_path.push_back(state.innovation() + dW);
}

ConditionalState sme_step(const ConditionalState& state, double dY, const SLHTriple& model, const SMEConfig& config) {
    config.validate();
    std::optional<std::size_t> measured;
    if (config.measured_channel < model.couplings().size()) measured = config.measured_channel;
    const CompiledGenerator gen(model, measured);
    ConditionalState next = state;
    sme_step_inplace(next, dY, gen, config);
    return next;
}

DensityMatrix conditional_principal_state(const ConditionalState& state) { return partial_trace(state.rho, 0); }

Complex filter_expectation(const ConditionalState& state, const Operator& x) { return expectation(state.rho, x); }

TrajectorySample sample_state(const CompiledGenerator& gen, const ConditionalState& state) {
    TrajectorySample s;
    s.t = state.time;
    const Eigen::VectorXd q = gen.quadrature_means(state.rho.matrix());
    for (Index i = 0; i < std::min<Index>(4, q.size()); ++i) s.means(i) = q(i);
    s.trace_error = state.last_trace_error;
    s.top_level_pop = max_top_level_population(state.rho.matrix(), gen.layout());
    s.innovation = state.innovation();
    return s;
}

std::vector<TrajectorySample> run_sme_trajectory(const CompiledGenerator& gen, const DensityMatrix& rho0,
                                                 const SMEConfig& config, std::uint64_t trajectory,
                                                 const std::vector<double>& record, Index sample_every,
                                                 const StepObserver& observer) {
    config.validate();
    if (sample_every < 1) throw ValidationError("run_sme_trajectory: sample_every must be >= 1");
    if (!record.empty() && static_cast<Index>(record.size()) < config.steps) {
        throw ValidationError("run_sme_trajectory: record has " + std::to_string(record.size()) +
                              " increments, need " + std::to_string(config.steps));
    }
    if (record.empty() && !gen.has_measurement()) {
        throw ValidationError("run_sme_trajectory: sampling a record needs a measured channel");
    }

    std::mt19937_64 rng(stream_seed(config.seed, trajectory));
    std::normal_distribution<double> normal(0.0, std::sqrt(config.dt));

    ConditionalState state(rho0);
    state.innovation_path.reserve(static_cast<std::size_t>(config.steps));
    std::vector<TrajectorySample> samples;
    samples.reserve(static_cast<std::size_t>(config.steps / sample_every + 1));
    samples.push_back(sample_state(gen, state));
    if (observer) observer(state);

    for (Index n = 0; n < config.steps; ++n) {
        double dY;
        if (record.empty()) {
            dY = gen.measured_quadrature(state.rho.matrix()) * config.dt + normal(rng);
        } else {
            dY = record[static_cast<std::size_t>(n)];
        }
        sme_step_inplace(state, dY, gen, config);
        if ((n + 1) % sample_every == 0) {
            samples.push_back(sample_state(gen, state));
            if (observer) observer(state);
        }
    }
    return samples;
}

}  // namespace lornz
