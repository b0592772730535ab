#include "lornz/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>

#include <unsupported/Eigen/FFT>

#include "lornz/acceptance.hpp"
#include "lornz/io.hpp"
#include "lornz/spectra.hpp"

namespace lornz {

namespace {

namespace fs = std::filesystem;

constexpr Index kKalmanChunk = 25;
constexpr Index kPeriodogramChunk = 10;

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

Provenance base_provenance(const ExperimentConfig& cfg) {
    Provenance p;
    p.experiment = to_string(cfg.experiment);
    p.params = cfg.params;
    p.seed = cfg.seed;
    p.metadata["frame"] = to_string(cfg.params.frame);
    p.metadata["frame_note"] = cfg.params.frame == Frame::Rotating
                                   ? "frequencies shifted by -omega_s; principal at rest, ancilla at -detuning"
                                   : "absolute frequencies";
    p.metadata["time_unit"] = cfg.time_unit;
    p.metadata["time_axis"] = "dimensionless rate units";
    p.metadata["record"] = "scalar homodyne record dY = sqrt(2 gamma_1) q_s dt + dQ (amplitude quadrature only)";
    p.metadata["normalisation"] = "raw means; no rescaling applied";
    p.metadata["preset"] = cfg.preset.empty() ? "(none)" : cfg.preset;
    p.tolerances["hermitian"] = tol::kHermitian;
    p.tolerances["trace"] = tol::kTrace;
    p.tolerances["positivity_floor"] = tol::kPositivityFloor;
    p.tolerances["top_level_warning"] = tol::kTopLevelWarning;
    return p;
}

void emit_csv(const ExperimentConfig& cfg, ArtifactSet& art, const std::string& name, const CsvTable& table,
              Provenance prov) {
    const fs::path path = fs::path(cfg.output_dir) / name;
    write_csv(path, table);
    write_sidecar(path, prov);
    art.files.push_back(name);
}

void emit_report(const ExperimentConfig& cfg, ArtifactSet& art, const std::string& name, Provenance prov) {
    prov.checks = art.checks;
    prov.metrics = art.metrics;
    write_report(fs::path(cfg.output_dir) / name, prov, art.files);
    art.files.push_back(name);
}

ModelParams swept(const ModelParams& base, SweepKind kind, double value) {
    ModelParams p = base;
    switch (kind) {
        case SweepKind::Kappa: p.kappa = value; break;
        case SweepKind::Detuning: p.omega_0 = p.omega_s - value; break;
        case SweepKind::Gamma0: p.gamma_0 = value; break;
        case SweepKind::None: break;
    }
    return p;
}

const char* sweep_name(SweepKind kind) {
    switch (kind) {
        case SweepKind::Kappa: return "kappa";
        case SweepKind::Detuning: return "detuning";
        case SweepKind::Gamma0: return "gamma_0";
        case SweepKind::None: break;
    }
    return "none";
}

Index steps_for(double t_end, double dt) { return std::max<Index>(1, static_cast<Index>(std::llround(t_end / dt))); }

// ------------------------------------------------------------- experiments

void run_fig4(const ExperimentConfig& cfg, int workers, ArtifactSet& art) {
    const Index steps = steps_for(cfg.t_end, cfg.dt);
    const KalmanEnsemble ens =
        kalman_ensemble(cfg.params, cfg.m0, cfg.initial_covariance(), cfg.dt, steps, cfg.ensemble, cfg.seed, workers);

    CsvTable table;
    table.header = {"t", "m_qs", "m_ps", "m_q0", "m_p0", "kalman_qs", "kalman_qs_se", "kalman_ps", "kalman_ps_se"};
    double worst_ratio = 0.0;
    bool within = true;
    std::vector<double> qs;
    for (std::size_t n = 0; n < ens.t.size(); ++n) {
        const Eigen::Vector4d& m = ens.unconditional[n];
        table.add_row({ens.t[n], m(0), m(1), m(2), m(3), ens.mean[n](0), ens.std_error[n](0), ens.mean[n](1),
                       ens.std_error[n](1)});
        const double dev = std::abs(ens.mean[n](0) - m(0));
        if (dev > 3.0 * ens.std_error[n](0) + 1e-12) within = false;
        if (ens.std_error[n](0) > 0.0) worst_ratio = std::max(worst_ratio, dev / ens.std_error[n](0));
        qs.push_back(m(0));
    }
    const int beats = count_sign_changes(qs);
    art.checks["kalman_mean_within_3se"] = within;
    art.checks["envelope_beats_at_least_2"] = beats >= 2;
    art.metrics["max_deviation_over_se"] = worst_ratio;
    art.metrics["sign_changes"] = beats;
    art.metrics["records"] = static_cast<double>(ens.records);

    Provenance prov = base_provenance(cfg);
    prov.metadata["initial_state"] = "principal displaced thermal, nbar = " + fmt_value(cfg.initial_nbar) +
                                     "; ancilla vacuum; x_hat(0) = m(0)";
    prov.tolerances["mean_vs_unconditional_in_se"] = 3.0;
    emit_csv(cfg, art, "fig4_means.csv", table, prov);
    emit_report(cfg, art, "fig4_report.json", prov);
}

void run_sweep(const ExperimentConfig& cfg, ArtifactSet& art) {
    const std::vector<double> grid = frequency_grid(cfg.grid_points, cfg.omega_min, cfg.omega_max);
    const std::string label = to_string(cfg.experiment);
    const char* name = sweep_name(cfg.sweep_kind);

    CsvTable summary;
    summary.header = {name, "g2_at_zero", "argmax_omega", "peak", "fwhm"};
    std::vector<double> at_zero, peak, where, width;
    for (double v : cfg.sweep) {
        const ModelParams p = swept(cfg.params, cfg.sweep_kind, v);
        const SpectrumCurve c = g2_curve(p, grid);
        CsvTable t;
        t.header = {"omega_tilde", "g2_psd"};
        for (std::size_t i = 0; i < grid.size(); ++i) t.add_row({grid[i], c.values[i]});
        Provenance prov = base_provenance(cfg);
        prov.params = p;
        prov.metadata["sweep"] = std::string(name) + " = " + fmt_value(v);
        emit_csv(cfg, art, label + "_" + name + "_" + fmt_value(v) + ".csv", t, prov);

        const std::size_t k = argmax(c);
        double w = std::nan("");
        try {
            w = fwhm(c);
        } catch (const ValidationError&) {
        }
        at_zero.push_back(g2_psd(0.0, p));
        peak.push_back(c.values[k]);
        where.push_back(grid[k]);
        width.push_back(w);
        summary.add_row({v, at_zero.back(), where.back(), peak.back(), w});
    }

    auto strictly = [](const std::vector<double>& x, auto cmp) {
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!cmp(x[i], x[i - 1])) return false;
        return true;
    };
    if (cfg.sweep_kind == SweepKind::Kappa) {
        art.checks["g2_at_zero_decreasing"] = strictly(at_zero, std::less<>());
    } else if (cfg.sweep_kind == SweepKind::Detuning) {
        std::vector<double> dist;
        for (double w : where) dist.push_back(std::abs(w));
        art.checks["argmax_moves_away"] = strictly(dist, std::greater<>());
        art.checks["peak_decreasing"] = strictly(peak, std::less<>());
    } else if (cfg.sweep_kind == SweepKind::Gamma0) {
        art.checks["fwhm_increasing"] = strictly(width, std::greater<>());
    }

    Provenance prov = base_provenance(cfg);
    emit_csv(cfg, art, label + "_summary.csv", summary, prov);
    emit_report(cfg, art, label + "_report.json", prov);
}

void run_sme_demo(const ExperimentConfig& cfg, int workers, ArtifactSet& art) {
    const SLHTriple model = probed_slh(cfg.params, cfg.dims);
    const CompiledGenerator gen(model, kProbeChannel);
    const DensityMatrix rho0 = gaussian_initial_state(cfg.dims, cfg.m0, cfg.initial_nbar);
    const Index stride = std::max<Index>(1, (cfg.sme.steps + 1999) / 2000);

    std::vector<std::vector<TrajectorySample>> runs(static_cast<std::size_t>(cfg.ensemble));
    parallel_for(cfg.ensemble, [&](Index j) {
        runs[static_cast<std::size_t>(j)] = run_sme_trajectory(gen, rho0, cfg.sme, static_cast<std::uint64_t>(j), {}, stride);
    }, workers);

    double worst_top = 0.0, worst_trace = 0.0;
    for (std::size_t j = 0; j < runs.size(); ++j) {
        CsvTable t;
        t.header = {"t", "q_s", "p_s", "q_0", "p_0", "trace_error", "top_level_pop", "W"};
        for (const TrajectorySample& s : runs[j]) {
            t.add_row({s.t, s.means(0), s.means(1), s.means(2), s.means(3), s.trace_error, s.top_level_pop, s.innovation});
            worst_top = std::max(worst_top, s.top_level_pop);
            worst_trace = std::max(worst_trace, s.trace_error);
        }
        Provenance prov = base_provenance(cfg);
        prov.metadata["scheme"] = to_string(cfg.sme.scheme);
        prov.metadata["trajectory"] = std::to_string(j);
        prov.metrics["dt"] = cfg.sme.dt;
        char name[64];
        std::snprintf(name, sizeof name, "sme_trajectory_%04zu.csv", j);
        emit_csv(cfg, art, name, t, prov);
    }

    const auto me = evolve_unconditional(CompiledGenerator(model), rho0, cfg.sme.dt, cfg.sme.steps, {stride, true});
    CsvTable u;
    u.header = {"t", "q_s", "p_s", "q_0", "p_0"};
    for (std::size_t n = 0; n < me.size(); ++n) {
        const Eigen::VectorXd q = gen.quadrature_means(me[n].matrix());
        u.add_row({static_cast<double>(n * static_cast<std::size_t>(stride)) * cfg.sme.dt, q(0), q(1), q(2), q(3)});
    }
    emit_csv(cfg, art, "sme_unconditional.csv", u, base_provenance(cfg));

    if (worst_top > tol::kTopLevelWarning) {
        std::cerr << "warning: top-level population " << worst_top << " exceeds " << tol::kTopLevelWarning
                  << "; increase principal_dim/ancilla_dim\n";
    }
    art.checks["truncation_ok"] = worst_top <= tol::kTopLevelWarning;
    art.metrics["max_top_level_pop"] = worst_top;
    art.metrics["max_trace_error"] = worst_trace;
    emit_report(cfg, art, "sme_report.json", base_provenance(cfg));
}

void run_simulate_or_filter(const ExperimentConfig& cfg, bool filter, ArtifactSet& art) {
    const QuadratureModel q = quadrature_realization(cfg.params);
    const KalmanMatrices km = kalman_matrices(q);
    const Index steps = steps_for(cfg.t_end, cfg.dt);
    const Eigen::Matrix4d V0 = cfg.initial_covariance();
    GainSchedule schedule;
    if (filter) schedule = riccati_trajectory(q, km, V0, cfg.dt, steps);

    for (Index j = 0; j < cfg.ensemble; ++j) {
        RecordConfig rc;
        rc.dt = cfg.dt;
        rc.steps = steps;
        rc.seed = cfg.seed;
        rc.stream = static_cast<std::uint64_t>(j);
        rc.initial_covariance = V0;
        const MeasurementRecord rec = simulate_record(q, cfg.m0, rc);

        Provenance prov = base_provenance(cfg);
        prov.metadata["stream"] = std::to_string(j);
        char name[64];
        {
            CsvTable t;
            t.header = {"t", "dY"};
            for (Index n = 0; n < steps; ++n) t.add_row({rec.t_grid[static_cast<std::size_t>(n)], rec.dY[static_cast<std::size_t>(n)]});
            std::snprintf(name, sizeof name, "record_%04lld.csv", static_cast<long long>(j));
            emit_csv(cfg, art, name, t, prov);
            CsvTable s;
            s.header = {"t", "q_s", "p_s", "q_0", "p_0"};
            for (std::size_t n = 0; n < rec.true_path.size(); ++n) {
                const auto& x = rec.true_path[n];
                s.add_row({rec.t_grid[n], x(0), x(1), x(2), x(3)});
            }
            std::snprintf(name, sizeof name, "record_%04lld_state.csv", static_cast<long long>(j));
            emit_csv(cfg, art, name, s, prov);
        }
        if (filter) {
            const FilterOutput out = kalman_filter(q, km, rec, cfg.m0, schedule);
            CsvTable t;
            t.header = {"t", "xhat_qs", "xhat_ps", "xhat_q0", "xhat_p0", "dW"};
            for (std::size_t n = 0; n < out.x_hat.size(); ++n) {
                const auto& x = out.x_hat[n];
                t.add_row({rec.t_grid[n], x(0), x(1), x(2), x(3), n == 0 ? 0.0 : out.innovations[n - 1]});
            }
            std::snprintf(name, sizeof name, "filter_%04lld.csv", static_cast<long long>(j));
            emit_csv(cfg, art, name, t, prov);
        }
    }

    if (filter) {
        CsvTable cov;
        cov.header = {"t", "V00", "V01", "V02", "V03", "V11", "V12", "V13", "V22", "V23", "V33"};
        for (std::size_t n = 0; n < schedule.V.size(); ++n) {
            const auto& V = schedule.V[n];
            cov.add_row({static_cast<double>(n) * cfg.dt, V(0, 0), V(0, 1), V(0, 2), V(0, 3), V(1, 1), V(1, 2), V(1, 3),
                         V(2, 2), V(2, 3), V(3, 3)});
        }
        emit_csv(cfg, art, "covariance.csv", cov, base_provenance(cfg));
        const Eigen::Matrix4d Vinf = riccati_stationary(q, km);
        art.metrics["stationary_residual"] = riccati_residual(q, km, Vinf);
        art.metrics["final_covariance_gap"] = (schedule.V.back() - Vinf).cwiseAbs().maxCoeff();
        art.checks["stationary_residual_below_1e-10"] = art.metrics["stationary_residual"] < 1e-10;
    }
    emit_report(cfg, art, filter ? "filter_report.json" : "simulate_report.json", base_provenance(cfg));
}

void run_spectra(const ExperimentConfig& cfg, ArtifactSet& art) {
    const std::vector<double> grid = frequency_grid(cfg.grid_points, cfg.omega_min, cfg.omega_max);
    CsvTable t;
    t.header = {"omega_tilde", "g1_psd", "g2_psd", "output_psd", "re_g1", "im_g1", "re_g2", "im_g2"};
    double worst = 0.0;
    for (double w : grid) {
        const TransferPair g = transfer_functions(w, cfg.params);
        const double s = output_psd(w, cfg.params);
        worst = std::max(worst, std::abs(s - 0.25));
        t.add_row({w, g1_psd(w, cfg.params), g2_psd(w, cfg.params), s, g.g1.real(), g.g1.imag(), g.g2.real(), g.g2.imag()});
    }
    emit_csv(cfg, art, "spectra.csv", t, base_provenance(cfg));

    CsvTable lor;
    lor.header = {"omega", "lorentzian_psd"};
    for (double w : frequency_grid(cfg.grid_points, cfg.params.omega_0 + cfg.omega_min, cfg.params.omega_0 + cfg.omega_max)) {
        lor.add_row({w, lorentzian_psd(w, cfg.params.omega_0, cfg.params.gamma_0)});
    }
    emit_csv(cfg, art, "lorentzian.csv", lor, base_provenance(cfg));

    CsvTable ker;
    ker.header = {"tau", "re_kernel", "im_kernel"};
    const double span = 20.0 / cfg.params.gamma_0;
    for (double tau : frequency_grid(cfg.grid_points, -span, span)) {
        const Complex m = memory_kernel(tau, cfg.params.frame_omega_0(), cfg.params.gamma_0);
        ker.add_row({tau, m.real(), m.imag()});
    }
    emit_csv(cfg, art, "memory_kernel.csv", ker, base_provenance(cfg));

    art.metrics["max_output_psd_deviation"] = worst;
    art.checks["output_psd_flat"] = worst <= 1e-12;
    emit_report(cfg, art, "spectra_report.json", base_provenance(cfg));
}

}  // namespace

int worker_count() {
    if (const char* env = std::getenv("LORNZ_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(Index n, const std::function<void(Index)>& body, int workers) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<Index>(n, 1))));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max<Index>(n, 0)));
    std::atomic<Index> next{0};
    auto worker = [&] {
        for (Index i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

KalmanEnsemble kalman_ensemble(const ModelParams& params, const Eigen::Vector4d& m0, const Eigen::Matrix4d& V0,
                               double dt, Index steps, Index records, std::uint64_t seed, int workers) {
    if (records < 2) throw ValidationError("kalman_ensemble: need at least 2 records");
    const QuadratureModel q = quadrature_realization(params);
    const KalmanMatrices km = kalman_matrices(q);
    const GainSchedule schedule = riccati_trajectory(q, km, V0, dt, steps);
    const std::size_t len = static_cast<std::size_t>(steps + 1);

    struct Partial {
        std::vector<Eigen::Vector4d> sum, sum_sq;
        std::vector<double> w_sum, w_sum_sq;
        double dw_sum = 0.0, dw_sum_sq = 0.0;
    };
    const Index chunks = (records + kKalmanChunk - 1) / kKalmanChunk;
    std::vector<Partial> partials(static_cast<std::size_t>(chunks));

    parallel_for(chunks, [&](Index c) {
        Partial& p = partials[static_cast<std::size_t>(c)];
        p.sum.assign(len, Eigen::Vector4d::Zero());
        p.sum_sq.assign(len, Eigen::Vector4d::Zero());
        p.w_sum.assign(len, 0.0);
        p.w_sum_sq.assign(len, 0.0);
        for (Index j = c * kKalmanChunk; j < std::min(records, (c + 1) * kKalmanChunk); ++j) {
            RecordConfig rc;
            rc.dt = dt;
            rc.steps = steps;
            rc.seed = seed;
            rc.stream = static_cast<std::uint64_t>(j);
            rc.initial_covariance = V0;
            const MeasurementRecord rec = simulate_record(q, m0, rc);
            const FilterOutput out = kalman_filter(q, km, rec, m0, schedule);
            double w = 0.0;
            for (std::size_t n = 0; n < len; ++n) {
                p.sum[n] += out.x_hat[n];
                p.sum_sq[n] += out.x_hat[n].cwiseAbs2();
                if (n > 0) {
                    const double dW = out.innovations[n - 1];
                    w += dW;
                    p.dw_sum += dW;
                    p.dw_sum_sq += dW * dW;
                }
                p.w_sum[n] += w;
                p.w_sum_sq[n] += w * w;
            }
        }
    }, workers);

    KalmanEnsemble ens;
    ens.records = records;
    ens.t = uniform_grid(dt, steps);
    ens.unconditional = propagate_mean(q, m0, ens.t);
    const double n_rec = static_cast<double>(records);
    ens.mean.assign(len, Eigen::Vector4d::Zero());
    ens.std_error.assign(len, Eigen::Vector4d::Zero());
    ens.innovation_variance.assign(len, 0.0);
    std::vector<Eigen::Vector4d> sq(len, Eigen::Vector4d::Zero());
    std::vector<double> ws(len, 0.0), wsq(len, 0.0);
    double dw = 0.0, dw2 = 0.0;
    for (const Partial& p : partials) {
        for (std::size_t n = 0; n < len; ++n) {
            ens.mean[n] += p.sum[n];
            sq[n] += p.sum_sq[n];
            ws[n] += p.w_sum[n];
            wsq[n] += p.w_sum_sq[n];
        }
        dw += p.dw_sum;
        dw2 += p.dw_sum_sq;
    }
    for (std::size_t n = 0; n < len; ++n) {
        ens.mean[n] /= n_rec;
        const Eigen::Vector4d var = ((sq[n] - n_rec * ens.mean[n].cwiseAbs2()) / (n_rec - 1.0)).cwiseMax(0.0);
        ens.std_error[n] = (var / n_rec).cwiseSqrt();
        const double wm = ws[n] / n_rec;
        ens.innovation_variance[n] = std::max(0.0, (wsq[n] - n_rec * wm * wm) / (n_rec - 1.0));
    }
    const double count = n_rec * static_cast<double>(steps);
    ens.innovation_mean = dw / count;
    const double var = std::max(0.0, (dw2 - count * ens.innovation_mean * ens.innovation_mean) / (count - 1.0));
    ens.innovation_mean_stderr = std::sqrt(var / count);
    return ens;
}

SmeEnsemble sme_ensemble(const SLHTriple& model, const DensityMatrix& rho0, const SMEConfig& config,
                         Index trajectories, const std::vector<double>& times, Index batches, int workers) {
    config.validate();
    if (batches < 2 || trajectories % batches != 0) {
        throw ValidationError("sme_ensemble: trajectories must split into >= 2 equal batches");
    }
    std::vector<Index> at_step;
    for (double t : times) {
        const Index k = static_cast<Index>(std::llround(t / config.dt));
        if (std::abs(static_cast<double>(k) * config.dt - t) > 1e-9 || k < 1 || k > config.steps) {
            throw ValidationError("sme_ensemble: sample time " + std::to_string(t) + " is not on the step grid");
        }
        at_step.push_back(k);
    }

    const CompiledGenerator gen(model, config.measured_channel);
    const Index dim = gen.dim();
    const Index per_batch = trajectories / batches;

    struct Batch {
        std::vector<CMatrix> sum;
        Index repairs = 0;
        double top = 0.0;
    };
    std::vector<Batch> results(static_cast<std::size_t>(batches));
    parallel_for(batches, [&](Index b) {
        Batch& out = results[static_cast<std::size_t>(b)];
        out.sum.assign(times.size(), CMatrix::Zero(dim, dim));
        for (Index j = b * per_batch; j < (b + 1) * per_batch; ++j) {
            Index repairs = 0;
            run_sme_trajectory(gen, rho0, config, static_cast<std::uint64_t>(j), {}, 1,
                               [&](const ConditionalState& s) {
                                   repairs = s.positivity_repairs;
                                   for (std::size_t k = 0; k < at_step.size(); ++k) {
                                       if (s.steps_taken == at_step[k]) {
                                           out.sum[k] += s.rho.matrix();
                                           out.top = std::max(out.top, max_top_level_population(s.rho.matrix(), s.rho.layout()));
                                       }
                                   }
                               });
            out.repairs += repairs;
        }
    }, workers);

    SmeEnsemble ens;
    ens.times = times;
    ens.trajectories = trajectories;
    Index g = 0;
    for (Index k : at_step) g = std::gcd(g, k);
    const auto me = evolve_unconditional(CompiledGenerator(model), rho0, config.dt, at_step.back(), {g, true});
    for (std::size_t k = 0; k < times.size(); ++k) {
        CMatrix total = CMatrix::Zero(dim, dim);
        for (const Batch& b : results) total += b.sum[k];
        total /= static_cast<double>(trajectories);
        const DensityMatrix mean = DensityMatrix::trusted(gen.layout(), total);
        const DensityMatrix& ref = me[static_cast<std::size_t>(at_step[k] / g)];
        double spread = 0.0;
        for (const Batch& b : results) {
            const double d = trace_distance(DensityMatrix::trusted(gen.layout(), b.sum[k] / static_cast<double>(per_batch)), mean);
            spread += d * d;
        }
        ens.mean.push_back(mean);
        ens.reference.push_back(ref);
        ens.trace_distance.push_back(trace_distance(mean, ref));
        ens.mc_error.push_back(std::sqrt(spread / static_cast<double>(batches * (batches - 1))));
    }
    for (const Batch& b : results) {
        ens.positivity_repairs += b.repairs;
        ens.max_top_level_pop = std::max(ens.max_top_level_pop, b.top);
    }
    return ens;
}

Periodogram output_periodogram(const ModelParams& params, double dt, int log2_steps, Index records,
                               Index band_bins, double omega_max, std::uint64_t seed, int workers) {
    if (log2_steps < 6 || log2_steps > 22) throw ValidationError("output_periodogram: log2_steps must be in [6, 22]");
    if (records < 1 || band_bins < 1) throw ValidationError("output_periodogram: records and band_bins must be >= 1");
    const QuadratureModel q = quadrature_realization(params);
    const Index n = Index{1} << log2_steps;
    const double T = static_cast<double>(n) * dt;
    const Index chunks = (records + kPeriodogramChunk - 1) / kPeriodogramChunk;
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(chunks));

    parallel_for(chunks, [&](Index c) {
        auto& acc = partial[static_cast<std::size_t>(c)];
        acc.assign(static_cast<std::size_t>(n), 0.0);
        Eigen::FFT<double> fft;
        std::vector<double> y(static_cast<std::size_t>(n));
        std::vector<Complex> spec;
        for (Index j = c * kPeriodogramChunk; j < std::min(records, (c + 1) * kPeriodogramChunk); ++j) {
            RecordConfig rc;
            rc.dt = dt;
            rc.steps = n;
            rc.seed = seed;
            rc.stream = static_cast<std::uint64_t>(j);
            rc.initial_covariance = 0.5 * Eigen::Matrix4d::Identity();
            const MeasurementRecord rec = simulate_record(q, Eigen::Vector4d::Zero(), rc);
            for (Index k = 0; k < n; ++k) y[static_cast<std::size_t>(k)] = 0.5 * rec.dY[static_cast<std::size_t>(k)];
            fft.fwd(spec, y);
            // Eigen returns the half spectrum for real input unless told otherwise; rebuild the full set.
            for (Index k = 0; k < n; ++k) {
                const Complex v = k < static_cast<Index>(spec.size()) ? spec[static_cast<std::size_t>(k)]
                                                                     : std::conj(spec[static_cast<std::size_t>(n - k)]);
                acc[static_cast<std::size_t>(k)] += std::norm(v) / T;
            }
        }
    }, workers);

    std::vector<double> total(static_cast<std::size_t>(n), 0.0);
    for (const auto& acc : partial)
        for (Index k = 0; k < n; ++k) total[static_cast<std::size_t>(k)] += acc[static_cast<std::size_t>(k)];

    // Signed frequencies in increasing order, restricted to the band.
    std::vector<std::pair<double, double>> pts;
    for (Index k = 0; k < n; ++k) {
        const Index s = k < n / 2 ? k : k - n;
        const double w = 2.0 * M_PI * static_cast<double>(s) / T;
        if (std::abs(w) <= omega_max) pts.emplace_back(w, total[static_cast<std::size_t>(k)] / static_cast<double>(records));
    }
    std::sort(pts.begin(), pts.end());

    Periodogram out;
    out.records = records;
    for (std::size_t i = 0; i + static_cast<std::size_t>(band_bins) <= pts.size(); i += static_cast<std::size_t>(band_bins)) {
        double w = 0.0, v = 0.0;
        for (Index b = 0; b < band_bins; ++b) {
            w += pts[i + static_cast<std::size_t>(b)].first;
            v += pts[i + static_cast<std::size_t>(b)].second;
        }
        out.omega.push_back(w / static_cast<double>(band_bins));
        out.psd.push_back(v / static_cast<double>(band_bins));
    }
    return out;
}

int count_sign_changes(const std::vector<double>& values) {
    int changes = 0;
    int last = 0;
    for (double v : values) {
        const int s = (v > 0.0) - (v < 0.0);
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

DensityMatrix gaussian_initial_state(const ModeDims& dims, const Eigen::Vector4d& m0, double nbar) {
    const Complex alpha_s(m0(0) * M_SQRT1_2, m0(1) * M_SQRT1_2);
    const Complex alpha_0(m0(2) * M_SQRT1_2, m0(3) * M_SQRT1_2);
    return tensor_product(displaced_thermal_state(dims.principal, alpha_s, nbar),
                          displaced_thermal_state(dims.ancilla, alpha_0, 0.0));
}

bool ArtifactSet::all_passed() const {
    for (const auto& [name, ok] : checks)
        if (!ok) return false;
    return true;
}

ArtifactSet run(const ExperimentConfig& config, int workers) {
    config.validate();
    fs::create_directories(config.output_dir);
    ArtifactSet art;
    switch (config.experiment) {
        case ExperimentId::Fig4: run_fig4(config, workers, art); break;
        case ExperimentId::FigKappa:
        case ExperimentId::FigDelta:
        case ExperimentId::FigGamma: run_sweep(config, art); break;
        case ExperimentId::SmeDemo: run_sme_demo(config, workers, art); break;
        case ExperimentId::Simulate: run_simulate_or_filter(config, false, art); break;
        case ExperimentId::Filter: run_simulate_or_filter(config, true, art); break;
        case ExperimentId::Spectra: run_spectra(config, art); break;
        case ExperimentId::Acceptance: {
            AcceptanceOptions opts;
            opts.seed = config.seed;
            opts.workers = workers;
            const auto results = run_acceptance(opts, [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
            write_acceptance_report(fs::path(config.output_dir) / "acceptance_report.json", results, opts);
            art.files.push_back("acceptance_report.json");
            for (const auto& r : results) art.checks["criterion_" + std::to_string(r.id)] = r.passed;
            break;
        }
    }
    return art;
}

}  // namespace lornz
