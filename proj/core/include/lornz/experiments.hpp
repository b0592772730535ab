#pragma once

// Experiment drivers behind the CLI and the acceptance suite. Ensembles are
// split into fixed-size chunks that workers pick up in any order; chunk
// results are combined in index order, so outputs do not depend on the
// worker count.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lornz/config.hpp"
#include "lornz/gaussian_filter.hpp"
#include "lornz/master_engine.hpp"

namespace lornz {

/// LORNZ_WORKERS if set (>= 1), otherwise the hardware concurrency.
int worker_count();

/// Calls body(i) for i in [0, n) on `workers` threads. The exception thrown
/// for the smallest index is rethrown after all threads have joined.
void parallel_for(Index n, const std::function<void(Index)>& body, int workers);

struct KalmanEnsemble {
    std::vector<double> t;
    std::vector<Eigen::Vector4d> unconditional;   // expm(A t) m0
    std::vector<Eigen::Vector4d> mean;            // ensemble mean of x_hat
    std::vector<Eigen::Vector4d> std_error;       // pointwise standard error of that mean
    std::vector<double> innovation_variance;      // sample variance of W_t across records
    double innovation_mean = 0.0;                 // over every increment of every record
    double innovation_mean_stderr = 0.0;
    Index records = 0;
};

/// Simulates `records` records from N(m0, V0) and filters each with x_hat(0) = m0, V_hat(0) = V0.
KalmanEnsemble kalman_ensemble(const ModelParams& params, const Eigen::Vector4d& m0, const Eigen::Matrix4d& V0,
                               double dt, Index steps, Index records, std::uint64_t seed, int workers);

struct SmeEnsemble {
    std::vector<double> times;
    std::vector<DensityMatrix> mean;        // ensemble-averaged conditional state
    std::vector<DensityMatrix> reference;   // unconditional ME state
    std::vector<double> trace_distance;
    std::vector<double> mc_error;           // batch-means error of the trace distance
    Index trajectories = 0;
    Index positivity_repairs = 0;
    double max_top_level_pop = 0.0;
};

/// `trajectories` SME runs split into `batches` equal batches; `times` must lie on the dt grid.
SmeEnsemble sme_ensemble(const SLHTriple& model, const DensityMatrix& rho0, const SMEConfig& config,
                         Index trajectories, const std::vector<double>& times, Index batches, int workers);

struct Periodogram {
    std::vector<double> omega;       // band centres
    std::vector<double> psd;         // band-averaged periodogram of dY/2
    Index records = 0;
};

/// Stationary vacuum records (x0 ~ N(0, I/2)); periodogram of dY/2 averaged
/// over records and over `band_bins` adjacent frequencies, restricted to |omega| <= omega_max.
Periodogram output_periodogram(const ModelParams& params, double dt, int log2_steps, Index records,
                               Index band_bins, double omega_max, std::uint64_t seed, int workers);

/// Strict sign changes along a sampled curve (exact zeros are skipped).
int count_sign_changes(const std::vector<double>& values);

/// Density matrix of the principal displaced thermal state (mean m0, occupation nbar) with the ancilla in vacuum.
DensityMatrix gaussian_initial_state(const ModeDims& dims, const Eigen::Vector4d& m0, double nbar);

struct ArtifactSet {
    std::vector<std::string> files;
    std::map<std::string, bool> checks;
    std::map<std::string, double> metrics;

    bool all_passed() const;
};

/// Runs one experiment and writes its CSV files, sidecars and report into config.output_dir.
ArtifactSet run(const ExperimentConfig& config, int workers);

}  // namespace lornz
