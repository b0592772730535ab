#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lornz/acceptance.hpp"
#include "lornz/experiments.hpp"
#include "lornz/io.hpp"

using namespace lornz;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("lornz_exp_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_fig4(const fs::path& out) {
    ExperimentConfig c = validate_config("experiment = fig4\npreset = paper-fig4\nensemble = 60\nt_end = 4\n");
    c.output_dir = out.string();
    return c;
}

}  // namespace

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, [&](Index i) { ++hits[static_cast<std::size_t>(i)]; }, 4);
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
    try {
        parallel_for(100, [](Index i) {
            if (i == 17 || i == 60) throw ValidationError("index " + std::to_string(i));
        }, 3);
        FAIL() << "expected an exception";
    } catch (const ValidationError& e) {
        EXPECT_STREQ(e.what(), "index 17");
    }
}

TEST(SignChanges, CountsStrictCrossings) {
    EXPECT_EQ(count_sign_changes({1.0, 0.5, -0.1, -2.0, 3.0}), 2);
    EXPECT_EQ(count_sign_changes({1.0, 0.0, 1.0}), 0);
    EXPECT_EQ(count_sign_changes({1.0, 0.0, -1.0}), 1);
    EXPECT_EQ(count_sign_changes({}), 0);
}

TEST(GaussianInitialState, MatchesRequestedMoments) {
    const DensityMatrix rho = gaussian_initial_state({14, 4}, Eigen::Vector4d(1.0, 0.0, 0.0, 0.0), 0.25);
    const CompiledGenerator gen(probed_slh(ModelParams::paper_example(), {14, 4}), kProbeChannel);
    const Eigen::VectorXd m = gen.quadrature_means(rho.matrix());
    EXPECT_NEAR(m(0), 1.0, 1e-6);
    EXPECT_NEAR(m(1), 0.0, 1e-12);
    EXPECT_NEAR(m(2), 0.0, 1e-12);
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
}

TEST(Run, Fig4IsDeterministicAndWorkerIndependent) {
    const fs::path a = scratch_dir("fig4_a"), b = scratch_dir("fig4_b");
    const ArtifactSet ra = run(small_fig4(a), 1);
    const ArtifactSet rb = run(small_fig4(b), 3);
    ASSERT_FALSE(ra.files.empty());
    EXPECT_EQ(ra.files, rb.files);
    for (const auto& f : ra.files) {
        if (f.ends_with(".json")) continue;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_TRUE(ra.checks.at("kalman_mean_within_3se"));
    EXPECT_TRUE(fs::exists(a / "fig4_means.csv.json"));
}

TEST(Run, KappaSweepWritesOneCurvePerValue) {
    const fs::path out = scratch_dir("kappa");
    ExperimentConfig c = validate_config("experiment = fig-kappa\npreset = paper-fig-kappa\ngrid_points = 501\n");
    c.output_dir = out.string();
    const ArtifactSet r = run(c, 1);
    int curves = 0;
    for (const auto& f : r.files)
        if (f.starts_with("fig-kappa_kappa_") && f.ends_with(".csv")) ++curves;
    EXPECT_EQ(curves, 4);
    EXPECT_TRUE(r.checks.count("g2_at_zero_decreasing"));
    const CsvTable t = read_csv(out / "fig-kappa_summary.csv");
    EXPECT_EQ(t.rows.size(), 4u);
}

TEST(Run, FilterWritesRecordAndEstimate) {
    const fs::path out = scratch_dir("filter");
    ExperimentConfig c = validate_config(preset_text(ExperimentId::Filter) + "t_end = 2\n");
    c.output_dir = out.string();
    const ArtifactSet r = run(c, 1);
    bool record = false, filter = false;
    for (const auto& f : r.files) {
        record = record || f.starts_with("record_");
        filter = filter || f.starts_with("filter_");
    }
    EXPECT_TRUE(record);
    EXPECT_TRUE(filter);
}

TEST(Acceptance, ReportListsSelectedCriteria) {
    AcceptanceOptions opts;
    opts.only = {1, 2, 7, 8};
    std::vector<int> seen;
    const auto results = run_acceptance(opts, [&](const CriterionResult& r) { seen.push_back(r.id); });
    EXPECT_EQ(seen, (std::vector<int>{1, 2, 7, 8}));
    for (const auto& r : results) EXPECT_FALSE(format_result(r).empty());

    const fs::path out = scratch_dir("acceptance");
    fs::create_directories(out);
    write_acceptance_report(out / "report.json", results, opts);
    const nlohmann::json j = nlohmann::json::parse(slurp(out / "report.json"));
    EXPECT_EQ(j["criteria"].size(), 4u);
}
