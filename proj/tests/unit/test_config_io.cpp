#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lornz/config.hpp"
#include "lornz/io.hpp"

using namespace lornz;

namespace {

std::string error_of(std::string_view text) {
    try {
        validate_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lornz_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, EmptyConfigListsRequiredKeys) {
    const std::string msg = error_of("# nothing here\n\n");
    for (const char* key : {"experiment", "preset", "omega_s", "omega_0", "kappa", "gamma_0", "gamma_1"})
        EXPECT_NE(msg.find(key), std::string::npos) << key;
}

TEST(Config, MissingModelParametersAreNamed) {
    const std::string msg = error_of("experiment = fig4\nkappa = 0.6\n");
    EXPECT_NE(msg.find("omega_s"), std::string::npos);
    EXPECT_NE(msg.find("gamma_1"), std::string::npos);
    EXPECT_EQ(msg.find("kappa,"), std::string::npos);
}

TEST(Config, UnknownAndDuplicateKeysCarryLineContext) {
    const std::string unknown = error_of("experiment = fig4\npreset = paper-fig4\nkapa = 0.3\n");
    EXPECT_NE(unknown.find("line 3"), std::string::npos);
    EXPECT_NE(unknown.find("'kapa'"), std::string::npos);

    const std::string dup = error_of("experiment = fig4\npreset = paper-fig4\nseed = 1\nseed = 2\n");
    EXPECT_NE(dup.find("line 4"), std::string::npos);
    EXPECT_NE(dup.find("line 3"), std::string::npos);

    EXPECT_NE(error_of("experiment = fig4\nnot a pair\n").find("line 2"), std::string::npos);
    EXPECT_NE(error_of("experiment = fig4\npreset = paper-fig4\nkappa = abc\n").find("'kappa'"), std::string::npos);
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_FALSE(error_of("experiment = fig4\npreset = paper-fig4\ngamma_0 = -0.1\n").empty());
    EXPECT_FALSE(error_of("experiment = fig4\npreset = paper-fig4\nensemble = 0\n").empty());
    EXPECT_FALSE(error_of("experiment = fig4\npreset = nope\n").empty());
    EXPECT_FALSE(error_of("experiment = fig9\npreset = paper-fig4\n").empty());
    EXPECT_FALSE(error_of("experiment = fig-kappa\npreset = paper-params\n").empty());
    EXPECT_FALSE(error_of("experiment = fig4\npreset = paper-fig4\nprincipal_dim = 1\n").empty());
}

TEST(Config, PresetExpandsAndKeysOverride) {
    const ExperimentConfig c = validate_config("experiment = fig4\npreset = paper-fig4\n");
    EXPECT_EQ(c.experiment, ExperimentId::Fig4);
    EXPECT_EQ(c.params, ModelParams::paper_example());
    EXPECT_EQ(c.ensemble, 1000);
    EXPECT_DOUBLE_EQ(c.t_end, 20.0);
    EXPECT_DOUBLE_EQ(c.dt, 0.01);
    EXPECT_EQ(c.m0, Eigen::Vector4d(1.0, 0.0, 0.0, 0.0));

    const ExperimentConfig o = validate_config("experiment = fig4\npreset = paper-fig4\nkappa = 0.2  # override\n");
    EXPECT_DOUBLE_EQ(o.params.kappa, 0.2);
    EXPECT_DOUBLE_EQ(o.params.gamma_1, 0.8);

    const ExperimentConfig k = validate_config("experiment = fig-kappa\npreset = paper-fig-kappa\n");
    EXPECT_EQ(k.sweep_kind, SweepKind::Kappa);
    EXPECT_EQ(k.sweep, (std::vector<double>{0.1, 0.3, 0.6, 1.0}));
}

TEST(Config, EveryExperimentHasAValidPreset) {
    for (ExperimentId id : {ExperimentId::Fig4, ExperimentId::FigKappa, ExperimentId::FigDelta, ExperimentId::FigGamma,
                            ExperimentId::SmeDemo, ExperimentId::Simulate, ExperimentId::Filter, ExperimentId::Spectra,
                            ExperimentId::Acceptance}) {
        EXPECT_EQ(validate_config(preset_text(id)).experiment, id);
        EXPECT_EQ(parse_experiment(to_string(id)), id);
    }
    EXPECT_NE(config_reference().find("positivity_check_every"), std::string::npos);
}

TEST(Config, InitialCovariance) {
    ExperimentConfig c;
    c.initial_nbar = 0.25;
    const Eigen::Vector4d d = c.initial_covariance().diagonal();
    EXPECT_EQ(d, Eigen::Vector4d(0.75, 0.75, 0.5, 0.5));
}

TEST(Csv, RoundTripKeepsFormatting) {
    const auto dir = scratch_dir("csv");
    CsvTable t;
    t.header = {"t", "value"};
    t.add_row({0.0, -0.0});
    t.add_row({0.1, 1.0 / 3.0});
    t.add_row({1e-300, -2.5e10});
    write_csv(dir / "a.csv", t);
    const std::string text = slurp(dir / "a.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,value");
    EXPECT_EQ(text.find("-0.000000000000e+00"), std::string::npos);
    EXPECT_NE(text.find("3.333333333333e-01"), std::string::npos);

    const CsvTable back = read_csv(dir / "a.csv");
    EXPECT_EQ(back.header, t.header);
    ASSERT_EQ(back.rows.size(), 3u);
    EXPECT_FALSE(std::signbit(back.rows[0][1]));
    EXPECT_NEAR(back.rows[1][1], 1.0 / 3.0, 1e-12);
    EXPECT_EQ(back.rows[2][1], -2.5e10);

    write_csv(dir / "b.csv", back);
    EXPECT_EQ(slurp(dir / "b.csv"), text);
    EXPECT_THROW(t.add_row({1.0}), InvalidDimension);
}

TEST(Csv, SidecarDescribesTheRun) {
    const auto dir = scratch_dir("sidecar");
    Provenance p;
    p.experiment = "fig4";
    p.params = ModelParams::paper_example();
    p.seed = 99;
    p.tolerances["oscillation"] = 3.0;
    p.metadata["time_axis"] = "dimensionless";
    write_sidecar(dir / "x.csv", p);
    const nlohmann::json j = nlohmann::json::parse(slurp(dir / "x.csv.json"));
    EXPECT_EQ(j["experiment"], "fig4");
    EXPECT_EQ(j["seed"], 99);
    EXPECT_EQ(j["data_file"], "x.csv");
    EXPECT_DOUBLE_EQ(j["params"]["kappa"].get<double>(), 0.6);
    EXPECT_EQ(j["metadata"]["time_axis"], "dimensionless");
    EXPECT_FALSE(j["version"].get<std::string>().empty());
}
