// lornz command line: simulate | filter | spectra | reproduce <figure> | acceptance
//
// Exit codes: 0 success, 1 failed acceptance or unexpected error,
// 2 invalid input, 3 numerical instability or non-convergence.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lornz/config.hpp"
#include "lornz/errors.hpp"
#include "lornz/experiments.hpp"
#include "lornz/io.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lornz::ValidationError("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Configuration file (defaults to the built-in preset)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Master seed; overrides the config");
    cmd->add_option("--out", c.out, "Output directory; overrides the config");
}

int execute(lornz::ExperimentId id, const Common& c) {
    const std::string text = c.config.empty() ? lornz::preset_text(id) : read_file(c.config);
    lornz::ExperimentConfig cfg = lornz::validate_config(text);
    if (cfg.experiment != id) {
        throw lornz::ValidationError("config experiment '" + lornz::to_string(cfg.experiment) +
                                     "' does not match the command '" + lornz::to_string(id) + "'");
    }
    if (c.seed) cfg.seed = cfg.sme.seed = *c.seed;
    if (!c.out.empty()) cfg.output_dir = c.out;

    const int workers = lornz::worker_count();
    const lornz::ArtifactSet art = lornz::run(cfg, workers);
    if (id != lornz::ExperimentId::Acceptance) {
        for (const auto& [name, ok] : art.checks) std::cout << (ok ? "ok    " : "FAIL  ") << name << '\n';
        for (const auto& [name, v] : art.metrics) std::cout << "      " << name << " = " << v << '\n';
    }
    std::cout << art.files.size() << " file(s) written to " << cfg.output_dir << '\n';
    if (id == lornz::ExperimentId::Acceptance && !art.all_passed()) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lornz: non-Markovian cavity simulation, filtering and spectra"};
    app.set_version_flag("--version", lornz::version_string());
    bool help_config = false;
    app.add_flag("--help-config", help_config, "Describe configuration keys and presets");
    app.require_subcommand(0, 1);

    Common common;
    std::optional<lornz::ExperimentId> chosen;

    auto* simulate = app.add_subcommand("simulate", "Simulate measurement records and true quadrature paths");
    add_common(simulate, common);
    simulate->callback([&] { chosen = lornz::ExperimentId::Simulate; });

    auto* filter = app.add_subcommand("filter", "Simulate records and run the Kalman filter on them");
    add_common(filter, common);
    filter->callback([&] { chosen = lornz::ExperimentId::Filter; });

    auto* spectra = app.add_subcommand("spectra", "Transfer functions, output spectra, Lorentzian and memory kernel");
    add_common(spectra, common);
    spectra->callback([&] { chosen = lornz::ExperimentId::Spectra; });

    std::string figure;
    auto* reproduce = app.add_subcommand("reproduce", "Regenerate a figure dataset");
    reproduce->add_option("figure", figure, "fig4 | fig-kappa | fig-delta | fig-gamma | sme-demo")
        ->required()
        ->check(CLI::IsMember({"fig4", "fig-kappa", "fig-delta", "fig-gamma", "sme-demo"}));
    add_common(reproduce, common);
    reproduce->callback([&] { chosen = lornz::parse_experiment(figure); });

    auto* acceptance = app.add_subcommand("acceptance", "Run every acceptance criterion and write a JSON report");
    add_common(acceptance, common);
    acceptance->callback([&] { chosen = lornz::ExperimentId::Acceptance; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (help_config) {
        std::cout << lornz::config_reference();
        return 0;
    }
    if (!chosen) {
        std::cout << app.help();
        return 2;
    }

    try {
        return execute(*chosen, common);
    } catch (const lornz::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const lornz::InvalidDimension& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const lornz::NumericalInstability& e) {
        std::cerr << "numerical instability: " << e.what() << '\n';
        return 3;
    } catch (const lornz::ConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
