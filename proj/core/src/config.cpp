#include "lornz/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace lornz {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(int line, const std::string& key, const std::string& what) {
    std::ostringstream os;
    os << "config";
    if (line > 0) os << " line " << line;
    if (!key.empty()) os << " key '" << key << "'";
    os << ": " << what;
    throw ValidationError(os.str());
}

double parse_double(const Entry& e, const std::string& key) {
    double v = 0.0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail(e.line, key, "expected a finite number, got '" + e.value + "'");
    return v;
}

long long parse_int(const Entry& e, const std::string& key) {
    long long v = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) fail(e.line, key, "expected an integer, got '" + e.value + "'");
    return v;
}

bool parse_bool(const Entry& e, const std::string& key) {
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(e.line, key, "expected true/false, got '" + e.value + "'");
}

std::vector<double> parse_list(const Entry& e, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(Entry{trim(item), e.line}, key));
    }
    if (out.empty()) fail(e.line, key, "expected a comma-separated list of numbers");
    return out;
}

// Preset bodies are plain config text so they go through the same parser.
const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> table = {
        {"paper-params", "omega_s = 10\nomega_0 = 10\nkappa = 0.6\ngamma_0 = 0.6\ngamma_1 = 0.8\n"},
        {"paper-fig4",
         "omega_s = 10\nomega_0 = 10\nkappa = 0.6\ngamma_0 = 0.6\ngamma_1 = 0.8\n"
         "ensemble = 1000\nt_end = 20\ndt = 0.01\nm0 = 1, 0, 0, 0\n"},
        {"paper-fig-kappa",
         "omega_s = 10\nomega_0 = 10\nkappa = 0.6\ngamma_0 = 0.1\ngamma_1 = 0.8\n"
         "sweep_kind = kappa\nsweep = 0.1, 0.3, 0.6, 1.0\n"},
        {"paper-fig-delta",
         "omega_s = 10\nomega_0 = 10\nkappa = 0.1\ngamma_0 = 0.1\ngamma_1 = 0.8\n"
         "sweep_kind = detuning\nsweep = 0, 0.5, 1, 2\n"},
        {"paper-fig-gamma",
         "omega_s = 10\nomega_0 = 10\nkappa = 0.1\ngamma_0 = 0.6\ngamma_1 = 0.8\n"
         "sweep_kind = gamma_0\nsweep = 0.1, 0.3, 0.6, 1.0\n"},
        {"paper-sme",
         "omega_s = 10\nomega_0 = 10\nkappa = 0.6\ngamma_0 = 0.6\ngamma_1 = 0.8\n"
         "ensemble = 4\nt_end = 10\nsme_dt = 0.001\nprincipal_dim = 12\nancilla_dim = 12\n"},
    };
    return table;
}

using Setter = std::function<void(ExperimentConfig&, const Entry&, const std::string&)>;

const std::map<std::string, std::pair<std::string, Setter>>& setters() {
    static const std::map<std::string, std::pair<std::string, Setter>> table = {
        {"experiment", {"fig4|fig-kappa|fig-delta|fig-gamma|sme-demo|simulate|filter|spectra|acceptance",
                        [](ExperimentConfig& c, const Entry& e, const std::string& k) {
                            try {
                                c.experiment = parse_experiment(e.value);
                            } catch (const ValidationError& err) {
                                fail(e.line, k, err.what());
                            }
                        }}},
        {"preset", {"(none)", [](ExperimentConfig&, const Entry&, const std::string&) {}}},
        {"omega_s", {"10", [](auto& c, const auto& e, const auto& k) { c.params.omega_s = parse_double(e, k); }}},
        {"omega_0", {"10", [](auto& c, const auto& e, const auto& k) { c.params.omega_0 = parse_double(e, k); }}},
        {"kappa", {"0.6", [](auto& c, const auto& e, const auto& k) { c.params.kappa = parse_double(e, k); }}},
        {"gamma_0", {"0.6", [](auto& c, const auto& e, const auto& k) { c.params.gamma_0 = parse_double(e, k); }}},
        {"gamma_1", {"0.8", [](auto& c, const auto& e, const auto& k) { c.params.gamma_1 = parse_double(e, k); }}},
        {"lab_frame", {"false", [](auto& c, const auto& e, const auto& k) {
                           c.params.frame = parse_bool(e, k) ? Frame::Lab : Frame::Rotating;
                       }}},
        {"principal_dim", {"12", [](auto& c, const auto& e, const auto& k) { c.dims.principal = parse_int(e, k); }}},
        {"ancilla_dim", {"12", [](auto& c, const auto& e, const auto& k) { c.dims.ancilla = parse_int(e, k); }}},
        {"sme_dt", {"0.001", [](auto& c, const auto& e, const auto& k) { c.sme.dt = parse_double(e, k); }}},
        {"scheme", {"positive-map", [](ExperimentConfig& c, const Entry& e, const std::string& k) {
                        try {
                            c.sme.scheme = parse_sme_scheme(e.value);
                        } catch (const ValidationError& err) {
                            fail(e.line, k, err.what());
                        }
                    }}},
        {"renormalize", {"true", [](auto& c, const auto& e, const auto& k) { c.sme.renormalize = parse_bool(e, k); }}},
        {"positivity_check_every", {"-1 (scheme default)", [](auto& c, const auto& e, const auto& k) {
                                        c.sme.positivity_check_every = parse_int(e, k);
                                    }}},
        {"ensemble", {"1000", [](auto& c, const auto& e, const auto& k) { c.ensemble = parse_int(e, k); }}},
        {"t_end", {"20", [](auto& c, const auto& e, const auto& k) { c.t_end = parse_double(e, k); }}},
        {"dt", {"0.01", [](auto& c, const auto& e, const auto& k) { c.dt = parse_double(e, k); }}},
        {"m0", {"1, 0, 0, 0", [](ExperimentConfig& c, const Entry& e, const std::string& k) {
                    const auto v = parse_list(e, k);
                    if (v.size() != 4) fail(e.line, k, "expected 4 comma-separated values [q_s, p_s, q_0, p_0]");
                    c.m0 = Eigen::Vector4d(v[0], v[1], v[2], v[3]);
                }}},
        {"initial_nbar", {"0.25", [](auto& c, const auto& e, const auto& k) { c.initial_nbar = parse_double(e, k); }}},
        {"sweep_kind", {"none", [](ExperimentConfig& c, const Entry& e, const std::string& k) {
                            if (e.value == "none") c.sweep_kind = SweepKind::None;
                            else if (e.value == "kappa") c.sweep_kind = SweepKind::Kappa;
                            else if (e.value == "detuning") c.sweep_kind = SweepKind::Detuning;
                            else if (e.value == "gamma_0") c.sweep_kind = SweepKind::Gamma0;
                            else fail(e.line, k, "expected none|kappa|detuning|gamma_0, got '" + e.value + "'");
                        }}},
        {"sweep", {"(empty)", [](auto& c, const auto& e, const auto& k) { c.sweep = parse_list(e, k); }}},
        {"grid_points", {"4096", [](auto& c, const auto& e, const auto& k) { c.grid_points = parse_int(e, k); }}},
        {"omega_min", {"-5", [](auto& c, const auto& e, const auto& k) { c.omega_min = parse_double(e, k); }}},
        {"omega_max", {"5", [](auto& c, const auto& e, const auto& k) { c.omega_max = parse_double(e, k); }}},
        {"time_unit", {"dimensionless", [](auto& c, const auto& e, const auto&) { c.time_unit = e.value; }}},
        {"seed", {"7", [](ExperimentConfig& c, const Entry& e, const std::string& k) {
                      const long long v = parse_int(e, k);
                      if (v < 0) fail(e.line, k, "seed must be >= 0");
                      c.seed = static_cast<std::uint64_t>(v);
                  }}},
        {"output_dir", {"out", [](auto& c, const auto& e, const auto&) { c.output_dir = e.value; }}},
    };
    return table;
}

std::map<std::string, Entry> tokenize(std::string_view text) {
    std::map<std::string, Entry> entries;
    std::stringstream ss{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim(std::string_view(raw).substr(0, hash));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) fail(line, "", "expected 'key = value', got '" + content + "'");
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        if (key.empty()) fail(line, "", "missing key before '='");
        if (!setters().count(key)) fail(line, key, "unknown key (see `lornz --help-config`)");
        if (value.empty()) fail(line, key, "missing value");
        if (entries.count(key)) fail(line, key, "duplicate key (first set on line " + std::to_string(entries[key].line) + ")");
        entries[key] = Entry{value, line};
    }
    return entries;
}

}  // namespace

std::string to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::Fig4: return "fig4";
        case ExperimentId::FigKappa: return "fig-kappa";
        case ExperimentId::FigDelta: return "fig-delta";
        case ExperimentId::FigGamma: return "fig-gamma";
        case ExperimentId::SmeDemo: return "sme-demo";
        case ExperimentId::Simulate: return "simulate";
        case ExperimentId::Filter: return "filter";
        case ExperimentId::Spectra: return "spectra";
        case ExperimentId::Acceptance: return "acceptance";
    }
    return "unknown";
}

ExperimentId parse_experiment(std::string_view name) {
    for (ExperimentId id : {ExperimentId::Fig4, ExperimentId::FigKappa, ExperimentId::FigDelta, ExperimentId::FigGamma,
                            ExperimentId::SmeDemo, ExperimentId::Simulate, ExperimentId::Filter, ExperimentId::Spectra,
                            ExperimentId::Acceptance}) {
        if (name == to_string(id)) return id;
    }
    throw ValidationError("unknown experiment '" + std::string(name) + "'");
}

Eigen::Matrix4d ExperimentConfig::initial_covariance() const {
    return Eigen::Vector4d(initial_nbar + 0.5, initial_nbar + 0.5, 0.5, 0.5).asDiagonal();
}

void ExperimentConfig::validate() const {
    params.validate();
    sme.validate();
    if (dims.principal < 2 || dims.ancilla < 2) throw ValidationError("config: principal_dim and ancilla_dim must be >= 2");
    if (ensemble < 1) throw ValidationError("config: ensemble must be >= 1");
    if (!(t_end > 0.0)) throw ValidationError("config: t_end must be > 0");
    if (!(dt > 0.0) || dt > t_end) throw ValidationError("config: dt must be in (0, t_end]");
    if (!(sme.dt <= t_end)) throw ValidationError("config: sme_dt must be <= t_end");
    if (initial_nbar < 0.0) throw ValidationError("config: initial_nbar must be >= 0");
    if (grid_points < 2 || !(omega_max > omega_min)) throw ValidationError("config: need grid_points >= 2 and omega_max > omega_min");
    const bool figure_sweep = experiment == ExperimentId::FigKappa || experiment == ExperimentId::FigDelta ||
                              experiment == ExperimentId::FigGamma;
    if (figure_sweep && (sweep_kind == SweepKind::None || sweep.empty())) {
        throw ValidationError("config: " + to_string(experiment) + " needs sweep_kind and sweep (or a paper-fig-* preset)");
    }
    for (double v : sweep) {
        if (sweep_kind == SweepKind::Kappa && v < 0.0) throw ValidationError("config: kappa sweep values must be >= 0");
        if (sweep_kind == SweepKind::Gamma0 && !(v > 0.0)) throw ValidationError("config: gamma_0 sweep values must be > 0");
    }
}

ExperimentConfig validate_config(std::string_view text) {
    const auto entries = tokenize(text);
    if (entries.empty()) {
        throw ValidationError(
            "config: empty configuration; required keys: experiment, and either preset or all of "
            "omega_s, omega_0, kappa, gamma_0, gamma_1");
    }
    if (!entries.count("experiment")) fail(0, "experiment", "missing required key");

    ExperimentConfig cfg;
    cfg.sme.steps = 1;  // derived from t_end / sme_dt below
    if (entries.count("preset")) {
        const Entry& p = entries.at("preset");
        const auto it = presets().find(p.value);
        if (it == presets().end()) fail(p.line, "preset", "unknown preset '" + p.value + "'");
        for (const auto& [key, e] : tokenize(it->second)) setters().at(key).second(cfg, e, key);
        cfg.preset = p.value;
    } else {
        std::vector<std::string> missing;
        for (const char* k : {"omega_s", "omega_0", "kappa", "gamma_0", "gamma_1"}) {
            if (!entries.count(k)) missing.emplace_back(k);
        }
        if (!missing.empty()) {
            std::string list;
            for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
            fail(0, "", "no preset given, so all model parameters are required; missing: " + list);
        }
    }
    for (const auto& [key, e] : entries) setters().at(key).second(cfg, e, key);

    cfg.sme.steps = std::max<Index>(1, static_cast<Index>(std::llround(cfg.t_end / cfg.sme.dt)));
    cfg.sme.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

std::string preset_text(ExperimentId experiment) {
    std::string preset = "paper-params";
    switch (experiment) {
        case ExperimentId::Fig4: preset = "paper-fig4"; break;
        case ExperimentId::FigKappa: preset = "paper-fig-kappa"; break;
        case ExperimentId::FigDelta: preset = "paper-fig-delta"; break;
        case ExperimentId::FigGamma: preset = "paper-fig-gamma"; break;
        case ExperimentId::SmeDemo: preset = "paper-sme"; break;
        case ExperimentId::Filter:
        case ExperimentId::Simulate: preset = "paper-fig4"; break;
        default: break;
    }
    std::string text = "experiment = " + to_string(experiment) + "\npreset = " + preset + "\n";
    if (experiment == ExperimentId::Simulate || experiment == ExperimentId::Filter) text += "ensemble = 1\n";
    return text;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, body] : presets()) names.push_back(name);
    return names;
}

std::string config_reference() {
    std::ostringstream os;
    os << "Configuration keys (key = value, '#' starts a comment):\n";
    for (const auto& [key, entry] : setters()) os << "  " << key << " (default " << entry.first << ")\n";
    os << "Required: experiment, and either preset or all of omega_s, omega_0, kappa, gamma_0, gamma_1.\nPresets:";
    for (const auto& name : preset_names()) os << ' ' << name;
    os << '\n';
    return os.str();
}

}  // namespace lornz
