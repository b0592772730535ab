#include "lornz/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lornz {

namespace {

nlohmann::json params_json(const ModelParams& p) {
    return {{"omega_s", p.omega_s},     {"omega_0", p.omega_0}, {"kappa", p.kappa},
            {"gamma_0", p.gamma_0},     {"gamma_1", p.gamma_1}, {"detuning", p.detuning()},
            {"frame", to_string(p.frame)}};
}

nlohmann::json provenance_json(const Provenance& prov) {
    nlohmann::json j;
    j["experiment"] = prov.experiment;
    j["params"] = params_json(prov.params);
    j["seed"] = prov.seed;
    j["version"] = version_string();
    j["tolerances"] = prov.tolerances;
    j["metadata"] = prov.metadata;
    if (!prov.metrics.empty()) j["metrics"] = prov.metrics;
    if (!prov.checks.empty()) j["checks"] = prov.checks;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string version_string() {
#ifdef LORNZ_GIT_REVISION
    return std::string(LORNZ_VERSION_STRING) + "+g" + LORNZ_GIT_REVISION;
#else
    return LORNZ_VERSION_STRING;
#endif
}

void CsvTable::add_row(std::vector<double> row) {
    if (row.size() != header.size()) {
        throw InvalidDimension("CsvTable: row has " + std::to_string(row.size()) + " values, header has " +
                               std::to_string(header.size()));
    }
    rows.push_back(std::move(row));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::string text;
    for (std::size_t i = 0; i < table.header.size(); ++i) text += (i ? "," : "") + table.header[i];
    text += '\n';
    char buf[32];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            // Normalise -0 so repeated runs cannot differ by the sign of zero.
            const double v = row[i] == 0.0 ? 0.0 : row[i];
            std::snprintf(buf, sizeof buf, "%.12e", v);
            if (i) text += ',';
            text += buf;
        }
        text += '\n';
    }
    write_text(path, text);
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    if (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        table.add_row(std::move(row));
    }
    return table;
}

void write_sidecar(const std::filesystem::path& path, const Provenance& provenance) {
    nlohmann::json j = provenance_json(provenance);
    j["data_file"] = path.filename().string();
    write_text(path.string() + ".json", j.dump(2) + "\n");
}

void write_report(const std::filesystem::path& path, const Provenance& provenance,
                  const std::vector<std::string>& files) {
    nlohmann::json j = provenance_json(provenance);
    j["files"] = files;
    write_text(path, j.dump(2) + "\n");
}

}  // namespace lornz
