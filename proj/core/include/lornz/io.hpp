#pragma once

// CSV tables with fixed numeric formatting (byte-identical across runs) and
// the JSON provenance sidecar written next to every data file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lornz/slh_builder.hpp"

namespace lornz {

/// Library version with the git revision the build was configured from.
std::string version_string();

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
};

/// Every value is printed as %.12e; rows are written in insertion order.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

struct Provenance {
    std::string experiment;
    ModelParams params;
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances;
    std::map<std::string, std::string> metadata;
    std::map<std::string, double> metrics;
    std::map<std::string, bool> checks;
};

/// Writes <path>.json describing the data file at `path`.
void write_sidecar(const std::filesystem::path& path, const Provenance& provenance);

/// Standalone JSON report (same schema as a sidecar plus a file list).
void write_report(const std::filesystem::path& path, const Provenance& provenance,
                  const std::vector<std::string>& files);

}  // namespace lornz
