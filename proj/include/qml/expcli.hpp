#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qml/hamiltonian.hpp"

namespace qml {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentRecord {
  std::string experiment;
  Json config;   // validated echo
  Json fitted;   // fitted parameters, residuals, soft bounds, notes
  std::map<std::string, Table> tables;
  double wall_seconds = 0.0;
};

// Strict schema validation; unknown keys are config errors.
Json validate_config(const std::string& cmd, const Json& config);

// Lattice/model construction from the config tree.
Lattice lattice_from_config(const Json& j);
LocalHamiltonian model_from_config(const Lattice& lat, const Json& j);

ExperimentRecord run(const std::string& cmd, const Json& config);

// CSV tables (fixed column order) + manifest.json with a config hash.
void emit(const ExperimentRecord& record, const std::filesystem::path& outdir);

unsigned long long config_hash(const Json& config);

std::vector<std::string> experiment_names();

}  // namespace qml
