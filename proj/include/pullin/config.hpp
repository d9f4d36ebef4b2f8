#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pullin/coupling.hpp"
#include "pullin/specimens.hpp"

namespace pullin {

// Parsed run configuration: a specimen (or a lumped plate) plus solver settings.
struct RunConfig {
  std::optional<Specimen> specimen;
  std::optional<LumpedParameters> lumped;
  SolverConfig solver;
  // `"correction": "calibrate"` requests a field calibration before solving.
  bool calibrate_correction = false;
};

// Parse errors name the offending field ("specimen.gap_m: ..."); physical
// validation errors come from Specimen::validate. Both throw ConfigError.
Specimen load_specimen(const std::string& json_text);
RunConfig load_run_config(const std::string& json_text);
RunConfig load_run_config_file(const std::string& path);
SolverConfig load_solver_config(const std::string& json_text);

// JSON document accepted by load_specimen that reproduces `s` exactly.
std::string serialize(const Specimen& s);

std::string read_text_file(const std::string& path);

}  // namespace pullin
