#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pullin/coupling.hpp"

namespace pullin {

inline constexpr const char* kSweepCsvHeader = "voltage_v,tip_disp_m,inner_iters,converged,capacitance_f";

// 12 significant digits, '.' decimal separator, locale independent.
std::string format_float(double value);

std::string sweep_csv_row(const StepOutcome& step, bool with_capacitance);
std::string sweep_csv(const SweepResult& sweep, bool with_capacitance);

struct CurveSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (V, tip deflection in m)
};
CurveSeries curve_from_sweep(const SweepResult& sweep, const std::string& label);

// Self-contained SVG plot of tip deflection versus voltage.
std::string voltage_deflection_svg(const std::vector<CurveSeries>& series,
                                   const std::string& title);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::string> outputs;
  double wall_time = 0.0;  // s
  std::string tool_version;

  std::string to_json() const;
};

const char* tool_version();

}  // namespace pullin
