// pullin_lab command-line front end: catalog, sweep, pullin, calibrate.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "pullin/config.hpp"
#include "pullin/coupling.hpp"
#include "pullin/errors.hpp"
#include "pullin/field.hpp"
#include "pullin/io.hpp"
#include "pullin/specimens.hpp"

namespace {

using namespace pullin;

constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitNoPullIn = 3;

struct Options {
  std::string config_path;
  std::string csv_path;
  std::string svg_path;
  std::string manifest_path;
  std::string method = "BEM";
  bool overlay_linear = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_manifest(const Options& o, RunManifest m, Clock::time_point start) {
  if (o.manifest_path.empty()) return;
  m.config_path = o.config_path;
  m.tool_version = tool_version();
  m.wall_time = seconds_since(start);
  std::ofstream out(o.manifest_path, std::ios::binary);
  out << m.to_json();
}

// Resolves "calibrate" corrections and builds the model the config describes.
std::unique_ptr<EquilibriumModel> make_model(RunConfig& cfg) {
  if (cfg.lumped) return std::make_unique<LumpedPlateModel>(*cfg.lumped, cfg.solver);
  if (cfg.calibrate_correction) {
    const FieldMethod method = cfg.solver.field_method == FieldMethod::FEM ? FieldMethod::FEM
                                                                           : FieldMethod::BEM;
    cfg.solver.correction =
        calibrate_correction(*cfg.specimen, method, cfg.solver.field_options()).correction;
  }
  return std::make_unique<CantileverModel>(*cfg.specimen, cfg.solver);
}

int cmd_catalog() {
  std::printf("%-4s %-11s %10s %10s %10s %10s %12s\n", "id", "layout", "length_um", "width_um",
              "thick_um", "gap_um", "tip_off_um");
  for (const auto& s : load_catalog()) {
    std::printf("%-4s %-11s %10.1f %10.1f %10.2f %10.3f %12.3f\n", s.id.c_str(),
                to_string(s.layout).c_str(), s.length * 1e6, s.width * 1e6, s.thickness * 1e6,
                s.gap * 1e6, s.tip_offset * 1e6);
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto start = Clock::now();
  RunConfig cfg = load_run_config_file(o.config_path);
  if (o.overlay_linear && !cfg.specimen) throw ConfigError("--overlay-linear needs a specimen");
  const auto model = make_model(cfg);
  const bool with_cap = cfg.solver.field_method != FieldMethod::ParallelPlate || cfg.lumped;

  RunManifest manifest;
  manifest.command = "sweep";
  std::ofstream csv(o.csv_path, std::ios::binary);
  if (!csv) {
    std::cerr << "error: cannot write " << o.csv_path << "\n";
    return kExitConfig;
  }
  manifest.outputs.push_back(o.csv_path);
  csv << kSweepCsvHeader << "\n";
  csv.flush();

  SweepResult sweep;
  try {
    sweep = voltage_sweep(*model, cfg.solver, [&](const StepOutcome& s) {
      csv << sweep_csv_row(s, with_cap) << "\n";
      csv.flush();
    });
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << " (partial CSV kept in " << o.csv_path << ")\n";
    return kExitSolver;
  }
  csv.close();

  if (!o.svg_path.empty()) {
    std::vector<CurveSeries> series{curve_from_sweep(
        sweep, cfg.solver.geometric_nonlinearity ? "nonlinear" : "linear")};
    if (o.overlay_linear && cfg.solver.geometric_nonlinearity) {
      SolverConfig linear = cfg.solver;
      linear.geometric_nonlinearity = false;
      series.push_back(curve_from_sweep(voltage_sweep(CantileverModel(*cfg.specimen, linear), linear),
                                        "geometrically linear"));
    }
    const std::string title =
        cfg.specimen ? "specimen " + cfg.specimen->id + ", " + to_string(cfg.solver.field_method)
                     : std::string("lumped plate");
    std::ofstream svg(o.svg_path, std::ios::binary);
    svg << voltage_deflection_svg(series, title);
    manifest.outputs.push_back(o.svg_path);
  }
  const StepOutcome* last = sweep.last_converged();
  std::cout << "sweep: " << sweep.converged_count() << " converged of " << sweep.steps.size()
            << " steps";
  if (last) std::cout << ", last converged " << format_float(last->voltage) << " V";
  std::cout << "\n";
  write_manifest(o, manifest, start);
  return 0;
}

int cmd_pullin(const Options& o) {
  const auto start = Clock::now();
  RunConfig cfg = load_run_config_file(o.config_path);
  const auto model = make_model(cfg);
  PullInResult r;
  try {
    r = find_pull_in(*model, cfg.solver);
  } catch (const NoPullInFound& e) {
    std::cerr << "no pull-in: " << e.what() << "\n";
    return kExitNoPullIn;
  }
  std::cout << "pull-in in [" << format_float(r.v_pullin_low) << ", "
            << format_float(r.v_pullin_high) << "] V, tip deflection at last converged "
            << format_float(r.tip_deflection_at_last_converged) << " m\n";
  std::cout << "PULLIN_V_LOW=" << format_float(r.v_pullin_low)
            << " PULLIN_V_HIGH=" << format_float(r.v_pullin_high)
            << " TERMINATION=" << to_string(r.termination) << "\n";
  RunManifest manifest;
  manifest.command = "pullin";
  write_manifest(o, manifest, start);
  return 0;
}

int cmd_calibrate(const Options& o) {
  const auto start = Clock::now();
  const RunConfig cfg = load_run_config_file(o.config_path);
  if (!cfg.specimen) throw ConfigError("calibrate needs a specimen");
  const FieldMethod method = field_method_from_string(o.method);
  if (method == FieldMethod::ParallelPlate)
    throw ConfigError("calibration needs the BEM or FEM field method");
  const CorrectionFactors f = calibrate_correction(*cfg.specimen, method, cfg.solver.field_options());
  std::printf("f_length=%.6f\nf_width=%.6f\ncorrection=%.6f\n", f.f_length, f.f_width,
              f.correction);
  RunManifest manifest;
  manifest.command = "calibrate";
  write_manifest(o, manifest, start);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static pull-in analysis of electrostatically actuated microcantilevers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));
  Options o;

  auto* catalog_cmd = app.add_subcommand("catalog", "List the built-in specimen catalog");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a voltage sweep and write CSV/SVG");
  sweep_cmd->add_option("config", o.config_path, "JSON config file")->required();
  sweep_cmd->add_option("--csv", o.csv_path, "CSV output path")->required();
  sweep_cmd->add_option("--svg", o.svg_path, "SVG plot output path");
  sweep_cmd->add_flag("--overlay-linear", o.overlay_linear,
                      "Overlay the geometrically linear curve in the SVG");
  sweep_cmd->add_option("--manifest", o.manifest_path, "Run manifest output path");
  auto* pullin_cmd = app.add_subcommand("pullin", "Bracket the pull-in voltage");
  pullin_cmd->add_option("config", o.config_path, "JSON config file")->required();
  pullin_cmd->add_option("--manifest", o.manifest_path, "Run manifest output path");
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Compute the fringing correction factor");
  calibrate_cmd->add_option("config", o.config_path, "JSON config file")->required();
  calibrate_cmd->add_option("--method", o.method, "Field method (BEM or FEM)")
      ->check(CLI::IsMember({"BEM", "FEM"}));
  calibrate_cmd->add_option("--manifest", o.manifest_path, "Run manifest output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (catalog_cmd->parsed()) return cmd_catalog();
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    if (pullin_cmd->parsed()) return cmd_pullin(o);
    if (calibrate_cmd->parsed()) return cmd_calibrate(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
