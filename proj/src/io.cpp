#include "pullin/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#ifndef PULLIN_LAB_VERSION
#define PULLIN_LAB_VERSION "0.0.0"
#endif

namespace pullin {

const char* tool_version() { return PULLIN_LAB_VERSION; }

std::string format_float(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string sweep_csv_row(const StepOutcome& step, bool with_capacitance) {
  std::string row = format_float(step.voltage) + "," + format_float(step.tip_deflection) + "," +
                    std::to_string(step.iterations) + "," + (step.converged ? "1" : "0") + ",";
  if (with_capacitance && step.capacitance) row += format_float(*step.capacitance);
  return row;
}

std::string sweep_csv(const SweepResult& sweep, bool with_capacitance) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const auto& s : sweep.steps) out += sweep_csv_row(s, with_capacitance) + "\n";
  return out;
}

CurveSeries curve_from_sweep(const SweepResult& sweep, const std::string& label) {
  CurveSeries c;
  c.label = label;
  for (const auto& s : sweep.steps)
    if (s.converged) c.points.emplace_back(s.voltage, s.tip_deflection);
  return c;
}

namespace {

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Round step of roughly span/5 in the 1-2-5 sequence.
double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string voltage_deflection_svg(const std::vector<CurveSeries>& series,
                                   const std::string& title) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 420.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  const char* colors[] = {"#1f4e9c", "#9c2f1f", "#2f7d32", "#6a1b9a"};

  double vmin = 0.0, vmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (const auto& [v, y] : s.points) {
      const double um = y * 1e6;
      if (first) {
        vmin = vmax = v;
        ymin = ymax = um;
        first = false;
      }
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
      ymin = std::min(ymin, um);
      ymax = std::max(ymax, um);
    }
  if (vmax - vmin <= 0.0) vmax = vmin + 1.0;
  if (ymax - ymin <= 0.0) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + (v - vmin) / (vmax - vmin) * pw; };
  const auto py = [&](double um) { return kTop + (ymax - um) / (ymax - ymin) * ph; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << escape_xml(title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double vs = nice_step(vmax - vmin);
  for (double v = std::ceil(vmin / vs) * vs; v <= vmax + 1e-9 * vs; v += vs) {
    out << "<line x1=\"" << fixed(px(v)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << fixed(px(v))
        << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed(px(v)) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_float(v)
        << "</text>\n";
  }
  const double ys = nice_step(ymax - ymin);
  for (double y = std::ceil(ymin / ys) * ys; y <= ymax + 1e-9 * ys; y += ys) {
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fixed(py(y)) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fixed(py(y)) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << fixed(py(y) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_float(std::abs(y) < 1e-12 * ys ? 0.0 : y) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">voltage [V]</text>\n"
      << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 16 " << kTop + ph / 2
      << ")\">tip deflection [um]</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % 4];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (k > 0 ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (const auto& [v, y] : series[k].points) out << fixed(px(v)) << "," << fixed(py(y * 1e6)) << " ";
    out << "\"/>\n";
    const double ly = kTop + 16 + 16.0 * static_cast<double>(k);
    out << "<line x1=\"" << kLeft + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + 36
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + 42 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(series[k].label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_path"] = config_path;
  j["outputs"] = outputs;
  j["wall_time_s"] = wall_time;
  j["tool_version"] = tool_version;
  return j.dump(2) + "\n";
}

}  // namespace pullin
