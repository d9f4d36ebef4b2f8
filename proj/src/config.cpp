#include "pullin/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pullin/errors.hpp"

namespace pullin {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items())
    if (!known.count(item.key())) fail(path + "." + item.key(), "unknown field");
}

std::optional<double> number(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) fail(path + "." + key, "expected a number");
  return it->get<double>();
}

double required_number(const json& obj, const std::string& key, const std::string& path) {
  const auto v = number(obj, key, path);
  if (!v) fail(path + "." + key, "missing required field");
  return *v;
}

std::optional<std::string> text(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number()) return it->dump();
  if (!it->is_string()) fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

std::optional<bool> flag(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_boolean()) fail(path + "." + key, "expected true or false");
  return it->get<bool>();
}

std::optional<int> integer(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
  return it->get<int>();
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  if (!it->is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) fail(path + "." + key, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (std::string(e.what()).find(':') != std::string::npos) throw;
    fail(path, e.what());
  }
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON (") + e.what() + ")");
  }
}

Material parse_material(const json& m, const std::string& path, const Material* base) {
  reject_unknown(m, path, {"name", "young_modulus_pa", "poisson_ratio", "thermal_expansion_per_k"});
  Material out = base ? *base : Material{};
  if (auto v = text(m, "name", path)) out.name = *v;
  else if (!base) fail(path + ".name", "missing required field");
  if (auto v = number(m, "young_modulus_pa", path)) out.young_modulus = *v;
  else if (!base) fail(path + ".young_modulus_pa", "missing required field");
  if (auto v = number(m, "poisson_ratio", path)) out.poisson_ratio = *v;
  else if (!base) fail(path + ".poisson_ratio", "missing required field");
  if (auto v = number(m, "thermal_expansion_per_k", path)) out.thermal_expansion = *v;
  return out;
}

InitialState parse_initial_state(const json& j, const std::string& path, InitialState out) {
  reject_unknown(j, path,
                 {"strain", "curvature_per_m", "axial_preload_n", "moment_preload_nm",
                  "temp_uniform", "temp_field"});
  if (auto v = number(j, "strain", path)) out.strain_initial = *v;
  if (auto v = number(j, "curvature_per_m", path)) out.curvature_initial = *v;
  if (auto v = number(j, "axial_preload_n", path)) out.axial_preload = *v;
  if (auto v = number(j, "moment_preload_nm", path)) out.moment_preload = *v;
  if (j.contains("temp_uniform")) {
    const std::string p = path + ".temp_uniform";
    const json& t = j["temp_uniform"];
    reject_unknown(t, p, {"x_m", "value_k"});
    out.temp_uniform.x = number_list(t, "x_m", p);
    out.temp_uniform.value = number_list(t, "value_k", p);
    if (out.temp_uniform.x.size() != out.temp_uniform.value.size())
      fail(p, "x_m and value_k must have equal length");
  }
  if (j.contains("temp_field")) {
    const std::string p = path + ".temp_field";
    const json& t = j["temp_field"];
    reject_unknown(t, p, {"x_m", "y_m", "value_k"});
    out.temp_field.x = number_list(t, "x_m", p);
    out.temp_field.y = number_list(t, "y_m", p);
    if (!t.contains("value_k") || !t["value_k"].is_array()) fail(p + ".value_k", "expected rows");
    out.temp_field.value.clear();
    for (std::size_t i = 0; i < t["value_k"].size(); ++i) {
      json row = json::object();
      row["r"] = t["value_k"][i];
      out.temp_field.value.push_back(number_list(row, "r", p + ".value_k[" + std::to_string(i) + "]"));
      if (out.temp_field.value.back().size() != out.temp_field.y.size())
        fail(p + ".value_k", "each row needs one value per y_m entry");
    }
    if (out.temp_field.value.size() != out.temp_field.x.size())
      fail(p + ".value_k", "one row per x_m entry is required");
  }
  return out;
}

Specimen parse_specimen_document(const json& doc) {
  if (!doc.contains("specimen")) fail("specimen", "missing required section");
  const json& sj = doc["specimen"];
  const std::string path = "specimen";
  reject_unknown(sj, path,
                 {"id", "catalog_id", "layout", "length_m", "width_m", "thickness_m", "gap_m",
                  "tip_offset_m", "tip_shape", "counter_electrode_extent_m", "wafer_surface",
                  "wafer_distance_m", "ranges"});

  std::optional<Specimen> base;
  if (auto cid = text(sj, "catalog_id", path)) {
    base = find_in_catalog(*cid);
    if (!base) fail(path + ".catalog_id", "no catalog specimen '" + *cid + "'");
  }
  Specimen s = base.value_or(Specimen{});
  const bool from_catalog = base.has_value();

  if (auto v = text(sj, "id", path)) s.id = *v;
  else if (!from_catalog) fail(path + ".id", "missing required field");
  if (auto v = text(sj, "layout", path)) {
    s.layout = with_path(path + ".layout", [&] { return layout_from_string(*v); });
  } else if (!from_catalog) {
    fail(path + ".layout", "missing required field");
  }
  const auto dimension = [&](const char* key, double& field) {
    if (auto v = number(sj, key, path)) field = *v;
    else if (!from_catalog) fail(path + "." + key, "missing required field");
  };
  dimension("length_m", s.length);
  dimension("width_m", s.width);
  dimension("thickness_m", s.thickness);
  dimension("gap_m", s.gap);
  if (auto v = number(sj, "tip_offset_m", path)) s.tip_offset = *v;
  if (auto v = text(sj, "tip_shape", path)) {
    s.tip_shape = with_path(path + ".tip_shape", [&] { return tip_shape_from_string(*v); });
  } else if (!from_catalog) {
    s.tip_shape = TipShape::Rounded;
  }
  if (auto v = number(sj, "counter_electrode_extent_m", path)) {
    s.counter_electrode_extent = *v;
  } else if (!from_catalog) {
    if (s.layout == Layout::OutOfPlane)
      fail(path + ".counter_electrode_extent_m", "required for OutOfPlane specimens");
    s.counter_electrode_extent = s.length;
  }
  if (auto v = flag(sj, "wafer_surface", path)) s.wafer_surface_present = *v;
  else if (!from_catalog) s.wafer_surface_present = s.layout == Layout::InPlane;
  if (auto v = number(sj, "wafer_distance_m", path)) s.wafer_distance = *v;
  if (sj.contains("ranges")) {
    const std::string p = path + ".ranges";
    if (!sj["ranges"].is_array()) fail(p, "expected an array");
    s.ranges.clear();
    for (std::size_t i = 0; i < sj["ranges"].size(); ++i) {
      const std::string pi = p + "[" + std::to_string(i) + "]";
      const json& r = sj["ranges"][i];
      reject_unknown(r, pi, {"field", "min", "max"});
      MeasuredRange range;
      range.field = text(r, "field", pi).value_or("");
      range.min = required_number(r, "min", pi);
      range.max = required_number(r, "max", pi);
      s.ranges.push_back(range);
    }
  }

  if (doc.contains("material")) {
    s.material = parse_material(doc["material"], "material", from_catalog ? &s.material : nullptr);
  } else if (!from_catalog) {
    fail("material", "missing required section");
  }
  if (doc.contains("initial_state")) {
    s.initial_state = parse_initial_state(doc["initial_state"], "initial_state",
                                          from_catalog ? s.initial_state : InitialState{});
  }
  s.validate();
  return s;
}

SolverConfig parse_solver(const json& j) {
  const std::string path = "solver";
  reject_unknown(j, path,
                 {"field_method", "coupling_mode", "geometric_nonlinearity", "v_start_v", "v_end_v",
                  "dv_v", "inner_tol", "max_inner_iter", "pullin_bisection_tol_v",
                  "n_beam_elements", "correction", "field_refinement", "relaxation",
                  "voltage_on"});
  SolverConfig c;
  if (auto v = text(j, "field_method", path))
    c.field_method = with_path(path + ".field_method", [&] { return field_method_from_string(*v); });
  if (auto v = text(j, "coupling_mode", path))
    c.coupling_mode =
        with_path(path + ".coupling_mode", [&] { return coupling_mode_from_string(*v); });
  if (auto v = flag(j, "geometric_nonlinearity", path)) c.geometric_nonlinearity = *v;
  if (auto v = number(j, "v_start_v", path)) c.v_start = *v;
  if (auto v = number(j, "v_end_v", path)) c.v_end = *v;
  if (auto v = number(j, "dv_v", path)) c.dv = *v;
  if (auto v = number(j, "inner_tol", path)) c.inner_tol = *v;
  if (auto v = integer(j, "max_inner_iter", path)) c.max_inner_iter = *v;
  if (auto v = number(j, "pullin_bisection_tol_v", path)) c.pullin_bisection_tol = *v;
  if (auto v = integer(j, "n_beam_elements", path)) c.n_beam_elements = *v;
  if (j.contains("correction") && !j["correction"].is_string()) {
    if (auto v = number(j, "correction", path)) c.correction = *v;
  }
  if (auto v = number(j, "field_refinement", path)) c.field_refinement = *v;
  if (auto v = number(j, "relaxation", path)) c.relaxation = *v;
  if (auto v = text(j, "voltage_on", path)) {
    if (*v == "counter_electrode") c.driven = DrivenElectrode::CounterElectrode;
    else if (*v == "beam") c.driven = DrivenElectrode::Beam;
    else fail(path + ".voltage_on", "expected 'counter_electrode' or 'beam'");
  }
  with_path(path, [&] {
    c.validate();
    return 0;
  });
  return c;
}

json specimen_to_json(const Specimen& s) {
  json doc;
  json sj;
  sj["id"] = s.id;
  sj["layout"] = to_string(s.layout);
  sj["length_m"] = s.length;
  sj["width_m"] = s.width;
  sj["thickness_m"] = s.thickness;
  sj["gap_m"] = s.gap;
  sj["tip_offset_m"] = s.tip_offset;
  sj["tip_shape"] = to_string(s.tip_shape);
  sj["counter_electrode_extent_m"] = s.counter_electrode_extent;
  sj["wafer_surface"] = s.wafer_surface_present;
  sj["wafer_distance_m"] = s.wafer_distance;
  json ranges = json::array();
  for (const auto& r : s.ranges) ranges.push_back({{"field", r.field}, {"min", r.min}, {"max", r.max}});
  sj["ranges"] = ranges;
  doc["specimen"] = sj;
  doc["material"] = {{"name", s.material.name},
                     {"young_modulus_pa", s.material.young_modulus},
                     {"poisson_ratio", s.material.poisson_ratio},
                     {"thermal_expansion_per_k", s.material.thermal_expansion}};
  const InitialState& i = s.initial_state;
  json ij = {{"strain", i.strain_initial},
             {"curvature_per_m", i.curvature_initial},
             {"axial_preload_n", i.axial_preload},
             {"moment_preload_nm", i.moment_preload}};
  if (!i.temp_uniform.empty())
    ij["temp_uniform"] = {{"x_m", i.temp_uniform.x}, {"value_k", i.temp_uniform.value}};
  if (!i.temp_field.empty())
    ij["temp_field"] = {{"x_m", i.temp_field.x},
                        {"y_m", i.temp_field.y},
                        {"value_k", i.temp_field.value}};
  doc["initial_state"] = ij;
  return doc;
}

}  // namespace

Specimen load_specimen(const std::string& json_text) {
  const json doc = parse_document(json_text);
  if (!doc.is_object()) fail("config", "expected a JSON object");
  return parse_specimen_document(doc);
}

SolverConfig load_solver_config(const std::string& json_text) {
  return parse_solver(parse_document(json_text));
}

RunConfig load_run_config(const std::string& json_text) {
  const json doc = parse_document(json_text);
  reject_unknown(doc, "config", {"specimen", "material", "initial_state", "solver", "lumped"});
  RunConfig cfg;
  if (doc.contains("lumped")) {
    const json& l = doc["lumped"];
    reject_unknown(l, "lumped", {"stiffness_n_per_m", "gap_m", "area_m2", "permittivity_f_per_m"});
    LumpedParameters p;
    p.stiffness = required_number(l, "stiffness_n_per_m", "lumped");
    p.gap = required_number(l, "gap_m", "lumped");
    p.area = required_number(l, "area_m2", "lumped");
    if (auto v = number(l, "permittivity_f_per_m", "lumped")) p.permittivity = *v;
    if (!(p.stiffness > 0.0)) fail("lumped.stiffness_n_per_m", "must be positive");
    if (!(p.gap > 0.0)) fail("lumped.gap_m", "gap must be positive");
    if (!(p.area > 0.0)) fail("lumped.area_m2", "must be positive");
    if (!(p.permittivity > 0.0)) fail("lumped.permittivity_f_per_m", "must be positive");
    cfg.lumped = p;
  }
  if (doc.contains("specimen")) cfg.specimen = parse_specimen_document(doc);
  if (!cfg.specimen && !cfg.lumped) fail("config", "either 'specimen' or 'lumped' is required");
  if (doc.contains("solver")) {
    cfg.solver = parse_solver(doc["solver"]);
    const auto& sj = doc["solver"];
    if (sj.contains("correction") && sj["correction"].is_string()) {
      if (sj["correction"].get<std::string>() != "calibrate")
        fail("solver.correction", "expected a number or \"calibrate\"");
      cfg.calibrate_correction = true;
    }
  }
  return cfg;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_run_config_file(const std::string& path) {
  return load_run_config(read_text_file(path));
}

std::string serialize(const Specimen& s) { return specimen_to_json(s).dump(2); }

std::vector<Specimen> load_catalog() {
  const char* dir = std::getenv("PULLIN_LAB_SEED_DIR");
  if (!dir || !*dir) return catalog();
  const std::filesystem::path file = std::filesystem::path(dir) / "catalog.json";
  if (!std::filesystem::exists(file)) return catalog();
  const json doc = parse_document(read_text_file(file.string()));
  if (!doc.is_array()) fail(file.string(), "expected an array of specimen documents");
  std::vector<Specimen> out;
  for (const auto& entry : doc) {
    if (!entry.is_object()) fail(file.string(), "expected an array of specimen documents");
    out.push_back(parse_specimen_document(entry));
  }
  return out;
}

}  // namespace pullin
