#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "pullin/config.hpp"
#include "pullin/errors.hpp"
#include "pullin/specimens.hpp"

using namespace pullin;

namespace {

const char* kMinimalSpecimen = R"({
  "specimen": {"id": "x", "layout": "InPlane", "length_m": 205e-6, "width_m": 15e-6,
               "thickness_m": 1.9e-6, "gap_m": GAP},
  "material": {"name": "polysilicon", "young_modulus_pa": 160e9, "poisson_ratio": 0.22}
})";

std::string minimal_specimen(const std::string& gap) {
  std::string text = kMinimalSpecimen;
  text.replace(text.find("GAP"), 3, gap);
  return text;
}

}  // namespace

TEST_SUITE("specimens") {

TEST_CASE("catalog holds twelve specimens with unique ids") {
  const auto cat = catalog();
  REQUIRE(cat.size() == 12);
  std::set<std::string> ids;
  for (const auto& s : cat) ids.insert(s.id);
  CHECK(ids.size() == 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(cat[static_cast<std::size_t>(i)].id == std::to_string(i + 1));
    CHECK(cat[static_cast<std::size_t>(i)].layout == (i < 8 ? Layout::InPlane : Layout::OutOfPlane));
  }
}

TEST_CASE("catalog row 4") {
  const Specimen s = catalog()[3];
  CHECK(s.id == "4");
  CHECK(s.length == doctest::Approx(205e-6));
  CHECK(s.width == doctest::Approx(15e-6));
  CHECK(s.thickness == doctest::Approx(1.9e-6));
  CHECK(s.gap == doctest::Approx(10.0e-6));
  CHECK(s.tip_shape == TipShape::Rounded);
  CHECK(s.counter_electrode_extent == doctest::Approx(s.length));
  CHECK(s.wafer_surface_present);
}

TEST_CASE("catalog row 10 uses range midpoints") {
  const Specimen s = catalog()[9];
  CHECK(s.id == "10");
  CHECK(s.length == doctest::Approx(190e-6));
  CHECK(s.width == doctest::Approx(32e-6));
  CHECK(s.thickness == doctest::Approx(1.8e-6));
  CHECK(s.gap == doctest::Approx(3.07e-6));
  CHECK(s.tip_offset == doctest::Approx(3.95e-6));
  CHECK_FALSE(s.wafer_surface_present);
  bool has_gap_range = false;
  for (const auto& r : s.ranges) {
    if (r.field == "gap") {
      has_gap_range = true;
      CHECK(r.midpoint() == doctest::Approx(s.gap));
      CHECK(r.min < r.max);
    }
  }
  CHECK(has_gap_range);
}

TEST_CASE("catalog row 12 is nearly straight") {
  const Specimen s = catalog()[11];
  CHECK(s.id == "12");
  CHECK(s.tip_offset == doctest::Approx(0.04e-6));
}

TEST_CASE("catalog row 9 length is the range midpoint") {
  CHECK(catalog()[8].length == doctest::Approx(533e-6));
}

TEST_CASE("out-of-plane catalog entries carry the curvature of their tip offset") {
  for (const auto& s : catalog()) {
    if (s.layout != Layout::OutOfPlane) continue;
    CAPTURE(s.id);
    CHECK(std::abs(s.initial_state.curvature_initial) ==
          doctest::Approx(std::abs(curvature_from_tip_offset(s.tip_offset, s.length))));
    CHECK(s.counter_electrode_extent > 0.0);
    CHECK(s.counter_electrode_extent <= s.length);
  }
}

TEST_CASE("find_in_catalog") {
  CHECK(find_in_catalog("7").has_value());
  CHECK_FALSE(find_in_catalog("13").has_value());
}

TEST_CASE("derive_section for specimen 4") {
  const Section sec = derive_section(catalog()[3]);
  CHECK(sec.area == doctest::Approx(2.85e-11).epsilon(1e-12));
  CHECK(sec.second_moment == doctest::Approx(8.574e-24).epsilon(1e-3));
  CHECK(sec.shear_correction == doctest::Approx(5.0 / 6.0));
  CHECK(sec.flexural_dim == doctest::Approx(1.9e-6));
  CHECK(sec.depth == doctest::Approx(15e-6));
}

TEST_CASE("derive_section for the unit square") {
  Specimen s = catalog()[0];
  s.thickness = 1.0;
  s.width = 1.0;
  const Section sec = derive_section(s);
  CHECK(sec.area == 1.0);
  CHECK(sec.second_moment == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("derive_section for specimen 12") {
  const Section sec = derive_section(catalog()[11]);
  CHECK(sec.second_moment == doctest::Approx(33e-6 * std::pow(4.84e-6, 3) / 12.0).epsilon(1e-12));
}

TEST_CASE("property: second moment is exactly w t^3 / 12 for every catalog specimen") {
  for (const auto& s : catalog()) {
    const Section sec = derive_section(s);
    const double expected = s.width * s.thickness * s.thickness * s.thickness / 12.0;
    CAPTURE(s.id);
    CHECK(std::abs(sec.second_moment - expected) / expected < 1e-12);
    CHECK(std::abs(sec.area - s.width * s.thickness) / sec.area < 1e-12);
  }
}

TEST_CASE("property: serialize round-trips every catalog specimen") {
  for (const auto& s : catalog()) {
    CAPTURE(s.id);
    CHECK(load_specimen(serialize(s)) == s);
  }
}

TEST_CASE("a config duplicating catalog row 4 loads equal to the catalog entry") {
  const std::string text = R"({
    "specimen": {"id": "4", "layout": "InPlane", "length_m": 205e-6, "width_m": 15e-6,
                 "thickness_m": 1.9e-6, "gap_m": 10.0e-6},
    "material": {"name": "epitaxial polysilicon", "young_modulus_pa": 160e9,
                 "poisson_ratio": 0.22, "thermal_expansion_per_k": 2.6e-6}
  })";
  Specimen loaded = load_specimen(text);
  Specimen expected = catalog()[3];
  loaded.ranges = expected.ranges;
  CHECK(loaded == expected);
}

TEST_CASE("negative gap is a validation error") {
  try {
    load_specimen(minimal_specimen("-1e-6"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gap must be positive") != std::string::npos);
  }
}

TEST_CASE("schema violations name the field") {
  try {
    load_specimen(minimal_specimen("\"wide\""));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("specimen.gap_m") != std::string::npos);
  }
  CHECK_THROWS_AS(load_specimen("{ not json"), ConfigError);
  std::string unknown = minimal_specimen("3e-6");
  unknown.insert(unknown.find("\"id\""), "\"colour\": 1, ");
  CHECK_THROWS_WITH_AS(load_specimen(unknown), doctest::Contains("colour"), ConfigError);
}

TEST_CASE("omitted optional fields take documented defaults") {
  const Specimen s = load_specimen(minimal_specimen("10e-6"));
  CHECK(s.initial_state.is_zero());
  CHECK(s.initial_state == InitialState{});
  CHECK(s.tip_shape == TipShape::Rounded);
  CHECK(s.counter_electrode_extent == doctest::Approx(s.length));
  CHECK(s.wafer_surface_present);
  CHECK(s.tip_offset == 0.0);
}

TEST_CASE("out-of-plane specimens need an electrode extent and default to no wafer") {
  std::string text = minimal_specimen("3e-6");
  text.replace(text.find("InPlane"), 7, "OutOfPlane");
  CHECK_THROWS_AS(load_specimen(text), ConfigError);
  text.insert(text.find("\"id\""), "\"counter_electrode_extent_m\": 100e-6, ");
  const Specimen s = load_specimen(text);
  CHECK_FALSE(s.wafer_surface_present);
  CHECK(s.counter_electrode_extent == doctest::Approx(100e-6));
}

TEST_CASE("material validation") {
  Material m = polysilicon();
  CHECK_NOTHROW(m.validate());
  m.poisson_ratio = 0.5;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  CHECK(polysilicon().young_modulus == doctest::Approx(160e9));
  CHECK(gold().young_modulus == doctest::Approx(78e9));
  CHECK(gold().poisson_ratio == doctest::Approx(0.44));
}

TEST_CASE("seed directory overrides the catalog") {
  const auto dir = std::filesystem::temp_directory_path() / "pullin_seed_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "catalog.json");
    out << "[" << serialize(catalog()[3]) << "]";
  }
  setenv("PULLIN_LAB_SEED_DIR", dir.c_str(), 1);
  const auto cat = load_catalog();
  unsetenv("PULLIN_LAB_SEED_DIR");
  std::filesystem::remove_all(dir);
  REQUIRE(cat.size() == 1);
  CHECK(cat[0] == catalog()[3]);
}

}  // TEST_SUITE
