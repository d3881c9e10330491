#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "evodyn/io.hpp"
#include "evodyn/scenario.hpp"

using namespace evodyn;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_config() {
  return nlohmann::json::parse(R"({
    "name": "unit",
    "space": {"kind": "points", "points": [[2, 1], [1.5, 1]]},
    "vitals": {"family": "logistic", "b": [2, 1.5], "d": 1, "c": 1},
    "kernel": {"kind": "pure_selection"},
    "initial": {"kind": "weights", "weights": [0.1, 0.1]},
    "run": {"t_final": 1.0, "method": "rk4", "h": 0.01, "record_every": 10}
  })");
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("evodyn_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("g17 formatting round-trips doubles exactly") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 200; ++k) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::stod(format_g17(x)) == x);
  }
}

TEST_CASE("measure CSV and JSON round trips") {
  auto s = make_finite({{{2, 1}}, {{1.5, 1}}}, "pair");
  AtomicMeasure mu(s, {0.1234567890123456789, -3.33e-7});
  SUBCASE("csv") {
    std::stringstream ss;
    write_measure_csv(ss, mu);
    auto back = read_measure_csv(ss, s);
    CHECK(back.weights() == mu.weights());
  }
  SUBCASE("json") {
    auto j = measure_to_json(mu);
    auto back = measure_from_json(j, s);
    CHECK(back.weights() == mu.weights());
    auto other = make_finite({{{2, 1}}, {{1.5, 1}}}, "other");
    CHECK_THROWS_AS(measure_from_json(j, other), std::invalid_argument);
  }
}

TEST_CASE("schema subset validator") {
  const auto schema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["a", "b"],
    "properties": {
      "a": {"type": "number", "minimum": 0},
      "b": {"type": "array", "items": {"type": "integer"}},
      "c": {"enum": ["x", "y"]}
    }
  })");
  CHECK(schema_validate(nlohmann::json::parse(R"({"a": 1, "b": [1, 2]})"), schema).empty());
  CHECK_FALSE(schema_validate(nlohmann::json::parse(R"({"a": 1})"), schema).empty());
  CHECK_FALSE(schema_validate(nlohmann::json::parse(R"({"a": -1, "b": []})"), schema).empty());
  CHECK_FALSE(
      schema_validate(nlohmann::json::parse(R"({"a": 1, "b": [1.5]})"), schema).empty());
  CHECK_FALSE(
      schema_validate(nlohmann::json::parse(R"({"a": 1, "b": [], "c": "z"})"), schema).empty());
}

TEST_CASE("scenario parsing") {
  SUBCASE("minimal config parses") {
    auto sc = scenario_from_json(minimal_config());
    CHECK(sc.space->size() == 2);
    CHECK(sc.kernel.is_identity());
    CHECK(sc.t_final == 1.0);
  }
  SUBCASE("missing keys name the offending path") {
    auto bad = minimal_config();
    bad.erase("initial");
    try {
      scenario_from_json(bad);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("initial") != std::string::npos);
    }
  }
  SUBCASE("malformed kernel rows are rejected") {
    auto bad = minimal_config();
    bad["kernel"] = {{"kind", "custom"},
                     {"matrix", {{0.5, 0.4}, {0.5, 0.5}}}};
    try {
      scenario_from_json(bad);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("kernel") != std::string::npos);
    }
  }
  SUBCASE("empty masked grids are rejected") {
    auto bad = minimal_config();
    bad["space"] = {{"kind", "grid"},
                    {"bounds", {{1.0, 2.0}}},
                    {"resolution", {4}},
                    {"mask",
                     {{"kind", "ratio_le"},
                      {"numerator_axis", 0},
                      {"denominator_axis", 0},
                      {"value", -1.0}}}};
    CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
  }
  SUBCASE("axis-derived parameters") {
    auto cfg = minimal_config();
    cfg["vitals"] = {{"family", "logistic"},
                     {"b", {{"axis", 0}}},
                     {"d", {{"axis", 1}}},
                     {"c", 1.0}};
    auto sc = scenario_from_json(cfg);
    CHECK(sc.vitals.birth(0.0, 0) == 2.0);
    CHECK(sc.vitals.birth(0.0, 1) == 1.5);
  }
  SUBCASE("weight count must match the space") {
    auto bad = minimal_config();
    bad["initial"]["weights"] = {0.1};
    CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
  }
}

TEST_CASE("tabulated CSV loading enforces monotonicity") {
  TempDir tmp;
  const fs::path good = tmp.path / "rates.csv";
  {
    std::ofstream os(good);
    os << "X,point,f1,f2\n";
    os << "0,0,2,1\n0,1,1.5,1\n";
    os << "1,0,1.5,1.5\n1,1,1.2,1.2\n";
    os << "2,0,1.0,2.0\n2,1,1.0,1.5\n";
  }
  auto v = load_tabulated_csv(good.string(), 2);
  CHECK(v.size() == 2);
  CHECK(v.birth(0.5, 0) == doctest::Approx(1.75));  // interpolated
  CHECK(v.death(2.5, 1) == doctest::Approx(1.5));   // clamped past the table

  const fs::path bad = tmp.path / "bad.csv";
  {
    std::ofstream os(bad);
    os << "X,point,f1,f2\n";
    os << "0,0,1.0,1\n1,0,2.0,1\n";  // f1 increases
  }
  CHECK_THROWS_AS(load_tabulated_csv(bad.string(), 1), ConfigError);
}

TEST_CASE("run_scenario writes deterministic artifacts") {
  TempDir tmp;
  auto cfg = minimal_config();
  cfg["analyses"] = {{"permanence", true}, {"css", nlohmann::json{{"tol", 1e-3}}}};
  auto sc = scenario_from_json(cfg);

  auto summary1 = run_scenario(sc, (tmp.path / "a").string(), true);
  auto summary2 = run_scenario(sc, (tmp.path / "b").string(), true);

  CHECK(slurp(tmp.path / "a" / "trajectory.csv") == slurp(tmp.path / "b" / "trajectory.csv"));
  CHECK(slurp(tmp.path / "a" / "summary.json") == slurp(tmp.path / "b" / "summary.json"));
  CHECK(fs::exists(tmp.path / "a" / "assumptions.json"));

  CHECK(summary1["scenario"] == "unit");
  CHECK(summary1["final_state"]["total_mass"].is_number());
  CHECK(summary1["permanence"]["envelope_ok"].get<bool>());
  CHECK(summary1["assumptions_pass"].get<bool>());
  CHECK(summary1 == summary2);
}
