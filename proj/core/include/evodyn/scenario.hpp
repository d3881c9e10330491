#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evodyn/analysis.hpp"
#include "evodyn/dynamics.hpp"
#include "evodyn/errors.hpp"
#include "evodyn/kernel.hpp"
#include "evodyn/strategy_space.hpp"
#include "evodyn/vitals.hpp"

namespace evodyn {

struct AnalysisSpec {
  bool permanence = false;
  double tail_fraction = 0.2;
  bool css = false;
  double css_tol = 1e-3;
  bool ess = false;
  bool equilibrium = false;
  std::vector<double> continuation_eps;       // empty: skip
  int partitions_depth = 0;                   // 0: skip mod-limit reports
  double mod_limit_tol = 1e-4;
  std::vector<std::size_t> persistence_set;   // empty: skip
  double persistence_eps = 0.0;
};

// A fully parsed scenario: everything needed to integrate and analyze one
// configuration.
struct Scenario {
  std::string name;
  SpacePtr space;
  VitalRates vitals;
  MutationKernel kernel;
  std::vector<double> initial_weights;
  double t_final = 0.0;
  OdeOptions run;
  double tie_tol = 1e-12;
  AnalysisSpec analyses;
};

Scenario scenario_from_json(const nlohmann::json& config, const std::string& base_dir = {});
Scenario load_scenario(const std::string& path);

// Tabulated vital rates from CSV columns: X, point index, f1, f2. Rejects
// tables violating the monotonicity of f1 (nonincreasing) or f2
// (nondecreasing).
VitalRates load_tabulated_csv(const std::string& path, std::size_t n_points, double x_max = 0.0);

// Integrates the scenario and runs its analyses; writes trajectory.csv (when
// requested), summary.json, assumptions.json and spectrum CSVs under
// out_dir. Returns the summary document.
nlohmann::json run_scenario(const Scenario& sc, const std::string& out_dir,
                            bool write_trajectory = true);

// Config and assumption checks only (no integration); writes nothing.
nlohmann::json validate_scenario(const Scenario& sc);

nlohmann::json assumptions_to_json(const AssumptionReport& rep);

}  // namespace evodyn
