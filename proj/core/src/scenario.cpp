#include "evodyn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "evodyn/flat_metric.hpp"
#include "evodyn/io.hpp"
#include "evodyn/partition.hpp"

namespace evodyn {

namespace {

const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key,
                                  const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing required key");
  return j[key];
}

double require_number(const nlohmann::json& j, const std::string& key, const std::string& path) {
  const auto& v = require_key(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::string require_string(const nlohmann::json& j, const std::string& key,
                           const std::string& path) {
  const auto& v = require_key(j, key, path);
  if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

SpacePtr parse_space(const nlohmann::json& j) {
  const std::string kind = require_string(j, "kind", "space");
  if (kind == "points") {
    const auto& pts = require_key(j, "points", "space");
    if (!pts.is_array() || pts.empty())
      throw ConfigError("space.points", "expected a nonempty array of coordinate arrays");
    std::vector<StrategyPoint> points;
    for (const auto& row : pts) {
      if (!row.is_array() || row.empty())
        throw ConfigError("space.points", "each point must be a coordinate array");
      points.push_back({row.get<std::vector<double>>()});
    }
    try {
      return make_finite(std::move(points));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("space.points", e.what());
    }
  }
  if (kind == "grid") {
    const auto& b = require_key(j, "bounds", "space");
    const auto& r = require_key(j, "resolution", "space");
    if (!b.is_array() || b.empty()) throw ConfigError("space.bounds", "expected [[lo,hi],...]");
    std::vector<std::array<double, 2>> bounds;
    for (const auto& row : b) {
      if (!row.is_array() || row.size() != 2)
        throw ConfigError("space.bounds", "each axis needs [lo, hi]");
      bounds.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    if (!r.is_array() || r.size() != bounds.size())
      throw ConfigError("space.resolution", "expected one entry per axis");
    std::vector<int> resolution = r.get<std::vector<int>>();

    std::function<bool(const StrategyPoint&)> mask;
    if (j.contains("mask")) {
      const auto& mj = j["mask"];
      const std::string mkind = require_string(mj, "kind", "space.mask");
      if (mkind != "ratio_le")
        throw ConfigError("space.mask.kind", "unknown mask kind '" + mkind + "'");
      const auto num = static_cast<std::size_t>(require_number(mj, "numerator_axis", "space.mask"));
      const auto den = static_cast<std::size_t>(require_number(mj, "denominator_axis", "space.mask"));
      const double value = require_number(mj, "value", "space.mask");
      const double tol = mj.value("tol", 1e-9);
      if (num >= bounds.size() || den >= bounds.size())
        throw ConfigError("space.mask", "mask axis out of range");
      mask = [=](const StrategyPoint& p) {
        return p.coords[num] <= p.coords[den] * value * (1.0 + tol);
      };
    }
    try {
      return make_grid(bounds, resolution, mask);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("space", e.what());
    }
  }
  throw ConfigError("space.kind", "unknown space kind '" + kind + "'");
}

// A per-point parameter is a constant, an explicit array, or derived from a
// coordinate: {"axis": k, "scale": s, "offset": o} -> s * q_k + o.
std::vector<double> parse_param(const nlohmann::json& j, const std::string& key,
                                const StrategySpace& space) {
  const auto& v = j[key];
  const std::size_t n = space.size();
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  if (v.is_array()) {
    auto out = v.get<std::vector<double>>();
    if (out.size() != n)
      throw ConfigError("vitals." + key, "expected one value per strategy point");
    return out;
  }
  if (v.is_object() && v.contains("axis")) {
    const auto axis = v["axis"].get<std::size_t>();
    if (axis >= space.dim()) throw ConfigError("vitals." + key + ".axis", "axis out of range");
    const double scale = v.value("scale", 1.0);
    const double offset = v.value("offset", 0.0);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * space.point(i).coords[axis] + offset;
    return out;
  }
  throw ConfigError("vitals." + key, "expected a number, array, or {axis, scale, offset}");
}

VitalRates parse_vitals(const nlohmann::json& j, const StrategySpace& space,
                        const std::string& base_dir) {
  const std::string family = require_string(j, "family", "vitals");
  const double x_max = j.value("x_max", 0.0);
  try {
    if (family == "tabulated") {
      const std::string file = require_string(j, "csv", "vitals");
      const auto path = std::filesystem::path(base_dir) / file;
      return load_tabulated_csv(path.string(), space.size(), x_max);
    }
    require_key(j, "b", "vitals");
    require_key(j, "d", "vitals");
    auto b = parse_param(j, "b", space);
    auto d = parse_param(j, "d", space);
    if (family == "logistic") {
      if (!j.contains("c")) throw ConfigError("vitals.c", "missing required key");
      return VitalRates::logistic(std::move(b), std::move(d), parse_param(j, "c", space), x_max);
    }
    if (family == "ricker" || family == "beverton_holt") {
      if (!j.contains("a")) throw ConfigError("vitals.a", "missing required key");
      auto a = parse_param(j, "a", space);
      return family == "ricker"
                 ? VitalRates::ricker(std::move(b), std::move(d), std::move(a), x_max)
                 : VitalRates::beverton_holt(std::move(b), std::move(d), std::move(a), x_max);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("vitals", e.what());
  }
  throw ConfigError("vitals.family", "unknown family '" + family + "'");
}

MutationKernel parse_kernel(const nlohmann::json& j, const StrategySpace& space) {
  const std::string kind = require_string(j, "kind", "kernel");
  try {
    if (kind == "pure_selection") return MutationKernel::pure_selection(space.size());
    if (kind == "epsilon_uniform")
      return MutationKernel::epsilon_uniform(space.size(),
                                             require_number(j, "epsilon", "kernel"));
    if (kind == "gaussian")
      return MutationKernel::gaussian(space, require_number(j, "sigma", "kernel"));
    if (kind == "custom") {
      const auto& m = require_key(j, "matrix", "kernel");
      if (!m.is_array()) throw ConfigError("kernel.matrix", "expected an array of rows");
      return MutationKernel::custom(m.get<std::vector<std::vector<double>>>());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("kernel", e.what());
  }
  throw ConfigError("kernel.kind", "unknown kernel kind '" + kind + "'");
}

std::vector<double> parse_initial(const nlohmann::json& j, const StrategySpace& space) {
  const std::string kind = require_string(j, "kind", "initial");
  const std::size_t n = space.size();
  if (kind == "uniform") {
    const double total = require_number(j, "total", "initial");
    if (total < 0.0) throw ConfigError("initial.total", "must be >= 0");
    return std::vector<double>(n, total / static_cast<double>(n));
  }
  if (kind == "atom") {
    const auto index = static_cast<std::size_t>(require_number(j, "index", "initial"));
    const double weight = require_number(j, "weight", "initial");
    if (index >= n) throw ConfigError("initial.index", "point index out of range");
    if (weight < 0.0) throw ConfigError("initial.weight", "must be >= 0");
    std::vector<double> w(n, 0.0);
    w[index] = weight;
    return w;
  }
  if (kind == "weights") {
    const auto& v = require_key(j, "weights", "initial");
    auto w = v.get<std::vector<double>>();
    if (w.size() != n) throw ConfigError("initial.weights", "expected one weight per point");
    for (double x : w)
      if (x < 0.0) throw ConfigError("initial.weights", "must be >= 0");
    return w;
  }
  throw ConfigError("initial.kind", "unknown initial kind '" + kind + "'");
}

void parse_run(const nlohmann::json& j, Scenario& sc) {
  sc.t_final = require_number(j, "t_final", "run");
  if (!(sc.t_final > 0.0)) throw ConfigError("run.t_final", "must be > 0");
  const std::string method = j.value("method", std::string("rk4"));
  if (method == "rk4") {
    sc.run.method = OdeOptions::Method::rk4;
  } else if (method == "rk45") {
    sc.run.method = OdeOptions::Method::rk45;
  } else {
    throw ConfigError("run.method", "expected rk4 or rk45");
  }
  sc.run.step = j.value("h", 0.01);
  sc.run.tol = j.value("tol", 1e-8);
  sc.run.record_every = j.value("record_every", 1);
  if (!(sc.run.step > 0.0)) throw ConfigError("run.h", "must be > 0");
  if (!(sc.run.tol > 0.0)) throw ConfigError("run.tol", "must be > 0");
  if (sc.run.record_every < 1) throw ConfigError("run.record_every", "must be >= 1");
}

void parse_analyses(const nlohmann::json& j, Scenario& sc) {
  AnalysisSpec& a = sc.analyses;
  if (j.contains("permanence")) {
    a.permanence = true;
    if (j["permanence"].is_object())
      a.tail_fraction = j["permanence"].value("tail_fraction", 0.2);
  }
  if (j.contains("css")) {
    a.css = true;
    if (j["css"].is_object()) a.css_tol = j["css"].value("tol", 1e-3);
  }
  if (j.contains("ess")) a.ess = j["ess"].is_boolean() ? j["ess"].get<bool>() : true;
  if (j.contains("equilibrium"))
    a.equilibrium = j["equilibrium"].is_boolean() ? j["equilibrium"].get<bool>() : true;
  if (j.contains("continuation")) {
    const auto& c = j["continuation"];
    a.continuation_eps = require_key(c, "eps", "analyses.continuation").get<std::vector<double>>();
    if (a.continuation_eps.empty())
      throw ConfigError("analyses.continuation.eps", "expected a nonempty list");
  }
  if (j.contains("partitions")) {
    a.partitions_depth = static_cast<int>(require_number(j["partitions"], "depth", "analyses.partitions"));
    if (a.partitions_depth < 1) throw ConfigError("analyses.partitions.depth", "must be >= 1");
    a.mod_limit_tol = j["partitions"].value("tol", 1e-4);
  }
  if (j.contains("persistence")) {
    const auto& p = j["persistence"];
    a.persistence_set =
        require_key(p, "set", "analyses.persistence").get<std::vector<std::size_t>>();
    a.persistence_eps = require_number(p, "epsilon", "analyses.persistence");
    if (a.persistence_set.empty())
      throw ConfigError("analyses.persistence.set", "expected a nonempty index list");
    for (std::size_t q : a.persistence_set)
      if (q >= sc.space->size())
        throw ConfigError("analyses.persistence.set", "point index out of range");
  }
}

}  // namespace

VitalRates load_tabulated_csv(const std::string& path, std::size_t n_points, double x_max) {
  std::ifstream in(path);
  if (!in) throw ConfigError("vitals.csv", "cannot open '" + path + "'");
  std::map<double, std::vector<std::pair<double, double>>> rows;  // X -> per point (f1, f2)
  std::string line;
  std::getline(in, line);  // header: X,point,f1,f2
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != 4)
      throw ConfigError("vitals.csv", "line " + std::to_string(lineno) + ": expected X,point,f1,f2");
    auto& row = rows[vals[0]];
    row.resize(n_points, {-1.0, -1.0});
    const auto q = static_cast<std::size_t>(vals[1]);
    if (q >= n_points)
      throw ConfigError("vitals.csv", "line " + std::to_string(lineno) + ": point index out of range");
    row[q] = {vals[2], vals[3]};
  }
  if (rows.size() < 2) throw ConfigError("vitals.csv", "need at least two X rows");
  std::vector<double> x;
  std::vector<std::vector<double>> f1, f2;
  for (const auto& [X, row] : rows) {
    x.push_back(X);
    std::vector<double> r1(n_points), r2(n_points);
    for (std::size_t q = 0; q < n_points; ++q) {
      if (row.size() <= q || row[q].first < 0.0)
        throw ConfigError("vitals.csv", "missing entry for point " + std::to_string(q) +
                                            " at X=" + format_g17(X));
      r1[q] = row[q].first;
      r2[q] = row[q].second;
    }
    f1.push_back(std::move(r1));
    f2.push_back(std::move(r2));
  }
  for (std::size_t q = 0; q < n_points; ++q) {
    for (std::size_t k = 1; k < x.size(); ++k) {
      if (f1[k][q] > f1[k - 1][q] + 1e-12)
        throw ConfigError("vitals.csv", "f1 must be nonincreasing in X (point " +
                                            std::to_string(q) + ")");
      if (f2[k][q] < f2[k - 1][q] - 1e-12)
        throw ConfigError("vitals.csv", "f2 must be nondecreasing in X (point " +
                                            std::to_string(q) + ")");
    }
  }
  try {
    return VitalRates::tabulated(std::move(x), std::move(f1), std::move(f2), x_max);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("vitals.csv", e.what());
  }
}

Scenario scenario_from_json(const nlohmann::json& config, const std::string& base_dir) {
  if (!config.is_object()) throw ConfigError("", "config root must be an object");
  Scenario sc;
  sc.name = config.value("name", std::string("scenario"));
  sc.space = parse_space(require_key(config, "space", ""));
  sc.vitals = parse_vitals(require_key(config, "vitals", ""), *sc.space, base_dir);
  sc.kernel = config.contains("kernel")
                  ? parse_kernel(config["kernel"], *sc.space)
                  : MutationKernel::pure_selection(sc.space->size());
  sc.initial_weights = parse_initial(require_key(config, "initial", ""), *sc.space);
  parse_run(require_key(config, "run", ""), sc);
  sc.tie_tol = config.value("tie_tol", 1e-12);
  if (sc.tie_tol < 0.0) throw ConfigError("tie_tol", "must be >= 0");
  if (config.contains("analyses")) parse_analyses(config["analyses"], sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config '" + path + "'");
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return scenario_from_json(config, std::filesystem::path(path).parent_path().string());
}

namespace {

nlohmann::json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

nlohmann::json fitness_to_json(const FitnessReport& fit) {
  nlohmann::json k = nlohmann::json::array();
  for (double v : fit.K) k.push_back(finite_or_null(v));
  return {{"R0", fit.R0},
          {"K", k},
          {"fittest", fit.fittest},
          {"weakest", fit.weakest},
          {"K_Q", finite_or_null(fit.K_Q)},
          {"k_q", finite_or_null(fit.k_q)},
          {"capacity_unbounded", fit.capacity_unbounded}};
}

nlohmann::json eigenvalues_to_json(const std::vector<std::complex<double>>& eig) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& z : eig) out.push_back({{"re", z.real()}, {"im", z.imag()}});
  return out;
}

void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<std::complex<double>>& eig) {
  std::ofstream os(path);
  os << "re,im\n";
  for (const auto& z : eig) os << format_g17(z.real()) << ',' << format_g17(z.imag()) << "\n";
}

nlohmann::json equilibrium_to_json(const EquilibriumResult& eq) {
  return {{"residual", eq.residual},
          {"converged", eq.converged},
          {"stable", eq.stable},
          {"in_cone", eq.in_cone},
          {"newton_iters", eq.newton_iters},
          {"weights", eq.state.weights()},
          {"eigenvalues", eigenvalues_to_json(eq.eigenvalues)}};
}

}  // namespace

nlohmann::json assumptions_to_json(const AssumptionReport& rep) {
  auto one = [](const AssumptionCheck& c) {
    return nlohmann::json{{"pass", c.pass}, {"note", c.note}};
  };
  return {{"A1", one(rep.a1)}, {"A2", one(rep.a2)}, {"A3", one(rep.a3)},
          {"A4", one(rep.a4)}, {"A5", one(rep.a5)}, {"A6", one(rep.a6)},
          {"varpi", rep.varpi}, {"plateau", rep.plateau}, {"all_pass", rep.all_pass()}};
}

nlohmann::json validate_scenario(const Scenario& sc) {
  const AssumptionReport rep =
      check_assumptions(sc.vitals, *sc.space, default_x_grid(sc.vitals), sc.tie_tol);
  return {{"scenario", sc.name},
          {"space", {{"id", sc.space->id()}, {"size", sc.space->size()}, {"dim", sc.space->dim()}}},
          {"assumptions", assumptions_to_json(rep)}};
}

nlohmann::json run_scenario(const Scenario& sc, const std::string& out_dir,
                            bool write_trajectory) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  const AtomicMeasure u(sc.space, sc.initial_weights);
  const FitnessReport fit = fitness_report(sc.vitals, *sc.space, sc.tie_tol);
  const AssumptionReport assumptions =
      check_assumptions(sc.vitals, *sc.space, default_x_grid(sc.vitals), sc.tie_tol);

  const Trajectory traj = integrate_ode(u, sc.kernel, sc.vitals, sc.t_final, sc.run);

  nlohmann::json summary = {
      {"scenario", sc.name},
      {"space", {{"id", sc.space->id()}, {"size", sc.space->size()}, {"dim", sc.space->dim()}}},
      {"fitness", fitness_to_json(fit)},
      {"assumptions_pass", assumptions.all_pass()},
      {"run",
       {{"t_final", sc.t_final},
        {"method", sc.run.method == OdeOptions::Method::rk4 ? "rk4" : "rk45"},
        {"steps", traj.stats.steps},
        {"rejected", traj.stats.rejected},
        {"max_error", traj.stats.max_error},
        {"recorded", traj.size()}}},
      {"final_state",
       {{"total_mass", traj.final_state().total_mass()},
        {"weights", traj.final_state().weights()}}},
  };

  const AnalysisSpec& a = sc.analyses;
  if (a.permanence) {
    const PermanenceReport rep = permanence_check(traj, sc.vitals, a.tail_fraction, sc.tie_tol);
    summary["permanence"] = {{"k_q", finite_or_null(rep.k_q)},
                             {"K_Q", finite_or_null(rep.K_Q)},
                             {"envelope_ok", rep.envelope_ok},
                             {"liminf_est", rep.liminf_est},
                             {"limsup_est", rep.limsup_est},
                             {"permanent", rep.permanent}};
  }
  if (a.css) {
    const CssReport rep = css_diagnostic(traj, sc.vitals, sc.tie_tol, a.css_tol);
    summary["css"] = {{"hypothesis_ok", rep.hypothesis_ok},
                      {"distance_to_target", rep.distance_to_target},
                      {"converged", rep.converged},
                      {"K_Q", finite_or_null(rep.K_Q)},
                      {"target_class", rep.target_class},
                      {"tol", a.css_tol}};
  }
  if (a.ess) {
    const bool fittest_ess = is_ess(sc.vitals, *sc.space, fit.fittest.front(), sc.tie_tol);
    summary["ess"] = {{"fittest_class", fittest_ess}};
  }
  if (a.equilibrium) {
    const AtomicMeasure guess = AtomicMeasure(sc.space, traj.final_state().weights());
    try {
      const EquilibriumResult eq = find_equilibrium(sc.vitals, sc.kernel, guess);
      summary["equilibrium"] = equilibrium_to_json(eq);
      write_spectrum_csv(dir / "equilibrium_spectrum.csv", eq.eigenvalues);
    } catch (const NewtonError& err) {
      summary["equilibrium"] = equilibrium_to_json(err.best());
      summary["equilibrium"]["error"] = err.what();
    }
  }
  if (!a.continuation_eps.empty()) {
    const ContinuationResult cont = continuation(
        sc.vitals, sc.space,
        [&](double eps) { return MutationKernel::epsilon_uniform(sc.space->size(), eps); },
        a.continuation_eps);
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t k = 0; k < cont.entries.size(); ++k) {
      const ContinuationEntry& e = cont.entries[k];
      entries.push_back({{"eps", e.eps},
                         {"residual", e.equilibrium.residual},
                         {"stable", e.equilibrium.stable},
                         {"distance_to_limit", e.distance_to_limit},
                         {"weights", e.equilibrium.state.weights()}});
      write_spectrum_csv(dir / ("continuation_spectrum_" + std::to_string(k) + ".csv"),
                         e.equilibrium.eigenvalues);
    }
    summary["continuation"] = {{"completed", cont.completed}, {"entries", entries}};
    if (!cont.completed) {
      summary["continuation"]["failed_eps"] = cont.failed_eps;
      summary["continuation"]["failure"] = cont.failure;
    }
  }
  if (a.partitions_depth > 0) {
    nlohmann::json limits = nlohmann::json::array();
    auto report_limit = [&](const Partition& p, const std::string& label) {
      const auto limit = mod_limit(traj, p, a.tail_fraction, a.mod_limit_tol);
      nlohmann::json entry = {{"partition", label},
                              {"classes", p.num_classes},
                              {"exists", limit.has_value()},
                              {"tol", a.mod_limit_tol}};
      if (limit) entry["weights"] = limit->weights();
      limits.push_back(std::move(entry));
    };
    report_limit(partition_bottom(sc.space), "bottom");
    report_limit(partition_top(sc.space), "top");
    report_limit(partition_r_level_sets(sc.space, sc.vitals, std::max(sc.tie_tol, 1e-9)), "r_level_sets");
    for (int i = 1; i <= a.partitions_depth; ++i)
      report_limit(partition_dyadic(sc.space, i), "dyadic:" + std::to_string(i));
    summary["mod_limits"] = std::move(limits);
  }
  if (!a.persistence_set.empty()) {
    const bool cond =
        persistence_condition(sc.vitals, sc.kernel, a.persistence_set, a.persistence_eps);
    const std::vector<double> mass = traj.masses();
    const std::size_t count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(a.tail_fraction * static_cast<double>(mass.size()))));
    const double tail_max = *std::max_element(mass.end() - count, mass.end());
    double initial_set_mass = 0.0;
    for (std::size_t q : a.persistence_set) initial_set_mass += sc.initial_weights[q];
    summary["persistence"] = {{"condition", cond},
                              {"epsilon", a.persistence_eps},
                              {"initial_set_mass", initial_set_mass},
                              {"tail_max_mass", tail_max},
                              {"witnessed", cond && initial_set_mass > 0.0 &&
                                                tail_max >= a.persistence_eps - 1e-3}};
  }

  if (write_trajectory) {
    std::ofstream os(dir / "trajectory.csv");
    write_trajectory_csv(os, traj);
  }
  {
    std::ofstream os(dir / "assumptions.json");
    os << assumptions_to_json(assumptions).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "summary.json");
    os << summary.dump(2) << "\n";
  }
  return summary;
}

}  // namespace evodyn
