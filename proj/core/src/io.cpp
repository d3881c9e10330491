#include "evodyn/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace evodyn {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,total_mass";
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  for (std::size_t i = 0; i < n; ++i) os << ",w" << i;
  os << "\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << format_g17(traj.times[k]) << ',' << format_g17(traj.states[k].total_mass());
    for (double w : traj.states[k].weights()) os << ',' << format_g17(w);
    os << "\n";
  }
}

void write_measure_csv(std::ostream& os, const AtomicMeasure& mu) {
  const std::size_t d = mu.space()->dim();
  for (std::size_t k = 0; k < d; ++k) os << "q" << k << ',';
  os << "weight\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (double c : mu.space()->point(i).coords) os << format_g17(c) << ',';
    os << format_g17(mu.weights()[i]) << "\n";
  }
}

AtomicMeasure read_measure_csv(std::istream& is, const SpacePtr& space) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty measure CSV");
  std::vector<double> weights;
  std::vector<StrategyPoint> points;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != space->dim() + 1)
      throw std::invalid_argument("measure CSV column count mismatch");
    points.push_back({std::vector<double>(values.begin(), values.end() - 1)});
    weights.push_back(values.back());
  }
  if (weights.size() != space->size())
    throw std::invalid_argument("measure CSV row count does not match the space");
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!(points[i] == space->point(i)))
      throw std::invalid_argument("measure CSV points do not match the space");
  return AtomicMeasure(space, std::move(weights));
}

nlohmann::json measure_to_json(const AtomicMeasure& mu) {
  return {{"space_id", mu.space()->id()}, {"weights", mu.weights()}};
}

AtomicMeasure measure_from_json(const nlohmann::json& j, const SpacePtr& space) {
  if (!j.contains("space_id") || !j.contains("weights"))
    throw std::invalid_argument("measure JSON needs space_id and weights");
  if (j["space_id"].get<std::string>() != space->id())
    throw std::invalid_argument("measure JSON space_id does not match the space");
  return AtomicMeasure(space, j["weights"].get<std::vector<double>>());
}

namespace {

const char* json_type_name(const nlohmann::json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_null()) return "null";
  if (v.is_number_integer()) return "integer";
  return "number";
}

bool type_matches(const nlohmann::json& v, const std::string& want) {
  if (want == "number") return v.is_number();
  if (want == "integer") return v.is_number_integer();
  const std::string got = json_type_name(v);
  return got == want;
}

void validate_node(const nlohmann::json& doc, const nlohmann::json& schema,
                   const std::string& path, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_array()) {
      for (const auto& alt : t) ok = ok || type_matches(doc, alt.get<std::string>());
    } else {
      ok = type_matches(doc, t.get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": expected type " + t.dump() + ", got " + json_type_name(doc));
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& alt : schema["enum"]) ok = ok || alt == doc;
    if (!ok) errors.push_back(path + ": value not in enum");
  }
  if (schema.contains("minimum") && doc.is_number() &&
      doc.get<double>() < schema["minimum"].get<double>())
    errors.push_back(path + ": below minimum");
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!doc.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required key " + key.get<std::string>());
    const auto props = schema.contains("properties") ? schema["properties"]
                                                     : nlohmann::json::object();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (props.contains(it.key())) {
        validate_node(it.value(), props[it.key()], path + "/" + it.key(), errors);
      } else if (schema.contains("additionalProperties") &&
                 schema["additionalProperties"].is_boolean() &&
                 !schema["additionalProperties"].get<bool>()) {
        errors.push_back(path + ": unexpected key " + it.key());
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < doc.size(); ++i)
      validate_node(doc[i], schema["items"], path + "/" + std::to_string(i), errors);
  }
}

}  // namespace

std::vector<std::string> schema_validate(const nlohmann::json& doc,
                                         const nlohmann::json& schema) {
  std::vector<std::string> errors;
  validate_node(doc, schema, "", errors);
  return errors;
}

}  // namespace evodyn
