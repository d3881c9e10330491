#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evodyn/dynamics.hpp"
#include "evodyn/measure.hpp"

namespace evodyn {

// Shortest-round-trip decimal form of a double (17 significant digits).
std::string format_g17(double x);

// Columns: t, total_mass, w0..w{N-1}. Deterministic formatting byte-for-byte.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// One row per point: coord_0..coord_{d-1}, weight.
void write_measure_csv(std::ostream& os, const AtomicMeasure& mu);
AtomicMeasure read_measure_csv(std::istream& is, const SpacePtr& space);

// {"space_id": ..., "weights": [...]}
nlohmann::json measure_to_json(const AtomicMeasure& mu);
AtomicMeasure measure_from_json(const nlohmann::json& j, const SpacePtr& space);

// Validates a document against the subset of JSON Schema this project uses
// (type, properties, required, items, enum, minimum, additionalProperties).
// Returns human-readable violations; empty means valid.
std::vector<std::string> schema_validate(const nlohmann::json& doc,
                                         const nlohmann::json& schema);

}  // namespace evodyn
