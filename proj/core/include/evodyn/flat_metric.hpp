#pragma once

#include <cstddef>
#include <vector>

#include "evodyn/measure.hpp"

namespace evodyn {

// Bounded-Lipschitz (flat) distance between measures on the same space:
//   sup { sum_i f_i (mu_i - nu_i) : |f_i| <= 1, |f_i - f_j| <= d(i,j) }.
// Metrizes weak* convergence on mass-bounded sets. Solved exactly as the
// equivalent transportation problem (transport at cost min(d,2), create or
// destroy mass at cost 1) by successive shortest paths.
double flat_distance(const AtomicMeasure& mu, const AtomicMeasure& nu);

// Same value plus an optimality certificate: an explicit test function on the
// union support that is feasible for the defining program and attains the
// value. Checking feasibility and equality of the two objectives proves the
// value exact by LP duality; the unit tests do exactly that.
struct FlatCertificate {
  double value = 0.0;
  std::vector<std::size_t> support;  // indices where mu and nu differ
  std::vector<double> witness;       // optimal f on those indices
  double witness_value = 0.0;        // sum over support of f_i (mu_i - nu_i)
};

FlatCertificate flat_distance_certificate(const AtomicMeasure& mu, const AtomicMeasure& nu);

}  // namespace evodyn
