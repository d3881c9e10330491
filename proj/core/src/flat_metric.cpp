#include "evodyn/flat_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evodyn/errors.hpp"

namespace evodyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Arc {
  int to;
  double cap;
  double cost;
  int rev;
};

class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : adj_(n), potential_(n, 0.0) {}

  void add_edge(int u, int v, double cap, double cost) {
    adj_[u].push_back({v, cap, cost, static_cast<int>(adj_[v].size())});
    adj_[v].push_back({u, 0.0, -cost, static_cast<int>(adj_[u].size()) - 1});
  }

  // Sends `target` units from s to t, returns total cost. Costs must be
  // nonnegative on forward arcs.
  double run(int s, int t, double target) {
    const int n = static_cast<int>(adj_.size());
    const double eps = 1e-13 * std::max(1.0, target);
    double sent = 0.0;
    double total_cost = 0.0;
    long guard = 50L * n + 100;
    while (target - sent > eps) {
      if (--guard < 0) throw NumericalError("flat metric flow solver did not terminate");
      std::vector<double> dist(n, kInf);
      std::vector<int> prev_node(n, -1), prev_arc(n, -1);
      std::vector<bool> done(n, false);
      dist[s] = 0.0;
      for (;;) {
        int u = -1;
        double best = kInf;
        for (int v = 0; v < n; ++v)
          if (!done[v] && dist[v] < best) { best = dist[v]; u = v; }
        if (u < 0) break;
        done[u] = true;
        for (int a = 0; a < static_cast<int>(adj_[u].size()); ++a) {
          const Arc& e = adj_[u][a];
          if (e.cap <= eps) continue;
          double rc = e.cost + potential_[u] - potential_[e.to];
          if (rc < 0.0) rc = 0.0;  // rounding guard
          if (dist[u] + rc < dist[e.to]) {
            dist[e.to] = dist[u] + rc;
            prev_node[e.to] = u;
            prev_arc[e.to] = a;
          }
        }
      }
      if (dist[t] == kInf) throw NumericalError("flat metric flow is infeasible");
      for (int v = 0; v < n; ++v)
        if (dist[v] < kInf) potential_[v] += std::min(dist[v], dist[t]);

      double aug = target - sent;
      for (int v = t; v != s; v = prev_node[v])
        aug = std::min(aug, adj_[prev_node[v]][prev_arc[v]].cap);
      for (int v = t; v != s; v = prev_node[v]) {
        Arc& e = adj_[prev_node[v]][prev_arc[v]];
        e.cap -= aug;
        adj_[v][e.rev].cap += aug;
        total_cost += e.cost * aug;
      }
      sent += aug;
    }
    return total_cost;
  }

  double potential(int v) const { return potential_[v]; }

 private:
  std::vector<std::vector<Arc>> adj_;
  std::vector<double> potential_;
};

}  // namespace

FlatCertificate flat_distance_certificate(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  if (!same_space(mu, nu))
    throw std::invalid_argument("flat_distance: measures on different spaces");
  const StrategySpace& space = *mu.space();

  FlatCertificate cert;
  std::vector<std::size_t> supply_idx, demand_idx;
  std::vector<double> supply, demand;
  double total_supply = 0.0, total_demand = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double delta = mu.weights()[i] - nu.weights()[i];
    if (delta == 0.0) continue;
    cert.support.push_back(i);
    if (delta > 0.0) {
      supply_idx.push_back(i);
      supply.push_back(delta);
      total_supply += delta;
    } else {
      demand_idx.push_back(i);
      demand.push_back(-delta);
      total_demand += -delta;
    }
  }

  if (cert.support.empty()) return cert;
  if (demand_idx.empty()) {  // optimal f is identically +1
    cert.value = total_supply;
    cert.witness.assign(cert.support.size(), 1.0);
    cert.witness_value = total_supply;
    return cert;
  }
  if (supply_idx.empty()) {  // optimal f is identically -1
    cert.value = total_demand;
    cert.witness.assign(cert.support.size(), -1.0);
    cert.witness_value = total_demand;
    return cert;
  }

  const int m = static_cast<int>(supply_idx.size());
  const int k = static_cast<int>(demand_idx.size());
  // nodes: 0 = src, 1..m supplies, m+1 = dummy supply, m+2..m+1+k demands,
  // m+k+2 = dummy demand, m+k+3 = snk
  const int src = 0, dummy_supply = m + 1, dummy_demand = m + k + 2, snk = m + k + 3;
  MinCostFlow flow(m + k + 4);
  for (int i = 0; i < m; ++i) flow.add_edge(src, 1 + i, supply[i], 0.0);
  flow.add_edge(src, dummy_supply, total_demand, 0.0);
  const double inf_cap = total_supply + total_demand;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      const double c = std::min(space.distance(supply_idx[i], demand_idx[j]), 2.0);
      flow.add_edge(1 + i, m + 2 + j, inf_cap, c);
    }
    flow.add_edge(1 + i, dummy_demand, inf_cap, 1.0);  // destroy mass
  }
  for (int j = 0; j < k; ++j) flow.add_edge(dummy_supply, m + 2 + j, inf_cap, 1.0);  // create
  flow.add_edge(dummy_supply, dummy_demand, inf_cap, 0.0);
  for (int j = 0; j < k; ++j) flow.add_edge(m + 2 + j, snk, demand[j], 0.0);
  flow.add_edge(dummy_demand, snk, total_supply, 0.0);

  cert.value = flow.run(src, snk, total_supply + total_demand);

  // Dual witness. Potentials give an optimal test function on the demand
  // side; clamping to -1 and extending by inf-convolution with the metric
  // yields a function feasible for the full program with the same objective.
  const double pi_dd = flow.potential(dummy_demand);
  std::vector<double> f_demand(k);
  for (int j = 0; j < k; ++j)
    f_demand[j] = std::max(-1.0, pi_dd - flow.potential(m + 2 + j));
  cert.witness.resize(cert.support.size());
  cert.witness_value = 0.0;
  for (std::size_t s = 0; s < cert.support.size(); ++s) {
    const std::size_t p = cert.support[s];
    double g = 1.0;
    for (int j = 0; j < k; ++j)
      g = std::min(g, f_demand[j] + std::min(space.distance(p, demand_idx[j]), 2.0));
    cert.witness[s] = g;
    cert.witness_value += g * (mu.weights()[p] - nu.weights()[p]);
  }
  return cert;
}

double flat_distance(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  return flat_distance_certificate(mu, nu).value;
}

}  // namespace evodyn
