#pragma once

#include <string>
#include <vector>

#include "fermigas/tiling.hpp"

namespace fermigas {

constexpr std::size_t kTransportCap = 5000;

struct TransportResult {
  double distance = 0;
  double dual_value = 0;   // sum a_i phi_i + sum b_j psi_j for a feasible dual pair
  double gap = 0;          // distance - dual_value
  bool certified = false;  // gap <= 1e-8 max(1, distance)
  int augmentations = 0;
  std::string ground_metric = "euclidean";
  std::string method;
};

// W1 between finitely supported measures of equal mass with Euclidean ground cost on
// R^{2d}.  Successive shortest paths on the bipartite transport graph, with the dual
// certified through a c-transform of the final potentials.
TransportResult wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             double certificate_tol = 1e-8);

// Exact W1 on the line, \int |F_mu - F_nu|.
double wasserstein1_line(std::vector<double> xa, std::vector<double> wa, std::vector<double> xb,
                         std::vector<double> wb);

}  // namespace fermigas
