#pragma once

#include <vector>

#include "roscert/netmodel.hpp"

namespace roscert::testing {

// r = 1, mu = 0.5, omega = 0.9. `linear_spring` uses -omega^2 x1 in place of
// -omega^2 x1^2.
inline netmodel::NetworkSpec van_der_pol_network(bool corrected_laplacian, bool linear_spring = false) {
  netmodel::NetworkSpec s;
  s.n = 2;
  s.N = 3;
  s.f = {poly::parse("x2", 2),
         poly::parse(linear_spring ? "0.45*x2 - 0.45*x1^2*x2 - 0.81*x1" : "0.45*x2 - 0.45*x1^2*x2 - 0.81*x1^2", 2)};
  s.g = {poly::parse("x1", 2), poly::parse("x2", 2)};
  s.L = Eigen::MatrixXd(3, 3);
  if (corrected_laplacian) {
    s.L << 4, -2, -2, -1, 2, -1, -3, 0, 3;
  } else {
    s.L << 4, -2, -2, -1, 2, 1, -3, 0, 3;
    s.row_sum_exempt = true;
  }
  s.c = 0.1;
  return s;
}

inline netmodel::NetworkSpec jet_engine_network() {
  netmodel::NetworkSpec s;
  s.n = 2;
  s.N = 4;
  s.f = {poly::parse("-0.5*x1^3 - 1.5*x1^2 - x2", 2), poly::parse("3*x1 - x2", 2)};
  s.g = {poly::parse("x1", 2), poly::parse("x2 + 0.5*x2^3", 2)};
  s.L = Eigen::MatrixXd(4, 4);
  s.L << 2, -1, -1, 0, -1, 1, 0, 0, 0, 0, 1, -1, -1, 0, 0, 1;
  s.c = 1.0;
  return s;
}

// Two nodes, f = 0, g = identity, L = [[1, -1], [-1, 1]], c = 1: the error
// obeys d/dt (x1 - x2) = -2 (x1 - x2).
inline netmodel::NetworkSpec toy_network() {
  netmodel::NetworkSpec s;
  s.n = 2;
  s.N = 2;
  s.f = {poly::Poly(2), poly::Poly(2)};
  s.g = {poly::parse("x1", 2), poly::parse("x2", 2)};
  s.L = Eigen::MatrixXd(2, 2);
  s.L << 1, -1, -1, 1;
  s.c = 1.0;
  return s;
}

inline netmodel::RegionSpec unit_disk_pair_region(double epsilon) {
  netmodel::RegionSpec r;
  r.variables = netmodel::RegionVariables::kErrorPair;
  r.state_ineqs = {poly::parse("1 - x1^2 - x2^2", 2)};
  r.epsilon = epsilon;
  return r;
}

// Per-node unit disks and the full-state eps-ball target.
inline netmodel::RegionSpec per_node_disk_region(int nodes, double epsilon) {
  netmodel::RegionSpec r;
  r.variables = netmodel::RegionVariables::kFullState;
  const int d = 2 * nodes;
  for (int i = 0; i < nodes; ++i) {
    poly::Poly h = poly::Poly::constant(d, 1.0);
    h -= poly::Poly::variable(d, 2 * i) * poly::Poly::variable(d, 2 * i);
    h -= poly::Poly::variable(d, 2 * i + 1) * poly::Poly::variable(d, 2 * i + 1);
    r.state_ineqs.push_back(h);
  }
  r.epsilon = epsilon;
  return r;
}

}  // namespace roscert::testing
