#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "roscert/poly.hpp"

namespace roscert::netmodel {

/// x_i' = f(x_i) - c sum_j L_ij g(x_j), nodes i = 0..N-1. Node i owns the
/// full-state variables i*n .. i*n + n - 1.
struct NetworkSpec {
  int n = 0;
  int N = 0;
  std::vector<poly::Poly> f;
  std::vector<poly::Poly> g;
  Eigen::MatrixXd L;
  double c = 1.0;
  /// Skips the zero-row-sum check on L.
  bool row_sum_exempt = false;

  int state_dim() const { return n * N; }
  bool has_zero_row_sums(double tol = 1e-12) const;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// A centered ball R^2 - sum_{k in vars} x_k^2 > 0.
struct Ball {
  double radius = 0.0;
  std::vector<int> vars;
};

/// Recognizes h as R^2 - sum of unit-weight squares of distinct variables.
std::optional<Ball> as_ball(const poly::Poly& h);

enum class RegionVariables { kErrorPair, kFullState };

/// State set X = {h_k > 0 for all k} and target X_T = {l_t > 0 for all t}
/// over the error variables of one pair (dimension n) or the full state
/// (dimension nN).
struct RegionSpec {
  RegionVariables variables = RegionVariables::kFullState;
  std::vector<poly::Poly> state_ineqs;
  /// Positive for the target eps^2 - |.|^2 > 0; zero when target_polys is used.
  double epsilon = 0.0;
  std::vector<poly::Poly> target_polys;
  /// Half-width of the box node states are drawn from when a manifold
  /// condition has to be sampled over absolute states.
  double node_box = 1.0;

  int dim(const NetworkSpec& spec) const {
    return variables == RegionVariables::kErrorPair ? spec.n : spec.state_dim();
  }

  /// The polynomials l_t defining X_T.
  std::vector<poly::Poly> targets(int dim) const;

  bool in_state(std::span<const double> point) const;
  bool in_closed_state(std::span<const double> point) const;
  bool in_target(std::span<const double> point) const;

  /// Balls whose variable sets cover every coordinate, if each h_k is a
  /// ball and the balls are disjoint. Used for analytic moments.
  std::optional<std::vector<Ball>> as_disjoint_balls(int dim) const;

  /// Checks dimensions, epsilon, and that ball-shaped h_k bound every
  /// coordinate.
  void validate(const NetworkSpec& spec) const;
};

/// Uniform point of the closed state set: exact for disjoint balls, else by
/// rejection from the box the ball-shaped inequalities bound.
std::vector<double> sample_closed_state(const RegionSpec& region, int dim, std::mt19937_64& rng);

/// Point of the boundary of the closed state set: radial projection onto one
/// ball when all inequalities are disjoint balls, otherwise bisection along a
/// random ray from an interior sample.
std::vector<double> sample_state_boundary(const RegionSpec& region, int dim, std::mt19937_64& rng);

std::vector<poly::Poly> full_dynamics(const NetworkSpec& spec);

/// Component k is f_k(x_i) - f_k(x_j) - c sum_m (L_im - L_jm) g_k(x_m), in
/// the nN full-state variables. Nodes are 0-based.
std::vector<poly::Poly> error_dynamics(const NetworkSpec& spec, int i, int j);

/// grad V(x_i - x_j) . (x_i' - x_j') for V over the n error variables.
poly::LinPoly lie_derivative(const poly::LinPoly& V, const NetworkSpec& spec, int i, int j);

/// grad V(X) . X' for V over the nN full-state variables.
poly::LinPoly lie_derivative_full(const poly::LinPoly& V, const NetworkSpec& spec);

/// Map u -> X with X_i = u_{0..n} + u_{n..2n} for node i, X_j = u_{n..2n}, and
/// the remaining nodes in increasing order after that. Expresses full-state
/// polynomials in pair coordinates (error first).
poly::AffineMap pair_coordinates(const NetworkSpec& spec, int i, int j);

/// Map X -> x_i - x_j (old variables: the n error coordinates).
poly::AffineMap error_map(const NetworkSpec& spec, int i, int j);

}  // namespace roscert::netmodel
