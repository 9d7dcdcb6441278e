#include "roscert/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace roscert::netmodel {

using poly::LinPoly;
using poly::Poly;

namespace {

std::vector<int> node_targets(const NetworkSpec& spec, int node) {
  std::vector<int> t(spec.n);
  for (int k = 0; k < spec.n; ++k) t[k] = node * spec.n + k;
  return t;
}

void check_node(const NetworkSpec& spec, int i) {
  if (i < 0 || i >= spec.N) throw std::invalid_argument("node index out of range: " + std::to_string(i));
}

bool all_positive(const std::vector<Poly>& ps, std::span<const double> point, bool strict) {
  for (const Poly& p : ps) {
    const double v = p.evaluate(point);
    if (strict ? !(v > 0.0) : !(v >= 0.0)) return false;
  }
  return true;
}

}  // namespace

bool NetworkSpec::has_zero_row_sums(double tol) const {
  for (int i = 0; i < L.rows(); ++i) {
    if (std::abs(L.row(i).sum()) > tol) return false;
  }
  return true;
}

void NetworkSpec::validate() const {
  if (n < 1 || N < 1) throw std::invalid_argument("network: n and N must be positive");
  if (static_cast<int>(f.size()) != n || static_cast<int>(g.size()) != n) {
    throw std::invalid_argument("network: f and g need n = " + std::to_string(n) + " components");
  }
  for (int k = 0; k < n; ++k) {
    if (f[k].dim() != n || g[k].dim() != n) {
      throw std::invalid_argument("network: f and g components must be polynomials in x1..x" +
                                  std::to_string(n));
    }
  }
  if (L.rows() != N || L.cols() != N) throw std::invalid_argument("network: L must be N x N");
  if (!(c > 0.0)) throw std::invalid_argument("network: coupling strength c must be positive");
  if (!row_sum_exempt) {
    for (int i = 0; i < N; ++i) {
      if (std::abs(L.row(i).sum()) > 1e-12) {
        throw std::invalid_argument("network: row " + std::to_string(i + 1) +
                                    " of L does not sum to zero (set row_sum_exempt to allow)");
      }
    }
  }
}

std::optional<Ball> as_ball(const Poly& h) {
  Ball ball;
  double r2 = 0.0;
  for (const auto& [m, c] : h.terms()) {
    if (m.is_constant()) {
      r2 = c;
      continue;
    }
    if (m.degree() != 2 || c != -1.0) return std::nullopt;
    int var = -1;
    for (int k = 0; k < m.dim(); ++k) {
      if (m[k] == 2) var = k;
    }
    if (var < 0) return std::nullopt;
    ball.vars.push_back(var);
  }
  if (!(r2 > 0.0) || ball.vars.empty()) return std::nullopt;
  ball.radius = std::sqrt(r2);
  std::sort(ball.vars.begin(), ball.vars.end());
  return ball;
}

std::vector<Poly> RegionSpec::targets(int dim) const {
  if (epsilon > 0.0) {
    Poly l = Poly::constant(dim, epsilon * epsilon);
    for (int k = 0; k < dim; ++k) l -= Poly::variable(dim, k) * Poly::variable(dim, k);
    return {l};
  }
  return target_polys;
}

bool RegionSpec::in_state(std::span<const double> point) const {
  return all_positive(state_ineqs, point, true);
}

bool RegionSpec::in_closed_state(std::span<const double> point) const {
  return all_positive(state_ineqs, point, false);
}

bool RegionSpec::in_target(std::span<const double> point) const {
  if (epsilon > 0.0) {
    double r2 = 0.0;
    for (double v : point) r2 += v * v;
    return r2 < epsilon * epsilon;
  }
  return all_positive(target_polys, point, true);
}

std::optional<std::vector<Ball>> RegionSpec::as_disjoint_balls(int dim) const {
  std::vector<Ball> balls;
  std::set<int> seen;
  for (const Poly& h : state_ineqs) {
    auto b = as_ball(h);
    if (!b) return std::nullopt;
    for (int v : b->vars) {
      if (!seen.insert(v).second) return std::nullopt;
    }
    balls.push_back(*b);
  }
  if (static_cast<int>(seen.size()) != dim) return std::nullopt;
  return balls;
}

void RegionSpec::validate(const NetworkSpec& spec) const {
  const int d = dim(spec);
  if (state_ineqs.empty()) throw std::invalid_argument("region: at least one state inequality is required");
  std::set<int> bounded;
  for (const Poly& h : state_ineqs) {
    if (h.dim() != d) {
      throw std::invalid_argument("region: state polynomials must use x1..x" + std::to_string(d));
    }
    if (auto b = as_ball(h)) bounded.insert(b->vars.begin(), b->vars.end());
  }
  if (static_cast<int>(bounded.size()) != d) {
    throw std::invalid_argument("region: state set must be bounded by R^2 - |.|^2 terms covering every variable");
  }
  if (epsilon < 0.0) throw std::invalid_argument("region: epsilon must be positive");
  if (epsilon == 0.0 && target_polys.empty()) throw std::invalid_argument("region: no target set");
  for (const Poly& l : target_polys) {
    if (l.dim() != d) throw std::invalid_argument("region: target polynomials must use x1..x" + std::to_string(d));
  }
  if (!(node_box > 0.0)) throw std::invalid_argument("region: node_box must be positive");
}

namespace {

std::vector<Ball> bounding_balls(const RegionSpec& region) {
  std::vector<Ball> out;
  for (const Poly& h : region.state_ineqs) {
    if (auto b = as_ball(h)) out.push_back(*b);
  }
  return out;
}

void sample_in_ball(const Ball& b, std::vector<double>& x, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double norm2 = 0.0;
  std::vector<double> dir(b.vars.size());
  do {
    norm2 = 0.0;
    for (double& d : dir) {
      d = normal(rng);
      norm2 += d * d;
    }
  } while (norm2 == 0.0);
  const double r = b.radius * std::pow(unit(rng), 1.0 / static_cast<double>(b.vars.size()));
  const double scale = r / std::sqrt(norm2);
  for (std::size_t k = 0; k < b.vars.size(); ++k) x[b.vars[k]] = scale * dir[k];
}

}  // namespace

std::vector<double> sample_closed_state(const RegionSpec& region, int dim, std::mt19937_64& rng) {
  std::vector<double> x(dim, 0.0);
  if (auto balls = region.as_disjoint_balls(dim)) {
    for (const Ball& b : *balls) sample_in_ball(b, x, rng);
    return x;
  }
  // Uniform in the box spanned by the tightest ball bound on each variable.
  std::vector<double> half_width(dim, std::numeric_limits<double>::infinity());
  for (const Ball& b : bounding_balls(region)) {
    for (int v : b.vars) half_width[v] = std::min(half_width[v], b.radius);
  }
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    for (int k = 0; k < dim; ++k) x[k] = half_width[k] * unit(rng);
    if (region.in_closed_state(x)) return x;
  }
  throw std::runtime_error("sample_closed_state: no point accepted after 1e6 proposals");
}

std::vector<double> sample_state_boundary(const RegionSpec& region, int dim, std::mt19937_64& rng) {
  if (auto balls = region.as_disjoint_balls(dim)) {
    std::vector<double> x = sample_closed_state(region, dim, rng);
    const Ball& b = (*balls)[std::uniform_int_distribution<std::size_t>(0, balls->size() - 1)(rng)];
    double norm2 = 0.0;
    for (int v : b.vars) norm2 += x[v] * x[v];
    if (norm2 == 0.0) {
      x[b.vars[0]] = b.radius;
      return x;
    }
    const double scale = b.radius / std::sqrt(norm2);
    for (int v : b.vars) x[v] *= scale;
    return x;
  }
  std::normal_distribution<double> normal;
  double reach = 0.0;
  for (const Ball& b : bounding_balls(region)) reach += 2.0 * b.radius;
  for (;;) {
    const std::vector<double> p = sample_closed_state(region, dim, rng);
    if (!region.in_state(p)) continue;
    std::vector<double> dir(dim);
    double norm2 = 0.0;
    for (double& d : dir) {
      d = normal(rng);
      norm2 += d * d;
    }
    for (double& d : dir) d /= std::sqrt(norm2);
    auto at = [&](double t) {
      std::vector<double> q(dim);
      for (int k = 0; k < dim; ++k) q[k] = p[k] + t * dir[k];
      return q;
    };
    double lo = 0.0;
    double hi = reach / 64.0;
    while (region.in_state(at(hi)) && hi < reach) {
      lo = hi;
      hi += reach / 64.0;
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (region.in_state(at(mid)) ? lo : hi) = mid;
    }
    return at(lo);
  }
}

std::vector<Poly> full_dynamics(const NetworkSpec& spec) {
  const int nn = spec.state_dim();
  std::vector<Poly> out;
  out.reserve(nn);
  for (int i = 0; i < spec.N; ++i) {
    const auto ti = node_targets(spec, i);
    for (int k = 0; k < spec.n; ++k) {
      Poly fi = poly::embed(spec.f[k], nn, ti);
      for (int j = 0; j < spec.N; ++j) {
        if (spec.L(i, j) == 0.0) continue;
        fi -= (spec.c * spec.L(i, j)) * poly::embed(spec.g[k], nn, node_targets(spec, j));
      }
      out.push_back(std::move(fi));
    }
  }
  return out;
}

std::vector<Poly> error_dynamics(const NetworkSpec& spec, int i, int j) {
  check_node(spec, i);
  check_node(spec, j);
  if (i == j) throw std::invalid_argument("error_dynamics: nodes must differ");
  const int nn = spec.state_dim();
  const auto ti = node_targets(spec, i);
  const auto tj = node_targets(spec, j);
  std::vector<Poly> out;
  for (int k = 0; k < spec.n; ++k) {
    Poly e = poly::embed(spec.f[k], nn, ti) - poly::embed(spec.f[k], nn, tj);
    for (int m = 0; m < spec.N; ++m) {
      const double w = spec.L(i, m) - spec.L(j, m);
      if (w == 0.0) continue;
      e -= (spec.c * w) * poly::embed(spec.g[k], nn, node_targets(spec, m));
    }
    out.push_back(std::move(e));
  }
  return out;
}

poly::AffineMap error_map(const NetworkSpec& spec, int i, int j) {
  poly::AffineMap map;
  map.matrix = Eigen::MatrixXd::Zero(spec.n, spec.state_dim());
  map.offset = Eigen::VectorXd::Zero(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    map.matrix(k, i * spec.n + k) = 1.0;
    map.matrix(k, j * spec.n + k) = -1.0;
  }
  return map;
}

poly::AffineMap pair_coordinates(const NetworkSpec& spec, int i, int j) {
  check_node(spec, i);
  check_node(spec, j);
  const int n = spec.n;
  const int nn = spec.state_dim();
  poly::AffineMap map;
  map.matrix = Eigen::MatrixXd::Zero(nn, nn);
  map.offset = Eigen::VectorXd::Zero(nn);
  for (int k = 0; k < n; ++k) {
    map.matrix(i * n + k, k) = 1.0;
    map.matrix(i * n + k, n + k) = 1.0;
    map.matrix(j * n + k, n + k) = 1.0;
  }
  int slot = 2;
  for (int m = 0; m < spec.N; ++m) {
    if (m == i || m == j) continue;
    for (int k = 0; k < n; ++k) map.matrix(m * n + k, slot * n + k) = 1.0;
    ++slot;
  }
  return map;
}

LinPoly lie_derivative(const LinPoly& V, const NetworkSpec& spec, int i, int j) {
  if (V.dim() != spec.n) throw std::invalid_argument("lie_derivative: V must be over the n error variables");
  const auto e = error_dynamics(spec, i, j);
  const poly::AffineMap map = error_map(spec, i, j);
  LinPoly out(spec.state_dim());
  for (int k = 0; k < spec.n; ++k) {
    out += poly::substitute_linear(V.derivative(k), map) * e[k];
  }
  return out;
}

LinPoly lie_derivative_full(const LinPoly& V, const NetworkSpec& spec) {
  if (V.dim() != spec.state_dim()) {
    throw std::invalid_argument("lie_derivative_full: V must be over the nN state variables");
  }
  const auto F = full_dynamics(spec);
  LinPoly out(spec.state_dim());
  for (int k = 0; k < spec.state_dim(); ++k) out += V.derivative(k) * F[k];
  return out;
}

}  // namespace roscert::netmodel
