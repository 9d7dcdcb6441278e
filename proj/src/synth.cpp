#include "roscert/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace roscert::synth {

using netmodel::NetworkSpec;
using netmodel::RegionSpec;
using poly::AffineForm;
using poly::LinPoly;
using poly::Monomial;
using poly::Poly;

namespace {

int even_at_least(int d) {
  d = std::max(d, 0);
  return d % 2 == 0 ? d : d + 1;
}

std::vector<int> first_vars(int n) {
  std::vector<int> t(n);
  for (int k = 0; k < n; ++k) t[k] = k;
  return t;
}

std::string pair_tag(int i, int j) { return std::to_string(i + 1) + "," + std::to_string(j + 1); }

LinPoly constant_lin(int dim, double c) { return LinPoly::lift(Poly::constant(dim, c)); }

std::vector<double> state_set_moments(const RegionSpec& region, int dim,
                                      const std::vector<Monomial>& alphas, std::uint64_t seed,
                                      int samples) {
  std::vector<double> out(alphas.size(), 0.0);
  if (auto balls = region.as_disjoint_balls(dim)) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      double m = 1.0;
      for (const netmodel::Ball& b : *balls) {
        std::vector<int> sub;
        for (int v : b.vars) sub.push_back(alphas[a][v]);
        m *= poly::ball_moment(Monomial(sub), static_cast<int>(sub.size()), b.radius);
      }
      out[a] = m;
    }
    return out;
  }
  // Monte-Carlo over the bounding box of the ball-shaped inequalities.
  std::vector<double> half_width(dim, std::numeric_limits<double>::infinity());
  for (const Poly& h : region.state_ineqs) {
    if (auto b = netmodel::as_ball(h)) {
      for (int v : b->vars) half_width[v] = std::min(half_width[v], b->radius);
    }
  }
  double box_volume = 1.0;
  for (double w : half_width) box_volume *= 2.0 * w;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> x(dim);
  std::vector<poly::PolyEvaluator> evals;
  for (const Monomial& a : alphas) evals.emplace_back(Poly::monomial(a));
  for (int s = 0; s < samples; ++s) {
    for (int k = 0; k < dim; ++k) x[k] = half_width[k] * unit(rng);
    if (!region.in_closed_state(x)) continue;
    for (std::size_t a = 0; a < alphas.size(); ++a) out[a] += evals[a](x);
  }
  for (double& v : out) v *= box_volume / samples;
  return out;
}

// Objective c'rho with rho the state-set moments of V's monomials.
void set_moment_objective(BuiltProgram& b, const RegionSpec& region, const SynthesisConfig& cfg) {
  std::vector<Monomial> alphas;
  for (const auto& [m, f] : b.V.terms()) alphas.push_back(m);
  const auto rho = state_set_moments(region, b.dim, alphas, cfg.moment_seed, cfg.moment_samples);
  AffineForm objective;
  std::size_t a = 0;
  for (const auto& [m, f] : b.V.terms()) {
    objective.add(f, rho[a]);
    b.moments.emplace_back(m, rho[a]);
    ++a;
  }
  for (const int block : b.boundary_blocks) {
    const auto& vars = b.program.decision_vars();
    for (int k = 0; k < static_cast<int>(vars.size()); ++k) {
      const sos::DecisionVar& v = vars[k];
      if (v.kind == sos::DecisionVar::Kind::kGram && v.index == block && v.row == v.col) {
        objective.add(AffineForm::variable(k), -cfg.trace_penalty);
      }
    }
  }
  b.program.set_objective(objective);
}

LinPoly new_sos(BuiltProgram& b, int dim, int degree, const std::string& name) {
  LinPoly p = b.program.sos_polynomial(sos::make_basis(dim, degree / 2), name);
  b.multipliers.emplace_back(name, p);
  return p;
}

LinPoly new_free(BuiltProgram& b, int dim, int degree, const std::string& name) {
  const auto mons = sos::make_basis(dim, degree).monomials;
  LinPoly p = b.program.free_polynomial(dim, mons);
  b.multipliers.emplace_back(name, p);
  return p;
}

// -V + q_k h_k and 1 - V - sum_k s_k h_k over the variables of V.
void add_boundary_and_bound(BuiltProgram& b, const RegionSpec& region, const SynthesisConfig& cfg) {
  const int d = b.dim;
  for (std::size_t k = 0; k < region.state_ineqs.size(); ++k) {
    const Poly& h = region.state_ineqs[k];
    const std::string tag = std::to_string(k + 1);
    const LinPoly q = new_free(b, d, even_at_least(cfg.deg_V - h.degree()), "q[" + tag + "]");
    LinPoly expr = q * h;
    expr -= b.V;
    b.program.add_sos_constraint(expr, sos::basis_for(expr), "boundary[" + tag + "]");
    b.boundary_blocks.push_back(b.program.constraints().back().block);
  }
  if (cfg.normalization == Normalization::kOriginValue) {
    LinPoly origin(d);
    const Monomial one(d);
    for (const auto& [m, f] : b.V.terms()) {
      if (m == one) origin.add_term(one, f);
    }
    AffineForm minus_one;
    minus_one.constant = -1.0;
    origin.add_term(one, minus_one);
    b.program.add_equality(origin);
    return;
  }
  LinPoly expr = constant_lin(d, 1.0);
  expr -= b.V;
  for (std::size_t k = 0; k < region.state_ineqs.size(); ++k) {
    const Poly& h = region.state_ineqs[k];
    const LinPoly s = new_sos(b, d, even_at_least(cfg.deg_V - h.degree()), "s[" + std::to_string(k + 1) + "]");
    expr -= s * h;
  }
  b.program.add_sos_constraint(expr, sos::basis_for(expr), "bound");
}

int multiplier_degree(const SynthesisConfig& cfg, int lie_degree, int set_degree) {
  if (cfg.deg_multipliers > 0) return cfg.deg_multipliers;
  return even_at_least(lie_degree - set_degree);
}

}  // namespace

std::string to_string(ProgramKind k) { return k == ProgramKind::kManifold ? "manifold" : "equilibrium"; }

void SynthesisConfig::validate() const {
  if (!(trace_penalty >= 0.0)) throw std::invalid_argument("synthesis: trace_penalty must be non-negative");
  if (!(lambda > 0.0)) throw std::invalid_argument("synthesis: lambda must be positive");
  if (deg_V < 2 || deg_V % 2 != 0) throw std::invalid_argument("synthesis: deg_V must be even and >= 2");
  if (deg_multipliers < 0 || deg_multipliers % 2 != 0) {
    throw std::invalid_argument("synthesis: multiplier degree must be even (or 0 for auto)");
  }
  if (moment_samples < 1) throw std::invalid_argument("synthesis: moment_samples must be positive");
}

double state_set_moment(const RegionSpec& region, int dim, const Monomial& alpha, std::uint64_t seed,
                        int samples) {
  return state_set_moments(region, dim, {alpha}, seed, samples)[0];
}

BuiltProgram build_manifold_program(const NetworkSpec& spec, const RegionSpec& region,
                                    const SynthesisConfig& cfg) {
  spec.validate();
  region.validate(spec);
  cfg.validate();
  if (region.variables != netmodel::RegionVariables::kErrorPair) {
    throw std::invalid_argument("manifold program needs an error-pair region");
  }
  if (spec.N < 2) throw std::invalid_argument("manifold program needs at least two nodes");
  const int n = spec.n;
  const int nn = spec.state_dim();
  BuiltProgram b;
  b.kind = ProgramKind::kManifold;
  b.lambda = cfg.lambda;
  b.dim = n;
  b.V = b.program.free_polynomial(n, sos::make_basis(n, cfg.deg_V).monomials);

  for (int i = 0; i < spec.N; ++i) {
    for (int j = 0; j < spec.N; ++j) {
      if (i == j || (cfg.pair_mode == PairMode::kUnordered && j < i)) continue;
      b.pairs.emplace_back(i, j);
    }
  }

  const std::vector<int> err = first_vars(n);
  const std::vector<Poly> targets = region.targets(n);
  for (const auto& [i, j] : b.pairs) {
    const std::string tag = pair_tag(i, j);
    const poly::AffineMap pc = netmodel::pair_coordinates(spec, i, j);
    LinPoly base = poly::substitute_linear(netmodel::lie_derivative(b.V, spec, i, j), pc);
    const int lie_deg = std::max(base.degree(), cfg.deg_V);
    base -= cfg.lambda * poly::embed(b.V, nn, err);
    for (std::size_t k = 0; k < region.state_ineqs.size(); ++k) {
      const Poly& h = region.state_ineqs[k];
      const LinPoly p1 = new_sos(b, n, multiplier_degree(cfg, lie_deg, h.degree()),
                                 "p1[" + tag + ";" + std::to_string(k + 1) + "]");
      base -= poly::embed(p1 * h, nn, err);
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const Poly& l = targets[t];
      const LinPoly p2 = new_sos(b, n, multiplier_degree(cfg, lie_deg, l.degree()),
                                 "p2[" + tag + ";" + std::to_string(t + 1) + "]");
      LinPoly expr = base + poly::embed(p2 * l, nn, err);
      b.program.add_sos_constraint(expr, sos::basis_for(expr), "main[" + tag + ";" + std::to_string(t + 1) + "]");
    }
  }
  add_boundary_and_bound(b, region, cfg);
  set_moment_objective(b, region, cfg);
  b.compiled = sos::compile(b.program);
  return b;
}

BuiltProgram build_equilibrium_program(const NetworkSpec& spec, const RegionSpec& region,
                                       const SynthesisConfig& cfg) {
  spec.validate();
  region.validate(spec);
  cfg.validate();
  if (region.variables != netmodel::RegionVariables::kFullState) {
    throw std::invalid_argument("equilibrium program needs a full-state region");
  }
  const int nn = spec.state_dim();
  BuiltProgram b;
  b.kind = ProgramKind::kEquilibrium;
  b.lambda = cfg.lambda;
  b.dim = nn;
  b.V = b.program.free_polynomial(nn, sos::make_basis(nn, cfg.deg_V).monomials);

  LinPoly base = netmodel::lie_derivative_full(b.V, spec);
  const int lie_deg = std::max(base.degree(), cfg.deg_V);
  base -= cfg.lambda * b.V;
  for (std::size_t k = 0; k < region.state_ineqs.size(); ++k) {
    const Poly& h = region.state_ineqs[k];
    const LinPoly p1 = new_sos(b, nn, multiplier_degree(cfg, lie_deg, h.degree()), "p1[" + std::to_string(k + 1) + "]");
    base -= p1 * h;
  }
  const std::vector<Poly> targets = region.targets(nn);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Poly& l = targets[t];
    const LinPoly p2 = new_sos(b, nn, multiplier_degree(cfg, lie_deg, l.degree()), "p2[" + std::to_string(t + 1) + "]");
    LinPoly expr = base + p2 * l;
    b.program.add_sos_constraint(expr, sos::basis_for(expr), "main[" + std::to_string(t + 1) + "]");
  }
  add_boundary_and_bound(b, region, cfg);
  set_moment_objective(b, region, cfg);
  b.compiled = sos::compile(b.program);
  return b;
}

BuiltProgram build_program(const NetworkSpec& spec, const RegionSpec& region, const SynthesisConfig& cfg) {
  return region.variables == netmodel::RegionVariables::kErrorPair
             ? build_manifold_program(spec, region, cfg)
             : build_equilibrium_program(spec, region, cfg);
}

Certificate extract_certificate(const sdp::SdpSolution& solution, const BuiltProgram& built) {
  if (solution.status != sdp::Status::kOptimal) {
    throw std::invalid_argument("extract_certificate: solver status is " + sdp::to_string(solution.status));
  }
  const std::vector<double> values = built.compiled.decision_values(solution);
  Certificate cert;
  cert.kind = built.kind;
  cert.lambda = built.lambda;
  cert.dim = built.dim;
  cert.V = built.V.collapse(values);
  for (const auto& [name, p] : built.multipliers) cert.multipliers.emplace_back(name, p.collapse(values));
  cert.gram_blocks = solution.blocks;
  for (const auto& [m, rho] : built.moments) cert.objective += cert.V.coefficient(m) * rho;

  // Identity residuals of the coefficient-matched constraints; multiplier
  // blocks enter their polynomials directly and only need a PSD Gram.
  for (std::size_t c = 0; c < built.program.constraints().size(); ++c) {
    const auto rec = sos::reconstruct(solution, built.program, built.compiled, static_cast<int>(c));
    cert.identity_residual = std::max(cert.identity_residual, rec.residual);
  }
  cert.gram_min_eig = std::numeric_limits<double>::infinity();
  for (const Eigen::MatrixXd& g : solution.blocks) {
    cert.gram_min_eig = std::min(cert.gram_min_eig, sdp::min_eigenvalue(0.5 * (g + g.transpose())));
  }

  if (cert.identity_residual > kMaxIdentityResidual) {
    throw CertificateRejected("identity residual " + std::to_string(cert.identity_residual) + " exceeds 1e-6", cert);
  }
  if (cert.gram_min_eig < kMinGramEigenvalue) {
    throw CertificateRejected("Gram minimum eigenvalue " + std::to_string(cert.gram_min_eig) + " below -1e-8", cert);
  }
  return cert;
}

VerificationReport verify_certificate(const Certificate& cert, const NetworkSpec& spec,
                                      const RegionSpec& region, int samples, std::uint64_t seed) {
  const int d = region.dim(spec);
  if (cert.V.dim() != d) throw std::invalid_argument("verify_certificate: certificate and region dimensions differ");
  VerificationReport rep;
  rep.worst_decay_margin = std::numeric_limits<double>::infinity();
  rep.worst_boundary_margin = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const poly::PolyEvaluator v(cert.V);
  const LinPoly lifted = LinPoly::lift(cert.V);
  const std::vector<double> none;

  auto record = [&](const std::vector<double>& x) {
    if (rep.violating_points.size() < 10) rep.violating_points.push_back(x);
  };
  auto sample_off_target = [&] {
    for (;;) {
      auto x = netmodel::sample_closed_state(region, d, rng);
      if (!region.in_target(x)) return x;
    }
  };

  if (cert.kind == ProgramKind::kEquilibrium) {
    const poly::PolyEvaluator lv(netmodel::lie_derivative_full(lifted, spec).collapse(none));
    for (int s = 0; s < samples; ++s) {
      const auto x = sample_off_target();
      const double vx = v(x);
      const double margin = lv(x) - cert.lambda * vx;
      rep.worst_decay_margin = std::min(rep.worst_decay_margin, margin);
      if (vx > 0.0) ++rep.positive_samples;
      if (margin < -kDecayTolerance) {
        ++rep.decay_violations;
        record(x);
      }
    }
  } else {
    std::vector<std::pair<int, int>> pairs;
    std::vector<poly::PolyEvaluator> lvs;
    for (int i = 0; i < spec.N; ++i) {
      for (int j = 0; j < spec.N; ++j) {
        if (i == j) continue;
        pairs.emplace_back(i, j);
        lvs.emplace_back(netmodel::lie_derivative(lifted, spec, i, j).collapse(none));
      }
    }
    std::uniform_real_distribution<double> box(-region.node_box, region.node_box);
    const int n = spec.n;
    std::vector<double> X(spec.state_dim());
    for (int s = 0; s < samples; ++s) {
      const auto delta = sample_off_target();
      const std::size_t p = static_cast<std::size_t>(s) % pairs.size();
      const auto [i, j] = pairs[p];
      for (double& x : X) x = box(rng);
      for (int k = 0; k < n; ++k) X[i * n + k] = X[j * n + k] + delta[k];
      const double vx = v(delta);
      const double margin = lvs[p](X) - cert.lambda * vx;
      rep.worst_decay_margin = std::min(rep.worst_decay_margin, margin);
      if (vx > 0.0) ++rep.positive_samples;
      if (margin < -kDecayTolerance) {
        ++rep.decay_violations;
        record(X);
      }
    }
  }
  rep.decay_samples = samples;

  for (int s = 0; s < samples; ++s) {
    const auto x = netmodel::sample_state_boundary(region, d, rng);
    const double vx = v(x);
    rep.worst_boundary_margin = std::max(rep.worst_boundary_margin, vx);
    if (vx > kBoundaryTolerance) {
      ++rep.boundary_violations;
      record(x);
    }
  }
  rep.boundary_samples = samples;
  return rep;
}

}  // namespace roscert::synth
