#include "roscert/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace roscert::synth {
namespace {

using netmodel::NetworkSpec;
using netmodel::RegionSpec;
using poly::Poly;
using roscert::testing::jet_engine_network;
using roscert::testing::toy_network;
using roscert::testing::unit_disk_pair_region;

struct Solved {
  BuiltProgram built;
  sdp::SdpSolution solution;
};

Solved solve(const NetworkSpec& spec, const RegionSpec& region, const SynthesisConfig& cfg) {
  Solved s{build_program(spec, region, cfg), {}};
  s.solution = sdp::solve(s.built.compiled.problem);
  return s;
}

SynthesisConfig config(double lambda, int deg) {
  SynthesisConfig cfg;
  cfg.lambda = lambda;
  cfg.deg_V = deg;
  return cfg;
}

// Largest R0 with V = 1 - |d|^2 / R0^2 satisfying the decay condition of
// d' = -k d off the eps-disk: (2k + lambda) r^2 >= lambda R0^2 at r = eps,
// and V <= 0 on the unit circle.
double quadratic_radius_sq(double k, double eps, double lambda) {
  return std::min(1.0, eps * eps * (2.0 * k + lambda) / lambda);
}

double max_gap_to_radial(const Poly& V, double r0_sq) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    const std::vector<double> x{u(rng), u(rng)};
    const double expected = 1.0 - (x[0] * x[0] + x[1] * x[1]) / r0_sq;
    worst = std::max(worst, std::abs(V.evaluate(x) - expected));
  }
  return worst;
}

TEST(ToyNetwork, QuadraticCertificateMatchesHandRadius) {
  // Toy error dynamics: d' = -2 d.
  const RegionSpec region = unit_disk_pair_region(0.1);
  for (double lambda : {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 6.0, 1000.0}) {
    SCOPED_TRACE(lambda);
    const Solved s = solve(toy_network(), region, config(lambda, 2));
    ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
    const Certificate cert = extract_certificate(s.solution, s.built);
    const double r0_sq = quadratic_radius_sq(2.0, 0.1, lambda);
    EXPECT_LE(max_gap_to_radial(cert.V, r0_sq), 1e-5 * (1.0 + 1.0 / r0_sq));
  }
}

TEST(ToyNetwork, CertifiedRegionShrinksWithLambda) {
  const RegionSpec region = unit_disk_pair_region(0.1);
  const std::vector<double> grid{0.02, 0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0};
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    SCOPED_TRACE(lambda);
    const Solved s = solve(toy_network(), region, config(lambda, 4));
    ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
    const Certificate cert = extract_certificate(s.solution, s.built);
    // Radius of {V > 0} along the first axis, by bisection.
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const std::vector<double> x{mid, 0.0};
      (cert.V.evaluate(x) > 0.0 ? lo : hi) = mid;
    }
    EXPECT_GE(lo, 0.1);
    EXPECT_LE(lo, previous + 1e-6);
    previous = lo;
  }
}

TEST(ToyNetwork, QuarticCertificateVerifies) {
  const RegionSpec region = unit_disk_pair_region(0.1);
  const Solved s = solve(toy_network(), region, config(0.1, 4));
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Certificate cert = extract_certificate(s.solution, s.built);
  EXPECT_LE(cert.identity_residual, 1e-6);
  EXPECT_GE(cert.gram_min_eig, -1e-8);
  EXPECT_EQ(cert.V.dim(), 2);
  EXPECT_NEAR(cert.V.evaluate(std::vector<double>{0.0, 0.0}), 1.0, 1e-9);
  const VerificationReport rep = verify_certificate(cert, toy_network(), region, 100000, 7);
  EXPECT_TRUE(rep.passed());
  EXPECT_GE(rep.worst_decay_margin, -kDecayTolerance);
  EXPECT_GT(rep.positive_samples, 0);
}

TEST(ToyNetwork, UnorderedPairsHalveMainConstraints) {
  SynthesisConfig cfg = config(0.1, 2);
  const BuiltProgram ordered = build_program(toy_network(), unit_disk_pair_region(0.1), cfg);
  cfg.pair_mode = PairMode::kUnordered;
  const BuiltProgram unordered = build_program(toy_network(), unit_disk_pair_region(0.1), cfg);
  EXPECT_EQ(ordered.pairs.size(), 2u);
  EXPECT_EQ(unordered.pairs.size(), 1u);
}

TEST(ToyNetwork, ObjectiveEqualsMomentSum) {
  const RegionSpec region = unit_disk_pair_region(0.1);
  const Solved s = solve(toy_network(), region, config(0.3, 4));
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Certificate cert = extract_certificate(s.solution, s.built);
  double integral = 0.0;
  for (const auto& [m, c] : cert.V.terms()) integral += c * poly::ball_moment(m, 2, 1.0);
  const double reported = s.solution.primal_objective + s.built.compiled.objective_constant;
  EXPECT_LE(std::abs(reported - integral), 1e-5 * std::max(1.0, std::abs(integral)));
  EXPECT_NEAR(cert.objective, integral, 1e-12 * std::max(1.0, std::abs(integral)));
}

TEST(ToyNetwork, PerturbedGramIsRejected) {
  const Solved s = solve(toy_network(), unit_disk_pair_region(0.1), config(0.1, 2));
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  sdp::SdpSolution bad = s.solution;
  const int block = s.built.program.constraints().front().block;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(bad.blocks[block]);
  const Eigen::VectorXd v = eig.eigenvectors().col(0);
  bad.blocks[block] -= (eig.eigenvalues()(0) + 1e-3) * v * v.transpose();
  EXPECT_THROW(extract_certificate(bad, s.built), CertificateRejected);
}

TEST(ToyNetwork, NonOptimalSolutionIsRefused) {
  Solved s = solve(toy_network(), unit_disk_pair_region(0.1), config(0.1, 2));
  s.solution.status = sdp::Status::kMaxIterations;
  EXPECT_THROW(extract_certificate(s.solution, s.built), std::invalid_argument);
}

TEST(Verification, PositiveConstantViolatesBoundaryEverywhere) {
  Certificate cert;
  cert.kind = ProgramKind::kManifold;
  cert.lambda = 0.1;
  cert.dim = 2;
  cert.V = Poly::constant(2, 1.0);
  const VerificationReport rep = verify_certificate(cert, toy_network(), unit_disk_pair_region(0.1), 1000, 3);
  EXPECT_EQ(rep.boundary_violations, rep.boundary_samples);
  EXPECT_FALSE(rep.passed());
}

TEST(Verification, Deterministic) {
  Certificate cert;
  cert.kind = ProgramKind::kManifold;
  cert.lambda = 0.1;
  cert.dim = 2;
  cert.V = poly::parse("0.3 - x1^2 - x2^2", 2);
  const auto a = verify_certificate(cert, toy_network(), unit_disk_pair_region(0.1), 5000, 9);
  const auto b = verify_certificate(cert, toy_network(), unit_disk_pair_region(0.1), 5000, 9);
  EXPECT_EQ(a.worst_decay_margin, b.worst_decay_margin);
  EXPECT_EQ(a.worst_boundary_margin, b.worst_boundary_margin);
  EXPECT_EQ(a.decay_violations, b.decay_violations);
}

NetworkSpec stable_linear_node() {
  NetworkSpec s;
  s.n = 2;
  s.N = 1;
  s.f = {poly::parse("-x1", 2), poly::parse("-x2", 2)};
  s.g = {poly::parse("x1", 2), poly::parse("x2", 2)};
  s.L = Eigen::MatrixXd::Zero(1, 1);
  s.c = 1.0;
  return s;
}

RegionSpec full_state_unit_disk(double eps) {
  RegionSpec r;
  r.variables = netmodel::RegionVariables::kFullState;
  r.state_ineqs = {poly::parse("1 - x1^2 - x2^2", 2)};
  r.epsilon = eps;
  return r;
}

TEST(Equilibrium, StableLinearNodeQuadratic) {
  const Solved s = solve(stable_linear_node(), full_state_unit_disk(0.1), config(0.1, 2));
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Certificate cert = extract_certificate(s.solution, s.built);
  EXPECT_EQ(cert.kind, ProgramKind::kEquilibrium);
  EXPECT_LE(max_gap_to_radial(cert.V, quadratic_radius_sq(1.0, 0.1, 0.1)), 1e-4);
  EXPECT_TRUE(verify_certificate(cert, stable_linear_node(), full_state_unit_disk(0.1), 20000, 5).passed());
}

TEST(Equilibrium, TargetEqualToStateSetStaysWellPosed) {
  const Solved s = solve(stable_linear_node(), full_state_unit_disk(1.0), config(0.1, 2));
  EXPECT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Certificate cert = extract_certificate(s.solution, s.built);
  for (double r : {0.0, 0.5, 1.0}) {
    const std::vector<double> x{r, 0.0};
    EXPECT_LE(cert.V.evaluate(x), 1.0 - r * r + 1e-6);
  }
}

TEST(Equilibrium, JetEngineContainsReferenceBall) {
  const RegionSpec region = roscert::testing::per_node_disk_region(4, 0.1);
  const Solved s = solve(jet_engine_network(), region, config(0.01, 4));
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Certificate cert = extract_certificate(s.solution, s.built);
  EXPECT_GT(cert.V.evaluate(std::vector<double>(8, 0.0)), 0.0);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    std::vector<double> x(8);
    double norm = 0.0;
    for (double& v : x) {
      v = normal(rng);
      norm += v * v;
    }
    const double radius = 0.0238 * (k % 2 == 0 ? 1.0 : std::pow(unit(rng), 1.0 / 8.0));
    for (double& v : x) v *= radius / std::sqrt(norm);
    ASSERT_GT(cert.V.evaluate(x), 0.0);
  }
  EXPECT_TRUE(verify_certificate(cert, jet_engine_network(), region, 100000, 11).passed());
}

TEST(Moments, MonteCarloFallbackMatchesBall) {
  RegionSpec r = full_state_unit_disk(0.1);
  r.state_ineqs.push_back(poly::parse("4 - x1^2 - x2^2", 2));
  ASSERT_FALSE(r.as_disjoint_balls(2).has_value());
  const poly::Monomial x1sq(std::vector<int>{2, 0});
  EXPECT_NEAR(state_set_moment(r, 2, x1sq, 1, 1000000), std::numbers::pi / 4, 5e-3);
  EXPECT_EQ(state_set_moment(r, 2, x1sq, 1, 1000), state_set_moment(r, 2, x1sq, 1, 1000));
  EXPECT_DOUBLE_EQ(state_set_moment(full_state_unit_disk(0.1), 2, x1sq, 1, 10), std::numbers::pi / 4);
}

TEST(Config, Validation) {
  EXPECT_THROW(config(0.0, 2).validate(), std::invalid_argument);
  EXPECT_THROW(config(0.1, 3).validate(), std::invalid_argument);
  SynthesisConfig cfg = config(0.1, 2);
  cfg.deg_multipliers = 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(build_equilibrium_program(toy_network(), unit_disk_pair_region(0.1), config(0.1, 2)),
               std::invalid_argument);
}

TEST(CertificateText, RoundTrip) {
  const Solved s = solve(toy_network(), unit_disk_pair_region(0.1), config(0.1, 4));
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Certificate cert = extract_certificate(s.solution, s.built);
  std::stringstream text;
  write_certificate(cert, text);
  const Certificate back = read_certificate(text);
  EXPECT_EQ(back.kind, cert.kind);
  EXPECT_EQ(back.lambda, cert.lambda);
  EXPECT_EQ(back.dim, cert.dim);
  EXPECT_EQ(back.identity_residual, cert.identity_residual);
  EXPECT_EQ(back.objective, cert.objective);
  EXPECT_TRUE((back.V - cert.V).is_zero());
  ASSERT_EQ(back.multipliers.size(), cert.multipliers.size());
  for (std::size_t k = 0; k < cert.multipliers.size(); ++k) {
    EXPECT_EQ(back.multipliers[k].first, cert.multipliers[k].first);
    EXPECT_TRUE((back.multipliers[k].second - cert.multipliers[k].second).is_zero());
  }
}

TEST(CertificateText, ErrorsNameTheLine) {
  std::stringstream text("ros-cert certificate v1\nprogram manifold\nlambda 0.1\ndim 2\nV 1 - x3^2\nend\n");
  try {
    read_certificate(text);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
  }
  std::stringstream no_header("program manifold\n");
  EXPECT_THROW(read_certificate(no_header), std::invalid_argument);
}

}  // namespace
}  // namespace roscert::synth
