#include "roscert/sos.hpp"

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

namespace roscert::sos {
namespace {

using poly::LinPoly;
using poly::Monomial;
using poly::Poly;

Poly p2(const char* text) { return poly::parse(text, 2); }

struct Solved {
  SosProgram program;
  CompiledSdp compiled;
  sdp::SdpSolution solution;
};

Solved solve_membership(const Poly& expr, const GramBasis& basis) {
  Solved s;
  s.program.add_sos_constraint(LinPoly::lift(expr), basis, "expr");
  s.compiled = compile(s.program);
  s.solution = sdp::solve(s.compiled.problem);
  return s;
}

TEST(MakeBasis, SizesAndOrder) {
  const GramBasis b = make_basis(2, 1);
  ASSERT_EQ(b.size(), 3);
  EXPECT_EQ(b.monomials[0], Monomial(std::vector<int>{0, 0}));
  EXPECT_EQ(b.monomials[1], Monomial(std::vector<int>{1, 0}));
  EXPECT_EQ(b.monomials[2], Monomial(std::vector<int>{0, 1}));
  EXPECT_EQ(make_basis(2, 3).size(), 10);
  EXPECT_EQ(make_basis(6, 3).size(), 84);
  EXPECT_EQ(make_basis(8, 2).size(), 45);
  EXPECT_EQ(make_basis(3, 0).size(), 1);
}

TEST(MakeBasis, RestrictedVariables) {
  const std::vector<int> vars{0, 2};
  const GramBasis b = make_basis(4, 2, vars);
  EXPECT_EQ(b.size(), 6);
  for (const Monomial& m : b.monomials) {
    EXPECT_EQ(m[1], 0);
    EXPECT_EQ(m[3], 0);
  }
  for (std::size_t k = 1; k < b.monomials.size(); ++k) EXPECT_LT(b.monomials[k - 1], b.monomials[k]);
}

TEST(Compile, PerfectSquare) {
  GramBasis basis;
  basis.ambient_dim = 2;
  basis.monomials = {Monomial(std::vector<int>{1, 0}), Monomial(std::vector<int>{0, 1})};
  const Solved s = solve_membership(p2("x1^2 - 2*x1*x2 + x2^2"), basis);
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Reconstruction r = reconstruct(s.solution, s.program, s.compiled, 0);
  EXPECT_LE(r.residual, 1e-9);
  EXPECT_GE(r.min_eig, -1e-8);
  // The Gram matrix is unique here: [[1, -1], [-1, 1]].
  const Eigen::MatrixXd& g = s.solution.blocks[0];
  EXPECT_NEAR(g(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(g(0, 1), -1.0, 1e-6);
  EXPECT_NEAR(g(1, 1), 1.0, 1e-6);
}

TEST(Compile, KnownSosQuartic) {
  const Poly expr = p2("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4");
  // Independent oracle: an explicit rank-2 decomposition.
  const Poly a = p2("2*x1^2 - 3*x2^2 + x1*x2");
  const Poly b = p2("x2^2 + 3*x1*x2");
  EXPECT_TRUE((0.5 * (a * a) + 0.5 * (b * b) - expr).is_zero());
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) {
      const double pt[2] = {i / 10.0, j / 10.0};
      EXPECT_GE(expr.evaluate(pt), -1e-12);
    }
  }

  GramBasis basis;
  basis.ambient_dim = 2;
  basis.monomials = {Monomial(std::vector<int>{2, 0}), Monomial(std::vector<int>{1, 1}),
                     Monomial(std::vector<int>{0, 2})};
  const Solved s = solve_membership(expr, basis);
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Reconstruction r = reconstruct(s.solution, s.program, s.compiled, 0);
  EXPECT_LE(r.residual, 1e-6);
  EXPECT_GE(r.min_eig, -1e-8);
}

TEST(Compile, MotzkinIsNotSos) {
  const Poly motzkin = p2("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1");
  // Nonnegative everywhere (AM-GM), checked by sampling.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 20000; ++k) {
    const double pt[2] = {u(rng), u(rng)};
    EXPECT_GE(motzkin.evaluate(pt), -1e-12);
  }
  const Solved s = solve_membership(motzkin, make_basis(2, 3));
  EXPECT_EQ(s.solution.status, sdp::Status::kInfeasible);
}

TEST(Compile, ZeroExpressionZeroGram) {
  SosProgram program;
  program.add_sos_constraint(LinPoly(2), make_basis(2, 1), "zero");
  const CompiledSdp compiled = compile(program);
  sdp::SdpSolution sol;
  sol.blocks = {Eigen::MatrixXd::Zero(3, 3)};
  sol.free = Eigen::VectorXd(0);
  const Reconstruction r = reconstruct(sol, program, compiled, 0);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_TRUE(r.gram_poly.is_zero());
}

TEST(Compile, DegreeOverflowNamesMonomial) {
  SosProgram program;
  program.add_sos_constraint(LinPoly::lift(p2("x1^4 + 1")), make_basis(2, 1), "main");
  try {
    compile(program);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("x1^4"), std::string::npos) << what;
    EXPECT_NE(what.find("main"), std::string::npos) << what;
  }
}

TEST(Compile, RowCountMatchesMonomialUnion) {
  const GramBasis basis = make_basis(3, 2);
  std::set<Monomial> product;
  for (const Monomial& a : basis.monomials) {
    for (const Monomial& b : basis.monomials) product.insert(a * b);
  }
  SosProgram program;
  program.add_sos_constraint(LinPoly::lift(poly::parse("x1^4 + x2^2*x3^2 + 1", 3)), basis, "c");
  const CompiledSdp compiled = compile(program);
  EXPECT_EQ(compiled.problem.num_constraints(), static_cast<int>(product.size()));
}

TEST(Compile, SosPolynomialMultiplier) {
  // maximize a  s.t.  x^2 + 1 - a - s (1 - x^2) SOS, s >= 0 constant.
  // At x = 0 this needs a <= 1 - s, so the optimum is a = 1.
  SosProgram program;
  const LinPoly s = program.sos_polynomial(make_basis(1, 0), "s");
  const int a = program.new_free_variable();
  LinPoly expr = LinPoly::lift(poly::parse("x1^2 + 1", 1));
  LinPoly a_poly(1);
  a_poly.add_term(Monomial(1), poly::AffineForm::variable(a));
  expr -= a_poly;
  expr -= s * poly::parse("1 - x1^2", 1);
  program.add_sos_constraint(expr, make_basis(1, 1), "main");
  program.set_objective(poly::AffineForm::variable(a));
  const CompiledSdp compiled = compile(program);
  const sdp::SdpSolution sol = sdp::solve(compiled.problem);
  ASSERT_EQ(sol.status, sdp::Status::kOptimal);
  EXPECT_NEAR(sol.primal_objective, 1.0, 1e-6);
  EXPECT_LE(reconstruct(sol, program, compiled, 0).residual, 1e-6);
}

class RoundTrip : public ::testing::TestWithParam<int> {};

TEST_P(RoundTrip, RandomSumsOfSquares) {
  std::mt19937_64 rng(GetParam());
  std::normal_distribution<double> normal;
  const GramBasis basis = make_basis(3, 2);
  Poly expr(3);
  for (int k = 0; k < 4; ++k) {
    Poly q(3);
    for (const Monomial& m : basis.monomials) q.add_term(m, normal(rng));
    expr += q * q;
  }
  const Solved s = solve_membership(expr, basis);
  ASSERT_EQ(s.solution.status, sdp::Status::kOptimal);
  const Reconstruction r = reconstruct(s.solution, s.program, s.compiled, 0);
  EXPECT_LE(r.residual, 1e-6);
  EXPECT_GE(r.min_eig, -1e-8);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RoundTrip, ::testing::Range(1, 7));

}  // namespace
}  // namespace roscert::sos
