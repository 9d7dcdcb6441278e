#include "roscert/poly.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

namespace roscert::poly {
namespace {

Poly P(const char* text, int dim = 2) { return parse(text, dim); }

void expect_same(const Poly& a, const Poly& b) {
  EXPECT_EQ(a.dim(), b.dim());
  EXPECT_EQ(a.terms(), b.terms()) << to_string(a) << " vs " << to_string(b);
}

Poly random_poly(int dim, int max_deg, int terms, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> exp(0, max_deg);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  Poly p(dim);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> e(dim);
    int budget = max_deg;
    for (int& v : e) {
      v = std::min(exp(rng), budget);
      budget -= v;
    }
    p.add_term(Monomial(e), coef(rng));
  }
  return p;
}

std::vector<double> random_point(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<double> x(dim);
  for (double& v : x) v = u(rng);
  return x;
}

void expect_rel(double a, double b, double rel) { EXPECT_LE(std::abs(a - b), rel * std::max(1.0, std::abs(b))); }

TEST(Add, Examples) {
  expect_same(P("x1 + x2") + P("x1 - x2"), P("2*x1"));
  const Poly p = P("3*x1^2*x2 - x2 + 0.5");
  expect_same(p + Poly(2), p);
  expect_same(P("x1^2") + P("3*x1^2"), P("4*x1^2"));
  EXPECT_THROW(add(P("x1"), P("x1", 3)), std::invalid_argument);
}

TEST(Add, TinyCoefficientsAreDropped) {
  Poly p = P("x1 + 1e-15*x2");
  EXPECT_EQ(p.terms().size(), 1u);
  p.add_term(Monomial::variable(2, 0), -1.0 + 5e-15);
  EXPECT_TRUE(p.is_zero());
}

TEST(Mul, Examples) {
  expect_same(P("x1 + x2") * P("x1 - x2"), P("x1^2 - x2^2"));
  const Poly p = P("3*x1^2*x2 - x2 + 0.5");
  expect_same(p * Poly::constant(2, 1.0), p);
  expect_same(P("x1^2") * P("x2^3"), P("x1^2*x2^3"));
  EXPECT_EQ((P("x1^2 + x2") * P("x1*x2^3 - 1")).degree(), 6);
  EXPECT_THROW(mul(P("x1"), P("x1", 3)), std::invalid_argument);
}

TEST(Grad, Examples) {
  const auto g = grad(P("x1^2 + x2^2"));
  ASSERT_EQ(g.size(), 2u);
  expect_same(g[0], P("2*x1"));
  expect_same(g[1], P("2*x2"));
  for (const Poly& c : grad(Poly::constant(2, 7.0))) EXPECT_TRUE(c.is_zero());
  const auto h = grad(P("x1^3*x2"));
  expect_same(h[0], P("3*x1^2*x2"));
  expect_same(h[1], P("x1^3"));
}

TEST(Grad, Linear) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Poly p = random_poly(3, 5, 8, rng);
    const Poly q = random_poly(3, 5, 8, rng);
    const auto lhs = grad(2.0 * p + 0.5 * q);
    const auto gp = grad(p);
    const auto gq = grad(q);
    for (int k = 0; k < 3; ++k) {
      const Poly rhs = 2.0 * gp[k] + 0.5 * gq[k];
      ASSERT_EQ(lhs[k].terms().size(), rhs.terms().size());
      for (const auto& [m, c] : rhs.terms()) EXPECT_NEAR(lhs[k].coefficient(m), c, 1e-14);
    }
  }
}

TEST(SubstituteLinear, Examples) {
  AffineMap diff{Eigen::MatrixXd(1, 2), Eigen::VectorXd::Zero(1)};
  diff.matrix << 1.0, -1.0;
  expect_same(substitute_linear(P("x1^2", 1), diff), P("x1^2 - 2*x1*x2 + x2^2"));
  const Poly p = P("3*x1^2*x2 - x2 + 0.5");
  expect_same(substitute_linear(p, AffineMap::identity(2)), p);
  AffineMap scale{Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1)};
  expect_same(substitute_linear(P("x1 + 1", 1), scale), P("2*x1 + 1", 1));
  EXPECT_THROW(substitute_linear(p, diff), std::invalid_argument);
}

TEST(SubstituteLinear, CommutesWithEvaluation) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 32; ++trial) {
    const Poly p = random_poly(3, 4, 10, rng);
    AffineMap map{Eigen::MatrixXd(3, 4), Eigen::VectorXd(3)};
    for (int i = 0; i < 3; ++i) {
      map.offset(i) = u(rng);
      for (int j = 0; j < 4; ++j) map.matrix(i, j) = u(rng);
    }
    const Poly q = substitute_linear(p, map);
    EXPECT_LE(q.degree(), p.degree());
    const auto x = random_point(4, rng);
    const Eigen::VectorXd old = map.matrix * Eigen::Map<const Eigen::VectorXd>(x.data(), 4) + map.offset;
    expect_rel(q.evaluate(x), p.evaluate(std::vector<double>(old.data(), old.data() + 3)), 1e-9);
  }
}

TEST(Evaluate, Examples) {
  const Poly vdp = P("0.45*x2 - 0.45*x1^2*x2 - 0.81*x1^2");
  EXPECT_NEAR(vdp.evaluate(std::vector<double>{1.0, 2.0}), -0.81, 1e-15);
  EXPECT_EQ(P("x1^2 + x2^2").evaluate(std::vector<double>{0.0, 0.0}), 0.0);
  EXPECT_NEAR(P("x1^2 + x2^2").evaluate(std::vector<double>{0.6, 0.8}), 1.0, 1e-15);
  EXPECT_THROW(P("x1").evaluate(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Evaluate, EvaluatorMatchesPoly) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 32; ++trial) {
    const Poly p = random_poly(4, 6, 12, rng);
    const PolyEvaluator e(p);
    const auto x = random_point(4, rng);
    expect_rel(e(x), p.evaluate(x), 1e-12);
  }
}

TEST(Ring, AxiomsAtRandomPoints) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Poly a = random_poly(3, 4, 6, rng);
    const Poly b = random_poly(3, 4, 6, rng);
    const Poly c = random_poly(3, 4, 6, rng);
    const Poly sums[] = {a + b, b + a, (a + b) + c, a + (b + c)};
    const Poly prods[] = {a * b, b * a, (a * b) * c, a * (b * c), a * (b + c), a * b + a * c};
    for (int s = 0; s < 32; ++s) {
      const auto x = random_point(3, rng);
      expect_rel(sums[0].evaluate(x), sums[1].evaluate(x), 1e-9);
      expect_rel(sums[2].evaluate(x), sums[3].evaluate(x), 1e-9);
      expect_rel(prods[0].evaluate(x), prods[1].evaluate(x), 1e-9);
      expect_rel(prods[2].evaluate(x), prods[3].evaluate(x), 1e-9);
      expect_rel(prods[4].evaluate(x), prods[5].evaluate(x), 1e-9);
      expect_rel(prods[0].evaluate(x), a.evaluate(x) * b.evaluate(x), 1e-9);
    }
  }
}

TEST(Text, RoundTrip) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Poly p = random_poly(3, 5, 9, rng);
    expect_same(parse(to_string(p), 3), p);
  }
  expect_same(parse(to_string(Poly(2)), 2), Poly(2));
  EXPECT_EQ(to_string(P("x2 + x1 + 1")), "1 + x1 + x2");
}

TEST(Text, Errors) {
  EXPECT_THROW(parse("x3", 2), std::invalid_argument);
  EXPECT_THROW(parse("x1 +", 2), std::invalid_argument);
  EXPECT_THROW(parse("2**x1", 2), std::invalid_argument);
  EXPECT_THROW(parse("x1^-1", 2), std::invalid_argument);
}

TEST(Monomial, GradedLexOrder) {
  const Poly p = P("x2^2 + x1*x2 + x1^2 + x2 + x1 + 1");
  std::vector<std::vector<int>> order;
  for (const auto& [m, c] : p.terms()) order.push_back(m.exponents());
  const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(order, expected);
  EXPECT_THROW(Monomial(std::vector<int>{1, -1}), std::invalid_argument);
}

TEST(LinPoly, LiftCollapseIsIdentity) {
  const Poly p = P("3*x1^2*x2 - x2 + 0.5");
  expect_same(LinPoly::lift(p).collapse({}), p);
}

TEST(LinPoly, CollapseSubstitutesDecisionValues) {
  LinPoly v(2);
  v.add_term(Monomial::variable(2, 0, 2), AffineForm::variable(0, 2.0));
  v.add_term(Monomial(2), AffineForm{1.0, {{1, -1.0}}});
  const std::vector<double> z{0.5, 3.0};
  expect_same(v.collapse(z), P("x1^2 - 2"));
  expect_same((v * P("x2")).collapse(z), P("x1^2*x2 - 2*x2"));
  expect_same(v.derivative(0).collapse(z), P("2*x1"));
}

TEST(BallMoment, Examples) {
  EXPECT_NEAR(ball_moment(Monomial(2), 2, 1.0), std::numbers::pi, 1e-14);
  EXPECT_EQ(ball_moment(Monomial(std::vector<int>{1, 0}), 2, 1.0), 0.0);
  EXPECT_NEAR(ball_moment(Monomial(std::vector<int>{2, 0}), 2, 1.0), std::numbers::pi / 4, 1e-14);
  EXPECT_THROW(ball_moment(Monomial(2), 2, 0.0), std::invalid_argument);
}

TEST(BallMoment, QuarterPiByMonteCarlo) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int samples = 10000000;
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double x = u(rng);
    const double y = u(rng);
    if (x * x + y * y < 1.0) sum += x * x;
  }
  EXPECT_NEAR(4.0 * sum / samples, ball_moment(Monomial(std::vector<int>{2, 0}), 2, 1.0), 1e-3);
}

TEST(BallMoment, ScalingLaw) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> half(0, 3);
  std::uniform_real_distribution<double> radius(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    std::vector<int> e(n);
    for (int& v : e) v = 2 * half(rng);
    const Monomial alpha(e);
    const double R = radius(rng);
    expect_rel(ball_moment(alpha, n, R), std::pow(R, n + alpha.degree()) * ball_moment(alpha, n, 1.0), 1e-12);
  }
}

void even_exponents(int n, int var, int budget, std::vector<int>& e, std::vector<Monomial>& out) {
  if (var == n) {
    out.emplace_back(e);
    return;
  }
  for (int k = 0; 2 * k <= budget; ++k) {
    e[var] = 2 * k;
    even_exponents(n, var + 1, budget - 2 * k, e, out);
  }
  e[var] = 0;
}

// Every even exponent of total degree <= 8 in dimensions 1..8, each against
// its own uniform sample of the unit ball. With 1286 independent checks a
// handful of 3-sigma excursions is expected (0.27% each), so the test bounds
// their count and forbids any 5-sigma miss.
TEST(BallMoment, MatchesMonteCarloOracle) {
  const int samples = 40000;
  int checked = 0;
  int beyond3 = 0;
  int beyond5 = 0;
  std::mt19937_64 rng(100);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 1; n <= 8; ++n) {
    const double volume = ball_moment(Monomial(n), n, 1.0);
    std::vector<int> e(n, 0);
    std::vector<Monomial> alphas;
    even_exponents(n, 0, 8, e, alphas);
    std::vector<double> x(n);
    for (const Monomial& alpha : alphas) {
      double sum = 0.0;
      double sq = 0.0;
      for (int s = 0; s < samples; ++s) {
        double norm = 0.0;
        for (double& v : x) {
          v = normal(rng);
          norm += v * v;
        }
        const double r = std::pow(unit(rng), 1.0 / n) / std::sqrt(norm);
        double v = volume;
        for (int k = 0; k < n; ++k) v *= std::pow(x[k] * r, alpha[k]);
        sum += v;
        sq += v * v;
      }
      const double mean = sum / samples;
      const double se = std::sqrt(std::max(sq / samples - mean * mean, 0.0) / samples);
      const double exact = ball_moment(alpha, n, 1.0);
      const double err = std::abs(mean - exact) - 1e-12 * exact;
      ++checked;
      if (err > 3.0 * se) ++beyond3;
      if (err > 5.0 * se) {
        ++beyond5;
        ADD_FAILURE() << "n = " << n << ", alpha degree " << alpha.degree() << ": Monte Carlo " << mean
                      << " vs exact " << exact << " (standard error " << se << ")";
      }
    }
  }
  EXPECT_EQ(checked, 1286);
  EXPECT_LE(beyond3, 12);
  EXPECT_EQ(beyond5, 0);
}

}  // namespace
}  // namespace roscert::poly
