#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace roscert::poly {

/// Coefficients with absolute value below this are dropped from every Poly
/// and LinPoly after each operation.
inline constexpr double kZeroThreshold = 1e-14;

/// Exponent vector of a monomial. Ordered graded-lexicographically: lower
/// total degree first, then larger leading exponents first, so the basis of
/// degree one in two variables reads {1, x1, x2}.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(int ambient_dim);
  explicit Monomial(std::vector<int> exponents);

  static Monomial variable(int ambient_dim, int var, int power = 1);

  int dim() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int var) const { return exponents_[var]; }
  const std::vector<int>& exponents() const { return exponents_; }
  bool is_constant() const { return degree_ == 0; }

  Monomial operator*(const Monomial& other) const;

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.exponents_ == b.exponents_;
  }
  friend bool operator<(const Monomial& a, const Monomial& b);

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Sparse multivariate polynomial with real coefficients in variables
/// x1..x_dim.
class Poly {
 public:
  using Terms = std::map<Monomial, double>;

  Poly() = default;
  explicit Poly(int ambient_dim) : dim_(ambient_dim) {}

  static Poly constant(int ambient_dim, double value);
  static Poly variable(int ambient_dim, int var);
  static Poly monomial(const Monomial& m, double coefficient = 1.0);

  int dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coefficient(const Monomial& m) const;

  /// Adds `coefficient` to the term `m`, dropping it if it cancels.
  void add_term(const Monomial& m, double coefficient);

  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  Poly& operator*=(double scale);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator-(Poly a) { return a *= -1.0; }
  friend Poly operator*(const Poly& a, const Poly& b);

  Poly derivative(int var) const;
  double evaluate(std::span<const double> point) const;

 private:
  int dim_ = 0;
  Terms terms_;
};

Poly add(const Poly& a, const Poly& b);
Poly mul(const Poly& a, const Poly& b);
std::vector<Poly> grad(const Poly& p);
double evaluate(const Poly& p, std::span<const double> point);
Poly pow(const Poly& p, int exponent);

/// Flattened copy of a Poly for repeated evaluation: powers of every
/// variable are tabulated once per point.
class PolyEvaluator {
 public:
  PolyEvaluator() = default;
  explicit PolyEvaluator(const Poly& p);

  int dim() const { return dim_; }
  double operator()(std::span<const double> point) const;

 private:
  int dim_ = 0;
  int max_exp_ = 0;
  std::vector<double> coeffs_;
  std::vector<int> offsets_;  // per term, into factors_
  std::vector<int> factors_;  // var * (max_exp_ + 1) + exponent, exponent >= 1
};

/// Affine change of variables: old variable k = sum_j matrix(k, j) u_j +
/// offset(k), with u in `matrix.cols()` new variables.
struct AffineMap {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;

  static AffineMap identity(int dim);
  int old_dim() const { return static_cast<int>(matrix.rows()); }
  int new_dim() const { return static_cast<int>(matrix.cols()); }
};

Poly substitute_linear(const Poly& p, const AffineMap& map);

/// Integral of x^alpha over the ball of `radius` in R^n (n = alpha.dim()).
double ball_moment(const Monomial& alpha, int n, double radius);

/// Renders as "c1*x1^a*x2^b + ..." in graded-lex order; coefficients use
/// shortest round-trip formatting so parse(render(p)) reproduces p exactly.
std::string to_string(const Poly& p);

/// Parses the grammar written by to_string. Variables are x1..x_dim; `^`
/// binds to a variable, `*` separates factors, numbers may use exponents.
Poly parse(std::string_view text, int ambient_dim);

/// Affine function of scalar decision variables: constant + sum c_k z_k.
struct AffineForm {
  double constant = 0.0;
  std::map<int, double> terms;

  static AffineForm variable(int index, double coefficient = 1.0);
  bool is_zero() const { return constant == 0.0 && terms.empty(); }
  void add(const AffineForm& other, double scale = 1.0);
  void scale(double s);
  void prune();
  double evaluate(std::span<const double> values) const;
  int max_variable() const;
};

/// Polynomial whose coefficients are affine forms over decision variables.
class LinPoly {
 public:
  using Terms = std::map<Monomial, AffineForm>;

  LinPoly() = default;
  explicit LinPoly(int ambient_dim) : dim_(ambient_dim) {}

  static LinPoly lift(const Poly& p);

  int dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  void add_term(const Monomial& m, const AffineForm& form, double scale = 1.0);

  LinPoly& operator+=(const LinPoly& other);
  LinPoly& operator-=(const LinPoly& other);
  LinPoly& operator*=(double s);

  friend LinPoly operator+(LinPoly a, const LinPoly& b) { return a += b; }
  friend LinPoly operator-(LinPoly a, const LinPoly& b) { return a -= b; }
  friend LinPoly operator*(LinPoly a, double s) { return a *= s; }
  friend LinPoly operator*(double s, LinPoly a) { return a *= s; }
  friend LinPoly operator*(const LinPoly& a, const Poly& b);
  friend LinPoly operator*(const Poly& b, const LinPoly& a) { return a * b; }

  LinPoly derivative(int var) const;

  /// Substitutes decision-variable values; the result is an ordinary Poly.
  Poly collapse(std::span<const double> values) const;

  /// Variables with a non-zero exponent in some term.
  std::vector<int> used_variables() const;

 private:
  int dim_ = 0;
  Terms terms_;
};

LinPoly substitute_linear(const LinPoly& p, const AffineMap& map);

/// Re-indexes variables: old variable k becomes new variable targets[k].
LinPoly embed(const LinPoly& p, int new_dim, std::span<const int> targets);
Poly embed(const Poly& p, int new_dim, std::span<const int> targets);

}  // namespace roscert::poly
