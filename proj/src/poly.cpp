#include "roscert/poly.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace roscert::poly {
namespace {

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": ambient dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

// ---------------------------------------------------------------- Monomial

Monomial::Monomial(int ambient_dim) : exponents_(ambient_dim, 0) {}

Monomial::Monomial(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::variable(int ambient_dim, int var, int power) {
  std::vector<int> e(ambient_dim, 0);
  e.at(var) = power;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  require_same_dim(dim(), other.dim(), "Monomial::operator*");
  Monomial out(*this);
  for (int k = 0; k < dim(); ++k) out.exponents_[k] += other.exponents_[k];
  out.degree_ += other.degree_;
  return out;
}

bool operator<(const Monomial& a, const Monomial& b) {
  if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
  return b.exponents_ < a.exponents_;
}

// -------------------------------------------------------------------- Poly

Poly Poly::constant(int ambient_dim, double value) {
  Poly p(ambient_dim);
  p.add_term(Monomial(ambient_dim), value);
  return p;
}

Poly Poly::variable(int ambient_dim, int var) {
  Poly p(ambient_dim);
  p.add_term(Monomial::variable(ambient_dim, var), 1.0);
  return p;
}

Poly Poly::monomial(const Monomial& m, double coefficient) {
  Poly p(m.dim());
  p.add_term(m, coefficient);
  return p;
}

int Poly::degree() const {
  // Terms are sorted by degree, so the last one is of maximal degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Poly::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Poly::add_term(const Monomial& m, double coefficient) {
  require_same_dim(dim_, m.dim(), "Poly::add_term");
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, coefficient);
  if (!inserted) it->second += coefficient;
  if (std::abs(it->second) < kZeroThreshold) terms_.erase(it);
}

Poly& Poly::operator+=(const Poly& other) {
  require_same_dim(dim_, other.dim_, "add");
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  require_same_dim(dim_, other.dim_, "sub");
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Poly& Poly::operator*=(double scale) {
  if (scale == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scale;
    if (std::abs(it->second) < kZeroThreshold) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  require_same_dim(a.dim_, b.dim_, "mul");
  Poly out(a.dim_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      auto [it, inserted] = out.terms_.try_emplace(ma * mb, ca * cb);
      if (!inserted) it->second += ca * cb;
    }
  }
  std::erase_if(out.terms_, [](const auto& t) { return std::abs(t.second) < kZeroThreshold; });
  return out;
}

Poly Poly::derivative(int var) const {
  if (var < 0 || var >= dim_) throw std::out_of_range("Poly::derivative: variable index");
  Poly out(dim_);
  for (const auto& [m, c] : terms_) {
    const int e = m[var];
    if (e == 0) continue;
    std::vector<int> ex = m.exponents();
    ex[var] -= 1;
    out.add_term(Monomial(std::move(ex)), c * e);
  }
  return out;
}

double Poly::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dim_) {
    throw std::invalid_argument("evaluate: point has " + std::to_string(point.size()) +
                                " entries, polynomial has dimension " + std::to_string(dim_));
  }
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int k = 0; k < dim_; ++k) {
      for (int e = m[k]; e > 0; --e) t *= point[k];
    }
    sum += t;
  }
  return sum;
}

PolyEvaluator::PolyEvaluator(const Poly& p) : dim_(p.dim()) {
  for (const auto& [m, c] : p.terms()) {
    for (int k = 0; k < dim_; ++k) max_exp_ = std::max(max_exp_, m[k]);
  }
  for (const auto& [m, c] : p.terms()) {
    coeffs_.push_back(c);
    offsets_.push_back(static_cast<int>(factors_.size()));
    for (int k = 0; k < dim_; ++k) {
      if (m[k] > 0) factors_.push_back(k * (max_exp_ + 1) + m[k]);
    }
  }
  offsets_.push_back(static_cast<int>(factors_.size()));
}

double PolyEvaluator::operator()(std::span<const double> point) const {
  require_same_dim(dim_, static_cast<int>(point.size()), "PolyEvaluator");
  const int stride = max_exp_ + 1;
  thread_local std::vector<double> powers;
  powers.assign(static_cast<std::size_t>(dim_) * stride, 1.0);
  for (int k = 0; k < dim_; ++k) {
    for (int e = 1; e <= max_exp_; ++e) powers[k * stride + e] = powers[k * stride + e - 1] * point[k];
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    double term = coeffs_[t];
    for (int f = offsets_[t]; f < offsets_[t + 1]; ++f) term *= powers[factors_[f]];
    sum += term;
  }
  return sum;
}

Poly add(const Poly& a, const Poly& b) { return a + b; }
Poly mul(const Poly& a, const Poly& b) { return a * b; }

std::vector<Poly> grad(const Poly& p) {
  std::vector<Poly> out;
  out.reserve(p.dim());
  for (int k = 0; k < p.dim(); ++k) out.push_back(p.derivative(k));
  return out;
}

double evaluate(const Poly& p, std::span<const double> point) { return p.evaluate(point); }

Poly pow(const Poly& p, int exponent) {
  if (exponent < 0) throw std::invalid_argument("pow: negative exponent");
  Poly result = Poly::constant(p.dim(), 1.0);
  Poly base = p;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

// ---------------------------------------------------------- substitutions

AffineMap AffineMap::identity(int dim) {
  return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
}

namespace {

void check_map(int p_dim, const AffineMap& map) {
  if (map.old_dim() != p_dim || map.offset.size() != map.old_dim()) {
    throw std::invalid_argument("substitute_linear: map dimensions (" +
                                std::to_string(map.matrix.rows()) + "x" +
                                std::to_string(map.matrix.cols()) +
                                ") do not match polynomial dimension " + std::to_string(p_dim));
  }
}

// powers[k][e] = (k-th affine form of the map)^e as a Poly in the new variables.
std::vector<std::vector<Poly>> affine_powers(const AffineMap& map, const std::vector<int>& max_exp) {
  const int nd = map.new_dim();
  std::vector<std::vector<Poly>> powers(map.old_dim());
  for (int k = 0; k < map.old_dim(); ++k) {
    Poly form = Poly::constant(nd, map.offset(k));
    for (int j = 0; j < nd; ++j) {
      if (map.matrix(k, j) != 0.0) form.add_term(Monomial::variable(nd, j), map.matrix(k, j));
    }
    powers[k].push_back(Poly::constant(nd, 1.0));
    for (int e = 1; e <= max_exp[k]; ++e) powers[k].push_back(powers[k].back() * form);
  }
  return powers;
}

template <typename Terms>
std::vector<int> max_exponents(const Terms& terms, int dim) {
  std::vector<int> out(dim, 0);
  for (const auto& [m, c] : terms) {
    for (int k = 0; k < dim; ++k) out[k] = std::max(out[k], m[k]);
  }
  return out;
}

Poly expand_monomial(const Monomial& m, const std::vector<std::vector<Poly>>& powers, int nd) {
  Poly t = Poly::constant(nd, 1.0);
  for (int k = 0; k < m.dim(); ++k) {
    if (m[k] > 0) t = t * powers[k][m[k]];
  }
  return t;
}

}  // namespace

Poly substitute_linear(const Poly& p, const AffineMap& map) {
  check_map(p.dim(), map);
  const auto powers = affine_powers(map, max_exponents(p.terms(), p.dim()));
  Poly out(map.new_dim());
  for (const auto& [m, c] : p.terms()) out += expand_monomial(m, powers, map.new_dim()) * c;
  return out;
}

LinPoly substitute_linear(const LinPoly& p, const AffineMap& map) {
  check_map(p.dim(), map);
  const auto powers = affine_powers(map, max_exponents(p.terms(), p.dim()));
  LinPoly out(map.new_dim());
  for (const auto& [m, form] : p.terms()) {
    const Poly t = expand_monomial(m, powers, map.new_dim());
    for (const auto& [tm, tc] : t.terms()) out.add_term(tm, form, tc);
  }
  return out;
}

namespace {

Monomial remap(const Monomial& m, int new_dim, std::span<const int> targets) {
  std::vector<int> e(new_dim, 0);
  for (int k = 0; k < m.dim(); ++k) {
    if (m[k] != 0) e.at(targets[k]) += m[k];
  }
  return Monomial(std::move(e));
}

}  // namespace

LinPoly embed(const LinPoly& p, int new_dim, std::span<const int> targets) {
  require_same_dim(p.dim(), static_cast<int>(targets.size()), "embed");
  LinPoly out(new_dim);
  for (const auto& [m, form] : p.terms()) out.add_term(remap(m, new_dim, targets), form);
  return out;
}

Poly embed(const Poly& p, int new_dim, std::span<const int> targets) {
  require_same_dim(p.dim(), static_cast<int>(targets.size()), "embed");
  Poly out(new_dim);
  for (const auto& [m, c] : p.terms()) out.add_term(remap(m, new_dim, targets), c);
  return out;
}

// ----------------------------------------------------------------- moments

double ball_moment(const Monomial& alpha, int n, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ball_moment: radius must be positive");
  if (alpha.dim() != n) throw std::invalid_argument("ball_moment: exponent length differs from n");
  double log_num = std::log(2.0);
  double beta_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (alpha[k] % 2 != 0) return 0.0;
    const double beta = (alpha[k] + 1) / 2.0;
    log_num += std::lgamma(beta);
    beta_sum += beta;
  }
  const double power = alpha.degree() + n;
  return std::exp(log_num - std::lgamma(beta_sum)) / power * std::pow(radius, power);
}

// --------------------------------------------------------------- rendering

std::string to_string(const Poly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    double coef = c;
    if (first) {
      if (coef < 0) {
        out += "-";
        coef = -coef;
      }
    } else {
      out += coef < 0 ? " - " : " + ";
      coef = std::abs(coef);
    }
    first = false;
    std::string factors;
    for (int k = 0; k < m.dim(); ++k) {
      if (m[k] == 0) continue;
      if (!factors.empty()) factors += "*";
      factors += "x" + std::to_string(k + 1);
      if (m[k] > 1) factors += "^" + std::to_string(m[k]);
    }
    if (factors.empty()) {
      out += format_double(coef);
    } else if (coef == 1.0) {
      out += factors;
    } else {
      out += format_double(coef) + "*" + factors;
    }
  }
  return out;
}

namespace {

class PolyParser {
 public:
  PolyParser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  Poly parse() {
    Poly out(dim_);
    skip_ws();
    if (pos_ == text_.size()) fail("empty polynomial");
    bool first = true;
    while (true) {
      skip_ws();
      if (pos_ == text_.size()) break;
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      auto [m, c] = term();
      out.add_term(m, sign * c);
    }
    return out;
  }

 private:
  std::pair<Monomial, double> term() {
    double coef = 1.0;
    std::vector<int> ex(dim_, 0);
    bool any = false;
    while (true) {
      skip_ws();
      if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
        coef *= number();
      } else if (pos_ < text_.size() && peek() == 'x') {
        ++pos_;
        const int var = integer();
        if (var < 1 || var > dim_) {
          fail("variable x" + std::to_string(var) + " outside x1..x" + std::to_string(dim_));
        }
        int e = 1;
        skip_ws();
        if (pos_ < text_.size() && peek() == '^') {
          ++pos_;
          skip_ws();
          e = integer();
        }
        ex[var - 1] += e;
      } else {
        fail(any ? "expected a factor after '*'" : "expected a number or variable");
      }
      any = true;
      skip_ws();
      if (pos_ < text_.size() && peek() == '*') {
        ++pos_;
        continue;
      }
      break;
    }
    return {Monomial(std::move(ex)), coef};
  }

  double number() {
    const char* begin = text_.data() + pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  int integer() {
    const char* begin = text_.data() + pos_;
    int v = 0;
    auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("expected an integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("polynomial parse error at column " + std::to_string(pos_ + 1) +
                                ": " + why + " in \"" + std::string(text_) + "\"");
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly parse(std::string_view text, int ambient_dim) { return PolyParser(text, ambient_dim).parse(); }

// ------------------------------------------------------------- AffineForm

AffineForm AffineForm::variable(int index, double coefficient) {
  AffineForm f;
  if (coefficient != 0.0) f.terms.emplace(index, coefficient);
  return f;
}

void AffineForm::add(const AffineForm& other, double scale) {
  constant += scale * other.constant;
  for (const auto& [k, c] : other.terms) {
    auto [it, inserted] = terms.try_emplace(k, scale * c);
    if (!inserted) it->second += scale * c;
  }
}

void AffineForm::scale(double s) {
  constant *= s;
  for (auto& [k, c] : terms) c *= s;
}

void AffineForm::prune() {
  if (std::abs(constant) < kZeroThreshold) constant = 0.0;
  std::erase_if(terms, [](const auto& t) { return std::abs(t.second) < kZeroThreshold; });
}

double AffineForm::evaluate(std::span<const double> values) const {
  double v = constant;
  for (const auto& [k, c] : terms) v += c * values[k];
  return v;
}

int AffineForm::max_variable() const { return terms.empty() ? -1 : terms.rbegin()->first; }

// ----------------------------------------------------------------- LinPoly

LinPoly LinPoly::lift(const Poly& p) {
  LinPoly out(p.dim());
  for (const auto& [m, c] : p.terms()) {
    AffineForm f;
    f.constant = c;
    out.terms_.emplace(m, std::move(f));
  }
  return out;
}

int LinPoly::degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

void LinPoly::add_term(const Monomial& m, const AffineForm& form, double scale) {
  require_same_dim(dim_, m.dim(), "LinPoly::add_term");
  if (scale == 0.0 || form.is_zero()) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    AffineForm f = form;
    f.scale(scale);
    f.prune();
    if (!f.is_zero()) terms_.emplace(m, std::move(f));
    return;
  }
  it->second.add(form, scale);
  it->second.prune();
  if (it->second.is_zero()) terms_.erase(it);
}

LinPoly& LinPoly::operator+=(const LinPoly& other) {
  require_same_dim(dim_, other.dim_, "add");
  for (const auto& [m, f] : other.terms_) add_term(m, f);
  return *this;
}

LinPoly& LinPoly::operator-=(const LinPoly& other) {
  require_same_dim(dim_, other.dim_, "sub");
  for (const auto& [m, f] : other.terms_) add_term(m, f, -1.0);
  return *this;
}

LinPoly& LinPoly::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second.scale(s);
    it->second.prune();
    if (it->second.is_zero()) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

LinPoly operator*(const LinPoly& a, const Poly& b) {
  require_same_dim(a.dim_, b.dim(), "mul");
  LinPoly out(a.dim_);
  for (const auto& [ma, fa] : a.terms_) {
    for (const auto& [mb, cb] : b.terms()) {
      auto [it, inserted] = out.terms_.try_emplace(ma * mb);
      it->second.add(fa, cb);
    }
  }
  for (auto it = out.terms_.begin(); it != out.terms_.end();) {
    it->second.prune();
    if (it->second.is_zero()) {
      it = out.terms_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

LinPoly LinPoly::derivative(int var) const {
  if (var < 0 || var >= dim_) throw std::out_of_range("LinPoly::derivative: variable index");
  LinPoly out(dim_);
  for (const auto& [m, f] : terms_) {
    const int e = m[var];
    if (e == 0) continue;
    std::vector<int> ex = m.exponents();
    ex[var] -= 1;
    out.add_term(Monomial(std::move(ex)), f, e);
  }
  return out;
}

Poly LinPoly::collapse(std::span<const double> values) const {
  Poly out(dim_);
  for (const auto& [m, f] : terms_) {
    if (f.max_variable() >= static_cast<int>(values.size())) {
      throw std::invalid_argument("LinPoly::collapse: missing decision-variable value");
    }
    out.add_term(m, f.evaluate(values));
  }
  return out;
}

std::vector<int> LinPoly::used_variables() const {
  std::vector<bool> used(dim_, false);
  for (const auto& [m, f] : terms_) {
    for (int k = 0; k < dim_; ++k) used[k] = used[k] || m[k] != 0;
  }
  std::vector<int> out;
  for (int k = 0; k < dim_; ++k) {
    if (used[k]) out.push_back(k);
  }
  return out;
}

}  // namespace roscert::poly
