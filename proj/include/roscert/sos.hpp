#pragma once

#include <span>
#include <string>
#include <vector>

#include "roscert/poly.hpp"
#include "roscert/sdp.hpp"

namespace roscert::sos {

/// Monomials of total degree <= half_degree, sorted in graded-lex order.
struct GramBasis {
  int ambient_dim = 0;
  std::vector<poly::Monomial> monomials;

  int size() const { return static_cast<int>(monomials.size()); }
  int half_degree() const;
};

GramBasis make_basis(int ambient_dim, int half_degree);

/// Basis restricted to the listed variables; the others have exponent zero.
GramBasis make_basis(int ambient_dim, int half_degree, std::span<const int> variables);

/// Smallest basis able to certify `expr`: half-degree ceil(deg / 2) over the
/// variables the expression uses.
GramBasis basis_for(const poly::LinPoly& expr);

/// Either an unconstrained scalar or one entry (row <= col) of a Gram block.
struct DecisionVar {
  enum class Kind { kFree, kGram };
  Kind kind = Kind::kFree;
  int index = 0;  // free-variable index for kFree, block index for kGram
  int row = 0;
  int col = 0;
};

struct SosConstraint {
  poly::LinPoly expr;
  GramBasis basis;
  std::string label;
  int block = 0;
};

/// Decision-variable registry plus the constraints over it. Every Gram
/// block becomes one PSD block of the compiled SDP.
class SosProgram {
 public:
  int num_decision_vars() const { return static_cast<int>(vars_.size()); }
  const std::vector<DecisionVar>& decision_vars() const { return vars_; }
  const std::vector<SosConstraint>& constraints() const { return constraints_; }
  const std::vector<poly::LinPoly>& equalities() const { return equalities_; }
  const std::vector<GramBasis>& block_bases() const { return block_bases_; }
  const std::vector<std::string>& block_labels() const { return block_labels_; }
  const poly::AffineForm& objective() const { return objective_; }
  int num_free() const { return num_free_; }

  int new_free_variable();

  /// Polynomial with one fresh free coefficient per listed monomial.
  poly::LinPoly free_polynomial(int ambient_dim, std::span<const poly::Monomial> monomials);

  /// z' G z for a fresh Gram block G over `basis`; SOS by construction.
  poly::LinPoly sos_polynomial(const GramBasis& basis, std::string label);

  /// expr = z' G z for a fresh Gram block over `basis`.
  void add_sos_constraint(poly::LinPoly expr, GramBasis basis, std::string label);

  /// expr == 0 coefficient-wise.
  void add_equality(poly::LinPoly expr);

  /// Maximized.
  void set_objective(poly::AffineForm objective) { objective_ = std::move(objective); }

 private:
  int new_block(const GramBasis& basis, std::string label);

  std::vector<DecisionVar> vars_;
  std::vector<SosConstraint> constraints_;
  std::vector<poly::LinPoly> equalities_;
  std::vector<GramBasis> block_bases_;
  std::vector<std::string> block_labels_;
  std::vector<std::vector<int>> block_var_index_;  // upper-triangle row-major
  poly::AffineForm objective_;
  int num_free_ = 0;
};

struct CompiledSdp {
  sdp::SdpProblem problem;
  std::vector<DecisionVar> decision_vars;
  double objective_constant = 0.0;
  /// First SDP row of each SOS constraint, then of each equality.
  std::vector<int> constraint_first_row;
  std::vector<int> equality_first_row;

  /// Values of all decision variables at a solution.
  std::vector<double> decision_values(const sdp::SdpSolution& solution) const;
};

/// Coefficient matching in graded-lex order. Throws std::invalid_argument
/// naming the constraint and monomial when an expression term lies outside
/// the Gram product set.
CompiledSdp compile(const SosProgram& program);

struct Reconstruction {
  poly::Poly gram_poly;  // z' G z
  double residual = 0.0; // max |coefficient| of gram_poly - collapsed expr
  double min_eig = 0.0;
};

Reconstruction reconstruct(const sdp::SdpSolution& solution, const SosProgram& program,
                           const CompiledSdp& compiled, int constraint_index);

/// z' G z as a polynomial.
poly::Poly gram_polynomial(const GramBasis& basis, const Eigen::MatrixXd& gram);

}  // namespace roscert::sos
