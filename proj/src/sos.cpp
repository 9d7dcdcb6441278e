#include "roscert/sos.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace roscert::sos {

using poly::AffineForm;
using poly::LinPoly;
using poly::Monomial;

namespace {

void monomials_up_to(int dim, std::span<const int> vars, std::size_t pos, int budget,
                     std::vector<int>& ex, std::vector<Monomial>& out) {
  if (pos == vars.size()) {
    out.emplace_back(ex);
    return;
  }
  for (int e = 0; e <= budget; ++e) {
    ex[vars[pos]] = e;
    monomials_up_to(dim, vars, pos + 1, budget - e, ex, out);
  }
  ex[vars[pos]] = 0;
}

// Sparse row under construction, keyed so duplicate entries merge.
struct RowBuilder {
  std::map<std::tuple<int, int, int>, double> block;
  std::map<int, double> free;

  void add_var(const DecisionVar& v, double coef) {
    if (v.kind == DecisionVar::Kind::kFree) {
      free[v.index] += coef;
    } else {
      block[{v.index, v.row, v.col}] += coef;
    }
  }

  sdp::LinearFunctional build() const {
    sdp::LinearFunctional f;
    for (const auto& [key, v] : block) {
      if (v != 0.0) f.block_terms.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
    }
    for (const auto& [k, v] : free) {
      if (v != 0.0) f.free_terms.emplace_back(k, v);
    }
    return f;
  }
};

}  // namespace

int GramBasis::half_degree() const {
  int d = 0;
  for (const Monomial& m : monomials) d = std::max(d, m.degree());
  return d;
}

GramBasis make_basis(int ambient_dim, int half_degree) {
  std::vector<int> vars(ambient_dim);
  for (int k = 0; k < ambient_dim; ++k) vars[k] = k;
  return make_basis(ambient_dim, half_degree, vars);
}

GramBasis make_basis(int ambient_dim, int half_degree, std::span<const int> variables) {
  if (half_degree < 0) throw std::invalid_argument("make_basis: negative half-degree");
  for (int v : variables) {
    if (v < 0 || v >= ambient_dim) throw std::invalid_argument("make_basis: variable out of range");
  }
  GramBasis basis;
  basis.ambient_dim = ambient_dim;
  std::vector<int> ex(ambient_dim, 0);
  monomials_up_to(ambient_dim, variables, 0, half_degree, ex, basis.monomials);
  std::sort(basis.monomials.begin(), basis.monomials.end());
  basis.monomials.erase(std::unique(basis.monomials.begin(), basis.monomials.end()),
                        basis.monomials.end());
  return basis;
}

GramBasis basis_for(const LinPoly& expr) {
  const std::vector<int> vars = expr.used_variables();
  return make_basis(expr.dim(), (expr.degree() + 1) / 2, vars);
}

int SosProgram::new_free_variable() {
  vars_.push_back({DecisionVar::Kind::kFree, num_free_++, 0, 0});
  return num_decision_vars() - 1;
}

LinPoly SosProgram::free_polynomial(int ambient_dim, std::span<const Monomial> monomials) {
  LinPoly p(ambient_dim);
  for (const Monomial& m : monomials) p.add_term(m, AffineForm::variable(new_free_variable()));
  return p;
}

int SosProgram::new_block(const GramBasis& basis, std::string label) {
  const int block = static_cast<int>(block_bases_.size());
  const int n = basis.size();
  if (n == 0) throw std::invalid_argument("SosProgram: empty Gram basis for " + label);
  std::vector<int> index;
  index.reserve(n * (n + 1) / 2);
  for (int r = 0; r < n; ++r) {
    for (int s = r; s < n; ++s) {
      index.push_back(num_decision_vars());
      vars_.push_back({DecisionVar::Kind::kGram, block, r, s});
    }
  }
  block_bases_.push_back(basis);
  block_labels_.push_back(std::move(label));
  block_var_index_.push_back(std::move(index));
  return block;
}

LinPoly SosProgram::sos_polynomial(const GramBasis& basis, std::string label) {
  const int block = new_block(basis, std::move(label));
  const auto& index = block_var_index_[block];
  const int n = basis.size();
  LinPoly p(basis.ambient_dim);
  int k = 0;
  for (int r = 0; r < n; ++r) {
    for (int s = r; s < n; ++s, ++k) {
      p.add_term(basis.monomials[r] * basis.monomials[s], AffineForm::variable(index[k], r == s ? 1.0 : 2.0));
    }
  }
  return p;
}

void SosProgram::add_sos_constraint(LinPoly expr, GramBasis basis, std::string label) {
  if (expr.dim() != basis.ambient_dim) {
    throw std::invalid_argument("add_sos_constraint: dimension mismatch in " + label);
  }
  const int block = new_block(basis, label);
  constraints_.push_back({std::move(expr), std::move(basis), std::move(label), block});
}

void SosProgram::add_equality(LinPoly expr) { equalities_.push_back(std::move(expr)); }

std::vector<double> CompiledSdp::decision_values(const sdp::SdpSolution& solution) const {
  std::vector<double> out(decision_vars.size());
  for (std::size_t k = 0; k < decision_vars.size(); ++k) {
    const DecisionVar& v = decision_vars[k];
    out[k] = v.kind == DecisionVar::Kind::kFree ? solution.free(v.index)
                                                : solution.blocks[v.index](v.row, v.col);
  }
  return out;
}

CompiledSdp compile(const SosProgram& program) {
  CompiledSdp out;
  out.decision_vars = program.decision_vars();
  sdp::SdpProblem& p = out.problem;
  for (const GramBasis& b : program.block_bases()) p.blocks.push_back(b.size());
  p.free_vars = program.num_free();
  const auto& vars = program.decision_vars();

  auto add_form = [&](RowBuilder& row, const AffineForm& f, double scale) {
    for (const auto& [k, c] : f.terms) row.add_var(vars.at(k), scale * c);
  };

  for (const SosConstraint& con : program.constraints()) {
    out.constraint_first_row.push_back(p.num_constraints());
    const auto& mons = con.basis.monomials;
    const int n = con.basis.size();
    std::map<Monomial, RowBuilder> rows;
    for (int r = 0; r < n; ++r) {
      for (int s = r; s < n; ++s) {
        rows[mons[r] * mons[s]].block[{con.block, r, s}] += r == s ? 1.0 : 2.0;
      }
    }
    std::map<Monomial, double> rhs;
    for (const auto& [m, f] : con.expr.terms()) {
      auto it = rows.find(m);
      if (it == rows.end()) {
        throw std::invalid_argument("compile: monomial " + poly::to_string(poly::Poly::monomial(m)) +
                                    " of " + con.label + " is outside the Gram product set");
      }
      add_form(it->second, f, -1.0);
      rhs[m] = f.constant;
    }
    for (const auto& [m, row] : rows) {
      auto it = rhs.find(m);
      p.constraints.push_back({row.build(), it == rhs.end() ? 0.0 : it->second});
    }
  }

  for (const LinPoly& eq : program.equalities()) {
    out.equality_first_row.push_back(p.num_constraints());
    for (const auto& [m, f] : eq.terms()) {
      RowBuilder row;
      add_form(row, f, 1.0);
      p.constraints.push_back({row.build(), -f.constant});
    }
  }

  RowBuilder obj;
  add_form(obj, program.objective(), 1.0);
  p.objective = obj.build();
  out.objective_constant = program.objective().constant;
  return out;
}

poly::Poly gram_polynomial(const GramBasis& basis, const Eigen::MatrixXd& gram) {
  poly::Poly out(basis.ambient_dim);
  const int n = basis.size();
  for (int r = 0; r < n; ++r) {
    for (int s = r; s < n; ++s) {
      const double v = r == s ? gram(r, r) : gram(r, s) + gram(s, r);
      out.add_term(basis.monomials[r] * basis.monomials[s], v);
    }
  }
  return out;
}

Reconstruction reconstruct(const sdp::SdpSolution& solution, const SosProgram& program,
                           const CompiledSdp& compiled, int constraint_index) {
  const SosConstraint& con = program.constraints().at(constraint_index);
  const Eigen::MatrixXd& gram = solution.blocks.at(con.block);
  Reconstruction out;
  out.gram_poly = gram_polynomial(con.basis, gram);
  const std::vector<double> values = compiled.decision_values(solution);
  const poly::Poly diff = out.gram_poly - con.expr.collapse(values);
  for (const auto& [m, c] : diff.terms()) out.residual = std::max(out.residual, std::abs(c));
  out.min_eig = sdp::min_eigenvalue(0.5 * (gram + gram.transpose()));
  return out;
}

}  // namespace roscert::sos
