#include "roscert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace roscert::sdp {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Residual of the reduced Newton system, as a fraction of the primal
// feasibility target, above which the free variables stop being eliminated.
constexpr double kEliminationAccuracy = 0.1;

struct Entry {
  int row;
  int col;
  double value;
};

// Entries of one constraint restricted to one block.
struct RowPart {
  int constraint;
  std::vector<Entry> entries;
};

struct Component {
  std::vector<int> rows;  // constraint indices, ascending
  MatrixXd schur;
  MatrixXd whitened_free;  // L^{-1} B restricted to `rows`
  Eigen::LLT<MatrixXd> llt;
};

// NT scaling of one block: W = G G', G^{-1} X G^{-T} = G' S G = diag(d).
struct Scaling {
  MatrixXd g;
  MatrixXd g_inv;
  MatrixXd w;
  VectorXd d;
  MatrixXd chol_x;
  MatrixXd chol_s;
};

struct Directions {
  std::vector<MatrixXd> dx;
  std::vector<MatrixXd> ds;
  VectorXd dy;
  VectorXd du;
};

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

MatrixXd symmetric_part(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double frob_dot(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

class InteriorPointSolver {
 public:
  InteriorPointSolver(const SdpProblem& problem, const SolverOptions& options)
      : problem_(problem), options_(options) {
    problem_.validate();
    m_ = problem_.num_constraints();
    p_ = problem_.free_vars;
    nb_ = static_cast<int>(problem_.blocks.size());
    if (nb_ == 0) throw std::invalid_argument("sdp::solve: problem has no PSD block");
    index_structure();
  }

  SdpSolution run();

 private:
  void index_structure();
  void initial_point();

  VectorXd apply_a(const std::vector<MatrixXd>& x) const;
  std::vector<MatrixXd> apply_a_adjoint(const VectorXd& y) const;

  bool compute_scalings();
  bool factor_schur();
  bool factor_augmented();
  void solve_reduced(const VectorXd& h, const VectorXd& rf, VectorXd& dy, VectorXd& du) const;
  double refine(const VectorXd& h, VectorXd& dy, VectorXd& du) const;
  bool solve_newton(const std::vector<MatrixXd>& rc, Directions& dir);
  double max_step(const MatrixXd& chol, const MatrixXd& delta) const;

  bool primal_infeasible(double dual_objective) const;
  bool dual_infeasible(double primal_objective) const;

  const SdpProblem& problem_;
  SolverOptions options_;
  int m_ = 0;
  int p_ = 0;
  int nb_ = 0;
  int total_dim_ = 0;

  std::vector<std::vector<RowPart>> block_rows_;
  std::vector<MatrixXd> c_;
  VectorXd d_;
  VectorXd b_;
  MatrixXd free_cols_;  // B, m x p
  std::vector<Component> components_;
  double norm_b_ = 0.0;
  double norm_c_ = 0.0;

  // Iterate.
  std::vector<MatrixXd> x_;
  std::vector<MatrixXd> s_;
  VectorXd y_;
  VectorXd u_;

  // Residuals at the current iterate.
  VectorXd rp_;
  std::vector<MatrixXd> rd_;
  VectorXd rf_;

  std::vector<Scaling> scal_;
  // Free variables are eliminated through the Schur factors until that
  // loses accuracy; from then on the augmented system is factored instead.
  std::vector<int> free_only_rows_;
  Eigen::ColPivHouseholderQR<MatrixXd> free_qr_;
  Eigen::FullPivLU<MatrixXd> free_lu_;
  Eigen::PartialPivLU<MatrixXd> augmented_lu_;
  bool augmented_ = false;
};

void InteriorPointSolver::index_structure() {
  block_rows_.assign(nb_, {});
  c_.clear();
  for (int n : problem_.blocks) {
    c_.push_back(MatrixXd::Zero(n, n));
    total_dim_ += n;
  }
  b_.resize(m_);
  free_cols_ = MatrixXd::Zero(m_, p_);
  DisjointSets sets(m_);
  std::vector<int> first_row_of_block(nb_, -1);
  std::vector<bool> touches_block(m_, false);

  for (int i = 0; i < m_; ++i) {
    const Constraint& con = problem_.constraints[i];
    b_(i) = con.rhs;
    for (const auto& [k, v] : con.lhs.free_terms) free_cols_(i, k) += v;
    for (const BlockEntry& e : con.lhs.block_terms) {
      auto& rows = block_rows_[e.block];
      if (rows.empty() || rows.back().constraint != i) rows.push_back({i, {}});
      rows.back().entries.push_back({e.row, e.col, e.value});
      touches_block[i] = true;
      if (first_row_of_block[e.block] < 0) {
        first_row_of_block[e.block] = i;
      } else {
        sets.unite(first_row_of_block[e.block], i);
      }
    }
  }
  // A constraint can list the same block in non-contiguous runs; merge them.
  for (auto& rows : block_rows_) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RowPart& a, const RowPart& b) { return a.constraint < b.constraint; });
    std::vector<RowPart> merged;
    for (auto& r : rows) {
      if (!merged.empty() && merged.back().constraint == r.constraint) {
        merged.back().entries.insert(merged.back().entries.end(), r.entries.begin(), r.entries.end());
      } else {
        merged.push_back(std::move(r));
      }
    }
    rows = std::move(merged);
  }

  for (const BlockEntry& e : problem_.objective.block_terms) {
    MatrixXd& c = c_[e.block];
    if (e.row == e.col) {
      c(e.row, e.row) += e.value;
    } else {
      c(e.row, e.col) += 0.5 * e.value;
      c(e.col, e.row) += 0.5 * e.value;
    }
  }
  d_ = VectorXd::Zero(p_);
  for (const auto& [k, v] : problem_.objective.free_terms) d_(k) += v;

  std::vector<int> comp_of_root(m_, -1);
  for (int i = 0; i < m_; ++i) {
    if (!touches_block[i]) {
      free_only_rows_.push_back(i);
      continue;
    }
    const int root = sets.find(i);
    if (comp_of_root[root] < 0) {
      comp_of_root[root] = static_cast<int>(components_.size());
      components_.emplace_back();
    }
    components_[comp_of_root[root]].rows.push_back(i);
  }

  norm_b_ = b_.norm();
  double c2 = d_.squaredNorm();
  for (const auto& c : c_) c2 += c.squaredNorm();
  norm_c_ = std::sqrt(c2);
}

VectorXd InteriorPointSolver::apply_a(const std::vector<MatrixXd>& x) const {
  VectorXd out = VectorXd::Zero(m_);
  for (int b = 0; b < nb_; ++b) {
    const MatrixXd& xb = x[b];
    for (const RowPart& r : block_rows_[b]) {
      double s = 0.0;
      for (const Entry& e : r.entries) s += e.value * xb(e.row, e.col);
      out(r.constraint) += s;
    }
  }
  return out;
}

std::vector<MatrixXd> InteriorPointSolver::apply_a_adjoint(const VectorXd& y) const {
  std::vector<MatrixXd> out;
  out.reserve(nb_);
  for (int b = 0; b < nb_; ++b) {
    MatrixXd z = MatrixXd::Zero(problem_.blocks[b], problem_.blocks[b]);
    for (const RowPart& r : block_rows_[b]) {
      const double yi = y(r.constraint);
      if (yi == 0.0) continue;
      for (const Entry& e : r.entries) {
        if (e.row == e.col) {
          z(e.row, e.row) += yi * e.value;
        } else {
          z(e.row, e.col) += 0.5 * yi * e.value;
          z(e.col, e.row) += 0.5 * yi * e.value;
        }
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

void InteriorPointSolver::initial_point() {
  x_.clear();
  s_.clear();
  for (int b = 0; b < nb_; ++b) {
    const int n = problem_.blocks[b];
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, sqrt_n);
    double eta = std::max(10.0, sqrt_n);
    for (const RowPart& r : block_rows_[b]) {
      double norm2 = 0.0;
      for (const Entry& e : r.entries) norm2 += (e.row == e.col ? 1.0 : 0.5) * e.value * e.value;
      const double norm_a = std::sqrt(norm2);
      xi = std::max(xi, n * (1.0 + std::abs(b_(r.constraint))) / (1.0 + norm_a));
      eta = std::max(eta, norm_a);
    }
    eta = std::max(eta, c_[b].norm());
    x_.push_back(xi * MatrixXd::Identity(n, n));
    s_.push_back(eta * MatrixXd::Identity(n, n));
  }
  y_ = VectorXd::Zero(m_);
  u_ = VectorXd::Zero(p_);
}

bool InteriorPointSolver::compute_scalings() {
  scal_.resize(nb_);
  for (int b = 0; b < nb_; ++b) {
    Eigen::LLT<MatrixXd> lx(x_[b]);
    Eigen::LLT<MatrixXd> ls(s_[b]);
    if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
    Scaling& sc = scal_[b];
    sc.chol_x = lx.matrixL();
    sc.chol_s = ls.matrixL();
    Eigen::BDCSVD<MatrixXd> svd(sc.chol_s.transpose() * sc.chol_x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sc.d = svd.singularValues();
    if (sc.d.minCoeff() <= 0.0 || !sc.d.allFinite()) return false;
    const VectorXd inv_sqrt = sc.d.cwiseSqrt().cwiseInverse();
    sc.g = sc.chol_x * svd.matrixV() * inv_sqrt.asDiagonal();
    // G^{-1} = D^{1/2} V' L_x^{-1}
    MatrixXd vt = svd.matrixV().transpose();
    MatrixXd linv_t = sc.chol_x.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(vt);
    sc.g_inv = sc.d.cwiseSqrt().asDiagonal() * linv_t;
    sc.w = sc.g * sc.g.transpose();
  }
  return true;
}

bool InteriorPointSolver::factor_schur() {
  for (Component& comp : components_) {
    const int k = static_cast<int>(comp.rows.size());
    comp.schur = MatrixXd::Zero(k, k);
  }
  // Local index of every constraint inside its component.
  std::vector<int> local(m_, -1);
  std::vector<int> comp_of(m_, -1);
  for (int c = 0; c < static_cast<int>(components_.size()); ++c) {
    const auto& rows = components_[c].rows;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      local[rows[i]] = i;
      comp_of[rows[i]] = c;
    }
  }
  // M_ij = <A_i, W A_j W>; with upper-triangle entries (p,q,a) and (r,s,b)
  // each pair contributes a b / 2 (W_pr W_qs + W_ps W_qr).
  for (int b = 0; b < nb_; ++b) {
    const MatrixXd& w = scal_[b].w;
    const auto& rows = block_rows_[b];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const RowPart& ri = rows[i];
      MatrixXd& schur = components_[comp_of[ri.constraint]].schur;
      const int li = local[ri.constraint];
      for (std::size_t j = i; j < rows.size(); ++j) {
        const RowPart& rj = rows[j];
        double sum = 0.0;
        for (const Entry& e : ri.entries) {
          for (const Entry& f : rj.entries) {
            sum += e.value * f.value *
                   (w(e.row, f.row) * w(e.col, f.col) + w(e.row, f.col) * w(e.col, f.row));
          }
        }
        sum *= 0.5;
        const int lj = local[rj.constraint];
        schur(li, lj) += sum;
        if (li != lj) schur(lj, li) += sum;
      }
    }
  }

  if (p_ > 0 && augmented_) return factor_augmented();
  for (Component& comp : components_) {
    comp.llt.compute(comp.schur);
    if (comp.llt.info() != Eigen::Success) {
      // Tiny diagonal shift for rank-deficient directions near convergence.
      const double shift = 1e-13 * std::max(1.0, comp.schur.diagonal().cwiseAbs().maxCoeff());
      comp.schur.diagonal().array() += shift;
      comp.llt.compute(comp.schur);
      if (comp.llt.info() != Eigen::Success) return p_ > 0 && factor_augmented();
    }
    if (p_ > 0) {
      MatrixXd bk(comp.rows.size(), p_);
      for (int i = 0; i < static_cast<int>(comp.rows.size()); ++i) bk.row(i) = free_cols_.row(comp.rows[i]);
      comp.llt.matrixL().solveInPlace(bk);
      comp.whitened_free = std::move(bk);
    }
  }

  if (p_ > 0) {
    int stacked_rows = 0;
    for (const Component& comp : components_) stacked_rows += static_cast<int>(comp.rows.size());
    MatrixXd g(stacked_rows, p_);
    int offset = 0;
    for (const Component& comp : components_) {
      g.middleRows(offset, comp.whitened_free.rows()) = comp.whitened_free;
      offset += static_cast<int>(comp.whitened_free.rows());
    }
    if (free_only_rows_.empty()) {
      free_qr_.compute(g);
      if (free_qr_.rank() < p_) return factor_augmented();
    } else {
      // Saddle system [G'G B0'; B0 0] for constraints that touch only free
      // variables.
      const int r0 = static_cast<int>(free_only_rows_.size());
      MatrixXd k = MatrixXd::Zero(p_ + r0, p_ + r0);
      k.topLeftCorner(p_, p_) = g.transpose() * g;
      for (int i = 0; i < r0; ++i) {
        k.block(p_ + i, 0, 1, p_) = free_cols_.row(free_only_rows_[i]);
        k.block(0, p_ + i, p_, 1) = free_cols_.row(free_only_rows_[i]).transpose();
      }
      free_lu_.compute(k);
      if (free_lu_.rank() < p_ + r0) return factor_augmented();
    }
  }
  return true;
}

// LU of [M B; B' 0]. Slower than eliminating u through B' M^{-1} B, but
// that squares the conditioning of M near the optimum.
bool InteriorPointSolver::factor_augmented() {
  augmented_ = true;
  MatrixXd k = MatrixXd::Zero(m_ + p_, m_ + p_);
  for (const Component& comp : components_) {
    const int n = static_cast<int>(comp.rows.size());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) k(comp.rows[i], comp.rows[j]) = comp.schur(i, j);
    }
  }
  k.topRightCorner(m_, p_) = free_cols_;
  k.bottomLeftCorner(p_, m_) = free_cols_.transpose();
  auto factored = [&] {
    augmented_lu_.compute(k);
    const auto diag = augmented_lu_.matrixLU().diagonal();
    return diag.allFinite() && diag.cwiseAbs().minCoeff() > 0.0;
  };
  if (factored()) return true;
  // Exactly singular M near convergence: shift its diagonal and let
  // refinement against the unfactored operator remove the bias.
  const double shift = 1e-13 * std::max(1.0, k.diagonal().head(m_).cwiseAbs().maxCoeff());
  k.diagonal().head(m_).array() += shift;
  return factored();
}

// Reduced system M dy - B du = h, B' dy = rf with M = A W A*(.) W.
void InteriorPointSolver::solve_reduced(const VectorXd& h, const VectorXd& rf, VectorXd& dy,
                                        VectorXd& du) const {
  if (augmented_) {
    VectorXd rhs(m_ + p_);
    rhs << h, rf;
    const VectorXd sol = augmented_lu_.solve(rhs);
    dy = sol.head(m_);
    du = -sol.tail(p_);
    return;
  }
  dy = VectorXd::Zero(m_);
  du = VectorXd::Zero(p_);

  std::vector<VectorXd> g(components_.size());
  VectorXd rhs = rf;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const Component& comp = components_[c];
    VectorXd hk(comp.rows.size());
    for (int i = 0; i < static_cast<int>(comp.rows.size()); ++i) hk(i) = h(comp.rows[i]);
    comp.llt.matrixL().solveInPlace(hk);
    g[c] = std::move(hk);
    if (p_ > 0) rhs -= comp.whitened_free.transpose() * g[c];
  }

  if (p_ > 0) {
    if (free_only_rows_.empty()) {
      // G P = Q R  =>  G'G = P R'R P'.
      const auto& qr = free_qr_;
      const MatrixXd r = qr.matrixR().topLeftCorner(p_, p_).triangularView<Eigen::Upper>();
      VectorXd t = qr.colsPermutation().transpose() * rhs;
      r.triangularView<Eigen::Upper>().transpose().solveInPlace(t);
      r.triangularView<Eigen::Upper>().solveInPlace(t);
      du = qr.colsPermutation() * t;
    } else {
      const int r0 = static_cast<int>(free_only_rows_.size());
      VectorXd full(p_ + r0);
      full.head(p_) = rhs;
      for (int i = 0; i < r0; ++i) full(p_ + i) = -h(free_only_rows_[i]);
      const VectorXd sol = free_lu_.solve(full);
      du = sol.head(p_);
      for (int i = 0; i < r0; ++i) dy(free_only_rows_[i]) = sol(p_ + i);
    }
  }

  for (std::size_t c = 0; c < components_.size(); ++c) {
    const Component& comp = components_[c];
    VectorXd t = g[c];
    if (p_ > 0) t += comp.whitened_free * du;
    comp.llt.matrixU().solveInPlace(t);
    for (int i = 0; i < static_cast<int>(comp.rows.size()); ++i) dy(comp.rows[i]) = t(i);
  }
}

// Iterative refinement of the reduced system against the unfactored
// operator. Returns the final residual norm.
double InteriorPointSolver::refine(const VectorXd& h, VectorXd& dy, VectorXd& du) const {
  auto residual = [&](const VectorXd& y, const VectorXd& u, VectorXd& e1, VectorXd& e2) {
    auto z = apply_a_adjoint(y);
    for (int b = 0; b < nb_; ++b) z[b] = scal_[b].w * z[b] * scal_[b].w;
    e1 = h - apply_a(z);
    e2 = rf_;
    if (p_ > 0) {
      e1 += free_cols_ * u;
      e2 -= free_cols_.transpose() * y;
    }
    return std::sqrt(e1.squaredNorm() + e2.squaredNorm());
  };
  VectorXd e1;
  VectorXd e2;
  double err = residual(dy, du, e1, e2);
  for (int round = 0; round < 3 && err > 0.0; ++round) {
    VectorXd cy;
    VectorXd cu;
    solve_reduced(e1, e2, cy, cu);
    const VectorXd ny = dy + cy;
    const VectorXd nu = du + cu;
    VectorXd f1;
    VectorXd f2;
    const double next = residual(ny, nu, f1, f2);
    if (!(next < err)) break;
    dy = ny;
    du = nu;
    e1 = std::move(f1);
    e2 = std::move(f2);
    err = next;
  }
  return err;
}

// Newton system for the complementarity right-hand side rc:
//   dX + W dS W = rc,  A(dX) + B du = rp,  A*(dy) - dS = rd_neg,  B' dy = rf.
bool InteriorPointSolver::solve_newton(const std::vector<MatrixXd>& rc, Directions& dir) {
  std::vector<MatrixXd> tmp(nb_);
  for (int b = 0; b < nb_; ++b) tmp[b] = rc[b] + scal_[b].w * rd_[b] * scal_[b].w;
  const VectorXd h = apply_a(tmp) - rp_;

  solve_reduced(h, rf_, dir.dy, dir.du);
  const double err = refine(h, dir.dy, dir.du);
  if (p_ > 0 && !augmented_ && !(err <= kEliminationAccuracy * options_.feasibility_tol * (1.0 + norm_b_))) {
    if (!factor_augmented()) return false;
    solve_reduced(h, rf_, dir.dy, dir.du);
    refine(h, dir.dy, dir.du);
  }
  if (!dir.dy.allFinite() || !dir.du.allFinite()) return false;

  dir.ds = apply_a_adjoint(dir.dy);
  dir.dx.resize(nb_);
  for (int b = 0; b < nb_; ++b) {
    dir.ds[b] -= rd_[b];
    dir.dx[b] = symmetric_part(rc[b] - scal_[b].w * dir.ds[b] * scal_[b].w);
  }
  return true;
}

double InteriorPointSolver::max_step(const MatrixXd& chol, const MatrixXd& delta) const {
  const auto l = chol.triangularView<Eigen::Lower>();
  const MatrixXd half = l.solve(delta).transpose();
  const MatrixXd z = l.solve(half);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetric_part(z), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

bool InteriorPointSolver::primal_infeasible(double dual_objective) const {
  if (dual_objective >= 0.0) return false;
  const VectorXd ray = y_ / (-dual_objective);
  if (p_ > 0 && (free_cols_.transpose() * ray).norm() > options_.ray_tol) return false;
  const auto z = apply_a_adjoint(ray);
  for (const auto& zb : z) {
    if (min_eigenvalue(symmetric_part(zb)) < -options_.ray_tol) return false;
  }
  return true;
}

bool InteriorPointSolver::dual_infeasible(double primal_objective) const {
  if (primal_objective <= 0.0) return false;
  std::vector<MatrixXd> xr(nb_);
  for (int b = 0; b < nb_; ++b) xr[b] = x_[b] / primal_objective;
  VectorXd r = apply_a(xr);
  if (p_ > 0) r += free_cols_ * (u_ / primal_objective);
  return r.norm() <= options_.ray_tol;
}

SdpSolution InteriorPointSolver::run() {
  SdpSolution sol;
  initial_point();
  int stalled = 0;

  auto finish = [&](Status status) {
    sol.status = status;
    sol.blocks = x_;
    sol.free = u_;
    sol.dual = y_;
    sol.dual_slack = s_;
    return sol;
  };

  for (int iter = 0;; ++iter) {
    // Residuals and objectives.
    const VectorXd ax = apply_a(x_);
    rp_ = b_ - ax - (p_ > 0 ? VectorXd(free_cols_ * u_) : VectorXd::Zero(m_));
    const auto aty = apply_a_adjoint(y_);
    rd_.resize(nb_);
    double rd2 = 0.0;
    double pobj = d_.dot(u_);
    double xs = 0.0;
    for (int b = 0; b < nb_; ++b) {
      rd_[b] = c_[b] - aty[b] + s_[b];
      rd2 += rd_[b].squaredNorm();
      pobj += frob_dot(c_[b], x_[b]);
      xs += frob_dot(x_[b], s_[b]);
    }
    rf_ = d_ - (p_ > 0 ? VectorXd(free_cols_.transpose() * y_) : VectorXd::Zero(0));
    rd2 += rf_.squaredNorm();
    const double dobj = b_.dot(y_);
    const double scale = 1.0 + std::abs(pobj) + std::abs(dobj);

    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.primal_residual = rp_.norm() / (1.0 + norm_b_);
    sol.dual_residual = std::sqrt(rd2) / (1.0 + norm_c_);
    sol.rel_gap = std::max(std::abs(pobj - dobj), std::abs(xs)) / scale;
    sol.iterations = iter;
    const double mu = xs / total_dim_;

    if (options_.log) {
      *options_.log << std::setw(4) << iter << std::scientific << std::setprecision(3)
                    << "  pobj " << pobj << "  dobj " << dobj << "  pres " << sol.primal_residual
                    << "  dres " << sol.dual_residual << "  gap " << sol.rel_gap << "  mu " << mu
                    << '\n';
    }
    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu)) {
      return finish(Status::kNumericalFailure);
    }
    if (sol.primal_residual <= options_.feasibility_tol &&
        sol.dual_residual <= options_.feasibility_tol && sol.rel_gap <= options_.gap_tol &&
        std::abs(xs) <= options_.complementarity_tol) {
      return finish(Status::kOptimal);
    }
    if (sol.primal_residual > options_.feasibility_tol && primal_infeasible(dobj)) {
      return finish(Status::kInfeasible);
    }
    if (sol.dual_residual > options_.feasibility_tol && dual_infeasible(pobj)) {
      return finish(Status::kUnbounded);
    }
    if (iter >= options_.max_iterations) return finish(Status::kMaxIterations);
    if (!compute_scalings() || !factor_schur()) return finish(Status::kNumericalFailure);

    // Predictor: rc = -X.
    std::vector<MatrixXd> rc(nb_);
    for (int b = 0; b < nb_; ++b) rc[b] = -x_[b];
    Directions pred;
    if (!solve_newton(rc, pred)) return finish(Status::kNumericalFailure);
    double ap = 1.0;
    double ad = 1.0;
    for (int b = 0; b < nb_; ++b) {
      ap = std::min(ap, max_step(scal_[b].chol_x, pred.dx[b]));
      ad = std::min(ad, max_step(scal_[b].chol_s, pred.ds[b]));
    }
    double xs_aff = 0.0;
    for (int b = 0; b < nb_; ++b) {
      xs_aff += frob_dot(x_[b] + ap * pred.dx[b], s_[b] + ad * pred.ds[b]);
    }
    const double mu_aff = xs_aff / total_dim_;
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expon), 0.0, 1.0);

    // Corrector in the scaled space: (D T + T D) / 2 = sigma mu I - D^2 - sym(dX~ dS~).
    for (int b = 0; b < nb_; ++b) {
      const Scaling& sc = scal_[b];
      const MatrixXd dxs = sc.g_inv * pred.dx[b] * sc.g_inv.transpose();
      const MatrixXd dss = sc.g.transpose() * pred.ds[b] * sc.g;
      MatrixXd r = -symmetric_part(dxs * dss);
      const int n = static_cast<int>(sc.d.size());
      for (int i = 0; i < n; ++i) r(i, i) += sigma * mu - sc.d(i) * sc.d(i);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) r(i, j) *= 2.0 / (sc.d(i) + sc.d(j));
      }
      rc[b] = symmetric_part(sc.g * r * sc.g.transpose());
    }
    Directions dir;
    if (!solve_newton(rc, dir)) return finish(Status::kNumericalFailure);

    ap = 1.0;
    ad = 1.0;
    for (int b = 0; b < nb_; ++b) {
      ap = std::min(ap, options_.step_fraction * max_step(scal_[b].chol_x, dir.dx[b]));
      ad = std::min(ad, options_.step_fraction * max_step(scal_[b].chol_s, dir.ds[b]));
    }
    for (int b = 0; b < nb_; ++b) {
      x_[b] = symmetric_part(x_[b] + ap * dir.dx[b]);
      s_[b] = symmetric_part(s_[b] + ad * dir.ds[b]);
    }
    y_ += ad * dir.dy;
    u_ += ap * dir.du;

    sol.history.push_back({sol.primal_residual, sol.dual_residual, sol.rel_gap, mu, ap, ad});
    stalled = std::max(ap, ad) < 1e-8 ? stalled + 1 : 0;
    if (stalled >= 3) return finish(Status::kNumericalFailure);
  }
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
    case Status::kMaxIterations:
      return "max_iterations";
    case Status::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  for (int n : blocks) {
    if (n < 1) throw std::invalid_argument("SdpProblem: block dimension below one");
  }
  if (free_vars < 0) throw std::invalid_argument("SdpProblem: negative free-variable count");
  auto check = [&](const LinearFunctional& f, const std::string& where) {
    for (const BlockEntry& e : f.block_terms) {
      if (e.block < 0 || e.block >= static_cast<int>(blocks.size()) || e.row < 0 ||
          e.col < e.row || e.col >= blocks[e.block]) {
        throw std::invalid_argument(where + ": invalid block entry (" + std::to_string(e.block) +
                                    ", " + std::to_string(e.row) + ", " + std::to_string(e.col) +
                                    ")");
      }
    }
    for (const auto& [k, v] : f.free_terms) {
      if (k < 0 || k >= free_vars) {
        throw std::invalid_argument(where + ": free variable " + std::to_string(k) +
                                    " not declared");
      }
    }
  };
  check(objective, "objective");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    check(constraints[i].lhs, "constraint " + std::to_string(i));
  }
}

SdpSolution solve(const SdpProblem& problem, const SolverOptions& options) {
  InteriorPointSolver solver(problem, options);
  return solver.run();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("min_eigenvalue: matrix is not square");
  if (m.size() == 0) throw std::invalid_argument("min_eigenvalue: empty matrix");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("min_eigenvalue: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double apply(const LinearFunctional& f, const std::vector<Eigen::MatrixXd>& blocks,
             const Eigen::VectorXd& free) {
  double v = 0.0;
  for (const BlockEntry& e : f.block_terms) v += e.value * blocks.at(e.block)(e.row, e.col);
  for (const auto& [k, c] : f.free_terms) v += c * free(k);
  return v;
}

}  // namespace roscert::sdp
