#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace roscert::sdp {

/// Coefficient on the scalar variable X_b(row, col), row <= col. An
/// off-diagonal variable stands for both symmetric entries of X_b.
struct BlockEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct LinearFunctional {
  std::vector<BlockEntry> block_terms;
  std::vector<std::pair<int, double>> free_terms;
};

struct Constraint {
  LinearFunctional lhs;
  double rhs = 0.0;
};

/// maximize  <C, X> + d'u
/// s.t.      A_i(X) + B_i u = b_i,  X_b psd for every block,  u free.
struct SdpProblem {
  std::vector<int> blocks;
  int free_vars = 0;
  std::vector<Constraint> constraints;
  LinearFunctional objective;

  int num_constraints() const { return static_cast<int>(constraints.size()); }

  /// Throws std::invalid_argument when a functional references an
  /// undeclared variable or a block dimension is below one.
  void validate() const;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kMaxIterations, kNumericalFailure };

std::string to_string(Status s);

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double gap_tol = 1e-7;
  /// Absolute bound on sum_b <X_b, S_b> required for an optimal exit.
  double complementarity_tol = 1e-6;
  double ray_tol = 1e-7;
  int max_iterations = 200;
  double step_fraction = 0.98;
  /// Optional per-iteration progress log.
  std::ostream* log = nullptr;
};

struct IterationRecord {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rel_gap = 0.0;
  double mu = 0.0;
  double primal_step = 0.0;
  double dual_step = 0.0;
};

struct SdpSolution {
  Status status = Status::kNumericalFailure;
  std::vector<Eigen::MatrixXd> blocks;      // primal X_b
  Eigen::VectorXd free;                     // primal u
  Eigen::VectorXd dual;                     // y
  std::vector<Eigen::MatrixXd> dual_slack;  // S_b = A_b*(y) - C_b
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rel_gap = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> history;
};

/// Primal-dual path-following interior-point method with Nesterov-Todd
/// scaling and a Mehrotra predictor-corrector step. Free variables are
/// eliminated through a QR factorization of the whitened free-variable
/// columns; once that elimination loses accuracy the solver switches to an LU
/// factorization of the full saddle-point system. Deterministic for identical
/// inputs and options.
SdpSolution solve(const SdpProblem& problem, const SolverOptions& options = {});

/// Smallest eigenvalue of a symmetric matrix. Throws std::invalid_argument
/// for non-square or non-symmetric input (tolerance 1e-9 relative).
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Value of a functional at (X, u).
double apply(const LinearFunctional& f, const std::vector<Eigen::MatrixXd>& blocks,
             const Eigen::VectorXd& free);

/// Sparse text dump, one nonzero per line. See README for the format.
void write_sparse(const SdpProblem& problem, std::ostream& out);

}  // namespace roscert::sdp
