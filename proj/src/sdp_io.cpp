#include <iomanip>
#include <limits>
#include <ostream>

#include "roscert/sdp.hpp"

namespace roscert::sdp {
namespace {

void write_functional(std::ostream& out, int index, const LinearFunctional& f) {
  for (const BlockEntry& e : f.block_terms) {
    out << index << ' ' << e.block + 1 << ' ' << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value
        << '\n';
  }
  for (const auto& [k, v] : f.free_terms) {
    out << index << " 0 " << k + 1 << ' ' << k + 1 << ' ' << v << '\n';
  }
}

}  // namespace

// Layout:
//   blocks <count> <dim_1> ... <dim_k>
//   free <count>
//   constraints <m>
//   rhs <b_1> ... <b_m>
//   <constraint> <block> <row> <col> <value>   (one line per nonzero)
// Constraint 0 is the objective, block 0 holds free variables (row = col =
// free index), indices are 1-based and rows satisfy row <= col.
void write_sparse(const SdpProblem& problem, std::ostream& out) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "# maximize <C,X> + d'u  s.t.  A_i(X) + B_i u = b_i, X psd\n";
  out << "blocks " << problem.blocks.size();
  for (int n : problem.blocks) out << ' ' << n;
  out << "\nfree " << problem.free_vars << "\nconstraints " << problem.constraints.size()
      << "\nrhs";
  for (const Constraint& c : problem.constraints) out << ' ' << c.rhs;
  out << '\n';
  write_functional(out, 0, problem.objective);
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    write_functional(out, static_cast<int>(i) + 1, problem.constraints[i].lhs);
  }
  out.precision(old_precision);
}

}  // namespace roscert::sdp
