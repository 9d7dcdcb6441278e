#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "roscert/netmodel.hpp"
#include "roscert/poly.hpp"
#include "roscert/sdp.hpp"
#include "roscert/sos.hpp"

namespace roscert::synth {

enum class ProgramKind { kManifold, kEquilibrium };
enum class PairMode { kOrdered, kUnordered };

/// Fixes the scale of the otherwise homogeneous program: V(0) = 1, or
/// 1 - V - sum_k s_k h_k in SOS (V <= 1 on the closed state set).
enum class Normalization { kOriginValue, kUpperBound };

std::string to_string(ProgramKind k);

struct SynthesisConfig {
  double lambda = 0.1;
  int deg_V = 4;
  /// Degree of p1 and p2; 0 selects the smallest even degree matching the
  /// Lie-derivative term.
  int deg_multipliers = 0;
  PairMode pair_mode = PairMode::kOrdered;
  Normalization normalization = Normalization::kOriginValue;
  /// Weight of the Gram trace of each boundary constraint subtracted from the
  /// objective. q -> q + t h leaves the boundary constraint feasible for all
  /// t >= 0, so without it the optimal face is unbounded.
  double trace_penalty = 1e-6;
  /// Monte-Carlo moments when the state set is not a union of disjoint balls.
  std::uint64_t moment_seed = 1;
  int moment_samples = 1000000;

  void validate() const;
};

using NamedLinPoly = std::pair<std::string, poly::LinPoly>;
using NamedPoly = std::pair<std::string, poly::Poly>;

struct BuiltProgram {
  ProgramKind kind = ProgramKind::kEquilibrium;
  double lambda = 0.0;
  int dim = 0;  // variables of V
  sos::SosProgram program;
  sos::CompiledSdp compiled;
  poly::LinPoly V;
  std::vector<NamedLinPoly> multipliers;
  /// Integral of each monomial of V over the closed state set.
  std::vector<std::pair<poly::Monomial, double>> moments;
  std::vector<std::pair<int, int>> pairs;  // manifold program only
  std::vector<int> boundary_blocks;
};

/// One main SOS constraint per selected pair and target polynomial, in pair
/// coordinates (error first); boundary and bound constraints over the n
/// error variables.
BuiltProgram build_manifold_program(const netmodel::NetworkSpec& spec,
                                    const netmodel::RegionSpec& region,
                                    const SynthesisConfig& cfg);

/// One main SOS constraint per target polynomial over the nN state
/// variables; one boundary constraint per state inequality.
BuiltProgram build_equilibrium_program(const netmodel::NetworkSpec& spec,
                                       const netmodel::RegionSpec& region,
                                       const SynthesisConfig& cfg);

/// Dispatches on region.variables.
BuiltProgram build_program(const netmodel::NetworkSpec& spec, const netmodel::RegionSpec& region,
                           const SynthesisConfig& cfg);

/// Integral of x^alpha over {h_k >= 0 for all k}: exact for disjoint balls,
/// otherwise a seeded Monte-Carlo estimate inside the bounding balls.
double state_set_moment(const netmodel::RegionSpec& region, int dim, const poly::Monomial& alpha,
                        std::uint64_t seed, int samples);

struct Certificate {
  ProgramKind kind = ProgramKind::kEquilibrium;
  double lambda = 0.0;
  int dim = 0;
  poly::Poly V;
  std::vector<NamedPoly> multipliers;
  std::vector<Eigen::MatrixXd> gram_blocks;
  double identity_residual = 0.0;
  double gram_min_eig = 0.0;
  double objective = 0.0;  // integral of V over the closed state set
};

inline constexpr double kMaxIdentityResidual = 1e-6;
inline constexpr double kMinGramEigenvalue = -1e-8;

/// Carries the offending certificate for reporting.
class CertificateRejected : public std::runtime_error {
 public:
  CertificateRejected(const std::string& what, Certificate cert)
      : std::runtime_error(what), certificate(std::move(cert)) {}
  Certificate certificate;
};

/// Collapses the program at the solution. Throws std::invalid_argument when
/// the solution is not optimal and CertificateRejected when the identity
/// residual or Gram spectrum violates the acceptance bounds.
Certificate extract_certificate(const sdp::SdpSolution& solution, const BuiltProgram& built);

struct VerificationReport {
  int decay_samples = 0;
  int boundary_samples = 0;
  double worst_decay_margin = 0.0;     // min of L_V - lambda V off the target
  double worst_boundary_margin = 0.0;  // max of V on the state-set boundary
  int decay_violations = 0;
  int boundary_violations = 0;
  int positive_samples = 0;  // decay samples with V > 0
  std::vector<std::vector<double>> violating_points;

  bool passed() const { return decay_violations == 0 && boundary_violations == 0; }
};

inline constexpr double kDecayTolerance = 1e-6;
inline constexpr double kBoundaryTolerance = 1e-6;

/// Samples the decay condition on closed X minus X_T and V <= 0 on the
/// boundary of X. Manifold certificates draw absolute node states from the
/// region's node box. Deterministic for a fixed seed.
VerificationReport verify_certificate(const Certificate& cert, const netmodel::NetworkSpec& spec,
                                      const netmodel::RegionSpec& region, int samples,
                                      std::uint64_t seed);

/// Text form: one "key value" line per field, polynomials in the poly
/// grammar.
void write_certificate(const Certificate& cert, std::ostream& out);

/// Throws std::invalid_argument naming the offending line.
Certificate read_certificate(std::istream& in);

}  // namespace roscert::synth
