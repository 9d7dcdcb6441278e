#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roscert/netmodel.hpp"
#include "roscert/poly.hpp"
#include "roscert/synth.hpp"

namespace roscert::sim {

enum class Event { kReachedTarget, kLeftStateSet, kTimeout };

std::string to_string(Event e);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // one nN-vector per time
  double step = 0.0;
  Event event = Event::kTimeout;
  bool diverged = false;
};

/// Right-hand side of the full network, evaluated with flattened polynomials.
class NetworkField {
 public:
  explicit NetworkField(const netmodel::NetworkSpec& spec);
  int dim() const { return static_cast<int>(components_.size()); }
  void operator()(std::span<const double> x, std::span<double> dx) const;
  /// One classical Runge-Kutta step in place.
  void rk4_step(std::vector<double>& x, double h) const;

 private:
  std::vector<poly::PolyEvaluator> components_;
  mutable std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Where a full state lies relative to (X, X_T). For error-pair regions every
/// ordered pair must be inside X, and the target is reached only when every
/// pair is inside X_T.
enum class Location { kInside, kTarget, kOutside };

Location locate(const netmodel::NetworkSpec& spec, const netmodel::RegionSpec& region,
                std::span<const double> state);

/// Fixed-step RK4 until the first sample in X_T, the first sample outside X,
/// or t_max. Without `stop` the integration always runs to t_max. Non-finite
/// or exploding states end the run as left_state_set with `diverged` set.
Trajectory integrate(const netmodel::NetworkSpec& spec, std::span<const double> x0, double step,
                     double t_max, const netmodel::RegionSpec* stop = nullptr);

/// min over samples up to each pair's first target hit of
/// V(phi(t)) - exp(lambda t) V(phi(0)). Throws std::invalid_argument when the
/// start is outside R = {V > 0} and X.
double check_exponential_bound(const synth::Certificate& cert, const Trajectory& traj,
                               const netmodel::NetworkSpec& spec, const netmodel::RegionSpec& region);

struct ValidationReport {
  int total = 0;
  int reached = 0;
  int left_set = 0;
  int timed_out = 0;
  int diverged = 0;  // subset of left_set
  double worst_exponential_margin = 0.0;
  std::uint64_t seed = 0;
};

/// Thrown when no initial condition in R is found within 10^6 proposals.
class SamplingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxProposals = 1000000;

/// Initial condition uniform in R. Manifold certificates fix node 1 uniformly
/// in the region's node box and draw the errors x_j - x_1 so that every
/// pairwise error lies in R.
std::vector<double> sample_initial_state(const synth::Certificate& cert, const netmodel::NetworkSpec& spec,
                                         const netmodel::RegionSpec& region, std::mt19937_64& rng);

/// Trial k uses its own generator seeded from (seed, k), so the report does
/// not depend on evaluation order.
ValidationReport mc_validate(const synth::Certificate& cert, const netmodel::NetworkSpec& spec,
                             const netmodel::RegionSpec& region, int trials, std::uint64_t seed,
                             double step = 1e-3, double t_max = 100.0);

/// Header "t,x1,...,xM" then one row per sample.
void write_csv(const Trajectory& traj, std::ostream& out);

}  // namespace roscert::sim
