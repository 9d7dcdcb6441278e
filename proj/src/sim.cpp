#include "roscert/sim.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace roscert::sim {

using netmodel::NetworkSpec;
using netmodel::RegionSpec;
using netmodel::RegionVariables;

namespace {

constexpr double kDivergenceNorm = 1e8;

std::vector<std::pair<int, int>> ordered_pairs(int N) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i != j) out.emplace_back(i, j);
    }
  }
  return out;
}

void pair_error(const NetworkSpec& spec, std::span<const double> x, int i, int j, std::vector<double>& d) {
  d.resize(spec.n);
  for (int k = 0; k < spec.n; ++k) d[k] = x[i * spec.n + k] - x[j * spec.n + k];
}

bool diverging(std::span<const double> x) {
  double sq = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) return true;
    sq += v * v;
  }
  return sq > kDivergenceNorm * kDivergenceNorm;
}

// Exponential-growth margin along a trajectory, one tracked error per pair
// (or the full state for equilibrium certificates).
class BoundTracker {
 public:
  BoundTracker(const synth::Certificate& cert, const NetworkSpec& spec, const RegionSpec& region,
               std::span<const double> x0)
      : cert_(cert), spec_(spec), region_(region), v_(cert.V) {
    if (cert.kind == synth::ProgramKind::kManifold) {
      pairs_ = ordered_pairs(spec.N);
    } else {
      pairs_ = {{-1, -1}};
    }
    v0_.resize(pairs_.size());
    active_.assign(pairs_.size(), true);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto e = error(p, x0);
      v0_[p] = v_(e);
      if (!(v0_[p] > 0.0) || !region.in_state(e)) {
        throw std::invalid_argument("check_exponential_bound: start point is outside R");
      }
    }
  }

  void observe(double t, std::span<const double> x) {
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      if (!active_[p]) continue;
      const auto e = error(p, x);
      worst_ = std::min(worst_, v_(e) - std::exp(cert_.lambda * t) * v0_[p]);
      if (region_.in_target(e)) active_[p] = false;
    }
  }

  double worst() const { return worst_; }

 private:
  std::vector<double> error(std::size_t p, std::span<const double> x) const {
    if (pairs_[p].first < 0) return {x.begin(), x.end()};
    std::vector<double> d;
    pair_error(spec_, x, pairs_[p].first, pairs_[p].second, d);
    return d;
  }

  const synth::Certificate& cert_;
  const NetworkSpec& spec_;
  const RegionSpec& region_;
  poly::PolyEvaluator v_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<double> v0_;
  std::vector<bool> active_;
  double worst_ = std::numeric_limits<double>::infinity();
};

// Integrates until an event; calls visit(t, x) for every sample including t = 0.
template <class Visit>
Event run(const NetworkField& field, const NetworkSpec& spec, std::vector<double> x, double step,
          double t_max, const RegionSpec* stop, bool& diverged, Visit&& visit) {
  diverged = false;
  const long steps = static_cast<long>(std::floor(t_max / step + 1e-9));
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (diverging(x)) {
      diverged = true;
      return Event::kLeftStateSet;
    }
    visit(t, x);
    if (stop) {
      const Location where = locate(spec, *stop, x);
      if (where == Location::kTarget) return Event::kReachedTarget;
      if (where == Location::kOutside) return Event::kLeftStateSet;
    }
    if (k >= steps) return Event::kTimeout;
    field.rk4_step(x, step);
  }
}

std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string to_string(Event e) {
  switch (e) {
    case Event::kReachedTarget:
      return "reached_target";
    case Event::kLeftStateSet:
      return "left_state_set";
    case Event::kTimeout:
      return "timeout";
  }
  return "unknown";
}

NetworkField::NetworkField(const NetworkSpec& spec) {
  for (const poly::Poly& p : netmodel::full_dynamics(spec)) components_.emplace_back(p);
}

void NetworkField::operator()(std::span<const double> x, std::span<double> dx) const {
  for (std::size_t k = 0; k < components_.size(); ++k) dx[k] = components_[k](x);
}

void NetworkField::rk4_step(std::vector<double>& x, double h) const {
  const std::size_t d = x.size();
  k1_.resize(d);
  k2_.resize(d);
  k3_.resize(d);
  k4_.resize(d);
  tmp_.resize(d);
  (*this)(x, k1_);
  for (std::size_t i = 0; i < d; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
  (*this)(tmp_, k2_);
  for (std::size_t i = 0; i < d; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
  (*this)(tmp_, k3_);
  for (std::size_t i = 0; i < d; ++i) tmp_[i] = x[i] + h * k3_[i];
  (*this)(tmp_, k4_);
  for (std::size_t i = 0; i < d; ++i) x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
}

Location locate(const NetworkSpec& spec, const RegionSpec& region, std::span<const double> state) {
  if (region.variables == RegionVariables::kFullState) {
    if (region.in_target(state)) return Location::kTarget;
    return region.in_state(state) ? Location::kInside : Location::kOutside;
  }
  bool all_target = true;
  bool all_inside = true;
  std::vector<double> d;
  for (const auto& [i, j] : ordered_pairs(spec.N)) {
    pair_error(spec, state, i, j, d);
    all_target = all_target && region.in_target(d);
    all_inside = all_inside && region.in_state(d);
  }
  if (all_target) return Location::kTarget;
  return all_inside ? Location::kInside : Location::kOutside;
}

Trajectory integrate(const NetworkSpec& spec, std::span<const double> x0, double step, double t_max,
                     const RegionSpec* stop) {
  if (!(step > 0.0) || !(t_max > step)) throw std::invalid_argument("integrate: need step > 0 and t_max > step");
  spec.validate();
  if (static_cast<int>(x0.size()) != spec.state_dim()) throw std::invalid_argument("integrate: wrong state size");
  const NetworkField field(spec);
  Trajectory traj;
  traj.step = step;
  traj.event = run(field, spec, std::vector<double>(x0.begin(), x0.end()), step, t_max, stop, traj.diverged,
                   [&](double t, const std::vector<double>& x) {
                     traj.times.push_back(t);
                     traj.states.push_back(x);
                   });
  return traj;
}

double check_exponential_bound(const synth::Certificate& cert, const Trajectory& traj, const NetworkSpec& spec,
                               const RegionSpec& region) {
  if (traj.states.empty()) throw std::invalid_argument("check_exponential_bound: empty trajectory");
  BoundTracker tracker(cert, spec, region, traj.states.front());
  for (std::size_t k = 0; k < traj.states.size(); ++k) tracker.observe(traj.times[k], traj.states[k]);
  return tracker.worst();
}

std::vector<double> sample_initial_state(const synth::Certificate& cert, const NetworkSpec& spec,
                                         const RegionSpec& region, std::mt19937_64& rng) {
  const poly::PolyEvaluator v(cert.V);
  if (cert.kind == synth::ProgramKind::kEquilibrium) {
    for (int attempt = 0; attempt < kMaxProposals; ++attempt) {
      auto x = netmodel::sample_closed_state(region, spec.state_dim(), rng);
      if (region.in_state(x) && v(x) > 0.0) return x;
    }
  } else {
    const int n = spec.n;
    std::uniform_real_distribution<double> box(-region.node_box, region.node_box);
    std::vector<double> x(spec.state_dim());
    std::vector<double> d;
    for (int attempt = 0; attempt < kMaxProposals; ++attempt) {
      for (int k = 0; k < n; ++k) x[k] = box(rng);
      for (int j = 1; j < spec.N; ++j) {
        const auto e = netmodel::sample_closed_state(region, n, rng);
        for (int k = 0; k < n; ++k) x[j * n + k] = x[k] + e[k];
      }
      bool ok = true;
      for (const auto& [i, j] : ordered_pairs(spec.N)) {
        pair_error(spec, x, i, j, d);
        if (!region.in_state(d) || !(v(d) > 0.0)) {
          ok = false;
          break;
        }
      }
      if (ok) return x;
    }
  }
  throw SamplingFailure("no initial condition in {V > 0} found in " + std::to_string(kMaxProposals) +
                        " proposals (empty or tiny estimate)");
}

ValidationReport mc_validate(const synth::Certificate& cert, const NetworkSpec& spec, const RegionSpec& region,
                             int trials, std::uint64_t seed, double step, double t_max) {
  if (trials < 0) throw std::invalid_argument("mc_validate: negative trial count");
  const NetworkField field(spec);
  ValidationReport rep;
  rep.seed = seed;
  rep.worst_exponential_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    const std::vector<double> x0 = sample_initial_state(cert, spec, region, rng);
    BoundTracker tracker(cert, spec, region, x0);
    bool diverged = false;
    const Event e = run(field, spec, x0, step, t_max, &region, diverged,
                        [&](double t, const std::vector<double>& x) { tracker.observe(t, x); });
    ++rep.total;
    if (e == Event::kReachedTarget) ++rep.reached;
    if (e == Event::kLeftStateSet) ++rep.left_set;
    if (e == Event::kTimeout) ++rep.timed_out;
    if (diverged) ++rep.diverged;
    rep.worst_exponential_margin = std::min(rep.worst_exponential_margin, tracker.worst());
  }
  if (rep.total == 0) rep.worst_exponential_margin = 0.0;
  return rep;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  out << 't';
  const std::size_t dim = traj.states.empty() ? 0 : traj.states.front().size();
  for (std::size_t k = 0; k < dim; ++k) out << ",x" << k + 1;
  out << '\n';
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    out << number(traj.times[s]);
    for (double v : traj.states[s]) out << ',' << number(v);
    out << '\n';
  }
}

}  // namespace roscert::sim
