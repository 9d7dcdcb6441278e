#include "roscert/driver.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "roscert/problem.hpp"
#include "roscert/sdp.hpp"
#include "roscert/sim.hpp"
#include "roscert/synth.hpp"

namespace roscert::driver {

namespace fs = std::filesystem;
using problem::Problem;

namespace {

constexpr double kMarginTolerance = 1e-5;
constexpr int kContainmentSamples = 10000;

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string vec(const std::vector<double>& x) {
  std::string s = "[";
  for (std::size_t k = 0; k < x.size(); ++k) s += (k ? ", " : "") + num(x[k]);
  return s + "]";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> random_direction(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> x(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& v : x) {
      v = normal(rng);
      sq += v * v;
    }
  } while (sq == 0.0);
  for (double& v : x) v /= std::sqrt(sq);
  return x;
}

// Points with V <= 0 among samples of the centered ball of the given radius:
// even samples on the sphere, odd samples uniform inside.
int ball_failures(const poly::Poly& V, int dim, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const poly::PolyEvaluator v(V);
  int failures = 0;
  for (int k = 0; k < kContainmentSamples; ++k) {
    auto x = random_direction(dim, rng);
    const double r = radius * (k % 2 == 0 ? 1.0 : std::pow(unit(rng), 1.0 / dim));
    for (double& c : x) c *= r;
    if (!(v(x) > 0.0)) ++failures;
  }
  return failures;
}

int sphere_failures(const poly::Poly& V, int dim, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const poly::PolyEvaluator v(V);
  int failures = 0;
  for (int k = 0; k < kContainmentSamples; ++k) {
    auto x = random_direction(dim, rng);
    for (double& c : x) c *= radius;
    if (!(v(x) > 0.0)) ++failures;
  }
  return failures;
}

// Verification, containment checks and Monte-Carlo validation of an
// accepted certificate. Returns false when any gating check fails.
bool assess(const synth::Certificate& cert, const Problem& p, std::ostream& rep, std::ostream& log) {
  bool ok = true;
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = p.validation.seed;
  const auto ver = synth::verify_certificate(cert, p.network, p.region, p.validation.verification_samples, seed);
  rep << "  verification: " << ver.decay_samples << " decay samples, " << ver.boundary_samples
      << " boundary samples; worst decay margin " << sci(ver.worst_decay_margin) << ", largest boundary value "
      << sci(ver.worst_boundary_margin) << "; violations " << ver.decay_violations << " decay, "
      << ver.boundary_violations << " boundary -> " << (ver.passed() ? "passed" : "FAILED") << '\n';
  for (std::size_t k = 0; k < ver.violating_points.size() && k < 3; ++k) {
    rep << "    violating point " << vec(ver.violating_points[k]) << '\n';
  }
  ok = ok && ver.passed();
  if (p.region.epsilon > 0.0) {
    const int fails = sphere_failures(cert.V, cert.dim, p.region.epsilon, seed);
    rep << "  target boundary |x| = " << num(p.region.epsilon) << " inside {V > 0}: "
        << (fails == 0 ? "yes" : "no") << " (" << fails << " of " << kContainmentSamples << " samples with V <= 0)\n";
  }
  if (p.contains_ball) {
    const int fails = ball_failures(cert.V, cert.dim, *p.contains_ball, seed);
    rep << "  ball |x| < " << num(*p.contains_ball) << " inside {V > 0}: " << (fails == 0 ? "passed" : "FAILED")
        << " (" << kContainmentSamples << " samples, " << fails << " with V <= 0)\n";
    ok = ok && fails == 0;
  }
  log << "  verification done in " << seconds_since(t0) << " s\n" << std::flush;
  const auto t1 = std::chrono::steady_clock::now();
  try {
    const auto mc = sim::mc_validate(cert, p.network, p.region, p.validation.trials, seed, p.validation.step,
                                     p.validation.t_max);
    const bool mc_ok = mc.left_set == 0 && mc.timed_out == 0 && mc.worst_exponential_margin >= -kMarginTolerance;
    rep << "  validation: " << mc.total << " trials (seed " << mc.seed << ", step " << num(p.validation.step)
        << ", t_max " << num(p.validation.t_max) << "): reached " << mc.reached << ", left_set " << mc.left_set
        << ", timed_out " << mc.timed_out << ", diverged " << mc.diverged << "; worst exponential margin "
        << sci(mc.worst_exponential_margin) << " -> " << (mc_ok ? "passed" : "FAILED") << '\n';
    ok = ok && mc_ok;
  } catch (const sim::SamplingFailure& e) {
    rep << "  validation: FAILED, " << e.what() << '\n';
    ok = false;
  }
  log << "  validation done in " << seconds_since(t1) << " s\n" << std::flush;
  return ok;
}

bool apply_overrides(Problem& p, const Overrides& o, std::ostream& log) {
  if (o.out_dir) p.output_dir = *o.out_dir;
  if (o.seed) p.validation.seed = *o.seed;
  if (o.deg) p.degrees = {*o.deg};
  if (o.lambda) p.lambdas = {*o.lambda};
  for (double lambda : p.lambdas) {
    for (int deg : p.degrees) {
      synth::SynthesisConfig cfg = p.synthesis;
      cfg.lambda = lambda;
      cfg.deg_V = deg;
      try {
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return false;
      }
    }
  }
  return true;
}

bool load_problem(const std::string& path, const Overrides& o, Problem& p, std::ostream& log) {
  try {
    p = problem::load(path);
  } catch (const problem::ProblemError& e) {
    log << path << ": " << e.what() << '\n';
    return false;
  }
  return apply_overrides(p, o, log);
}

void write_header(const Problem& p, std::ostream& rep) {
  rep << "ros-cert report\n";
  if (!p.name.empty()) rep << "problem: " << p.name << '\n';
  rep << "program: " << synth::to_string(p.kind) << '\n';
  rep << "network: n = " << p.network.n << ", N = " << p.network.N << ", c = " << num(p.network.c) << '\n';
  rep << "state set:";
  for (const auto& h : p.region.state_ineqs) rep << ' ' << poly::to_string(h) << " > 0;";
  rep << '\n';
  rep << "target set:";
  const int dim = p.region.dim(p.network);
  for (const auto& l : p.region.targets(dim)) rep << ' ' << poly::to_string(l) << " > 0;";
  rep << '\n';
}

struct Accepted {
  int run = 0;
  synth::Certificate cert;
};

double spread(const Problem& p, const std::vector<double>& x) {
  if (p.kind == synth::ProgramKind::kEquilibrium) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    return std::sqrt(sq);
  }
  const int n = p.network.n;
  double worst = 0.0;
  for (int i = 0; i < p.network.N; ++i) {
    for (int j = i + 1; j < p.network.N; ++j) {
      double sq = 0.0;
      for (int k = 0; k < n; ++k) sq += std::pow(x[i * n + k] - x[j * n + k], 2);
      worst = std::max(worst, std::sqrt(sq));
    }
  }
  return worst;
}

bool in_estimate(const synth::Certificate& cert, const Problem& p, const std::vector<double>& x) {
  if (cert.kind == synth::ProgramKind::kEquilibrium) return p.region.in_state(x) && cert.V.evaluate(x) > 0.0;
  const int n = p.network.n;
  std::vector<double> d(n);
  for (int i = 0; i < p.network.N; ++i) {
    for (int j = 0; j < p.network.N; ++j) {
      if (i == j) continue;
      for (int k = 0; k < n; ++k) d[k] = x[i * n + k] - x[j * n + k];
      if (!p.region.in_state(d) || !(cert.V.evaluate(d) > 0.0)) return false;
    }
  }
  return true;
}

void write_contour(const Problem& p, const std::vector<Accepted>& accepted, const fs::path& file) {
  std::ofstream out(file);
  const auto& c = p.contour;
  out << 'x' << c.axis_x + 1 << ",x" << c.axis_y + 1;
  for (const auto& a : accepted) {
    out << ",V";
    if (accepted.size() > 1) out << "_run" << a.run;
  }
  out << '\n';
  std::vector<poly::PolyEvaluator> evals;
  for (const auto& a : accepted) evals.emplace_back(a.cert.V);
  std::vector<double> x(accepted.front().cert.dim, 0.0);
  const double h = (c.hi - c.lo) / (c.resolution - 1);
  for (int a = 0; a < c.resolution; ++a) {
    for (int b = 0; b < c.resolution; ++b) {
      x[c.axis_x] = c.lo + a * h;
      x[c.axis_y] = c.lo + b * h;
      out << num(x[c.axis_x]) << ',' << num(x[c.axis_y]);
      for (const auto& v : evals) out << ',' << num(v(x));
      out << '\n';
    }
  }
}

void write_certificate_file(const synth::Certificate& cert, const fs::path& file) {
  std::ofstream out(file);
  synth::write_certificate(cert, out);
}

}  // namespace

int run(const std::string& problem_path, const Overrides& overrides, std::ostream& log) {
  Problem p;
  if (!load_problem(problem_path, overrides, p, log)) return kInputError;
  const fs::path out_dir(p.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create output directory '" << out_dir.string() << "': " << ec.message() << '\n';
    return kInputError;
  }

  std::ostringstream rep;
  write_header(p, rep);
  const int runs = static_cast<int>(p.lambdas.size() * p.degrees.size());
  std::vector<Accepted> accepted;
  bool all_sound = true;
  int k = 0;
  for (double lambda : p.lambdas) {
    for (int deg : p.degrees) {
      ++k;
      synth::SynthesisConfig cfg = p.synthesis;
      cfg.lambda = lambda;
      cfg.deg_V = deg;
      rep << "\nrun " << k << ": lambda = " << num(lambda) << ", deg_V = " << deg << '\n';
      log << "run " << k << "/" << runs << ": lambda = " << lambda << ", deg_V = " << deg << std::endl;
      const auto t0 = std::chrono::steady_clock::now();
      synth::BuiltProgram built;
      try {
        built = synth::build_program(p.network, p.region, cfg);
      } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
      }
      const sdp::SdpProblem& sdp_problem = built.compiled.problem;
      if (overrides.dump_sdp) {
        const std::string path = runs > 1 ? *overrides.dump_sdp + "." + std::to_string(k) : *overrides.dump_sdp;
        std::ofstream dump(path);
        if (!dump) {
          log << "error: cannot write '" << path << "'\n";
          return kInputError;
        }
        sdp::write_sparse(sdp_problem, dump);
      }
      rep << "  sdp: " << sdp_problem.num_constraints() << " equality constraints, " << sdp_problem.blocks.size()
          << " PSD blocks, " << sdp_problem.free_vars << " free variables\n";
      log << "  sdp: " << sdp_problem.num_constraints() << " rows, " << sdp_problem.blocks.size() << " blocks, "
          << sdp_problem.free_vars << " free\n" << std::flush;
      const sdp::SdpSolution sol = sdp::solve(sdp_problem);
      log << "  solver: " << sdp::to_string(sol.status) << " after " << sol.iterations << " iterations, "
          << seconds_since(t0) << " s\n" << std::flush;
      rep << "  solver: " << sdp::to_string(sol.status) << " after " << sol.iterations
          << " iterations; primal objective " << sci(sol.primal_objective) << ", dual objective "
          << sci(sol.dual_objective) << ", primal residual " << sci(sol.primal_residual) << ", dual residual "
          << sci(sol.dual_residual) << ", relative gap " << sci(sol.rel_gap) << '\n';
      if (sol.status != sdp::Status::kOptimal) {
        rep << "  certificate: none\n";
        continue;
      }
      synth::Certificate cert;
      try {
        cert = synth::extract_certificate(sol, built);
      } catch (const synth::CertificateRejected& e) {
        rep << "  certificate: rejected (" << e.what() << ")\n";
        continue;
      }
      rep << "  certificate: accepted; identity residual " << sci(cert.identity_residual)
          << ", Gram min eigenvalue " << sci(cert.gram_min_eig) << ", integral of V over X "
          << num(cert.objective) << '\n';
      rep << "  V = " << poly::to_string(cert.V) << '\n';
      all_sound = assess(cert, p, rep, log) && all_sound;
      accepted.push_back({k, std::move(cert)});
    }
  }

  if (!accepted.empty()) {
    write_certificate_file(accepted.front().cert, out_dir / "certificate.txt");
    if (runs > 1) {
      for (const auto& a : accepted) {
        write_certificate_file(a.cert, out_dir / ("certificate-" + std::to_string(a.run) + ".txt"));
      }
    }
    write_contour(p, accepted, out_dir / "contour.csv");
  }

  const auto& ics = p.validation.initial_conditions;
  if (!ics.empty()) rep << "\ninitial conditions\n";
  for (std::size_t i = 0; i < ics.size(); ++i) {
    const auto traj = sim::integrate(p.network, ics[i], p.validation.step, p.validation.t_max);
    std::ofstream csv(out_dir / ("trajectory-" + std::to_string(i + 1) + ".csv"));
    sim::write_csv(traj, csv);
    rep << "  " << i + 1 << ": " << vec(ics[i]);
    if (!accepted.empty()) rep << "; in R (run " << accepted.front().run << "): "
                               << (in_estimate(accepted.front().cert, p, ics[i]) ? "yes" : "no");
    std::string hit = "never";
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
      const auto where = sim::locate(p.network, p.region, traj.states[s]);
      if (where == sim::Location::kOutside) {
        hit = "left X at t = " + num(traj.times[s]);
        break;
      }
      if (where == sim::Location::kTarget) {
        hit = "t = " + num(traj.times[s]);
        break;
      }
    }
    rep << "; reaches target: " << hit << "; " << (p.kind == synth::ProgramKind::kEquilibrium ? "state" : "largest pairwise error")
        << " norm at t = " << num(traj.times.back()) << ": " << sci(spread(p, traj.states.back()))
        << (traj.diverged ? " (diverged)" : "") << '\n';
  }

  int code = kOk;
  if (accepted.empty()) {
    code = kInfeasible;
    rep << "\nresult: no accepted certificate (exit " << code << ")\n";
  } else if (!all_sound) {
    code = kFalsified;
    rep << "\nresult: an accepted certificate failed a check (exit " << code << ")\n";
  } else {
    rep << "\nresult: " << accepted.size() << " of " << runs << " runs certified and validated (exit " << code
        << ")\n";
  }
  std::ofstream(out_dir / "report.txt") << rep.str();
  log << rep.str();
  return code;
}

int check(const std::string& problem_path, const std::string& certificate_path, const Overrides& overrides,
          std::ostream& log) {
  Problem p;
  if (!load_problem(problem_path, overrides, p, log)) return kInputError;
  synth::Certificate cert;
  {
    std::ifstream in(certificate_path);
    if (!in) {
      log << "error: cannot open certificate '" << certificate_path << "'\n";
      return kInputError;
    }
    try {
      cert = synth::read_certificate(in);
    } catch (const std::invalid_argument& e) {
      log << certificate_path << ": " << e.what() << '\n';
      return kInputError;
    }
  }
  std::ostringstream rep;
  write_header(p, rep);
  rep << "\ncertificate: " << certificate_path << " (" << synth::to_string(cert.kind) << ", lambda = "
      << num(cert.lambda) << ", " << cert.dim << " variables)\n";
  const int dim = p.region.dim(p.network);
  if (cert.kind != p.kind || cert.dim != dim) {
    rep << "  certificate does not fit the problem: expected " << synth::to_string(p.kind) << " over " << dim
        << " variables\n\nresult: FAILED (exit " << kFalsified << ")\n";
    log << rep.str();
    return kFalsified;
  }
  const bool ok = assess(cert, p, rep, log);
  const int code = ok ? kOk : kFalsified;
  rep << "\nresult: " << (ok ? "passed" : "FAILED") << " (exit " << code << ")\n";
  log << rep.str();
  return code;
}

}  // namespace roscert::driver
