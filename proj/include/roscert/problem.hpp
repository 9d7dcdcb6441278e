#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roscert/netmodel.hpp"
#include "roscert/synth.hpp"

namespace roscert::problem {

/// Schema or semantic error in a problem file. `line` is 1-based, 0 when the
/// problem is not tied to a location.
class ProblemError : public std::runtime_error {
 public:
  ProblemError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct ValidationSettings {
  int trials = 1000;
  std::uint64_t seed = 1;
  double step = 1e-3;
  double t_max = 100.0;
  int verification_samples = 100000;
  std::vector<std::vector<double>> initial_conditions;
};

struct ContourSettings {
  int resolution = 201;
  double lo = -1.1;
  double hi = 1.1;
  /// 0-based variables spanning the slice; all others are held at zero.
  int axis_x = 0;
  int axis_y = 1;
};

struct Problem {
  std::string name;
  netmodel::NetworkSpec network;
  netmodel::RegionSpec region;
  synth::ProgramKind kind = synth::ProgramKind::kManifold;
  std::vector<double> lambdas{0.1};
  std::vector<int> degrees{4};
  synth::SynthesisConfig synthesis;  // lambda and deg_V are overwritten per run
  ValidationSettings validation;
  ContourSettings contour;
  /// Radius of a centered ball that must lie inside {V > 0}.
  std::optional<double> contains_ball;
  std::string output_dir = "out";
};

/// Parses YAML text; every error names the offending line.
Problem parse(const std::string& text);
Problem load(const std::string& path);

}  // namespace roscert::problem
