#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace roscert::driver {

enum ExitCode : int { kOk = 0, kInputError = 2, kInfeasible = 3, kFalsified = 4 };

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> deg;
  std::optional<double> lambda;
  std::optional<std::string> dump_sdp;
};

/// Synthesizes, verifies and validates every (lambda, deg_V) run of the
/// problem and writes report.txt, certificate.txt, contour.csv and one
/// trajectory-<k>.csv per initial condition. Progress goes to `log`;
/// report.txt only holds deterministic content.
int run(const std::string& problem_path, const Overrides& overrides, std::ostream& log);

/// Re-verifies a stored certificate against the problem without solving.
int check(const std::string& problem_path, const std::string& certificate_path, const Overrides& overrides,
          std::ostream& log);

}  // namespace roscert::driver
