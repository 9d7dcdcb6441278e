#include <iostream>

#include <CLI11.hpp>

#include "roscert/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Region-of-synchronization certificates via SOS programming"};
  app.require_subcommand(1);
  roscert::driver::Overrides overrides;
  std::string problem_path;
  std::string certificate_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("problem", problem_path, "Problem file (YAML)")->required();
    cmd->add_option("--out", overrides.out_dir, "Output directory");
    cmd->add_option("--seed", overrides.seed, "Seed for verification and validation sampling");
    cmd->add_option("--deg", overrides.deg, "Degree of V (even)");
    cmd->add_option("--lambda", overrides.lambda, "Exponential rate lambda");
    cmd->add_option("--dump-sdp", overrides.dump_sdp, "Write the compiled SDP in sparse text form");
  };
  CLI::App* run = app.add_subcommand("run", "Synthesize, verify and validate");
  add_common(run);
  CLI::App* check = app.add_subcommand("check", "Re-verify a stored certificate");
  add_common(check);
  check->add_option("certificate", certificate_path, "Certificate file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : roscert::driver::kInputError;
  }
  try {
    if (*run) return roscert::driver::run(problem_path, overrides, std::cout);
    return roscert::driver::check(problem_path, certificate_path, overrides, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
