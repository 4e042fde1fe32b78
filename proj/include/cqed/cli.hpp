#pragma once

#include <cstdint>
#include <string>

namespace cqed {

// Shared command-line options; every subcommand reads a JSON run config
// (schema "cqedsim-run/1") and writes its outputs under out_dir.
struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  int parallel = 1;
  std::uint64_t seed = 1;
};

// Subcommands.  They throw config_error / numeric_error; run_cli maps those
// to exit codes 2 / 1 and success to 0.
void cmd_simulate(const CliOptions& opt);
void cmd_fit(const CliOptions& opt);
void cmd_wigner(const CliOptions& opt);
void cmd_report(const CliOptions& opt);

int run_cli(int argc, const char* const* argv);

}  // namespace cqed
