#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace filmrec::cli {

// Parsed command line. `out` is the output directory (gen, recover) or
// report file (eval, losses); `input` is the corpus for recover and the
// recovered outputs for eval/losses; `gt` is the ground-truth corpus for
// eval/losses; `maps` is the user map directory for map-source=files.
struct RunConfig {
  std::filesystem::path out;
  std::filesystem::path input;
  std::filesystem::path gt;
  std::filesystem::path maps;
  int n = 0;
  std::uint64_t seed = 0;
  std::string grid = "4x4";
  int res = 256;
  std::string map_source = "oracle";
  double alpha = 2.0;
  double beta = 2.0;
  int jobs = 1;
};

// Each command returns its process exit code: 0 success, 1 when at least
// one sample failed, 2 for configuration errors (raised as Error by the
// command and mapped by run_cli).
int cmd_gen(const RunConfig& cfg);
int cmd_recover(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_losses(const RunConfig& cfg);

int run_cli(int argc, char** argv);

}  // namespace filmrec::cli
