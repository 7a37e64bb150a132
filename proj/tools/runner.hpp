#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace greenforms::cli {

inline const std::vector<std::string> kSubcommands = {"mesh-gen", "green-decay", "representation",
                                                      "solve-d", "sobolev", "dbar"};

struct RunOptions {
  std::string experiment;
  Config config;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  int refinements = 0;  // extra levels, each doubling the resolution
};

struct RunResult {
  std::vector<std::string> outputs;   // relative to out_dir
  std::vector<std::string> failures;  // one line per failed assertion
};

// Writes the experiment's CSV (and plots) into out_dir. Assertion failures are
// collected, not thrown; library errors other than config problems become a
// failure naming the error.
RunResult run_experiment(const RunOptions& options);

// manifest.json: experiment, config hash, seed, versions, outputs, failures
std::string manifest_json(const RunOptions& options, const RunResult& result);

}  // namespace greenforms::cli
