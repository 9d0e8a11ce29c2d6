#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "slgad/benchkit.hpp"
#include "slgad/config.hpp"
#include "slgad/graph.hpp"

namespace slgad::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
};

// Entry point shared by the binary and the tests. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Pipeline stages operating on a run directory:
//   graph/  checkpoint  loss.log  scores.tsv  roc.tsv  config.resolved
void train_stage(const Graph& graph, const RunConfig& cfg, const std::filesystem::path& run_dir);
void score_stage(const Graph& graph, const RunConfig& cfg, const std::filesystem::path& run_dir);
// Returns the AUC and writes roc.tsv.
double eval_stage(const Graph& graph, const std::filesystem::path& run_dir);

}  // namespace slgad::cli
