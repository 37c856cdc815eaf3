#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gapprobe/corpus.hpp"
#include "gapprobe/metrics.hpp"
#include "gapprobe/scoring.hpp"

namespace gapprobe::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitBackend = 3,
};

/// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string default_tokenizer_dir();

/// Scores file: one row per (item, condition) in dataset order.
std::string scores_csv(const corpus::Dataset& d, const scoring::ScoreMap& scores);
/// Sidecar with the full token and surprisal vectors, one JSON object per line.
std::string tokens_jsonl(const corpus::Dataset& d, const scoring::ScoreMap& scores);

/// Reads a scores file back into per-item deltas, in first-appearance order.
/// Throws IncompleteScores when an item lacks a condition, DuplicateRecord on
/// a repeated (item, condition).
std::vector<metrics::DeltaScores> deltas_from_scores(std::string_view csv_text);

}  // namespace gapprobe::cli
