#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thlda/parallel.hpp"
#include "thlda/evaluation.hpp"
#include "thlda/sampler.hpp"
#include "thlda/source_knowledge.hpp"
#include "thlda/topic_tree.hpp"

namespace thlda {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kWorkersEnv = "THLDA_WORKERS";

enum class Command { kLabel, kTrain, kTrainLda, kTrainParallel, kEvaluate, kReport };

std::string command_name(Command command);

struct RunConfig {
  Command command = Command::kTrain;

  std::filesystem::path corpus;
  std::filesystem::path vocab;
  std::filesystem::path heldout;
  std::filesystem::path hierarchy;
  std::filesystem::path source_corpus;
  std::filesystem::path source_labels;
  std::filesystem::path prior_paths;
  std::filesystem::path heldout_prior_paths;
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path output = ".";

  Hyperparams hyper;
  bool hlda_mode = false;
  InitMode init = InitMode::kGuided;
  int topics = 20;
  double alpha = -1.0;  // negative selects 50 / topics
  double lda_eta = 0.1;

  int iterations = 100;
  std::uint64_t seed = 1;
  int log_every = 1;
  int workers = 1;
  int merge_interval = 50;
  MergeSchedule::BaseRule base_rule = MergeSchedule::BaseRule::kRotate;
  double min_similarity = 0.0;

  double heldout_fraction = 0.0;  // 0 disables the split
  HeldoutProtocol protocol;

  int top_k = kDefaultTopK;
  int top_n = 10;
  int examples = 3;
  LabelMode label_mode = LabelMode::kFirstSibling;
  bool tfidf_labels = false;

  // Every key with its resolved text, in table order.
  std::vector<std::pair<std::string, std::string>> resolved;
};

// Names of every accepted key, in table order.
std::vector<std::string> config_keys();

// key=value lines; '#' starts a comment. Throws UsageError on a malformed
// line.
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Defaults, then the file values, then THLDA_WORKERS, then explicit values.
// Throws UsageError naming the offending key.
RunConfig resolve_config(const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides);

// argv without the program name: [command] [--key value | --key=value]...
// `--config FILE` reads a key=value file first. The command can also come
// from the file's `command` key.
RunConfig parse_config(const std::vector<std::string>& args);

// Manifest text: a version comment and one key=value line per resolved key.
std::string render_manifest(const RunConfig& config);

std::string usage_text();

}  // namespace thlda
