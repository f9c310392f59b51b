#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "thlda/corpus.hpp"
#include "thlda/gibbs.hpp"
#include "thlda/rng.hpp"
#include "thlda/topic_tree.hpp"

namespace thlda {

// Complete Gibbs state: tree counts are always the aggregate of
// (paths, levels) over the documents.
struct SamplerState {
  TopicTree tree{1, 1};
  std::vector<Path> paths;
  std::vector<std::vector<Level>> levels;  // per document, aligned with Document::tokens()
  Hyperparams hyper;
  std::uint64_t seed = 0;
  int iteration = 0;
};

struct TraceEntry {
  int iteration = 0;
  double joint_log_likelihood = 0.0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};
using Trace = std::vector<TraceEntry>;

enum class InitMode {
  kGuided,  // labelled documents routed along their labels, others drawn from the full conditional
  kRandom,  // every document seated by prior-only nCRP draws
};

// Collapsed Gibbs sampler over (paths, levels). Per iteration each document
// has its path and then its levels resampled, in corpus order.
class ThldaSampler {
 public:
  // `prior_paths` is empty or has one entry per document. Labels are ignored
  // entirely when lambda == 0.
  ThldaSampler(const Corpus& corpus, std::vector<PriorPath> prior_paths, Hyperparams hyper,
               std::uint64_t seed, InitMode init = InitMode::kGuided);

  void initialize();
  void sweep();
  PathDraw resample_path(std::size_t doc);
  void resample_levels(std::size_t doc);

  const SamplerState& state() const noexcept { return state_; }
  SamplerState& mutable_state() noexcept { return state_; }
  Rng& rng() noexcept { return rng_; }
  const std::vector<std::vector<TermId>>& tokens() const noexcept { return tokens_; }
  const std::vector<PriorPath>& labels() const noexcept { return labels_; }
  bool initialized() const noexcept { return initialized_; }

 private:
  const Corpus& corpus_;
  std::vector<PriorPath> labels_;
  std::vector<std::vector<TermId>> tokens_;
  SamplerState state_;
  Rng rng_;
  InitMode init_;
  bool initialized_ = false;
};

struct TrainOptions {
  int iterations = 100;
  std::uint64_t seed = 1;
  int log_every = 1;
  InitMode init = InitMode::kGuided;
  // Forces lambda to 0 and drops the prior paths.
  bool hlda_mode = false;
  // Called after every completed iteration.
  std::function<void(const SamplerState&)> on_iteration;
};

struct TrainResult {
  SamplerState state;
  Trace trace;  // iteration 0 is the initialised state
};

TrainResult train(const Corpus& corpus, const std::vector<PriorPath>& prior_paths, const Hyperparams& hyper,
                  const TrainOptions& options);

// Rebuilds the tree counts from (paths, levels) and throws ConsistencyError
// on any mismatch with the incremental counts.
void audit_state(const SamplerState& state, const Corpus& corpus);

// Validates and normalises prior paths for `depth`; result is empty or
// corpus-sized.
std::vector<PriorPath> checked_prior_paths(const std::vector<PriorPath>& prior_paths, std::size_t n_docs,
                                           int depth);

}  // namespace thlda
