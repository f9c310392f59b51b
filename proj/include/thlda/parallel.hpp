#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "thlda/corpus.hpp"
#include "thlda/csv.hpp"
#include "thlda/sampler.hpp"
#include "thlda/topic_tree.hpp"

namespace thlda {

struct WorkerShard {
  int worker = 0;
  std::vector<std::size_t> documents;  // ascending corpus indices
};

// Seeded shuffle cut into P contiguous blocks whose sizes differ by at most one.
std::vector<WorkerShard> partition_corpus(std::size_t n_docs, int workers, std::uint64_t seed);
std::vector<WorkerShard> partition_corpus(const Corpus& corpus, int workers, std::uint64_t seed);

struct NodeCounts {
  Count docs = 0;
  std::unordered_map<TermId, Count> words;

  friend bool operator==(const NodeCounts&, const NodeCounts&) = default;
};

// Per-node document and word counts keyed by global node id.
using CountTable = std::map<NodeId, NodeCounts>;

// previous + sum of deltas. Entries that reach zero are dropped; a negative
// result throws ConsistencyError.
CountTable merge_count_tables(const CountTable& previous, std::span<const CountTable> deltas);

// Cosine similarity of two nodes' word-count vectors; 0 if either is empty.
double topic_cosine(const TopicNode& a, const TopicNode& b);

struct MergeOptions {
  // Incoming nodes whose best match scores at or below this are appended,
  // unless both nodes carry the same label.
  double min_similarity = 0.0;
};

struct MergeResult {
  TopicTree tree;
  // id_maps[p] maps node ids of trees[p] to ids in `tree`.
  std::vector<std::unordered_map<NodeId, NodeId>> id_maps;
  int merged_nodes = 0;
  int appended_nodes = 0;
  int label_conflicts = 0;
};

// Top-down merge of every tree into a copy of trees[base_index]. Each node
// is folded into the most similar child of its already-merged parent, or
// appended under that parent when nothing matches.
MergeResult merge_trees(std::span<const TopicTree> trees, std::size_t base_index, MergeOptions options = {});

struct MergeSchedule {
  enum class BaseRule { kRotate, kFixed };
  int merge_interval = 50;
  BaseRule base_rule = BaseRule::kRotate;
};

struct TimingRecord {
  int iteration = 0;
  std::string phase;  // sweep, count_merge, tree_merge, final_merge, iteration
  int worker = -1;    // -1 for phases run at the barrier
  double millis = 0.0;
};

CsvTable timing_table(const std::vector<TimingRecord>& records);

struct ParallelOptions {
  int workers = 1;
  int iterations = 100;
  MergeSchedule schedule;
  std::uint64_t seed = 1;
  int log_every = 1;
  InitMode init = InitMode::kGuided;
  bool hlda_mode = false;
  MergeOptions merge;
  // Receives the best-effort consolidated state when a worker throws.
  std::function<void(const SamplerState&)> on_failure;
};

struct ParallelResult {
  SamplerState state;
  Trace trace;
  std::vector<TimingRecord> timings;
  int merge_events = 0;
  double sweep_seconds = 0.0;  // wall clock over all iterations, merges included
};

// Approximate parallel Gibbs: shards sweep against their local tree, counts
// of shared nodes are summed after every iteration and the per-worker trees
// are merged and broadcast every merge_interval iterations. One worker is
// exactly the serial sampler.
ParallelResult parallel_train(const Corpus& corpus, const std::vector<PriorPath>& prior_paths,
                              const Hyperparams& hyper, const ParallelOptions& options);

}  // namespace thlda
