#include "thlda/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "thlda/errors.hpp"
#include "thlda/gibbs.hpp"
#include "thlda/rng.hpp"

namespace thlda {

std::vector<WorkerShard> partition_corpus(std::size_t n_docs, int workers, std::uint64_t seed) {
  if (workers < 1) throw std::invalid_argument("need at least one worker");
  if (static_cast<std::size_t>(workers) > n_docs) {
    throw std::invalid_argument("more workers than documents");
  }
  std::vector<std::size_t> order(n_docs);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n_docs; i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);
  std::vector<WorkerShard> shards(static_cast<std::size_t>(workers));
  const std::size_t base = n_docs / static_cast<std::size_t>(workers);
  const std::size_t extra = n_docs % static_cast<std::size_t>(workers);
  std::size_t at = 0;
  for (std::size_t p = 0; p < shards.size(); ++p) {
    const std::size_t n = base + (p < extra ? 1 : 0);
    shards[p].worker = static_cast<int>(p);
    shards[p].documents.assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                               order.begin() + static_cast<std::ptrdiff_t>(at + n));
    std::sort(shards[p].documents.begin(), shards[p].documents.end());
    at += n;
  }
  return shards;
}

std::vector<WorkerShard> partition_corpus(const Corpus& corpus, int workers, std::uint64_t seed) {
  return partition_corpus(corpus.size(), workers, seed);
}

CountTable merge_count_tables(const CountTable& previous, std::span<const CountTable> deltas) {
  CountTable out = previous;
  for (const auto& delta : deltas) {
    for (const auto& [node, d] : delta) {
      auto& dst = out[node];
      dst.docs += d.docs;
      for (const auto& [term, c] : d.words) dst.words[term] += c;
    }
  }
  for (auto& [node, counts] : out) {
    if (counts.docs < 0) throw ConsistencyError("merged document count below zero at node " + std::to_string(node));
    for (auto it = counts.words.begin(); it != counts.words.end();) {
      if (it->second < 0) {
        throw ConsistencyError("merged word count below zero at node " + std::to_string(node));
      }
      it = it->second == 0 ? counts.words.erase(it) : std::next(it);
    }
  }
  return out;
}

double topic_cosine(const TopicNode& a, const TopicNode& b) {
  if (a.total_words == 0 || b.total_words == 0) return 0.0;
  const auto& small = a.word_counts.size() <= b.word_counts.size() ? a.word_counts : b.word_counts;
  const auto& large = a.word_counts.size() <= b.word_counts.size() ? b.word_counts : a.word_counts;
  double dot = 0.0;
  for (const auto& [term, c] : small) {
    auto it = large.find(term);
    if (it != large.end()) dot += static_cast<double>(c) * static_cast<double>(it->second);
  }
  auto sq = [](const std::unordered_map<TermId, Count>& m) {
    double s = 0.0;
    for (const auto& [term, c] : m) s += static_cast<double>(c) * static_cast<double>(c);
    return s;
  };
  const double denom = std::sqrt(sq(a.word_counts)) * std::sqrt(sq(b.word_counts));
  return denom > 0.0 ? dot / denom : 0.0;
}

namespace {

std::vector<std::vector<NodeId>> nodes_by_level(const TopicTree& tree) {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(tree.depth()));
  std::vector<NodeId> frontier{tree.root()};
  for (int l = 0; l < tree.depth(); ++l) {
    out[static_cast<std::size_t>(l)] = frontier;
    std::vector<NodeId> next;
    for (NodeId id : frontier) {
      const auto& ch = tree.node(id).children;
      next.insert(next.end(), ch.begin(), ch.end());
    }
    frontier = std::move(next);
  }
  return out;
}

bool same_label(const TopicNode& a, const TopicNode& b) { return a.label && b.label && *a.label == *b.label; }

}  // namespace

MergeResult merge_trees(std::span<const TopicTree> trees, std::size_t base_index, MergeOptions options) {
  if (trees.empty()) throw std::invalid_argument("merge_trees needs at least one tree");
  if (base_index >= trees.size()) throw std::invalid_argument("base tree index out of range");
  for (const auto& t : trees) {
    if (t.depth() != trees[0].depth()) throw std::invalid_argument("cannot merge trees of different depth");
    if (t.vocab_size() != trees[0].vocab_size()) {
      throw std::invalid_argument("cannot merge trees over different vocabularies");
    }
  }
  MergeResult result{trees[base_index], std::vector<std::unordered_map<NodeId, NodeId>>(trees.size()), 0, 0, 0};
  for (NodeId id : trees[base_index].node_ids()) result.id_maps[base_index][id] = id;

  TopicTree& merged = result.tree;
  for (std::size_t offset = 1; offset < trees.size(); ++offset) {
    const std::size_t p = (base_index + offset) % trees.size();
    const TopicTree& incoming = trees[p];
    auto& map = result.id_maps[p];
    const auto& in_root = incoming.node(incoming.root());
    merged.add_counts(merged.root(), in_root.doc_count, in_root.word_counts);
    map[incoming.root()] = merged.root();

    const auto levels = nodes_by_level(incoming);
    for (std::size_t l = 1; l < levels.size(); ++l) {
      for (NodeId i : levels[l]) {
        const auto& node_i = incoming.node(i);
        const NodeId parent = map.at(node_i.parent);
        NodeId best = kNoNode;
        double best_sim = -1.0;
        for (NodeId j : merged.node(parent).children) {
          const double sim = topic_cosine(node_i, merged.node(j));
          if (sim > best_sim) {
            best_sim = sim;
            best = j;
          }
        }
        const bool fold = best != kNoNode &&
                          (best_sim > options.min_similarity || same_label(node_i, merged.node(best)));
        if (fold) {
          const auto& target = merged.node(best);
          if (node_i.label) {
            if (!target.label) {
              merged.set_label(best, node_i.label);
            } else if (*target.label != *node_i.label) {
              ++result.label_conflicts;
              spdlog::debug("merge: keeping base label '{}' over '{}'", *target.label, *node_i.label);
            }
          }
          merged.add_counts(best, node_i.doc_count, node_i.word_counts);
          map[i] = best;
          ++result.merged_nodes;
        } else {
          const NodeId fresh = merged.add_child(parent, node_i.label);
          merged.add_counts(fresh, node_i.doc_count, node_i.word_counts);
          map[i] = fresh;
          ++result.appended_nodes;
        }
      }
    }
  }
  return result;
}

CsvTable timing_table(const std::vector<TimingRecord>& records) {
  CsvTable t;
  t.header = {"iteration", "phase", "worker", "millis"};
  for (const auto& r : records) {
    t.rows.push_back({std::int64_t{r.iteration}, r.phase, std::int64_t{r.worker}, r.millis});
  }
  return t;
}

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Worker {
  int id = 0;
  std::vector<std::size_t> docs;
  TopicTree local;
  Rng rng;
  double last_sweep_ms = 0.0;
};

class Engine {
 public:
  Engine(const Corpus& corpus, const std::vector<PriorPath>& prior_paths, const Hyperparams& hyper,
         const ParallelOptions& options)
      : corpus_(corpus), options_(options) {
    if (options.workers < 1) throw std::invalid_argument("need at least one worker");
    if (options.schedule.merge_interval < 1) throw std::invalid_argument("merge interval must be at least 1");
    if (options.log_every < 1) throw std::invalid_argument("log_every must be at least 1");
    Hyperparams effective = hyper;
    if (options.hlda_mode) effective.lambda = 0.0;

    // Initial seating is serial so one worker reproduces the serial sampler.
    ThldaSampler init(corpus, options.hlda_mode ? std::vector<PriorPath>{} : prior_paths, effective,
                      options.seed, options.init);
    init.initialize();
    labels_ = init.labels();
    tokens_ = init.tokens();
    state_ = init.state();
    auto shards = partition_corpus(corpus, options.workers, options.seed);
    for (auto& shard : shards) {
      Worker w{shard.worker, std::move(shard.documents), state_.tree,
               shard.worker == 0 ? init.rng() : Rng(mix_seed(options.seed, static_cast<std::uint64_t>(shard.worker))),
               0.0};
      workers_.push_back(std::move(w));
    }
    broadcast(state_.tree);
  }

  ParallelResult run() {
    ParallelResult result;
    result.trace.push_back({0, global_log_likelihood()});
    const auto started = Clock::now();
    for (int it = 1; it <= options_.iterations; ++it) {
      const auto iter_start = Clock::now();
      run_sweeps();
      for (const auto& w : workers_) result.timings.push_back({it, "sweep", w.id, w.last_sweep_ms});

      auto t0 = Clock::now();
      merge_counts();
      result.timings.push_back({it, "count_merge", -1, millis_since(t0)});
      state_.iteration = it;

      if (it % options_.log_every == 0 || it == options_.iterations) {
        result.trace.push_back({it, global_log_likelihood()});
      }
      if (it % options_.schedule.merge_interval == 0) {
        t0 = Clock::now();
        merge_and_broadcast();
        ++result.merge_events;
        result.timings.push_back({it, "tree_merge", -1, millis_since(t0)});
      }
      result.timings.push_back({it, "iteration", -1, millis_since(iter_start)});
    }
    result.sweep_seconds = millis_since(started) / 1000.0;
    if (options_.iterations <= 0 || options_.iterations % options_.schedule.merge_interval != 0) {
      const auto t0 = Clock::now();
      merge_and_broadcast();
      result.timings.push_back({std::max(options_.iterations, 0), "final_merge", -1, millis_since(t0)});
    }
    result.state = std::move(state_);
    return result;
  }

 private:
  const PriorPath& labels_of(std::size_t d) const {
    static const PriorPath kNone;
    return labels_.empty() ? kNone : labels_[d];
  }

  void sweep_worker(Worker& w) {
    const auto t0 = Clock::now();
    for (std::size_t d : w.docs) {
      state_.paths[d] = sample_path(w.local, tokens_[d], labels_of(d), state_.paths[d], state_.levels[d],
                                    state_.hyper, w.rng)
                            .path;
      sample_levels(w.local, tokens_[d], state_.paths[d], state_.levels[d], state_.hyper, w.rng);
    }
    w.last_sweep_ms = millis_since(t0);
  }

  void run_sweeps() {
    if (workers_.size() == 1) {
      sweep_worker(workers_[0]);
      return;
    }
    std::vector<std::exception_ptr> errors(workers_.size());
    {
      std::vector<std::jthread> threads;
      threads.reserve(workers_.size());
      for (std::size_t p = 0; p < workers_.size(); ++p) {
        threads.emplace_back([this, p, &errors] {
          try {
            sweep_worker(workers_[p]);
          } catch (...) {
            errors[p] = std::current_exception();
          }
        });
      }
    }
    for (std::size_t p = 0; p < errors.size(); ++p) {
      if (!errors[p]) continue;
      std::string what = "unknown error";
      try {
        std::rethrow_exception(errors[p]);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      dump_on_failure();
      throw std::runtime_error("worker " + std::to_string(p) + " failed: " + what);
    }
  }

  void dump_on_failure() {
    if (!options_.on_failure) return;
    try {
      merge_and_broadcast();
      options_.on_failure(state_);
    } catch (const std::exception& e) {
      spdlog::error("state dump after worker failure failed: {}", e.what());
    }
  }

  // Every worker's shared nodes hold the global counts; everything the
  // worker changed since the last merge is its delta.
  void merge_counts() {
    std::vector<CountTable> deltas(workers_.size());
    for (std::size_t p = 0; p < workers_.size(); ++p) {
      const TopicTree& local = workers_[p].local;
      for (const auto& [id, global] : global_) {
        const auto& n = local.node(id);
        NodeCounts d;
        d.docs = n.doc_count - global.docs;
        for (const auto& [term, c] : n.word_counts) {
          auto it = global.words.find(term);
          const Count diff = c - (it == global.words.end() ? 0 : it->second);
          if (diff != 0) d.words[term] = diff;
        }
        for (const auto& [term, c] : global.words) {
          if (!n.word_counts.contains(term)) d.words[term] = -c;
        }
        if (d.docs != 0 || !d.words.empty()) deltas[p].emplace(id, std::move(d));
      }
    }
    CountTable next = merge_count_tables(global_, deltas);
    for (auto& [id, counts] : global_) {
      auto it = next.find(id);
      counts = it == next.end() ? NodeCounts{} : std::move(it->second);
    }
    if (workers_.size() == 1) return;
    for (auto& w : workers_) {
      for (const auto& [id, counts] : global_) {
        const auto& n = w.local.node(id);
        if (n.doc_count != counts.docs || n.word_counts != counts.words) {
          w.local.set_counts(id, counts.docs, counts.words);
        }
      }
    }
  }

  void merge_and_broadcast() {
    std::vector<TopicTree> own;
    own.reserve(workers_.size());
    for (const auto& w : workers_) {
      TopicTree t = w.local.clone_structure();
      for (std::size_t d : w.docs) t.attach(tokens_[d], state_.paths[d], state_.levels[d]);
      t.prune_empty();
      own.push_back(std::move(t));
    }
    std::size_t base = 0;
    if (options_.schedule.base_rule == MergeSchedule::BaseRule::kRotate) {
      base = static_cast<std::size_t>(merge_count_) % workers_.size();
    }
    ++merge_count_;
    auto merged = merge_trees(own, base, options_.merge);
    if (merged.label_conflicts > 0) {
      spdlog::debug("tree merge {}: {} label conflicts", merge_count_, merged.label_conflicts);
    }
    for (std::size_t p = 0; p < workers_.size(); ++p) {
      const auto& map = merged.id_maps[p];
      for (std::size_t d : workers_[p].docs) {
        for (auto& id : state_.paths[d]) id = map.at(id);
      }
    }
    broadcast(merged.tree);
  }

  void broadcast(const TopicTree& tree) {
    state_.tree = tree;
    state_.tree.pin_all();
    global_.clear();
    for (NodeId id : state_.tree.node_ids()) {
      const auto& n = state_.tree.node(id);
      global_[id] = NodeCounts{n.doc_count, n.word_counts};
    }
    for (auto& w : workers_) w.local = state_.tree;
    // The consolidated tree handed back to callers is unpinned.
    for (NodeId id : state_.tree.node_ids()) state_.tree.set_pinned(id, false);
  }

  // Global nodes with their merged counts plus every worker's private nodes.
  double global_log_likelihood() const {
    std::vector<double> terms;
    const auto& reference = workers_[0].local;
    for (const auto& [id, counts] : global_) {
      if (counts.words.empty()) continue;
      TopicNode n;
      n.level = reference.node(id).level;
      n.word_counts = counts.words;
      for (const auto& [term, c] : counts.words) n.total_words += c;
      terms.push_back(node_log_marginal(n, state_.hyper.eta[static_cast<std::size_t>(n.level)], corpus_.vocab_size()));
    }
    for (const auto& w : workers_) {
      for (NodeId id : w.local.node_ids()) {
        if (global_.contains(id)) continue;
        const auto& n = w.local.node(id);
        if (n.total_words == 0) continue;
        terms.push_back(node_log_marginal(n, state_.hyper.eta[static_cast<std::size_t>(n.level)], corpus_.vocab_size()));
      }
    }
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    return total;
  }

  const Corpus& corpus_;
  ParallelOptions options_;
  std::vector<PriorPath> labels_;
  std::vector<std::vector<TermId>> tokens_;
  SamplerState state_;
  std::vector<Worker> workers_;
  CountTable global_;
  int merge_count_ = 0;
};

}  // namespace

ParallelResult parallel_train(const Corpus& corpus, const std::vector<PriorPath>& prior_paths,
                              const Hyperparams& hyper, const ParallelOptions& options) {
  Engine engine(corpus, prior_paths, hyper, options);
  return engine.run();
}

}  // namespace thlda
