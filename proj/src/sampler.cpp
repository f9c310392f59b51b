#include "thlda/sampler.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

#include "thlda/errors.hpp"

namespace thlda {

std::vector<PriorPath> checked_prior_paths(const std::vector<PriorPath>& prior_paths, std::size_t n_docs,
                                           int depth) {
  if (prior_paths.empty()) return {};
  if (prior_paths.size() != n_docs) throw std::invalid_argument("need one prior path per document");
  for (const auto& p : prior_paths) {
    if (static_cast<int>(p.size()) > depth - 1) {
      throw std::invalid_argument("prior path longer than the levels below the root");
    }
  }
  return prior_paths;
}

ThldaSampler::ThldaSampler(const Corpus& corpus, std::vector<PriorPath> prior_paths, Hyperparams hyper,
                           std::uint64_t seed, InitMode init)
    : corpus_(corpus),
      state_{TopicTree(hyper.depth, corpus.vocab_size()), {}, {}, hyper, seed, 0},
      rng_(seed),
      init_(init) {
  hyper.validate();
  if (corpus.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  if (hyper.lambda > 0.0) labels_ = checked_prior_paths(prior_paths, corpus.size(), hyper.depth);
  tokens_.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) {
    if (doc.length() == 0) throw std::invalid_argument("document '" + doc.id + "' has no words");
    tokens_.push_back(doc.tokens());
  }
  state_.paths.resize(corpus.size());
  state_.levels.resize(corpus.size());
}

void ThldaSampler::initialize() {
  if (initialized_) return;
  const bool guided = init_ == InitMode::kGuided;
  static const PriorPath kNoLabels;
  for (std::size_t d = 0; d < tokens_.size(); ++d) {
    state_.levels[d] = draw_levels_from_prior(tokens_[d].size(), state_.hyper, rng_);
    const auto& labels = labels_.empty() ? kNoLabels : labels_[d];
    PathOptions opts;
    opts.use_likelihood = guided;
    opts.follow_labels = guided && !labels.empty();
    state_.paths[d] = sample_path(state_.tree, tokens_[d], labels, {}, state_.levels[d], state_.hyper,
                                  rng_, opts)
                          .path;
  }
  initialized_ = true;
}

PathDraw ThldaSampler::resample_path(std::size_t doc) {
  static const PriorPath kNoLabels;
  const auto& labels = labels_.empty() ? kNoLabels : labels_[doc];
  auto draw = sample_path(state_.tree, tokens_[doc], labels, state_.paths[doc], state_.levels[doc],
                          state_.hyper, rng_);
  state_.paths[doc] = draw.path;
  return draw;
}

void ThldaSampler::resample_levels(std::size_t doc) {
  sample_levels(state_.tree, tokens_[doc], state_.paths[doc], state_.levels[doc], state_.hyper, rng_);
}

void ThldaSampler::sweep() {
  if (!initialized_) initialize();
  for (std::size_t d = 0; d < tokens_.size(); ++d) {
    resample_path(d);
    resample_levels(d);
  }
  ++state_.iteration;
}

TrainResult train(const Corpus& corpus, const std::vector<PriorPath>& prior_paths, const Hyperparams& hyper,
                  const TrainOptions& options) {
  if (options.log_every < 1) throw std::invalid_argument("log_every must be at least 1");
  Hyperparams effective = hyper;
  if (options.hlda_mode) effective.lambda = 0.0;
  ThldaSampler sampler(corpus, options.hlda_mode ? std::vector<PriorPath>{} : prior_paths, effective,
                       options.seed, options.init);
  sampler.initialize();
  Trace trace;
  trace.push_back({0, tree_log_likelihood(sampler.state().tree, effective.eta)});
  if (options.iterations <= 0) {
    spdlog::warn("train: {} iterations requested, returning the initialised state", options.iterations);
  }
  for (int it = 1; it <= options.iterations; ++it) {
    sampler.sweep();
    if (it % options.log_every == 0 || it == options.iterations) {
      trace.push_back({it, tree_log_likelihood(sampler.state().tree, effective.eta)});
      spdlog::debug("iteration {} joint log likelihood {}", it, trace.back().joint_log_likelihood);
    }
    if (options.on_iteration) options.on_iteration(sampler.state());
  }
  return {std::move(sampler.mutable_state()), std::move(trace)};
}

void audit_state(const SamplerState& state, const Corpus& corpus) {
  if (state.paths.size() != corpus.size() || state.levels.size() != corpus.size()) {
    throw ConsistencyError("assignment arrays do not cover the corpus");
  }
  TopicTree rebuilt = state.tree.clone_structure();
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto tokens = corpus[d].tokens();
    if (state.levels[d].size() != tokens.size()) throw ConsistencyError("level array length mismatch");
    rebuilt.attach(tokens, state.paths[d], state.levels[d]);
  }
  for (NodeId id : state.tree.node_ids()) {
    const auto& a = state.tree.node(id);
    const auto& b = rebuilt.node(id);
    if (a.doc_count != b.doc_count || a.total_words != b.total_words || a.word_counts != b.word_counts) {
      throw ConsistencyError("incremental counts differ from rebuilt counts at node " + std::to_string(id));
    }
  }
}

}  // namespace thlda
