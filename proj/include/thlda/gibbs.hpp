#pragma once

#include <span>
#include <string>
#include <vector>

#include "thlda/rng.hpp"
#include "thlda/topic_tree.hpp"
#include "thlda/types.hpp"

namespace thlda {

// A document's words at one level, grouped by term.
struct LevelWords {
  std::vector<TermCount> words;
  Count total = 0;
};

std::vector<LevelWords> level_word_counts(std::span<const TermId> tokens, std::span<const Level> levels,
                                          int depth);

// log p(words | node counts) under the collapsed Dirichlet-multinomial:
//   lgG(n + V eta) - lgG(n + N + V eta) + sum_w [lgG(n_w + c_w + eta) - lgG(n_w + eta)]
// evaluated as sums of logs of rising factorials. `node` may be null for a
// fresh topic.
double node_log_likelihood(const TopicNode* node, const LevelWords& words, double eta,
                           std::size_t vocab_size);

// Sum of node_log_likelihood along `path`; kNoNode entries are fresh nodes.
// The document must already be detached from `tree`.
double path_log_likelihood(const TopicTree& tree, std::span<const LevelWords> words,
                           std::span<const NodeId> path, std::span<const double> eta);

// Collapsed stick-breaking predictive over levels 0..L-1 given the level
// counts of the document's other words; the last level takes the tail mass.
std::vector<double> level_distribution(std::span<const Count> other_counts, double m, double pi);

// Sequential draws from the GEM predictive, as when a document is first seated.
std::vector<Level> draw_levels_from_prior(std::size_t n_tokens, const Hyperparams& hyper, Rng& rng);

struct PathOptions {
  bool use_likelihood = true;
  // Restrict candidates to paths whose labelled levels carry the document's
  // labels, reusing an existing labelled child when there is one.
  bool follow_labels = false;
};

struct PathDraw {
  Path path;
  double log_likelihood = 0.0;  // of the document's words on the chosen path
};

// Detaches the document (when `current` is non-empty), scores every
// candidate path by prior mass times collapsed likelihood, draws one and
// reattaches the document along it.
PathDraw sample_path(TopicTree& tree, std::span<const TermId> tokens, std::span<const std::string> labels,
                     const Path& current, std::span<const Level> levels, const Hyperparams& hyper, Rng& rng,
                     PathOptions options = {});

// Resamples every token's level in order, updating counts as it goes.
void sample_levels(TopicTree& tree, std::span<const TermId> tokens, const Path& path, std::span<Level> levels,
                   const Hyperparams& hyper, Rng& rng);

// Sum over nodes of the collapsed log marginal of each node's word counts.
// Node terms are summed in sorted order so the value does not depend on ids
// or traversal order.
double tree_log_likelihood(const TopicTree& tree, std::span<const double> eta);
double node_log_marginal(const TopicNode& node, double eta, std::size_t vocab_size);

}  // namespace thlda
