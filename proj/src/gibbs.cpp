#include "thlda/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "thlda/errors.hpp"

namespace thlda {

std::vector<LevelWords> level_word_counts(std::span<const TermId> tokens, std::span<const Level> levels,
                                          int depth) {
  if (tokens.size() != levels.size()) throw std::invalid_argument("one level per token required");
  std::vector<LevelWords> out(static_cast<std::size_t>(depth));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (levels[i] < 0 || levels[i] >= depth) throw std::invalid_argument("level out of range");
    auto& bucket = out[static_cast<std::size_t>(levels[i])];
    if (!bucket.words.empty() && bucket.words.back().term == tokens[i]) {
      ++bucket.words.back().count;
    } else {
      auto it = std::find_if(bucket.words.begin(), bucket.words.end(),
                             [&](const TermCount& tc) { return tc.term == tokens[i]; });
      if (it != bucket.words.end()) {
        ++it->count;
      } else {
        bucket.words.push_back({tokens[i], 1});
      }
    }
    ++bucket.total;
  }
  return out;
}

double node_log_likelihood(const TopicNode* node, const LevelWords& words, double eta,
                           std::size_t vocab_size) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (words.total == 0) return 0.0;
  double ll = 0.0;
  for (const auto& [term, count] : words.words) {
    const double base = static_cast<double>(node ? node->word_count(term) : 0) + eta;
    for (Count j = 0; j < count; ++j) ll += std::log(base + static_cast<double>(j));
  }
  const double base_total =
      static_cast<double>(node ? node->total_words : 0) + static_cast<double>(vocab_size) * eta;
  for (Count j = 0; j < words.total; ++j) ll -= std::log(base_total + static_cast<double>(j));
  return ll;
}

double path_log_likelihood(const TopicTree& tree, std::span<const LevelWords> words,
                           std::span<const NodeId> path, std::span<const double> eta) {
  if (path.size() != words.size() || eta.size() != words.size()) {
    throw std::invalid_argument("path, words and eta must cover every level");
  }
  double ll = 0.0;
  for (std::size_t l = 0; l < path.size(); ++l) {
    const TopicNode* n = path[l] == kNoNode ? nullptr : &tree.node(path[l]);
    ll += node_log_likelihood(n, words[l], eta[l], tree.vocab_size());
  }
  return ll;
}

std::vector<double> level_distribution(std::span<const Count> other_counts, double m, double pi) {
  if (!(m > 0.0 && m < 1.0)) throw std::invalid_argument("m must lie in (0, 1)");
  if (!(pi > 0.0)) throw std::invalid_argument("pi must be positive");
  const std::size_t depth = other_counts.size();
  if (depth == 0) throw std::invalid_argument("at least one level required");
  std::vector<double> at_or_below(depth + 1, 0.0);
  for (std::size_t l = depth; l-- > 0;) {
    at_or_below[l] = at_or_below[l + 1] + static_cast<double>(other_counts[l]);
  }
  std::vector<double> p(depth);
  double remaining = 1.0;
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    const double denom = pi + at_or_below[l];
    p[l] = remaining * (m * pi + static_cast<double>(other_counts[l])) / denom;
    remaining *= ((1.0 - m) * pi + at_or_below[l + 1]) / denom;
  }
  p[depth - 1] = remaining;
  return p;
}

std::vector<Level> draw_levels_from_prior(std::size_t n_tokens, const Hyperparams& hyper, Rng& rng) {
  std::vector<Count> counts(static_cast<std::size_t>(hyper.depth), 0);
  std::vector<Level> levels(n_tokens, 0);
  for (auto& l : levels) {
    const auto p = level_distribution(counts, hyper.m, hyper.pi);
    l = static_cast<Level>(rng.categorical(p));
    ++counts[static_cast<std::size_t>(l)];
  }
  return levels;
}

namespace {

// Whether `cand` keeps the document on its labelled route.
bool follows_labels(const TopicTree& tree, const PathCandidate& cand, std::span<const std::string> labels) {
  const Path prefix = tree.path_to(cand.terminal);
  const std::size_t last = prefix.size() - 1;
  for (std::size_t l = 1; l <= last && l <= labels.size(); ++l) {
    const auto& lab = tree.node(prefix[l]).label;
    if (!lab || *lab != labels[l - 1]) return false;
  }
  if (cand.novel && last < labels.size()) {
    for (NodeId c : tree.visible_children(cand.terminal)) {
      const auto& lab = tree.node(c).label;
      if (lab && *lab == labels[last]) return false;
    }
  }
  return true;
}

}  // namespace

PathDraw sample_path(TopicTree& tree, std::span<const TermId> tokens, std::span<const std::string> labels,
                     const Path& current, std::span<const Level> levels, const Hyperparams& hyper, Rng& rng,
                     PathOptions options) {
  if (!current.empty()) tree.detach(tokens, current, levels);
  const int depth = tree.depth();
  const auto words = level_word_counts(tokens, levels, depth);
  auto candidates = enumerate_paths(tree, labels, hyper.gamma, hyper.lambda);
  if (options.follow_labels && !labels.empty()) {
    std::erase_if(candidates, [&](const PathCandidate& c) { return !follows_labels(tree, c, labels); });
  }

  // Likelihood of a fresh subtree from level l down, and memoised
  // likelihood of each existing prefix.
  std::vector<double> fresh_from(static_cast<std::size_t>(depth) + 1, 0.0);
  for (int l = depth - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    fresh_from[li] = fresh_from[li + 1] + node_log_likelihood(nullptr, words[li], hyper.eta[li], tree.vocab_size());
  }
  constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> prefix_ll(tree.id_limit(), kUnset);
  auto prefix = [&](auto&& self, NodeId id) -> double {
    auto& slot = prefix_ll[static_cast<std::size_t>(id)];
    if (!std::isnan(slot)) return slot;
    const auto& n = tree.node(id);
    const double up = n.parent == kNoNode ? 0.0 : self(self, n.parent);
    const auto li = static_cast<std::size_t>(n.level);
    slot = up + node_log_likelihood(&n, words[li], hyper.eta[li], tree.vocab_size());
    return slot;
  };

  std::vector<double> log_lik(candidates.size());
  std::vector<double> log_weight(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto below = static_cast<std::size_t>(tree.node(c.terminal).level) + 1;
    log_lik[i] = prefix(prefix, c.terminal) + fresh_from[below];
    log_weight[i] = c.log_prior + (options.use_likelihood ? log_lik[i] : 0.0);
  }
  const std::size_t pick = rng.categorical_log(log_weight);
  PathDraw draw;
  draw.path = tree.materialize(candidates[pick].terminal, labels);
  draw.log_likelihood = log_lik[pick];
  tree.attach(tokens, draw.path, levels);
  return draw;
}

void sample_levels(TopicTree& tree, std::span<const TermId> tokens, const Path& path, std::span<Level> levels,
                   const Hyperparams& hyper, Rng& rng) {
  const auto depth = static_cast<std::size_t>(tree.depth());
  if (path.size() != depth) throw std::invalid_argument("path length differs from tree depth");
  if (tokens.size() != levels.size()) throw std::invalid_argument("one level per token required");
  std::vector<Count> counts(depth, 0);
  for (Level l : levels) ++counts[static_cast<std::size_t>(l)];
  std::vector<const TopicNode*> nodes(depth);
  for (std::size_t l = 0; l < depth; ++l) nodes[l] = &tree.node(path[l]);
  const double v = static_cast<double>(tree.vocab_size());
  std::vector<double> weight(depth);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TermId w = tokens[i];
    auto old = static_cast<std::size_t>(levels[i]);
    tree.adjust_word(path[old], w, -1);
    --counts[old];
    const auto prior = level_distribution(counts, hyper.m, hyper.pi);
    for (std::size_t l = 0; l < depth; ++l) {
      const double eta = hyper.eta[l];
      weight[l] = prior[l] * (static_cast<double>(nodes[l]->word_count(w)) + eta) /
                  (static_cast<double>(nodes[l]->total_words) + v * eta);
    }
    const auto fresh = rng.categorical(weight);
    levels[i] = static_cast<Level>(fresh);
    tree.adjust_word(path[fresh], w, +1);
    ++counts[fresh];
  }
}

double node_log_marginal(const TopicNode& node, double eta, std::size_t vocab_size) {
  if (node.total_words == 0) return 0.0;
  std::vector<std::pair<TermId, Count>> entries(node.word_counts.begin(), node.word_counts.end());
  std::sort(entries.begin(), entries.end());
  const double v_eta = static_cast<double>(vocab_size) * eta;
  const double lg_eta = std::lgamma(eta);
  double ll = std::lgamma(v_eta) - std::lgamma(static_cast<double>(node.total_words) + v_eta);
  for (const auto& [term, count] : entries) ll += std::lgamma(static_cast<double>(count) + eta) - lg_eta;
  return ll;
}

double tree_log_likelihood(const TopicTree& tree, std::span<const double> eta) {
  std::vector<double> terms;
  terms.reserve(tree.node_count());
  for (NodeId id : tree.node_ids()) {
    const auto& n = tree.node(id);
    if (n.total_words == 0) continue;
    terms.push_back(node_log_marginal(n, eta[static_cast<std::size_t>(n.level)], tree.vocab_size()));
  }
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

}  // namespace thlda
