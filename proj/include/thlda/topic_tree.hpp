#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "thlda/types.hpp"

namespace thlda {

// Model hyperparameters shared by the tree prior and the Gibbs sampler.
// lambda == 0 is plain hLDA.
struct Hyperparams {
  double gamma = 0.1;                      // new-table mass
  double lambda = 100.0;                   // bonus for the child carrying the document's label
  std::vector<double> eta{1.0, 0.5, 0.25};  // per-level topic Dirichlet
  double m = 0.5;                          // GEM mean
  double pi = 100.0;                       // GEM scale
  int depth = 3;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TopicNode {
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  Level level = 0;
  Count doc_count = 0;
  Count total_words = 0;
  std::unordered_map<TermId, Count> word_counts;
  std::optional<std::string> label;
  std::vector<NodeId> children;
  // Pinned nodes survive reaching zero documents; the parallel engine pins
  // nodes shared between workers.
  bool pinned = false;

  Count word_count(TermId term) const {
    auto it = word_counts.find(term);
    return it == word_counts.end() ? 0 : it->second;
  }
};

// Fixed-depth nested-CRP state. Node 0 is the root. Ids are slot indices and
// are recycled after pruning.
class TopicTree {
 public:
  TopicTree(int depth, std::size_t vocab_size);

  int depth() const noexcept { return depth_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  NodeId root() const noexcept { return 0; }

  bool contains(NodeId id) const noexcept;
  const TopicNode& node(NodeId id) const;
  std::size_t node_count() const noexcept { return live_; }
  // One past the largest id ever handed out; sizes id-indexed scratch arrays.
  std::size_t id_limit() const noexcept { return nodes_.size(); }

  // Pre-order, children in insertion order.
  std::vector<NodeId> node_ids() const;
  // Children with at least one document.
  std::vector<NodeId> visible_children(NodeId id) const;
  Path path_to(NodeId id) const;

  NodeId add_child(NodeId parent, std::optional<std::string> label = std::nullopt);
  // Used when restoring a serialized tree.
  void add_child_with_id(NodeId parent, NodeId id, std::optional<std::string> label);

  // Full path through `terminal`, creating fresh nodes below it. A node
  // created at level l takes labels[l-1] when present.
  Path materialize(NodeId terminal, std::span<const std::string> labels);

  // tokens[i] is routed to path[levels[i]].
  void attach(std::span<const TermId> tokens, std::span<const NodeId> path, std::span<const Level> levels);
  // Exact inverse of attach; unpinned nodes left without documents are
  // removed. Throws ConsistencyError, leaving the tree untouched, when the
  // counts would go negative.
  void detach(std::span<const TermId> tokens, std::span<const NodeId> path, std::span<const Level> levels);

  void adjust_word(NodeId id, TermId term, Count delta);
  void set_counts(NodeId id, Count doc_count, std::unordered_map<TermId, Count> words);
  // Adds another node's counts onto `id`.
  void add_counts(NodeId id, Count doc_count, const std::unordered_map<TermId, Count>& words);
  void set_label(NodeId id, std::optional<std::string> label);
  void set_pinned(NodeId id, bool pinned);
  void pin_all();
  // Removes every non-root node without documents, bottom-up.
  void prune_empty();

  // Same ids, parents, labels and child order; all counts zero.
  TopicTree clone_structure() const;

 private:
  TopicNode& mutable_node(NodeId id);
  void check_path(std::span<const NodeId> path) const;
  void remove_leaf(NodeId id);
  NodeId allocate();

  int depth_;
  std::size_t vocab_size_;
  std::vector<std::optional<TopicNode>> nodes_;
  std::vector<NodeId> free_;
  std::size_t live_ = 0;
};

// Everything but ids compared through the child order.
bool same_shape_and_counts(const TopicTree& a, const TopicTree& b);
// Node-by-node equality including ids.
bool identical(const TopicTree& a, const TopicTree& b);

// Seating probabilities over existing tables plus a trailing new-table slot.
// With n = sum(counts) and k = number of label matches:
//   match:    (n_i + lambda) / (gamma + k*lambda + n)
//   no match:  n_i           / (gamma + k*lambda + n)
//   new:       gamma         / (gamma + k*lambda + n)
std::vector<double> child_prior_distribution(std::span<const Count> counts,
                                             const std::vector<bool>& label_match, double gamma,
                                             double lambda);

struct ChildPrior {
  std::vector<NodeId> children;    // visible children, in order
  std::vector<double> probability;  // children.size() + 1 entries, last is "new"
};

ChildPrior child_prior_distribution(const TopicTree& tree, NodeId node,
                                    const std::optional<std::string>& doc_label, double gamma,
                                    double lambda);

// A root-to-leaf path through existing nodes (terminal at depth-1) or an
// existing prefix ending at `terminal` followed by fresh nodes.
struct PathCandidate {
  NodeId terminal = kNoNode;
  double log_prior = 0.0;
  bool novel = false;
};

// Every existing leaf path and every single-new-branch continuation, with
// its prior mass under the label-weighted nCRP. labels[l] is the document's
// label for the choice among children of a level-l node.
std::vector<PathCandidate> enumerate_paths(const TopicTree& tree, std::span<const std::string> labels,
                                           double gamma, double lambda);

}  // namespace thlda
