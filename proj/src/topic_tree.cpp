#include "thlda/topic_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "thlda/errors.hpp"

namespace thlda {

void Hyperparams::validate() const {
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (static_cast<int>(eta.size()) != depth) {
    throw std::invalid_argument("eta needs one value per level");
  }
  for (double e : eta) {
    if (!(e > 0.0)) throw std::invalid_argument("eta values must be positive");
  }
  if (!(m > 0.0 && m < 1.0)) throw std::invalid_argument("m must lie in (0, 1)");
  if (!(pi > 0.0)) throw std::invalid_argument("pi must be positive");
}

TopicTree::TopicTree(int depth, std::size_t vocab_size) : depth_(depth), vocab_size_(vocab_size) {
  if (depth < 1) throw std::invalid_argument("tree depth must be at least 1");
  if (vocab_size == 0) throw std::invalid_argument("tree vocabulary must be non-empty");
  TopicNode root;
  root.id = 0;
  root.pinned = true;
  nodes_.emplace_back(std::move(root));
  live_ = 1;
}

bool TopicTree::contains(NodeId id) const noexcept {
  return id >= 0 && static_cast<std::size_t>(id) < nodes_.size() && nodes_[static_cast<std::size_t>(id)];
}

const TopicNode& TopicTree::node(NodeId id) const {
  if (!contains(id)) throw std::out_of_range("no topic node with id " + std::to_string(id));
  return *nodes_[static_cast<std::size_t>(id)];
}

TopicNode& TopicTree::mutable_node(NodeId id) {
  if (!contains(id)) throw std::out_of_range("no topic node with id " + std::to_string(id));
  return *nodes_[static_cast<std::size_t>(id)];
}

std::vector<NodeId> TopicTree::node_ids() const {
  std::vector<NodeId> out;
  out.reserve(live_);
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    out.push_back(id);
    const auto& ch = node(id).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> TopicTree::visible_children(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId c : node(id).children) {
    if (node(c).doc_count > 0) out.push_back(c);
  }
  return out;
}

Path TopicTree::path_to(NodeId id) const {
  Path p(static_cast<std::size_t>(node(id).level) + 1);
  for (NodeId cur = id; cur != kNoNode; cur = node(cur).parent) {
    p[static_cast<std::size_t>(node(cur).level)] = cur;
  }
  return p;
}

NodeId TopicTree::allocate() {
  if (!free_.empty()) {
    const NodeId id = free_.back();
    free_.pop_back();
    return id;
  }
  nodes_.emplace_back();
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId TopicTree::add_child(NodeId parent, std::optional<std::string> label) {
  const Level level = node(parent).level + 1;
  if (level >= depth_) throw std::invalid_argument("cannot add a child below the leaf level");
  const NodeId id = allocate();
  TopicNode n;
  n.id = id;
  n.parent = parent;
  n.level = level;
  n.label = std::move(label);
  nodes_[static_cast<std::size_t>(id)] = std::move(n);
  mutable_node(parent).children.push_back(id);
  ++live_;
  return id;
}

void TopicTree::add_child_with_id(NodeId parent, NodeId id, std::optional<std::string> label) {
  if (id <= 0) throw std::invalid_argument("child id must be positive");
  if (contains(id)) throw std::invalid_argument("duplicate node id " + std::to_string(id));
  const Level level = node(parent).level + 1;
  if (level >= depth_) throw std::invalid_argument("cannot add a child below the leaf level");
  if (static_cast<std::size_t>(id) >= nodes_.size()) {
    for (auto slot = static_cast<NodeId>(nodes_.size()); slot < id; ++slot) free_.push_back(slot);
    nodes_.resize(static_cast<std::size_t>(id) + 1);
  } else {
    free_.erase(std::remove(free_.begin(), free_.end(), id), free_.end());
  }
  // Lowest free ids are handed out first.
  std::sort(free_.begin(), free_.end(), std::greater<>());
  TopicNode n;
  n.id = id;
  n.parent = parent;
  n.level = level;
  n.label = std::move(label);
  nodes_[static_cast<std::size_t>(id)] = std::move(n);
  mutable_node(parent).children.push_back(id);
  ++live_;
}

Path TopicTree::materialize(NodeId terminal, std::span<const std::string> labels) {
  Path path = path_to(terminal);
  while (static_cast<int>(path.size()) < depth_) {
    const auto level = path.size();
    std::optional<std::string> label;
    if (level - 1 < labels.size()) label = labels[level - 1];
    path.push_back(add_child(path.back(), std::move(label)));
  }
  return path;
}

void TopicTree::check_path(std::span<const NodeId> path) const {
  if (static_cast<int>(path.size()) != depth_) {
    throw std::invalid_argument("path length differs from tree depth");
  }
  for (std::size_t l = 0; l < path.size(); ++l) {
    if (!contains(path[l])) throw std::invalid_argument("path through nonexistent node " + std::to_string(path[l]));
    const auto& n = node(path[l]);
    if (n.level != static_cast<Level>(l)) throw std::invalid_argument("path node at wrong level");
    if (l > 0 && n.parent != path[l - 1]) throw std::invalid_argument("path is not parent-linked");
  }
}

void TopicTree::attach(std::span<const TermId> tokens, std::span<const NodeId> path,
                       std::span<const Level> levels) {
  check_path(path);
  if (tokens.size() != levels.size()) throw std::invalid_argument("one level per token required");
  for (Level l : levels) {
    if (l < 0 || l >= depth_) throw std::invalid_argument("level assignment out of range");
  }
  for (NodeId id : path) ++mutable_node(id).doc_count;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto& n = mutable_node(path[static_cast<std::size_t>(levels[i])]);
    ++n.word_counts[tokens[i]];
    ++n.total_words;
  }
}

void TopicTree::detach(std::span<const TermId> tokens, std::span<const NodeId> path,
                       std::span<const Level> levels) {
  check_path(path);
  if (tokens.size() != levels.size()) throw std::invalid_argument("one level per token required");
  for (NodeId id : path) {
    if (node(id).doc_count < 1) throw ConsistencyError("detach from a node without documents");
  }
  std::size_t done = 0;
  for (; done < tokens.size(); ++done) {
    const Level l = levels[done];
    if (l < 0 || l >= depth_) break;
    auto& n = mutable_node(path[static_cast<std::size_t>(l)]);
    auto it = n.word_counts.find(tokens[done]);
    if (it == n.word_counts.end() || it->second < 1) break;
    if (--it->second == 0) n.word_counts.erase(it);
    --n.total_words;
  }
  if (done != tokens.size()) {
    for (std::size_t i = 0; i < done; ++i) {
      auto& n = mutable_node(path[static_cast<std::size_t>(levels[i])]);
      ++n.word_counts[tokens[i]];
      ++n.total_words;
    }
    throw ConsistencyError("detach would drive a word count below zero");
  }
  for (NodeId id : path) --mutable_node(id).doc_count;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const auto& n = node(*it);
    if (*it == root() || n.pinned || n.doc_count > 0) continue;
    remove_leaf(*it);
  }
}

void TopicTree::remove_leaf(NodeId id) {
  const auto& n = node(id);
  if (!n.children.empty() || n.total_words != 0) {
    throw ConsistencyError("node without documents still holds words or children");
  }
  auto& siblings = mutable_node(n.parent).children;
  siblings.erase(std::find(siblings.begin(), siblings.end(), id));
  nodes_[static_cast<std::size_t>(id)].reset();
  free_.push_back(id);
  --live_;
}

void TopicTree::adjust_word(NodeId id, TermId term, Count delta) {
  auto& n = mutable_node(id);
  auto& c = n.word_counts[term];
  if (c + delta < 0) {
    if (c == 0) n.word_counts.erase(term);
    throw ConsistencyError("word count below zero");
  }
  c += delta;
  n.total_words += delta;
  if (c == 0) n.word_counts.erase(term);
}

void TopicTree::set_counts(NodeId id, Count doc_count, std::unordered_map<TermId, Count> words) {
  if (doc_count < 0) throw ConsistencyError("negative document count");
  auto& n = mutable_node(id);
  Count total = 0;
  for (auto it = words.begin(); it != words.end();) {
    if (it->second < 0) throw ConsistencyError("negative word count");
    total += it->second;
    it = it->second == 0 ? words.erase(it) : std::next(it);
  }
  n.doc_count = doc_count;
  n.word_counts = std::move(words);
  n.total_words = total;
}

void TopicTree::add_counts(NodeId id, Count doc_count, const std::unordered_map<TermId, Count>& words) {
  if (doc_count < 0) throw ConsistencyError("negative document count");
  auto& n = mutable_node(id);
  for (const auto& [term, c] : words) {
    if (c < 0) throw ConsistencyError("negative word count");
    if (c == 0) continue;
    n.word_counts[term] += c;
    n.total_words += c;
  }
  n.doc_count += doc_count;
}

void TopicTree::set_label(NodeId id, std::optional<std::string> label) { mutable_node(id).label = std::move(label); }

void TopicTree::set_pinned(NodeId id, bool pinned) { mutable_node(id).pinned = pinned || id == root(); }

void TopicTree::pin_all() {
  for (auto& slot : nodes_) {
    if (slot) slot->pinned = true;
  }
}

void TopicTree::prune_empty() {
  auto ids = node_ids();
  for (auto it = ids.rbegin(); it != ids.rend(); ++it) {
    if (*it != root() && node(*it).doc_count == 0) remove_leaf(*it);
  }
}

TopicTree TopicTree::clone_structure() const {
  TopicTree copy = *this;
  for (auto& slot : copy.nodes_) {
    if (!slot) continue;
    slot->doc_count = 0;
    slot->total_words = 0;
    slot->word_counts.clear();
  }
  return copy;
}

namespace {

bool same_node_counts(const TopicNode& x, const TopicNode& y) {
  return x.level == y.level && x.doc_count == y.doc_count && x.total_words == y.total_words &&
         x.label == y.label && x.word_counts == y.word_counts;
}

bool same_subtree(const TopicTree& a, NodeId ia, const TopicTree& b, NodeId ib) {
  const auto& x = a.node(ia);
  const auto& y = b.node(ib);
  if (!same_node_counts(x, y) || x.children.size() != y.children.size()) return false;
  for (std::size_t i = 0; i < x.children.size(); ++i) {
    if (!same_subtree(a, x.children[i], b, y.children[i])) return false;
  }
  return true;
}

}  // namespace

bool same_shape_and_counts(const TopicTree& a, const TopicTree& b) {
  return a.depth() == b.depth() && same_subtree(a, a.root(), b, b.root());
}

bool identical(const TopicTree& a, const TopicTree& b) {
  if (a.depth() != b.depth() || a.node_count() != b.node_count()) return false;
  for (NodeId id : a.node_ids()) {
    if (!b.contains(id)) return false;
    const auto& x = a.node(id);
    const auto& y = b.node(id);
    if (!same_node_counts(x, y) || x.parent != y.parent || x.children != y.children) return false;
  }
  return true;
}

std::vector<double> child_prior_distribution(std::span<const Count> counts,
                                             const std::vector<bool>& label_match, double gamma,
                                             double lambda) {
  if (counts.size() != label_match.size()) throw std::invalid_argument("counts and label flags differ in size");
  double n = 0.0;
  double k = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw ConsistencyError("negative table count");
    n += static_cast<double>(counts[i]);
    if (label_match[i]) k += 1.0;
  }
  const double denom = gamma + k * lambda + n;
  std::vector<double> p(counts.size() + 1);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = (static_cast<double>(counts[i]) + (label_match[i] ? lambda : 0.0)) / denom;
  }
  p.back() = gamma / denom;
  return p;
}

ChildPrior child_prior_distribution(const TopicTree& tree, NodeId node,
                                    const std::optional<std::string>& doc_label, double gamma,
                                    double lambda) {
  ChildPrior out;
  out.children = tree.visible_children(node);
  std::vector<Count> counts;
  std::vector<bool> match;
  counts.reserve(out.children.size());
  for (NodeId c : out.children) {
    const auto& child = tree.node(c);
    counts.push_back(child.doc_count);
    match.push_back(doc_label && child.label && *child.label == *doc_label);
  }
  out.probability = child_prior_distribution(counts, match, gamma, lambda);
  return out;
}

std::vector<PathCandidate> enumerate_paths(const TopicTree& tree, std::span<const std::string> labels,
                                           double gamma, double lambda) {
  std::vector<PathCandidate> out;
  const int leaf_level = tree.depth() - 1;
  struct Frame {
    NodeId id;
    double log_prior;
  };
  std::vector<Frame> stack{{tree.root(), 0.0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const auto& n = tree.node(f.id);
    if (n.level == leaf_level) {
      out.push_back({f.id, f.log_prior, false});
      continue;
    }
    std::optional<std::string> label;
    if (static_cast<std::size_t>(n.level) < labels.size()) label = labels[static_cast<std::size_t>(n.level)];
    const auto prior = child_prior_distribution(tree, f.id, label, gamma, lambda);
    out.push_back({f.id, f.log_prior + std::log(prior.probability.back()), true});
    for (std::size_t i = prior.children.size(); i-- > 0;) {
      stack.push_back({prior.children[i], f.log_prior + std::log(prior.probability[i])});
    }
  }
  return out;
}

}  // namespace thlda
