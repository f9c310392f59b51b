#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "thlda/errors.hpp"
#include "thlda/rng.hpp"
#include "thlda/topic_tree.hpp"

namespace thlda {
namespace {

std::vector<bool> flags(std::initializer_list<int> v) {
  std::vector<bool> out;
  for (int x : v) out.push_back(x != 0);
  return out;
}

TEST(ChildPrior, LabelledChildGetsBonus) {
  const std::vector<Count> counts{3, 2};
  const auto p = child_prior_distribution(counts, flags({1, 0}), 0.5, 2.0);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[0], 5.0 / 7.5, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 7.5, 1e-15);
  EXPECT_NEAR(p[2], 0.5 / 7.5, 1e-15);
}

TEST(ChildPrior, ZeroBonusIsStandardRestaurant) {
  const std::vector<Count> counts{3, 2};
  const auto p = child_prior_distribution(counts, flags({1, 0}), 0.5, 0.0);
  EXPECT_EQ(p[0], 3.0 / 5.5);
  EXPECT_EQ(p[1], 2.0 / 5.5);
  EXPECT_EQ(p[2], 0.5 / 5.5);
}

TEST(ChildPrior, EmptyRestaurant) {
  const auto p = child_prior_distribution(std::span<const Count>{}, {}, 1.3, 4.0);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], 1.0);
}

TEST(ChildPrior, NegativeCountPanics) {
  const std::vector<Count> counts{-1};
  EXPECT_THROW(child_prior_distribution(counts, flags({0}), 1.0, 0.0), ConsistencyError);
}

TEST(ChildPrior, PropertySumsToOne) {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const auto k = rng.below(6);
    std::vector<Count> counts;
    std::vector<bool> match;
    for (std::size_t i = 0; i < k; ++i) {
      counts.push_back(static_cast<Count>(rng.below(50)));
      match.push_back(rng.uniform() < 0.3);
    }
    const auto p = child_prior_distribution(counts, match, 0.01 + rng.uniform() * 3, rng.uniform() * 30);
    double s = 0.0;
    for (double x : p) {
      ASSERT_GE(x, 0.0);
      s += x;
    }
    ASSERT_NEAR(s, 1.0, 1e-12);
  }
}

// r -> a -> b, depth 3.
struct Chain {
  TopicTree tree{3, 5};
  NodeId a, b;
  Chain() {
    a = tree.add_child(tree.root());
    b = tree.add_child(a);
  }
};

TEST(TopicTree, AttachCountsByLevel) {
  Chain c;
  const std::vector<TermId> tokens{0, 1, 2, 3};
  const std::vector<Level> levels{0, 0, 1, 2};
  const Path path{c.tree.root(), c.a, c.b};
  c.tree.attach(tokens, path, levels);
  EXPECT_EQ(c.tree.node(0).total_words, 2);
  EXPECT_EQ(c.tree.node(c.a).total_words, 1);
  EXPECT_EQ(c.tree.node(c.b).total_words, 1);
  EXPECT_EQ(c.tree.node(c.a).word_count(2), 1);
  for (NodeId id : path) EXPECT_EQ(c.tree.node(id).doc_count, 1);
  c.tree.attach(tokens, path, levels);
  for (NodeId id : path) EXPECT_EQ(c.tree.node(id).doc_count, 2);
}

TEST(TopicTree, AttachThenDetachRestoresCounts) {
  Chain c;
  const Path path{0, c.a, c.b};
  const std::vector<TermId> t1{0, 0, 4};
  const std::vector<Level> l1{0, 2, 1};
  c.tree.attach(t1, path, l1);
  const TopicTree before = c.tree;
  const std::vector<TermId> t2{1, 2};
  const std::vector<Level> l2{1, 1};
  c.tree.attach(t2, path, l2);
  c.tree.detach(t2, path, l2);
  EXPECT_TRUE(identical(before, c.tree));
}

TEST(TopicTree, DetachSoleDocumentPrunesToRoot) {
  Chain c;
  const Path path{0, c.a, c.b};
  const std::vector<TermId> t{0, 1};
  const std::vector<Level> l{0, 2};
  c.tree.attach(t, path, l);
  c.tree.detach(t, path, l);
  EXPECT_EQ(c.tree.node_count(), 1u);
  EXPECT_EQ(c.tree.node(0).doc_count, 0);
}

TEST(TopicTree, AttachAAttachBDetachAEqualsOnlyB) {
  TopicTree tree(2, 4);
  const Path pa = tree.materialize(tree.root(), {});
  const Path pb = tree.materialize(tree.root(), {});
  const std::vector<TermId> ta{0, 1, 1};
  const std::vector<Level> la{0, 1, 1};
  const std::vector<TermId> tb{2, 3};
  const std::vector<Level> lb{1, 0};
  tree.attach(ta, pa, la);
  tree.attach(tb, pb, lb);
  tree.detach(ta, pa, la);

  TopicTree fresh(2, 4);
  const Path pf = fresh.materialize(fresh.root(), {});
  fresh.attach(tb, pf, lb);
  EXPECT_TRUE(same_shape_and_counts(tree, fresh));
}

TEST(TopicTree, DetachUnattachedDocumentPanicsAndLeavesTreeUntouched) {
  Chain c;
  const Path path{0, c.a, c.b};
  const std::vector<TermId> t{0};
  const std::vector<Level> l{1};
  c.tree.attach(t, path, l);
  const TopicTree before = c.tree;
  const std::vector<TermId> other{3};
  EXPECT_THROW(c.tree.detach(other, path, l), ConsistencyError);
  EXPECT_TRUE(identical(before, c.tree));
}

TEST(TopicTree, BadPathsRejected) {
  Chain c;
  const std::vector<TermId> t{0};
  const std::vector<Level> l{0};
  EXPECT_THROW(c.tree.attach(t, Path{0, c.a, 99}, l), std::invalid_argument);
  EXPECT_THROW(c.tree.attach(t, Path{0, c.a}, l), std::invalid_argument);
  EXPECT_THROW(c.tree.attach(t, Path{0, c.b, c.a}, l), std::invalid_argument);
  EXPECT_THROW(c.tree.add_child(c.b), std::invalid_argument);
}

TEST(TopicTree, MaterializeAssignsLabelsToNewNodes) {
  TopicTree tree(3, 2);
  const std::vector<std::string> labels{"x", "y"};
  const Path p = tree.materialize(tree.root(), labels);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(tree.node(p[1]).label, "x");
  EXPECT_EQ(tree.node(p[2]).label, "y");
  const std::vector<std::string> short_labels{"z"};
  const Path q = tree.materialize(p[1], short_labels);
  EXPECT_EQ(q[1], p[1]);
  EXPECT_FALSE(tree.node(q[2]).label.has_value());
}

TEST(TopicTree, PinnedNodesSurviveEmpty) {
  Chain c;
  c.tree.set_pinned(c.a, true);
  const Path path{0, c.a, c.b};
  const std::vector<TermId> t{0};
  const std::vector<Level> l{2};
  c.tree.attach(t, path, l);
  c.tree.detach(t, path, l);
  EXPECT_TRUE(c.tree.contains(c.a));
  EXPECT_FALSE(c.tree.contains(c.b));
  EXPECT_TRUE(c.tree.visible_children(0).empty());
  c.tree.set_pinned(c.a, false);
  c.tree.prune_empty();
  EXPECT_EQ(c.tree.node_count(), 1u);
}

TEST(TopicTree, CloneStructureKeepsShapeDropsCounts) {
  Chain c;
  c.tree.set_label(c.a, "lab");
  const std::vector<TermId> t{0, 1};
  const std::vector<Level> l{0, 1};
  c.tree.attach(t, Path{0, c.a, c.b}, l);
  const TopicTree s = c.tree.clone_structure();
  EXPECT_EQ(s.node_ids(), c.tree.node_ids());
  EXPECT_EQ(s.node(c.a).label, "lab");
  EXPECT_EQ(s.node(c.a).doc_count, 0);
  EXPECT_EQ(s.node(0).total_words, 0);
}

TEST(EnumeratePaths, RootOnlyHasOneNovelPath) {
  TopicTree tree(3, 2);
  const auto c = enumerate_paths(tree, {}, 1.0, 0.0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_TRUE(c[0].novel);
  EXPECT_EQ(c[0].terminal, tree.root());
  EXPECT_NEAR(c[0].log_prior, 0.0, 1e-15);
}

double total_mass(const std::vector<PathCandidate>& c) {
  double s = 0.0;
  for (const auto& x : c) s += std::exp(x.log_prior);
  return s;
}

TEST(EnumeratePaths, OneFullPathDepthTwo) {
  TopicTree tree(2, 2);
  const Path p = tree.materialize(tree.root(), {});
  const std::vector<TermId> t{0};
  const std::vector<Level> l{1};
  tree.attach(t, p, l);
  const auto c = enumerate_paths(tree, {}, 0.5, 0.0);
  ASSERT_EQ(c.size(), 2u);
  int novel = 0;
  for (const auto& x : c) novel += x.novel;
  EXPECT_EQ(novel, 1);
  EXPECT_NEAR(total_mass(c), 1.0, 1e-12);
}

TEST(EnumeratePaths, TwoLeafSiblings) {
  TopicTree tree(3, 2);
  const Path p1 = tree.materialize(tree.root(), {});
  const Path p2 = tree.materialize(p1[1], {});
  const std::vector<TermId> t{0};
  const std::vector<Level> l{2};
  tree.attach(t, p1, l);
  tree.attach(t, p2, l);
  const std::vector<std::string> labels{"x"};
  const auto c = enumerate_paths(tree, labels, 1.0, 2.0);
  ASSERT_EQ(c.size(), 4u);
  int existing = 0, novel = 0;
  for (const auto& x : c) (x.novel ? novel : existing)++;
  EXPECT_EQ(existing, 2);
  EXPECT_EQ(novel, 2);
  // Hand: root has one child (n=2), which has two leaves (n=1 each), gamma=1.
  // existing: (2/3)(1/3) each; new leaf: (2/3)(1/3); new branch: 1/3.
  for (const auto& x : c) {
    const double expect = x.novel ? (x.terminal == tree.root() ? 1.0 / 3.0 : 2.0 / 9.0) : 2.0 / 9.0;
    EXPECT_NEAR(std::exp(x.log_prior), expect, 1e-12);
  }
  EXPECT_NEAR(total_mass(c), 1.0, 1e-12);
}

TEST(EnumeratePaths, PropertyMassSumsToOneOnRandomTrees) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    TopicTree tree(3, 3);
    const int docs = 1 + static_cast<int>(rng.below(10));
    for (int d = 0; d < docs; ++d) {
      const auto existing = tree.node_ids();
      NodeId start = existing[rng.below(existing.size())];
      if (tree.node(start).level == 2) start = tree.node(start).parent;
      const std::vector<std::string> labels{rng.uniform() < 0.5 ? "a" : "b"};
      const Path p = tree.materialize(start, labels);
      const std::vector<TermId> t{0};
      const std::vector<Level> l{0};
      tree.attach(t, p, l);
    }
    const std::vector<std::string> labels{"a", "c"};
    ASSERT_NEAR(total_mass(enumerate_paths(tree, labels, 0.3, 5.0)), 1.0, 1e-12);
  }
}

TEST(Hyperparams, Validation) {
  Hyperparams h;
  EXPECT_NO_THROW(h.validate());
  h.depth = 0;
  EXPECT_THROW(h.validate(), std::invalid_argument);
  h = Hyperparams{};
  h.gamma = 0.0;
  EXPECT_THROW(h.validate(), std::invalid_argument);
  h = Hyperparams{};
  h.eta = {1.0, 0.5};
  EXPECT_THROW(h.validate(), std::invalid_argument);
  h = Hyperparams{};
  h.m = 1.0;
  EXPECT_THROW(h.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace thlda
