#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "support/synthetic.hpp"
#include "thlda/errors.hpp"
#include "thlda/source_knowledge.hpp"

namespace thlda {
namespace {

// nasa moon game team launch
std::shared_ptr<const Vocabulary> toy_vocab() {
  return std::make_shared<const Vocabulary>(
      Vocabulary(std::vector<std::string>{"nasa", "moon", "game", "team", "launch"}));
}

struct Toy {
  Corpus corpus;
  std::map<CategoryPath, std::vector<Document>> labeled;
};

Toy toy() {
  Document science("s", {{0, 1}, {1, 1}});
  Document sports("p", {{2, 1}, {3, 1}});
  Toy t{Corpus({science, sports}, toy_vocab()), {}};
  t.labeled[{"science"}] = {science};
  t.labeled[{"sports"}] = {sports};
  return t;
}

SourceHierarchy flat(std::vector<CategoryNode> children) {
  SourceHierarchy h;
  h.root.children = std::move(children);
  h.depth = 1;
  return h;
}

TEST(BuildHierarchy, FlatCategoriesKeepTheirOwnTerms) {
  const auto t = toy();
  const auto h = build_hierarchy(t.labeled, t.corpus, 50);
  EXPECT_EQ(h.depth, 1);
  ASSERT_EQ(h.root.children.size(), 2u);
  const auto& sci = h.root.children[0];
  const auto& spo = h.root.children[1];
  EXPECT_EQ(sci.label, "science");
  EXPECT_EQ(spo.label, "sports");
  ASSERT_EQ(sci.weights.size(), 2u);
  EXPECT_EQ(sci.weights[0].term, 0);
  EXPECT_EQ(sci.weights[1].term, 1);
  EXPECT_NEAR(sci.weights[0].weight, std::log(2.0), 1e-12);
  ASSERT_EQ(spo.weights.size(), 2u);
  EXPECT_EQ(spo.weights[0].term, 2);
  EXPECT_EQ(spo.weights[1].term, 3);
  EXPECT_NO_THROW(validate_hierarchy(h));
}

TEST(BuildHierarchy, TopKOneKeepsHighestWeight) {
  auto t = toy();
  t.labeled[{"science"}] = {Document("s", {{0, 1}, {1, 3}})};
  const auto h = build_hierarchy(t.labeled, t.corpus, 1);
  ASSERT_EQ(h.root.children[0].weights.size(), 1u);
  EXPECT_EQ(h.root.children[0].weights[0].term, 1);
  ASSERT_EQ(h.root.children[1].weights.size(), 1u);
  // Tie between game and team goes to the lower index.
  EXPECT_EQ(h.root.children[1].weights[0].term, 2);
}

TEST(BuildHierarchy, AllZeroIdfGivesEmptyVectorAndZeroSimilarity) {
  auto vocab = toy_vocab();
  Document a("a", {{0, 1}});
  Document b("b", {{0, 2}});
  Corpus c({a, b}, vocab);
  std::map<CategoryPath, std::vector<Document>> labeled{{{"x"}, {a}}, {{"y"}, {b}}};
  const auto h = build_hierarchy(labeled, c, 50);
  EXPECT_TRUE(h.root.children[0].weights.empty());
  EXPECT_EQ(label_document(a, h), (PriorPath{"x"}));
}

TEST(BuildHierarchy, NestedPathsBuildSubtrees) {
  const auto t = toy();
  std::map<CategoryPath, std::vector<Document>> labeled{
      {{"sci", "space"}, {t.corpus[0]}}, {{"sci", "ball"}, {t.corpus[1]}}};
  const auto h = build_hierarchy(labeled, t.corpus, 50);
  EXPECT_EQ(h.depth, 2);
  ASSERT_EQ(h.root.children.size(), 1u);
  const auto& sci = h.root.children[0];
  EXPECT_EQ(sci.weights.size(), 4u);
  ASSERT_EQ(sci.children.size(), 2u);
  EXPECT_EQ(sci.children[0].label, "ball");
  EXPECT_EQ(sci.children[1].label, "space");
}

TEST(BuildHierarchy, Errors) {
  const auto t = toy();
  EXPECT_THROW(build_hierarchy(t.labeled, t.corpus, 0), std::invalid_argument);
  auto empty = t.labeled;
  empty[{"empty"}] = {};
  EXPECT_THROW(build_hierarchy(empty, t.corpus, 5), std::invalid_argument);
  auto ragged = t.labeled;
  ragged[{"science", "deep"}] = {t.corpus[0]};
  EXPECT_THROW(build_hierarchy(ragged, t.corpus, 5), std::invalid_argument);
}

TEST(ValidateHierarchy, RejectsDuplicateSiblingsAndBadWeights) {
  auto h = flat({{"a", {{0, 1.0}}, {}}, {"a", {{1, 1.0}}, {}}});
  EXPECT_THROW(validate_hierarchy(h), std::invalid_argument);
  h = flat({{"a", {{0, 0.0}}, {}}});
  EXPECT_THROW(validate_hierarchy(h), std::invalid_argument);
}

TEST(Cosine, Examples) {
  const std::vector<double> u{1, 2, 0};
  EXPECT_NEAR(cosine_similarity(u, u), 1.0, 1e-15);
  const std::vector<double> a{1, 1, 0}, b{1, 0, 1}, z{0, 0, 0};
  EXPECT_NEAR(cosine_similarity(a, b), 0.5, 1e-15);
  EXPECT_EQ(cosine_similarity(z, b), 0.0);
  const SparseVector sa{{0, 1.0}, {1, 1.0}}, sb{{0, 1.0}, {2, 1.0}};
  EXPECT_NEAR(cosine_similarity(sa, sb), 0.5, 1e-15);
  EXPECT_EQ(cosine_similarity(SparseVector{}, sb), 0.0);
}

TEST(LabelDocument, PicksMostSimilarChild) {
  const auto h = flat({{"science", {{0, 1.0}, {1, 1.0}}, {}}, {"sports", {{2, 1.0}}, {}}});
  const SparseVector doc{{0, 1.0}, {1, 1.0}, {4, 1.0}};
  EXPECT_NEAR(cosine_similarity(doc, h.root.children[0].weights), 2.0 / (std::sqrt(3.0) * std::sqrt(2.0)), 1e-12);
  EXPECT_EQ(label_document(doc, h), (PriorPath{"science"}));
}

TEST(LabelDocument, NoSharedTermsFallsToFirstSibling) {
  SourceHierarchy h;
  h.depth = 2;
  h.root.children = {{"x", {{0, 1.0}}, {{"x1", {{0, 1.0}}, {}}, {"x2", {{1, 1.0}}, {}}}},
                     {"y", {{1, 1.0}}, {{"y1", {{1, 1.0}}, {}}}}};
  const SparseVector doc{{4, 2.0}};
  EXPECT_EQ(label_document(doc, h), (PriorPath{"x", "x1"}));
  EXPECT_TRUE(label_document(doc, h, LabelMode::kTruncateOnZero).empty());
  EXPECT_TRUE(is_hierarchy_path({"x", "x1"}, h));
  EXPECT_FALSE(is_hierarchy_path({"y", "x1"}, h));
}

TEST(LabelDocument, SingleChildChainIsForced) {
  SourceHierarchy h;
  h.depth = 2;
  h.root.children = {{"only", {{0, 1.0}}, {{"leaf", {{1, 1.0}}, {}}}}};
  EXPECT_EQ(label_document(SparseVector{{3, 1.0}}, h), (PriorPath{"only", "leaf"}));
  EXPECT_EQ(label_document(SparseVector{{0, 5.0}}, h), (PriorPath{"only", "leaf"}));
}

TEST(LabelDocument, GreedyDescentStaysUnderChosenParent) {
  SourceHierarchy h;
  h.depth = 2;
  // Under "x" the document's term only matches "x2"; "y1" matches better globally.
  h.root.children = {{"x", {{0, 1.0}}, {{"x1", {{1, 1.0}}, {}}, {"x2", {{2, 1.0}, {3, 5.0}}, {}}}},
                     {"y", {{4, 1.0}}, {{"y1", {{2, 1.0}}, {}}}}};
  EXPECT_EQ(label_document(SparseVector{{0, 1.0}, {2, 1.0}}, h), (PriorPath{"x", "x2"}));
}

TEST(PriorPaths, TsvRoundTripAndAlignment) {
  testing::TempDir dir("paths");
  write_prior_paths({"a", "b", "c"}, {{"x", "y"}, {}, {"z"}}, dir / "p.tsv");
  EXPECT_EQ(testing::read_file(dir / "p.tsv"), "a\tx/y\nb\t\nc\tz\n");
  const auto by_id = read_prior_paths(dir / "p.tsv");
  EXPECT_EQ(by_id.at("a"), (PriorPath{"x", "y"}));
  EXPECT_TRUE(by_id.at("b").empty());
  Corpus c({Document("c", {{0, 1}}), Document("q", {{0, 1}})}, toy_vocab());
  const auto aligned = align_prior_paths(c, by_id);
  EXPECT_EQ(aligned[0], (PriorPath{"z"}));
  EXPECT_TRUE(aligned[1].empty());
}

TEST(PriorPaths, MalformedTsvIsParseError) {
  testing::TempDir dir("paths");
  std::ofstream(dir / "p.tsv") << "a\tx\nno-tab\n";
  try {
    read_prior_paths(dir / "p.tsv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  std::ofstream(dir / "q.tsv") << "a\tx\na\ty\n";
  EXPECT_THROW(read_prior_paths(dir / "q.tsv"), ParseError);
}

TEST(PriorPaths, JoinAndSplit) {
  EXPECT_EQ(join_labels({"a", "b"}), "a/b");
  EXPECT_EQ(split_labels("a/b"), (PriorPath{"a", "b"}));
  EXPECT_TRUE(split_labels("").empty());
  EXPECT_THROW(split_labels("a//b"), std::invalid_argument);
}

}  // namespace
}  // namespace thlda
