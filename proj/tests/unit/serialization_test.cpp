#include <gtest/gtest.h>

#include "json.hpp"
#include "support/synthetic.hpp"
#include "thlda/errors.hpp"
#include "thlda/serialization.hpp"

namespace thlda {
namespace {

using testing::TempDir;

TEST(Serialization, SamplerCheckpointRoundTrip) {
  testing::PlantedShape shape;
  shape.docs = 30;
  const auto p = testing::planted_corpus(shape);
  TrainOptions o;
  o.iterations = 5;
  o.seed = 2;
  const auto r = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  TempDir dir("ser");
  save_state(r.state, p.corpus, dir / "s.json");
  EXPECT_EQ(checkpoint_format(dir / "s.json"), "thlda");
  const auto back = load_state(dir / "s.json", p.corpus);
  EXPECT_TRUE(identical(r.state.tree, back.tree));
  EXPECT_EQ(back.paths, r.state.paths);
  EXPECT_EQ(back.levels, r.state.levels);
  EXPECT_EQ(back.iteration, 5);
  EXPECT_EQ(back.seed, 2u);
  EXPECT_EQ(back.hyper.eta, r.state.hyper.eta);
  EXPECT_EQ(back.hyper.lambda, r.state.hyper.lambda);
  for (NodeId id : r.state.tree.node_ids()) EXPECT_EQ(back.tree.node(id).label, r.state.tree.node(id).label);
  EXPECT_EQ(state_to_json(back, p.corpus), state_to_json(r.state, p.corpus));
}

TEST(Serialization, CheckpointAgainstWrongCorpusRejected) {
  const auto p = testing::planted_corpus({});
  TrainOptions o;
  o.iterations = 1;
  const auto r = train(p.corpus, {}, Hyperparams{}, o);
  const auto text = state_to_json(r.state, p.corpus);
  testing::PlantedShape other;
  other.docs = 10;
  EXPECT_ANY_THROW(state_from_json(text, testing::planted_corpus(other).corpus));
  EXPECT_ANY_THROW(state_from_json("{not json", p.corpus));
}

TEST(Serialization, LdaCheckpointRoundTrip) {
  const auto p = testing::planted_corpus({});
  LdaOptions o;
  o.num_topics = 5;
  o.iterations = 3;
  const auto r = lda_train(p.corpus, o);
  TempDir dir("ser");
  save_lda_state(r.state, p.corpus, dir / "l.json");
  EXPECT_EQ(checkpoint_format(dir / "l.json"), "lda");
  const auto back = load_lda_state(dir / "l.json", p.corpus);
  EXPECT_EQ(back.z, r.state.z);
  EXPECT_EQ(back.topic_word, r.state.topic_word);
  EXPECT_EQ(back.doc_topic, r.state.doc_topic);
  EXPECT_EQ(back.alpha, r.state.alpha);
}

TEST(Serialization, HierarchyRoundTrip) {
  const auto vocab = Vocabulary(std::vector<std::string>{"a", "b", "c"});
  SourceHierarchy h;
  h.depth = 2;
  h.root.children = {{"x", {{0, 1.5}, {2, 0.25}}, {{"x1", {{0, 2.0}}, {}}}},
                     {"y", {{1, 3.0}}, {{"y1", {{1, 1.0}}, {}}}}};
  const auto back = hierarchy_from_json(hierarchy_to_json(h, vocab), vocab);
  EXPECT_EQ(back.depth, 2);
  ASSERT_EQ(back.root.children.size(), 2u);
  EXPECT_EQ(back.root.children[0].label, "x");
  EXPECT_EQ(back.root.children[0].weights, h.root.children[0].weights);
  EXPECT_EQ(back.root.children[1].children[0].label, "y1");
}

TEST(Serialization, HierarchyWithUnknownTermRejected) {
  const auto vocab = Vocabulary(std::vector<std::string>{"a"});
  const std::string text = R"({"label":"","weights":{},"children":[{"label":"x","weights":{"zz":1.0},"children":[]}]})";
  EXPECT_ANY_THROW(hierarchy_from_json(text, vocab));
}

TEST(Serialization, TreeJsonFields) {
  const auto vocab = Vocabulary(std::vector<std::string>{"a", "b"});
  TopicTree tree(2, 2);
  const Path p = tree.materialize(0, std::vector<std::string>{"lab"});
  const std::vector<TermId> t{0, 1, 1};
  const std::vector<Level> l{0, 1, 1};
  tree.attach(t, p, l);
  const auto j = nlohmann::json::parse(tree_to_json(tree, vocab));
  EXPECT_EQ(j["n_docs"], 1);
  EXPECT_EQ(j["level"], 0);
  ASSERT_EQ(j["children"].size(), 1u);
  EXPECT_EQ(j["children"][0]["label"], "lab");
  EXPECT_EQ(j["children"][0]["top_words"][0][0], "b");
  EXPECT_EQ(j["children"][0]["top_words"][0][1], 2);
}

TEST(Serialization, MissingFileIsIoError) {
  EXPECT_THROW(read_text_file("/nonexistent/nope.json"), IoError);
  EXPECT_THROW(write_text_file("/nonexistent/dir/x.json", "x"), IoError);
}

}  // namespace
}  // namespace thlda
