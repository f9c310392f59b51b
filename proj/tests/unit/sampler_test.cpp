#include <gtest/gtest.h>

#include "support/synthetic.hpp"
#include "thlda/errors.hpp"
#include "thlda/sampler.hpp"

namespace thlda {
namespace {

using testing::planted_corpus;
using testing::PlantedShape;

PlantedShape small_shape() {
  PlantedShape s;
  s.docs = 40;
  s.doc_length = 15;
  return s;
}

TEST(Train, AuditHoldsAfterEveryIteration) {
  const auto p = planted_corpus(small_shape());
  TrainOptions o;
  o.iterations = 15;
  o.seed = 3;
  int calls = 0;
  o.on_iteration = [&](const SamplerState& s) {
    ++calls;
    audit_state(s, p.corpus);
  };
  const auto r = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  EXPECT_EQ(calls, 15);
  EXPECT_EQ(r.trace.size(), 16u);
  EXPECT_EQ(r.trace.front().iteration, 0);
  EXPECT_EQ(r.trace.back().iteration, 15);
  for (const auto& path : r.state.paths) EXPECT_EQ(path.size(), 3u);
}

TEST(Train, AuditDetectsCorruption) {
  const auto p = planted_corpus(small_shape());
  TrainOptions o;
  o.iterations = 2;
  auto r = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  r.state.tree.adjust_word(r.state.tree.root(), 0, 1);
  EXPECT_THROW(audit_state(r.state, p.corpus), ConsistencyError);
}

TEST(Train, SameSeedSameTrace) {
  const auto p = planted_corpus(small_shape());
  TrainOptions o;
  o.iterations = 10;
  o.seed = 21;
  const auto a = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  const auto b = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.state.paths, b.state.paths);
  EXPECT_EQ(a.state.levels, b.state.levels);
  o.seed = 22;
  const auto c = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  EXPECT_NE(a.trace, c.trace);
}

TEST(Train, ZeroBonusEqualsHldaMode) {
  const auto p = planted_corpus(small_shape());
  Hyperparams h;
  h.lambda = 0.0;
  TrainOptions o;
  o.iterations = 10;
  o.seed = 5;
  const auto zero = train(p.corpus, p.prior_paths, h, o);
  o.hlda_mode = true;
  const auto hlda = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  EXPECT_EQ(zero.trace, hlda.trace);
  EXPECT_EQ(zero.state.paths, hlda.state.paths);
}

TEST(Train, SingleDocumentSingleIteration) {
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::numbered(4));
  Corpus c({Document("only", {{0, 2}, {3, 1}})}, vocab);
  TrainOptions o;
  o.iterations = 1;
  const auto r = train(c, {}, Hyperparams{}, o);
  ASSERT_EQ(r.state.paths.size(), 1u);
  EXPECT_EQ(r.state.tree.node_count(), 3u);
  EXPECT_NO_THROW(audit_state(r.state, c));
}

TEST(Train, ZeroIterationsReturnsInitialisedState) {
  const auto p = planted_corpus(small_shape());
  TrainOptions o;
  o.iterations = 0;
  const auto r = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.state.iteration, 0);
  EXPECT_EQ(r.state.paths.size(), p.corpus.size());
  EXPECT_NO_THROW(audit_state(r.state, p.corpus));
}

TEST(Train, RandomInitAlsoConsistent) {
  const auto p = planted_corpus(small_shape());
  TrainOptions o;
  o.iterations = 3;
  o.init = InitMode::kRandom;
  const auto r = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  EXPECT_NO_THROW(audit_state(r.state, p.corpus));
}

TEST(Train, GuidedInitRoutesAlongLabels) {
  const auto p = planted_corpus(small_shape());
  ThldaSampler s(p.corpus, p.prior_paths, Hyperparams{}, 9);
  s.initialize();
  const auto& st = s.state();
  for (std::size_t d = 0; d < p.corpus.size(); ++d) {
    const auto& path = st.paths[d];
    EXPECT_EQ(st.tree.node(path[1]).label, p.prior_paths[d][0]);
    EXPECT_EQ(st.tree.node(path[2]).label, p.prior_paths[d][1]);
  }
}

TEST(Train, PlantedCorpusRecovered) {
  PlantedShape shape;
  shape.docs = 120;
  const auto p = planted_corpus(shape);
  TrainOptions o;
  o.iterations = 100;
  o.seed = 77;
  const auto r = train(p.corpus, p.prior_paths, Hyperparams{}, o);
  EXPECT_GE(testing::path_purity(r.state, p.truth), 0.9);
}

TEST(CheckedPriorPaths, Validation) {
  EXPECT_TRUE(checked_prior_paths({}, 3, 3).empty());
  EXPECT_THROW(checked_prior_paths({{"a"}}, 3, 3), std::invalid_argument);
  EXPECT_THROW(checked_prior_paths({{"a", "b", "c"}}, 1, 3), std::invalid_argument);
  EXPECT_EQ(checked_prior_paths({{"a"}, {}}, 2, 3).size(), 2u);
}

}  // namespace
}  // namespace thlda
