#include <gtest/gtest.h>

#include <cmath>

#include "support/synthetic.hpp"
#include "thlda/evaluation.hpp"
#include "thlda/lda.hpp"
#include "thlda/sampler.hpp"

namespace thlda {
namespace {

TEST(HarmonicMean, Examples) {
  const std::vector<double> two{-1.0, -3.0};
  EXPECT_NEAR(log_harmonic_mean(two), std::log(2.0 / (std::exp(1.0) + std::exp(3.0))), 1e-12);
  EXPECT_NEAR(log_harmonic_mean(two), -2.434, 1e-3);
  const std::vector<double> same(50, -7.25);
  EXPECT_NEAR(log_harmonic_mean(same), -7.25, 1e-12);
  EXPECT_THROW(log_harmonic_mean(std::vector<double>{}), std::invalid_argument);
}

TEST(HarmonicMean, NoUnderflowOnLongDocuments) {
  // Log likelihoods of 10^4-word documents are around -10^5.
  std::vector<double> lp;
  for (int i = 0; i < 800; ++i) lp.push_back(-1.0e5 - 0.01 * i);
  const double v = log_harmonic_mean(lp);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LE(v, -1.0e5);
  EXPECT_GE(v, -1.0e5 - 8.0);
}

TEST(Protocol, OuterIterationsAndValidation) {
  HeldoutProtocol p{200, 100, 800};
  EXPECT_EQ(outer_sample_iterations(p, 500), (std::vector<int>{200, 300, 400, 500}));
  EXPECT_TRUE(outer_sample_iterations(p, 150).empty());
  HeldoutProtocol bad{200, 100, 0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

struct Fixture {
  testing::PlantedCorpus planted;
  Corpus heldout;
  std::vector<SamplerState> samples;
  std::vector<LdaState> lda;

  Fixture() {
    testing::PlantedShape shape;
    shape.docs = 60;
    shape.doc_length = 10;
    planted = testing::planted_corpus(shape);
    const auto& d = planted.corpus.documents();
    heldout = Corpus({d[0], d[1], d[2]}, planted.corpus.vocabulary_ptr());
    TrainOptions o;
    o.iterations = 20;
    o.seed = 3;
    o.on_iteration = [&](const SamplerState& s) {
      if (s.iteration % 10 == 0) samples.push_back(s);
    };
    train(planted.corpus, planted.prior_paths, Hyperparams{}, o);
    LdaOptions lo;
    lo.num_topics = 4;
    lo.iterations = 20;
    lda_train(planted.corpus, lo, [&](const LdaState& s) {
      if (s.iteration % 10 == 0) lda.push_back(s);
    });
  }
};

const HeldoutProtocol kQuick{10, 10, 20};

TEST(Heldout, DeterministicAndFinite) {
  Fixture f;
  const auto a = heldout_log_likelihood(f.samples, f.planted.corpus.vocabulary(), f.heldout, kQuick, 5);
  const auto b = heldout_log_likelihood(f.samples, f.planted.corpus.vocabulary(), f.heldout, kQuick, 5);
  ASSERT_EQ(a.documents.size(), 3u);
  EXPECT_EQ(a.total, b.total);
  double sum = 0.0;
  for (const auto& d : a.documents) {
    EXPECT_TRUE(std::isfinite(d.log_likelihood));
    EXPECT_LT(d.log_likelihood, 0.0);
    sum += d.log_likelihood;
  }
  EXPECT_NEAR(a.total, sum, 1e-9);
  const auto l = heldout_log_likelihood(f.lda, f.planted.corpus.vocabulary(), f.heldout, kQuick, 5);
  EXPECT_TRUE(std::isfinite(l.total));
}

TEST(Heldout, DuplicatedDocumentDoublesTotal) {
  Fixture f;
  const auto& d = f.planted.corpus.documents();
  Corpus once({d[4]}, f.planted.corpus.vocabulary_ptr());
  Document copy = d[4];
  copy.id = "copy";
  Corpus twice({d[4], copy}, f.planted.corpus.vocabulary_ptr());
  const auto& vocab = f.planted.corpus.vocabulary();
  EXPECT_EQ(2.0 * heldout_log_likelihood(f.samples, vocab, once, kQuick, 8).total,
            heldout_log_likelihood(f.samples, vocab, twice, kQuick, 8).total);
  EXPECT_EQ(2.0 * heldout_log_likelihood(f.lda, vocab, once, kQuick, 8).total,
            heldout_log_likelihood(f.lda, vocab, twice, kQuick, 8).total);
}

TEST(Heldout, OutOfVocabularyTermsDropped) {
  Fixture f;
  const auto& train_vocab = f.planted.corpus.vocabulary();
  auto terms = train_vocab.terms();
  terms.push_back("unseen");
  auto wider = std::make_shared<const Vocabulary>(Vocabulary(terms));
  const TermId unseen = static_cast<TermId>(terms.size() - 1);
  Corpus h({Document("h", {{0, 2}, {unseen, 3}}), Document("oov", {{unseen, 1}})}, wider);
  const auto r = heldout_log_likelihood(f.samples, train_vocab, h, kQuick, 1);
  EXPECT_EQ(r.documents[0].n_words, 2);
  EXPECT_EQ(r.documents[0].n_oov, 3);
  EXPECT_EQ(r.documents[1].n_words, 0);
  EXPECT_EQ(r.documents[1].log_likelihood, 0.0);
  const auto t = heldout_table(r);
  EXPECT_EQ(t.header, (std::vector<std::string>{"doc_id", "log_likelihood", "n_words", "n_oov"}));
}

TEST(Heldout, Errors) {
  Fixture f;
  const auto& vocab = f.planted.corpus.vocabulary();
  EXPECT_THROW(heldout_log_likelihood(std::vector<SamplerState>{}, vocab, f.heldout, kQuick, 1),
               std::invalid_argument);
  EXPECT_THROW(heldout_log_likelihood(f.samples, vocab, f.heldout, HeldoutProtocol{1, 1, 0}, 1),
               std::invalid_argument);
}

TEST(JointLikelihood, MatchesTreeSum) {
  Fixture f;
  const auto& s = f.samples.back();
  EXPECT_EQ(joint_log_likelihood(s), tree_log_likelihood(s.tree, s.hyper.eta));
  EXPECT_EQ(joint_log_likelihood(f.lda.back()), lda_log_likelihood(f.lda.back()));
}

TEST(TopicReport, SortsByCountThenIndex) {
  auto vocab = Vocabulary(std::vector<std::string>{"space", "nasa", "moon", "zzz"});
  TopicTree tree(1, 4);
  tree.adjust_word(0, 2, 5);
  tree.adjust_word(0, 1, 3);
  tree.adjust_word(0, 0, 1);
  const auto r = topic_report(tree, vocab, 2);
  EXPECT_EQ(r.top_words, (std::vector<std::string>{"moon", "nasa"}));
  EXPECT_NE(render_report_text(r).find("moon nasa"), std::string::npos);
  const auto all = topic_report(tree, vocab, 10);
  EXPECT_EQ(all.top_words, (std::vector<std::string>{"moon", "nasa", "space"}));
  tree.adjust_word(0, 3, 1);
  EXPECT_EQ(topic_report(tree, vocab, 10).top_words, (std::vector<std::string>{"moon", "nasa", "space", "zzz"}));
}

TEST(TopicReport, RootOnlyTreeAndExamples) {
  const auto vocab = Vocabulary::numbered(3);
  TopicTree tree(3, 3);
  const auto r = topic_report(tree, vocab, 5);
  EXPECT_TRUE(r.children.empty());
  EXPECT_TRUE(r.top_words.empty());
  EXPECT_FALSE(render_report_text(r).empty());
  EXPECT_FALSE(render_report_json(r).empty());

  Fixture f;
  const auto& s = f.samples.back();
  const auto ex = example_documents(s, f.planted.corpus, 2);
  EXPECT_EQ(ex.at(s.tree.root()), (std::vector<std::string>{"0", "1"}));
  const auto full = topic_report(s.tree, f.planted.corpus.vocabulary(), 3, ex);
  EXPECT_EQ(full.examples.size(), 2u);
  EXPECT_EQ(full.doc_count, 60);
  EXPECT_EQ(render_report_text(full), render_report_text(topic_report(s.tree, f.planted.corpus.vocabulary(), 3, ex)));
}

}  // namespace
}  // namespace thlda
