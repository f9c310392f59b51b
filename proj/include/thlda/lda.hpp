#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "thlda/corpus.hpp"
#include "thlda/rng.hpp"
#include "thlda/sampler.hpp"

namespace thlda {

// Flat LDA state with dense count tables.
struct LdaState {
  int num_topics = 0;
  std::size_t vocab_size = 0;
  double alpha = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  int iteration = 0;
  std::vector<std::vector<int>> z;  // per document, aligned with Document::tokens()
  std::vector<Count> doc_topic;     // D x K
  std::vector<Count> topic_word;    // K x V
  std::vector<Count> topic_total;   // K

  Count& n_dk(std::size_t d, int k) { return doc_topic[d * static_cast<std::size_t>(num_topics) + static_cast<std::size_t>(k)]; }
  Count n_dk(std::size_t d, int k) const { return doc_topic[d * static_cast<std::size_t>(num_topics) + static_cast<std::size_t>(k)]; }
  Count& n_kw(int k, TermId w) { return topic_word[static_cast<std::size_t>(k) * vocab_size + static_cast<std::size_t>(w)]; }
  Count n_kw(int k, TermId w) const { return topic_word[static_cast<std::size_t>(k) * vocab_size + static_cast<std::size_t>(w)]; }
};

inline double default_lda_alpha(int num_topics) { return 50.0 / num_topics; }

// p(k) proportional to (n_dk + alpha)(n_kw + eta)/(n_k + V eta), counts
// already excluding the word being resampled.
std::vector<double> topic_conditional(std::span<const Count> doc_topic, std::span<const Count> topic_word,
                                      std::span<const Count> topic_total, double alpha, double eta,
                                      std::size_t vocab_size);

struct LdaOptions {
  int num_topics = 20;
  double alpha = -1.0;  // negative selects 50 / K
  double eta = 0.1;
  int iterations = 100;
  std::uint64_t seed = 1;
  int log_every = 1;
};

// Random initial topics from the seed, then full sweeps.
class LdaSampler {
 public:
  LdaSampler(const Corpus& corpus, const LdaOptions& options);
  void sweep();
  const LdaState& state() const noexcept { return state_; }
  LdaState& mutable_state() noexcept { return state_; }
  Rng& rng() noexcept { return rng_; }

 private:
  std::vector<std::vector<TermId>> tokens_;
  LdaState state_;
  Rng rng_;
};

struct LdaTrainResult {
  LdaState state;
  Trace trace;
};

LdaTrainResult lda_train(const Corpus& corpus, const LdaOptions& options,
                         const std::function<void(const LdaState&)>& on_iteration = {});

// Recomputes every count table from z; throws ConsistencyError on mismatch.
void audit_lda_state(const LdaState& state, const Corpus& corpus);

// Sum over topics of the collapsed log marginal of the topic's word counts.
double lda_log_likelihood(const LdaState& state);

}  // namespace thlda
