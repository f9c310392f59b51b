#include "thlda/lda.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thlda/errors.hpp"

namespace thlda {

std::vector<double> topic_conditional(std::span<const Count> doc_topic, std::span<const Count> topic_word,
                                      std::span<const Count> topic_total, double alpha, double eta,
                                      std::size_t vocab_size) {
  const std::size_t k = doc_topic.size();
  if (k == 0 || topic_word.size() != k || topic_total.size() != k) {
    throw std::invalid_argument("topic_conditional needs K entries in every table");
  }
  if (!(alpha > 0.0) || !(eta > 0.0)) throw std::invalid_argument("alpha and eta must be positive");
  if (vocab_size == 0) throw std::invalid_argument("vocabulary must be non-empty");
  std::vector<double> p(k);
  double total = 0.0;
  const double v_eta = static_cast<double>(vocab_size) * eta;
  for (std::size_t i = 0; i < k; ++i) {
    if (doc_topic[i] < 0 || topic_word[i] < 0 || topic_total[i] < 0) {
      throw std::invalid_argument("negative count in topic_conditional");
    }
    p[i] = (static_cast<double>(doc_topic[i]) + alpha) * (static_cast<double>(topic_word[i]) + eta) /
           (static_cast<double>(topic_total[i]) + v_eta);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

LdaSampler::LdaSampler(const Corpus& corpus, const LdaOptions& options) : rng_(options.seed) {
  if (options.num_topics < 1) throw std::invalid_argument("LDA needs at least one topic");
  if (corpus.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  const double alpha = options.alpha > 0.0 ? options.alpha : default_lda_alpha(options.num_topics);
  if (!(options.eta > 0.0)) throw std::invalid_argument("eta must be positive");
  state_.num_topics = options.num_topics;
  state_.vocab_size = corpus.vocab_size();
  state_.alpha = alpha;
  state_.eta = options.eta;
  state_.seed = options.seed;
  const auto K = static_cast<std::size_t>(options.num_topics);
  state_.doc_topic.assign(corpus.size() * K, 0);
  state_.topic_word.assign(K * state_.vocab_size, 0);
  state_.topic_total.assign(K, 0);
  state_.z.resize(corpus.size());
  tokens_.reserve(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    tokens_.push_back(corpus[d].tokens());
    auto& zd = state_.z[d];
    zd.resize(tokens_[d].size());
    for (std::size_t i = 0; i < zd.size(); ++i) {
      const int k = static_cast<int>(rng_.below(K));
      zd[i] = k;
      ++state_.n_dk(d, k);
      ++state_.n_kw(k, tokens_[d][i]);
      ++state_.topic_total[static_cast<std::size_t>(k)];
    }
  }
}

void LdaSampler::sweep() {
  const int K = state_.num_topics;
  std::vector<Count> dk(static_cast<std::size_t>(K));
  std::vector<Count> kw(static_cast<std::size_t>(K));
  for (std::size_t d = 0; d < tokens_.size(); ++d) {
    for (std::size_t i = 0; i < tokens_[d].size(); ++i) {
      const TermId w = tokens_[d][i];
      int& z = state_.z[d][i];
      --state_.n_dk(d, z);
      --state_.n_kw(z, w);
      --state_.topic_total[static_cast<std::size_t>(z)];
      for (int k = 0; k < K; ++k) {
        dk[static_cast<std::size_t>(k)] = state_.n_dk(d, k);
        kw[static_cast<std::size_t>(k)] = state_.n_kw(k, w);
      }
      const auto p = topic_conditional(dk, kw, state_.topic_total, state_.alpha, state_.eta, state_.vocab_size);
      z = static_cast<int>(rng_.categorical(p));
      ++state_.n_dk(d, z);
      ++state_.n_kw(z, w);
      ++state_.topic_total[static_cast<std::size_t>(z)];
    }
  }
  ++state_.iteration;
}

LdaTrainResult lda_train(const Corpus& corpus, const LdaOptions& options,
                         const std::function<void(const LdaState&)>& on_iteration) {
  if (options.log_every < 1) throw std::invalid_argument("log_every must be at least 1");
  LdaSampler sampler(corpus, options);
  Trace trace;
  trace.push_back({0, lda_log_likelihood(sampler.state())});
  for (int it = 1; it <= options.iterations; ++it) {
    sampler.sweep();
    if (it % options.log_every == 0 || it == options.iterations) {
      trace.push_back({it, lda_log_likelihood(sampler.state())});
    }
    if (on_iteration) on_iteration(sampler.state());
  }
  return {std::move(sampler.mutable_state()), std::move(trace)};
}

void audit_lda_state(const LdaState& state, const Corpus& corpus) {
  const auto K = static_cast<std::size_t>(state.num_topics);
  std::vector<Count> dk(corpus.size() * K, 0);
  std::vector<Count> kw(K * state.vocab_size, 0);
  std::vector<Count> kt(K, 0);
  if (state.z.size() != corpus.size()) throw ConsistencyError("topic assignments do not cover the corpus");
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto tokens = corpus[d].tokens();
    if (tokens.size() != state.z[d].size()) throw ConsistencyError("topic assignment length mismatch");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto k = static_cast<std::size_t>(state.z[d][i]);
      if (k >= K) throw ConsistencyError("topic index out of range");
      ++dk[d * K + k];
      ++kw[k * state.vocab_size + static_cast<std::size_t>(tokens[i])];
      ++kt[k];
    }
  }
  if (dk != state.doc_topic || kw != state.topic_word || kt != state.topic_total) {
    throw ConsistencyError("LDA count tables differ from the assignments");
  }
}

double lda_log_likelihood(const LdaState& state) {
  const double v_eta = static_cast<double>(state.vocab_size) * state.eta;
  const double lg_eta = std::lgamma(state.eta);
  std::vector<double> terms;
  for (int k = 0; k < state.num_topics; ++k) {
    const Count nk = state.topic_total[static_cast<std::size_t>(k)];
    if (nk == 0) continue;
    double ll = std::lgamma(v_eta) - std::lgamma(static_cast<double>(nk) + v_eta);
    for (std::size_t w = 0; w < state.vocab_size; ++w) {
      const Count c = state.n_kw(k, static_cast<TermId>(w));
      if (c > 0) ll += std::lgamma(static_cast<double>(c) + state.eta) - lg_eta;
    }
    terms.push_back(ll);
  }
  // Sorted so relabelling topics cannot change the rounding.
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

}  // namespace thlda
