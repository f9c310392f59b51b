#include "thlda/evaluation.hpp"

#include "json.hpp"
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "thlda/gibbs.hpp"
#include "thlda/rng.hpp"

namespace thlda {

double joint_log_likelihood(const SamplerState& state) { return tree_log_likelihood(state.tree, state.hyper.eta); }

double joint_log_likelihood(const LdaState& state) { return lda_log_likelihood(state); }

void HeldoutProtocol::validate() const {
  if (burn_in < 1) throw std::invalid_argument("burn_in must be positive");
  if (outer_spacing < 1) throw std::invalid_argument("outer_spacing must be positive");
  if (inner_samples < 1) throw std::invalid_argument("inner_samples must be positive");
}

std::vector<int> outer_sample_iterations(const HeldoutProtocol& protocol, int iterations) {
  protocol.validate();
  std::vector<int> out;
  for (int it = protocol.burn_in; it <= iterations; it += protocol.outer_spacing) out.push_back(it);
  return out;
}

double log_harmonic_mean(std::span<const double> log_p) {
  if (log_p.empty()) throw std::invalid_argument("harmonic mean of zero samples");
  std::vector<double> neg(log_p.size());
  std::transform(log_p.begin(), log_p.end(), neg.begin(), [](double x) { return -x; });
  return std::log(static_cast<double>(log_p.size())) - log_sum_exp(neg);
}

namespace {

struct MappedDocument {
  std::vector<TermId> tokens;  // training-vocabulary ids, grouped by term
  Count n_oov = 0;
};

std::vector<MappedDocument> map_documents(const Vocabulary& training_vocab, const Corpus& heldout) {
  const bool same = &heldout.vocabulary() == &training_vocab || heldout.vocabulary().terms() == training_vocab.terms();
  std::vector<MappedDocument> out(heldout.size());
  Count oov = 0;
  for (std::size_t d = 0; d < heldout.size(); ++d) {
    std::vector<TermCount> kept;
    for (const auto& e : heldout[d].entries) {
      if (same) {
        kept.push_back(e);
        continue;
      }
      auto id = training_vocab.find(heldout.vocabulary().term(e.term));
      if (id) {
        kept.push_back({*id, e.count});
      } else {
        out[d].n_oov += e.count;
      }
    }
    std::sort(kept.begin(), kept.end(), [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
    for (const auto& e : kept) out[d].tokens.insert(out[d].tokens.end(), static_cast<std::size_t>(e.count), e.term);
    oov += out[d].n_oov;
  }
  if (oov > 0) spdlog::info("held-out scoring dropped {} out-of-vocabulary tokens", oov);
  return out;
}

// FNV-1a over the document's content so identical documents share a stream.
std::uint64_t content_hash(const std::vector<TermId>& tokens, const PriorPath& labels) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(tokens.size());
  for (TermId t : tokens) mix(static_cast<std::uint64_t>(t));
  for (const auto& l : labels) {
    mix(l.size());
    for (unsigned char c : l) mix(c);
  }
  return h;
}

Rng document_rng(std::uint64_t seed, std::size_t outer, std::uint64_t hash) {
  return Rng(mix_seed(mix_seed(seed, outer), hash));
}

HeldoutResult finish(const Corpus& heldout, const std::vector<MappedDocument>& docs,
                     const std::vector<std::vector<double>>& scores) {
  HeldoutResult result;
  for (std::size_t d = 0; d < heldout.size(); ++d) {
    double mean = 0.0;
    for (double s : scores[d]) mean += s;
    mean /= static_cast<double>(scores[d].size());
    result.documents.push_back({heldout[d].id, mean, static_cast<Count>(docs[d].tokens.size()), docs[d].n_oov});
    result.total += mean;
  }
  return result;
}

double score_thlda_document(TopicTree& tree, const std::vector<TermId>& tokens, const PriorPath& labels,
                            const Hyperparams& hyper, int inner_samples, Rng& rng) {
  std::vector<Level> levels = draw_levels_from_prior(tokens.size(), hyper, rng);
  Path path = sample_path(tree, tokens, labels, {}, levels, hyper, rng).path;
  std::vector<double> log_p;
  log_p.reserve(static_cast<std::size_t>(inner_samples));
  for (int s = 0; s < inner_samples; ++s) {
    sample_levels(tree, tokens, path, levels, hyper, rng);
    auto draw = sample_path(tree, tokens, labels, path, levels, hyper, rng);
    path = std::move(draw.path);
    log_p.push_back(draw.log_likelihood);
  }
  tree.detach(tokens, path, levels);
  return log_harmonic_mean(log_p);
}

// log p(tokens | z, frozen topic-word counts) as a product of per-topic
// Dirichlet-multinomial predictives.
double lda_document_log_likelihood(const LdaState& frozen, const std::vector<TermId>& tokens,
                                   const std::vector<int>& z) {
  const auto K = static_cast<std::size_t>(frozen.num_topics);
  std::vector<std::map<TermId, Count>> by_topic(K);
  for (std::size_t i = 0; i < tokens.size(); ++i) ++by_topic[static_cast<std::size_t>(z[i])][tokens[i]];
  const double v_eta = static_cast<double>(frozen.vocab_size) * frozen.eta;
  double ll = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    Count n = 0;
    for (const auto& [w, c] : by_topic[k]) {
      const double base = static_cast<double>(frozen.n_kw(static_cast<int>(k), w)) + frozen.eta;
      for (Count j = 0; j < c; ++j) ll += std::log(base + static_cast<double>(j));
      n += c;
    }
    const double base = static_cast<double>(frozen.topic_total[k]) + v_eta;
    for (Count j = 0; j < n; ++j) ll -= std::log(base + static_cast<double>(j));
  }
  return ll;
}

double score_lda_document(const LdaState& frozen, const std::vector<TermId>& tokens, int inner_samples,
                          Rng& rng) {
  const int K = frozen.num_topics;
  const auto Ku = static_cast<std::size_t>(K);
  std::vector<int> z(tokens.size());
  std::vector<Count> dk(Ku, 0);
  // The document's own words join the frozen counts while it is sampled.
  std::map<std::pair<int, TermId>, Count> own_kw;
  std::vector<Count> own_k(Ku, 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    z[i] = static_cast<int>(rng.below(Ku));
    ++dk[static_cast<std::size_t>(z[i])];
    ++own_kw[{z[i], tokens[i]}];
    ++own_k[static_cast<std::size_t>(z[i])];
  }
  std::vector<Count> kw(Ku);
  std::vector<Count> kt(Ku);
  std::vector<double> log_p;
  log_p.reserve(static_cast<std::size_t>(inner_samples));
  for (int s = 0; s < inner_samples; ++s) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const TermId w = tokens[i];
      --dk[static_cast<std::size_t>(z[i])];
      --own_kw[{z[i], w}];
      --own_k[static_cast<std::size_t>(z[i])];
      for (int k = 0; k < K; ++k) {
        auto it = own_kw.find({k, w});
        kw[static_cast<std::size_t>(k)] = frozen.n_kw(k, w) + (it == own_kw.end() ? 0 : it->second);
        kt[static_cast<std::size_t>(k)] = frozen.topic_total[static_cast<std::size_t>(k)] + own_k[static_cast<std::size_t>(k)];
      }
      const auto p = topic_conditional(dk, kw, kt, frozen.alpha, frozen.eta, frozen.vocab_size);
      z[i] = static_cast<int>(rng.categorical(p));
      ++dk[static_cast<std::size_t>(z[i])];
      ++own_kw[{z[i], w}];
      ++own_k[static_cast<std::size_t>(z[i])];
    }
    log_p.push_back(lda_document_log_likelihood(frozen, tokens, z));
  }
  return log_harmonic_mean(log_p);
}

void check_heldout_inputs(std::size_t n_outer, const HeldoutProtocol& protocol) {
  if (protocol.inner_samples < 1) throw std::invalid_argument("inner_samples must be positive");
  if (n_outer == 0) throw std::invalid_argument("held-out scoring needs at least one outer sample");
}

}  // namespace

HeldoutResult heldout_log_likelihood(const std::vector<SamplerState>& outer_samples,
                                     const Vocabulary& training_vocab, const Corpus& heldout,
                                     const HeldoutProtocol& protocol, std::uint64_t seed,
                                     const std::vector<PriorPath>& prior_paths) {
  check_heldout_inputs(outer_samples.size(), protocol);
  if (!prior_paths.empty() && prior_paths.size() != heldout.size()) {
    throw std::invalid_argument("need one prior path per held-out document");
  }
  const auto docs = map_documents(training_vocab, heldout);
  static const PriorPath kNone;
  std::vector<std::vector<double>> scores(heldout.size());
  for (std::size_t o = 0; o < outer_samples.size(); ++o) {
    const auto& sample = outer_samples[o];
    if (sample.tree.vocab_size() != training_vocab.size()) {
      throw std::invalid_argument("outer sample vocabulary size differs from the training vocabulary");
    }
    const bool use_labels = sample.hyper.lambda > 0.0 && !prior_paths.empty();
    TopicTree working = sample.tree;
    for (std::size_t d = 0; d < heldout.size(); ++d) {
      const auto& labels = use_labels ? prior_paths[d] : kNone;
      if (static_cast<int>(labels.size()) > sample.hyper.depth - 1) {
        throw std::invalid_argument("held-out prior path longer than the levels below the root");
      }
      if (docs[d].tokens.empty()) {
        scores[d].push_back(0.0);
        continue;
      }
      Rng rng = document_rng(seed, o, content_hash(docs[d].tokens, labels));
      scores[d].push_back(
          score_thlda_document(working, docs[d].tokens, labels, sample.hyper, protocol.inner_samples, rng));
    }
  }
  return finish(heldout, docs, scores);
}

HeldoutResult heldout_log_likelihood(const std::vector<LdaState>& outer_samples,
                                     const Vocabulary& training_vocab, const Corpus& heldout,
                                     const HeldoutProtocol& protocol, std::uint64_t seed) {
  check_heldout_inputs(outer_samples.size(), protocol);
  const auto docs = map_documents(training_vocab, heldout);
  std::vector<std::vector<double>> scores(heldout.size());
  for (std::size_t o = 0; o < outer_samples.size(); ++o) {
    const auto& sample = outer_samples[o];
    if (sample.vocab_size != training_vocab.size()) {
      throw std::invalid_argument("outer sample vocabulary size differs from the training vocabulary");
    }
    for (std::size_t d = 0; d < heldout.size(); ++d) {
      if (docs[d].tokens.empty()) {
        scores[d].push_back(0.0);
        continue;
      }
      Rng rng = document_rng(seed, o, content_hash(docs[d].tokens, {}));
      scores[d].push_back(score_lda_document(sample, docs[d].tokens, protocol.inner_samples, rng));
    }
  }
  return finish(heldout, docs, scores);
}

CsvTable heldout_table(const HeldoutResult& result) {
  CsvTable t;
  t.header = {"doc_id", "log_likelihood", "n_words", "n_oov"};
  for (const auto& d : result.documents) {
    t.rows.push_back({d.doc_id, d.log_likelihood, std::int64_t{d.n_words}, std::int64_t{d.n_oov}});
  }
  return t;
}

std::map<NodeId, std::vector<std::string>> example_documents(const SamplerState& state, const Corpus& corpus,
                                                             std::size_t per_node) {
  std::map<NodeId, std::vector<std::string>> out;
  for (std::size_t d = 0; d < state.paths.size() && d < corpus.size(); ++d) {
    for (NodeId id : state.paths[d]) {
      auto& list = out[id];
      if (list.size() < per_node) list.push_back(corpus[d].id);
    }
  }
  return out;
}

namespace {

ReportNode build_report(const TopicTree& tree, NodeId id, const Vocabulary& vocab, std::size_t top_n,
                        const std::map<NodeId, std::vector<std::string>>& examples) {
  const auto& n = tree.node(id);
  ReportNode r;
  r.id = id;
  r.level = n.level;
  r.label = n.label;
  r.doc_count = n.doc_count;
  std::vector<std::pair<TermId, Count>> words(n.word_counts.begin(), n.word_counts.end());
  std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (words.size() > top_n) words.resize(top_n);
  for (const auto& [term, count] : words) {
    r.top_words.push_back(static_cast<std::size_t>(term) < vocab.size() ? vocab.term(term) : std::to_string(term));
  }
  if (auto it = examples.find(id); it != examples.end()) r.examples = it->second;
  for (NodeId c : n.children) r.children.push_back(build_report(tree, c, vocab, top_n, examples));
  return r;
}

void render_text(const ReportNode& r, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(r.level) * 2, ' ') << "[" << r.id << "]";
  if (r.label) out << " " << *r.label;
  out << " (docs=" << r.doc_count << "):";
  for (const auto& w : r.top_words) out << " " << w;
  out << "\n";
  if (!r.examples.empty()) {
    out << std::string(static_cast<std::size_t>(r.level) * 2 + 2, ' ') << "e.g.";
    for (const auto& e : r.examples) out << " " << e;
    out << "\n";
  }
  for (const auto& c : r.children) render_text(c, out);
}

nlohmann::ordered_json report_json(const ReportNode& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["level"] = r.level;
  j["label"] = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
  j["n_docs"] = r.doc_count;
  j["top_words"] = r.top_words;
  j["examples"] = r.examples;
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : r.children) j["children"].push_back(report_json(c));
  return j;
}

}  // namespace

ReportNode topic_report(const TopicTree& tree, const Vocabulary& vocab, std::size_t top_n,
                        const std::map<NodeId, std::vector<std::string>>& examples) {
  return build_report(tree, tree.root(), vocab, top_n, examples);
}

std::string render_report_text(const ReportNode& report) {
  std::ostringstream out;
  render_text(report, out);
  return out.str();
}

std::string render_report_json(const ReportNode& report) { return report_json(report).dump(2) + "\n"; }

}  // namespace thlda
