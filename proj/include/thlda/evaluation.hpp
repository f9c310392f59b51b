#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thlda/corpus.hpp"
#include "thlda/csv.hpp"
#include "thlda/lda.hpp"
#include "thlda/sampler.hpp"
#include "thlda/topic_tree.hpp"

namespace thlda {

double joint_log_likelihood(const SamplerState& state);
double joint_log_likelihood(const LdaState& state);

struct HeldoutProtocol {
  int burn_in = 200;
  int outer_spacing = 100;
  int inner_samples = 800;  // per held-out document

  // Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

// Training iterations at which outer samples are taken: burn_in, burn_in +
// spacing, ... up to `iterations`.
std::vector<int> outer_sample_iterations(const HeldoutProtocol& protocol, int iterations);

// log(S / sum_s exp(-log_p[s])), evaluated with log-sum-exp.
double log_harmonic_mean(std::span<const double> log_p);

struct HeldoutDocument {
  std::string doc_id;
  double log_likelihood = 0.0;  // averaged over outer samples
  Count n_words = 0;            // in-vocabulary tokens scored
  Count n_oov = 0;
};

struct HeldoutResult {
  std::vector<HeldoutDocument> documents;
  double total = 0.0;
};

// Scores each held-out document against frozen copies of the outer samples.
// Terms are matched to `training_vocab` by string; unknown terms are dropped.
// `prior_paths` is empty or holds one path per held-out document.
HeldoutResult heldout_log_likelihood(const std::vector<SamplerState>& outer_samples,
                                     const Vocabulary& training_vocab, const Corpus& heldout,
                                     const HeldoutProtocol& protocol, std::uint64_t seed,
                                     const std::vector<PriorPath>& prior_paths = {});
HeldoutResult heldout_log_likelihood(const std::vector<LdaState>& outer_samples,
                                     const Vocabulary& training_vocab, const Corpus& heldout,
                                     const HeldoutProtocol& protocol, std::uint64_t seed);

CsvTable heldout_table(const HeldoutResult& result);

struct ReportNode {
  NodeId id = kNoNode;
  Level level = 0;
  std::optional<std::string> label;
  Count doc_count = 0;
  std::vector<std::string> top_words;
  std::vector<std::string> examples;
  std::vector<ReportNode> children;
};

// Up to `per_node` document ids (in corpus order) passing through each node.
std::map<NodeId, std::vector<std::string>> example_documents(const SamplerState& state, const Corpus& corpus,
                                                             std::size_t per_node);

// Depth-first, children in tree order; words by count descending, then by
// term index.
ReportNode topic_report(const TopicTree& tree, const Vocabulary& vocab, std::size_t top_n,
                        const std::map<NodeId, std::vector<std::string>>& examples = {});
std::string render_report_text(const ReportNode& report);
std::string render_report_json(const ReportNode& report);

}  // namespace thlda
