#include "thlda/app.hpp"

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <memory>

#include "thlda/corpus.hpp"
#include "thlda/csv.hpp"
#include "thlda/errors.hpp"
#include "thlda/evaluation.hpp"
#include "thlda/lda.hpp"
#include "thlda/parallel.hpp"
#include "thlda/sampler.hpp"
#include "thlda/serialization.hpp"
#include "thlda/source_knowledge.hpp"

namespace thlda {

namespace fs = std::filesystem;

namespace {

CsvTable trace_table(const Trace& trace) {
  CsvTable t;
  t.header = {"iteration", "joint_log_likelihood"};
  for (const auto& e : trace) t.rows.push_back({std::int64_t{e.iteration}, e.joint_log_likelihood});
  return t;
}

std::string checkpoint_name(int iteration) { return "checkpoint_" + std::to_string(iteration) + ".json"; }

struct Inputs {
  std::shared_ptr<const Vocabulary> vocab;
  Corpus corpus;
};

Inputs load_inputs(const RunConfig& c) {
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::load(c.vocab));
  return {vocab, load_corpus(c.corpus, vocab)};
}

SourceHierarchy obtain_hierarchy(const RunConfig& c, const Vocabulary& vocab,
                                 const std::shared_ptr<const Vocabulary>& vocab_ptr) {
  if (!c.hierarchy.empty()) return load_hierarchy(c.hierarchy, vocab);
  const Corpus source = load_corpus(c.source_corpus, vocab_ptr);
  const auto labels = read_prior_paths(c.source_labels);
  std::map<CategoryPath, std::vector<Document>> grouped;
  std::size_t unlabeled = 0;
  for (const auto& doc : source.documents()) {
    auto it = labels.find(doc.id);
    if (it == labels.end() || it->second.empty()) {
      ++unlabeled;
      continue;
    }
    grouped[it->second].push_back(doc);
  }
  if (unlabeled > 0) spdlog::warn("label: {} source documents have no category and are skipped", unlabeled);
  return build_hierarchy(grouped, source, c.top_k);
}

std::vector<PriorPath> label_corpus(const Corpus& corpus, const SourceHierarchy& h, const RunConfig& c) {
  std::vector<PriorPath> out;
  out.reserve(corpus.size());
  if (c.tfidf_labels) {
    const auto vectors = compute_tfidf(corpus);
    for (const auto& v : vectors) out.push_back(label_document(v, h, c.label_mode));
  } else {
    for (const auto& doc : corpus.documents()) out.push_back(label_document(doc, h, c.label_mode));
  }
  return out;
}

// Per-document prior paths from a TSV file or by labelling against a
// hierarchy; empty when neither is configured.
std::vector<PriorPath> prior_paths_for(const Corpus& corpus, const fs::path& file, const RunConfig& c,
                                       const Inputs& in) {
  if (!file.empty()) return align_prior_paths(corpus, read_prior_paths(file));
  if (!c.hierarchy.empty() || !c.source_corpus.empty()) {
    return label_corpus(corpus, obtain_hierarchy(c, *in.vocab, in.vocab), c);
  }
  return {};
}

std::vector<std::string> ids_of(const Corpus& corpus) {
  std::vector<std::string> ids;
  for (const auto& d : corpus.documents()) ids.push_back(d.id);
  return ids;
}

void write_heldout(const RunConfig& c, const HeldoutResult& result, std::size_t n_outer) {
  write_report(heldout_table(result), c.output / "heldout.csv");
  CsvTable summary;
  summary.header = {"outer_samples", "total_log_likelihood"};
  summary.rows.push_back({static_cast<std::int64_t>(n_outer), result.total});
  write_report(summary, c.output / "heldout_summary.csv");
  spdlog::info("held-out log likelihood {} over {} documents", result.total, result.documents.size());
}

void write_tree_outputs(const RunConfig& c, const SamplerState& state, const Corpus& corpus) {
  save_state(state, corpus, c.output / "state.json");
  write_text_file(c.output / "tree.json", tree_to_json(state.tree, corpus.vocabulary(), static_cast<std::size_t>(c.top_n)));
  const auto report = topic_report(state.tree, corpus.vocabulary(), static_cast<std::size_t>(c.top_n),
                                   example_documents(state, corpus, static_cast<std::size_t>(c.examples)));
  write_text_file(c.output / "report.txt", render_report_text(report));
  write_text_file(c.output / "report.json", render_report_json(report));
}

struct TrainingData {
  Corpus train;
  Corpus heldout;
  std::vector<PriorPath> train_paths;
  std::vector<PriorPath> heldout_paths;
};

TrainingData training_data(const RunConfig& c, const Inputs& in) {
  TrainingData data;
  if (c.heldout_fraction > 0.0) {
    auto split = split_corpus(in.corpus, c.heldout_fraction, c.seed);
    data.train = std::move(split.train);
    data.heldout = std::move(split.heldout);
  } else {
    data.train = in.corpus;
  }
  if (c.command != Command::kTrainLda && !c.hlda_mode) {
    data.train_paths = prior_paths_for(data.train, c.prior_paths, c, in);
    if (!data.heldout.empty()) {
      const auto& file = c.heldout_prior_paths.empty() ? c.prior_paths : c.heldout_prior_paths;
      data.heldout_paths = prior_paths_for(data.heldout, file, c, in);
    }
  }
  if (!data.train_paths.empty()) write_prior_paths(ids_of(data.train), data.train_paths, c.output / "prior_paths.tsv");
  return data;
}

void run_label(const RunConfig& c) {
  const auto in = load_inputs(c);
  const auto h = obtain_hierarchy(c, *in.vocab, in.vocab);
  save_hierarchy(h, *in.vocab, c.output / "hierarchy.json");
  const auto paths = label_corpus(in.corpus, h, c);
  write_prior_paths(ids_of(in.corpus), paths, c.output / "prior_paths.tsv");
  spdlog::info("labelled {} documents against a depth-{} hierarchy", paths.size(), h.depth);
}

void run_train(const RunConfig& c) {
  const auto in = load_inputs(c);
  const auto data = training_data(c, in);
  const auto outer_its = outer_sample_iterations(c.protocol, c.iterations);
  std::vector<SamplerState> outer;
  TrainOptions opts;
  opts.iterations = c.iterations;
  opts.seed = c.seed;
  opts.log_every = c.log_every;
  opts.init = c.init;
  opts.hlda_mode = c.hlda_mode;
  opts.on_iteration = [&](const SamplerState& s) {
    if (std::find(outer_its.begin(), outer_its.end(), s.iteration) == outer_its.end()) return;
    save_state(s, data.train, c.output / checkpoint_name(s.iteration));
    if (!data.heldout.empty()) outer.push_back(s);
  };
  const auto result = train(data.train, data.train_paths, c.hyper, opts);
  audit_state(result.state, data.train);
  write_report(trace_table(result.trace), c.output / "trace.csv");
  write_tree_outputs(c, result.state, data.train);
  if (!data.heldout.empty()) {
    if (outer.empty()) {
      spdlog::warn("no iteration reached burn_in; scoring held-out data against the final state");
      outer.push_back(result.state);
    }
    write_heldout(c, heldout_log_likelihood(outer, *in.vocab, data.heldout, c.protocol, c.seed, data.heldout_paths),
                  outer.size());
  }
}

void run_train_parallel(const RunConfig& c) {
  const auto in = load_inputs(c);
  const auto data = training_data(c, in);
  ParallelOptions opts;
  opts.workers = c.workers;
  opts.iterations = c.iterations;
  opts.schedule.merge_interval = c.merge_interval;
  opts.schedule.base_rule = c.base_rule;
  opts.seed = c.seed;
  opts.log_every = c.log_every;
  opts.init = c.init;
  opts.hlda_mode = c.hlda_mode;
  opts.merge.min_similarity = c.min_similarity;
  opts.on_failure = [&](const SamplerState& s) {
    save_state(s, data.train, c.output / "failure_state.json");
    spdlog::error("worker failure: state written to {}", (c.output / "failure_state.json").string());
  };
  const auto result = parallel_train(data.train, data.train_paths, c.hyper, opts);
  audit_state(result.state, data.train);
  write_report(trace_table(result.trace), c.output / "trace.csv");
  write_report(timing_table(result.timings), c.output / "timing.csv");
  write_tree_outputs(c, result.state, data.train);
  spdlog::info("parallel run: {} workers, {} tree merges, {:.3f} s", c.workers, result.merge_events,
               result.sweep_seconds);
  if (!data.heldout.empty()) {
    write_heldout(c, heldout_log_likelihood(std::vector<SamplerState>{result.state}, *in.vocab, data.heldout,
                                            c.protocol, c.seed, data.heldout_paths),
                  1);
  }
}

void run_train_lda(const RunConfig& c) {
  const auto in = load_inputs(c);
  const auto data = training_data(c, in);
  const auto outer_its = outer_sample_iterations(c.protocol, c.iterations);
  std::vector<LdaState> outer;
  LdaOptions opts;
  opts.num_topics = c.topics;
  opts.alpha = c.alpha;
  opts.eta = c.lda_eta;
  opts.iterations = c.iterations;
  opts.seed = c.seed;
  opts.log_every = c.log_every;
  const auto result = lda_train(data.train, opts, [&](const LdaState& s) {
    if (std::find(outer_its.begin(), outer_its.end(), s.iteration) == outer_its.end()) return;
    save_lda_state(s, data.train, c.output / checkpoint_name(s.iteration));
    if (!data.heldout.empty()) outer.push_back(s);
  });
  audit_lda_state(result.state, data.train);
  write_report(trace_table(result.trace), c.output / "trace.csv");
  save_lda_state(result.state, data.train, c.output / "state.json");
  if (!data.heldout.empty()) {
    if (outer.empty()) {
      spdlog::warn("no iteration reached burn_in; scoring held-out data against the final state");
      outer.push_back(result.state);
    }
    write_heldout(c, heldout_log_likelihood(outer, *in.vocab, data.heldout, c.protocol, c.seed), outer.size());
  }
}

void run_evaluate(const RunConfig& c) {
  const auto in = load_inputs(c);
  const Corpus heldout = load_corpus(c.heldout, in.vocab);
  const std::string format = checkpoint_format(c.checkpoints.front());
  for (const auto& p : c.checkpoints) {
    if (checkpoint_format(p) != format) throw UsageError("checkpoint", "checkpoints mix model formats");
  }
  if (format == "thlda") {
    std::vector<SamplerState> outer;
    for (const auto& p : c.checkpoints) outer.push_back(load_state(p, in.corpus));
    std::vector<PriorPath> paths;
    if (!c.hlda_mode) paths = prior_paths_for(heldout, c.heldout_prior_paths, c, in);
    write_heldout(c, heldout_log_likelihood(outer, *in.vocab, heldout, c.protocol, c.seed, paths), outer.size());
  } else if (format == "lda") {
    std::vector<LdaState> outer;
    for (const auto& p : c.checkpoints) outer.push_back(load_lda_state(p, in.corpus));
    write_heldout(c, heldout_log_likelihood(outer, *in.vocab, heldout, c.protocol, c.seed), outer.size());
  } else {
    throw UsageError("checkpoint", "unknown checkpoint format '" + format + "'");
  }
}

void run_report(const RunConfig& c) {
  const auto in = load_inputs(c);
  if (checkpoint_format(c.checkpoints.front()) != "thlda") {
    throw UsageError("checkpoint", "report needs a thlda checkpoint");
  }
  const auto state = load_state(c.checkpoints.front(), in.corpus);
  write_tree_outputs(c, state, in.corpus);
}

}  // namespace

void run_command(const RunConfig& config) {
  fs::create_directories(config.output);
  write_text_file(config.output / "manifest.txt", render_manifest(config));
  switch (config.command) {
    case Command::kLabel: run_label(config); break;
    case Command::kTrain: run_train(config); break;
    case Command::kTrainLda: run_train_lda(config); break;
    case Command::kTrainParallel: run_train_parallel(config); break;
    case Command::kEvaluate: run_evaluate(config); break;
    case Command::kReport: run_report(config); break;
  }
}

int execute(const RunConfig& config) {
  std::shared_ptr<spdlog::sinks::basic_file_sink_mt> sink;
  try {
    fs::create_directories(config.output);
    sink = std::make_shared<spdlog::sinks::basic_file_sink_mt>((config.output / "run.log").string(), true);
    spdlog::default_logger()->sinks().push_back(sink);
    spdlog::info("thlda {} {}", kVersion, command_name(config.command));
    for (const auto& [key, value] : config.resolved) spdlog::info("config {}={}", key, value);
    run_command(config);
  } catch (const UsageError& e) {
    spdlog::error("{}: usage error: {}", command_name(config.command), e.what());
    if (sink) spdlog::default_logger()->sinks().pop_back();
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{} failed: {}", command_name(config.command), e.what());
    if (sink) spdlog::default_logger()->sinks().pop_back();
    return 1;
  }
  spdlog::default_logger()->flush();
  if (sink) spdlog::default_logger()->sinks().pop_back();
  return 0;
}

}  // namespace thlda
