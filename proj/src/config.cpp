#include "thlda/config.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "thlda/errors.hpp"
#include "thlda/serialization.hpp"

namespace thlda {

namespace {

struct KeySpec {
  const char* name;
  const char* fallback;
  const char* help;
};

// Defaults are the library defaults; the manifest lists keys in this order.
const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"command", "", "label | train | train-lda | train-parallel | evaluate | report"},
      {"corpus", "", "training corpus, one \"M i:c ...\" document per line"},
      {"vocab", "", "vocabulary, one term per line"},
      {"heldout", "", "held-out corpus for evaluate"},
      {"hierarchy", "", "source hierarchy JSON"},
      {"source_corpus", "", "source-domain corpus for building a hierarchy"},
      {"source_labels", "", "TSV doc_id<TAB>category/path for the source corpus"},
      {"prior_paths", "", "TSV doc_id<TAB>label/label of prior paths"},
      {"heldout_prior_paths", "", "prior paths for held-out documents"},
      {"checkpoint", "", "comma-separated checkpoint files"},
      {"output", ".", "output directory"},
      {"mode", "thlda", "thlda | hlda (hlda forces lambda=0 and ignores labels)"},
      {"gamma", "0.1", "new-table mass"},
      {"lambda", "100.0", "label bonus"},
      {"eta", "1.0,0.5,0.25", "per-level topic Dirichlet, one value per level"},
      {"m", "0.5", "GEM mean"},
      {"pi", "100.0", "GEM scale"},
      {"depth", "3", "tree depth"},
      {"init", "guided", "guided | random"},
      {"topics", "20", "LDA topic count"},
      {"alpha", "auto", "LDA document Dirichlet; auto is 50/topics"},
      {"lda_eta", "0.1", "LDA topic Dirichlet"},
      {"iterations", "100", "Gibbs iterations"},
      {"seed", "1", "random seed"},
      {"log_every", "1", "trace interval"},
      {"workers", "1", "parallel workers (THLDA_WORKERS overrides the file)"},
      {"merge_interval", "50", "iterations between tree merges"},
      {"base_rule", "rotate", "rotate | fixed base tree for merges"},
      {"min_similarity", "0.0", "cosine at or below which an unlabelled match is appended"},
      {"heldout_fraction", "0.0", "fraction of the corpus held out and scored after training"},
      {"burn_in", "200", "iteration of the first outer sample"},
      {"outer_spacing", "100", "iterations between outer samples"},
      {"inner_samples", "800", "inner samples per held-out document"},
      {"top_k", "50", "terms kept per hierarchy node"},
      {"top_n", "10", "words per node in reports"},
      {"examples", "3", "example documents per node in reports"},
      {"label_mode", "first_sibling", "first_sibling | truncate_on_zero"},
      {"weighting", "raw", "raw | tfidf document vectors for labelling"},
  };
  return table;
}

bool known_key(const std::string& key) {
  for (const auto& k : key_table()) {
    if (key == k.name) return true;
  }
  return key == "config";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw UsageError(key, "'" + text + "' is not a valid number");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  const double v = parse_number<double>(key, text);
  if (!std::isfinite(v)) throw UsageError(key, "must be finite");
  return v;
}

int parse_int(const std::string& key, const std::string& text, int min) {
  const int v = parse_number<int>(key, text);
  if (v < min) throw UsageError(key, "must be at least " + std::to_string(min));
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Command parse_command(const std::string& text) {
  if (text == "label") return Command::kLabel;
  if (text == "train") return Command::kTrain;
  if (text == "train-lda") return Command::kTrainLda;
  if (text == "train-parallel") return Command::kTrainParallel;
  if (text == "evaluate") return Command::kEvaluate;
  if (text == "report") return Command::kReport;
  if (text.empty()) throw UsageError("command", "no command given");
  throw UsageError("command", "unknown command '" + text + "'");
}

void require(const std::filesystem::path& value, const char* key, Command command) {
  if (value.empty()) throw UsageError(key, "required by the " + command_name(command) + " command");
}

}  // namespace

std::string command_name(Command command) {
  switch (command) {
    case Command::kLabel: return "label";
    case Command::kTrain: return "train";
    case Command::kTrainLda: return "train-lda";
    case Command::kTrainParallel: return "train-parallel";
    case Command::kEvaluate: return "evaluate";
    case Command::kReport: return "report";
  }
  return "unknown";
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.emplace_back(k.name);
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("", "config line " + std::to_string(line_no) + " is not key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!known_key(key) || key == "config") throw UsageError(key, "unknown key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig resolve_config(const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> values;
  for (const auto& k : key_table()) values[k.name] = k.fallback;
  for (const auto& [key, value] : file_values) {
    if (!known_key(key) || key == "config") throw UsageError(key, "unknown key");
    values[key] = value;
  }
  if (const char* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') values["workers"] = env;
  for (const auto& [key, value] : overrides) {
    if (!known_key(key) || key == "config") throw UsageError(key, "unknown key");
    values[key] = value;
  }

  RunConfig c;
  c.command = parse_command(values["command"]);
  c.corpus = values["corpus"];
  c.vocab = values["vocab"];
  c.heldout = values["heldout"];
  c.hierarchy = values["hierarchy"];
  c.source_corpus = values["source_corpus"];
  c.source_labels = values["source_labels"];
  c.prior_paths = values["prior_paths"];
  c.heldout_prior_paths = values["heldout_prior_paths"];
  for (const auto& p : split_list(values["checkpoint"])) c.checkpoints.emplace_back(p);
  c.output = values["output"].empty() ? std::filesystem::path(".") : std::filesystem::path(values["output"]);

  const auto& mode = values["mode"];
  if (mode == "hlda") {
    c.hlda_mode = true;
  } else if (mode != "thlda") {
    throw UsageError("mode", "expected thlda or hlda");
  }
  c.hyper.gamma = parse_real("gamma", values["gamma"]);
  if (!(c.hyper.gamma > 0.0)) throw UsageError("gamma", "must be positive");
  c.hyper.lambda = parse_real("lambda", values["lambda"]);
  if (c.hyper.lambda < 0.0) throw UsageError("lambda", "must be non-negative");
  c.hyper.m = parse_real("m", values["m"]);
  if (!(c.hyper.m > 0.0 && c.hyper.m < 1.0)) throw UsageError("m", "must lie in (0, 1)");
  c.hyper.pi = parse_real("pi", values["pi"]);
  if (!(c.hyper.pi > 0.0)) throw UsageError("pi", "must be positive");
  c.hyper.depth = parse_int("depth", values["depth"], 1);
  c.hyper.eta.clear();
  for (const auto& e : split_list(values["eta"])) {
    const double v = parse_real("eta", e);
    if (!(v > 0.0)) throw UsageError("eta", "every value must be positive");
    c.hyper.eta.push_back(v);
  }
  if (c.hyper.eta.empty()) throw UsageError("eta", "needs at least one value");
  // A single value applies to every level; a shorter list repeats its last entry.
  while (static_cast<int>(c.hyper.eta.size()) < c.hyper.depth) c.hyper.eta.push_back(c.hyper.eta.back());
  c.hyper.eta.resize(static_cast<std::size_t>(c.hyper.depth));

  const auto& init = values["init"];
  if (init == "random") {
    c.init = InitMode::kRandom;
  } else if (init != "guided") {
    throw UsageError("init", "expected guided or random");
  }
  c.topics = parse_int("topics", values["topics"], 1);
  if (values["alpha"] != "auto") {
    c.alpha = parse_real("alpha", values["alpha"]);
    if (!(c.alpha > 0.0)) throw UsageError("alpha", "must be positive");
  }
  c.lda_eta = parse_real("lda_eta", values["lda_eta"]);
  if (!(c.lda_eta > 0.0)) throw UsageError("lda_eta", "must be positive");

  c.iterations = parse_int("iterations", values["iterations"], 0);
  c.seed = parse_number<std::uint64_t>("seed", values["seed"]);
  c.log_every = parse_int("log_every", values["log_every"], 1);
  c.workers = parse_int("workers", values["workers"], 1);
  c.merge_interval = parse_int("merge_interval", values["merge_interval"], 1);
  const auto& base = values["base_rule"];
  if (base == "fixed") {
    c.base_rule = MergeSchedule::BaseRule::kFixed;
  } else if (base != "rotate") {
    throw UsageError("base_rule", "expected rotate or fixed");
  }
  c.min_similarity = parse_real("min_similarity", values["min_similarity"]);
  if (c.min_similarity < 0.0 || c.min_similarity > 1.0) throw UsageError("min_similarity", "must lie in [0, 1]");

  c.heldout_fraction = parse_real("heldout_fraction", values["heldout_fraction"]);
  if (c.heldout_fraction < 0.0 || c.heldout_fraction >= 1.0) {
    throw UsageError("heldout_fraction", "must lie in [0, 1)");
  }
  c.protocol.burn_in = parse_int("burn_in", values["burn_in"], 1);
  c.protocol.outer_spacing = parse_int("outer_spacing", values["outer_spacing"], 1);
  c.protocol.inner_samples = parse_int("inner_samples", values["inner_samples"], 1);

  c.top_k = parse_int("top_k", values["top_k"], 1);
  c.top_n = parse_int("top_n", values["top_n"], 1);
  c.examples = parse_int("examples", values["examples"], 0);
  const auto& lm = values["label_mode"];
  if (lm == "truncate_on_zero") {
    c.label_mode = LabelMode::kTruncateOnZero;
  } else if (lm != "first_sibling") {
    throw UsageError("label_mode", "expected first_sibling or truncate_on_zero");
  }
  const auto& weighting = values["weighting"];
  if (weighting == "tfidf") {
    c.tfidf_labels = true;
  } else if (weighting != "raw") {
    throw UsageError("weighting", "expected raw or tfidf");
  }

  switch (c.command) {
    case Command::kLabel:
      require(c.corpus, "corpus", c.command);
      require(c.vocab, "vocab", c.command);
      if (c.hierarchy.empty()) {
        if (c.source_corpus.empty()) throw UsageError("hierarchy", "label needs a hierarchy or a source corpus");
        require(c.source_labels, "source_labels", c.command);
      }
      break;
    case Command::kTrain:
    case Command::kTrainLda:
    case Command::kTrainParallel:
      require(c.corpus, "corpus", c.command);
      require(c.vocab, "vocab", c.command);
      break;
    case Command::kEvaluate:
      require(c.corpus, "corpus", c.command);
      require(c.vocab, "vocab", c.command);
      require(c.heldout, "heldout", c.command);
      if (c.checkpoints.empty()) throw UsageError("checkpoint", "required by the evaluate command");
      break;
    case Command::kReport:
      require(c.corpus, "corpus", c.command);
      require(c.vocab, "vocab", c.command);
      if (c.checkpoints.size() != 1) throw UsageError("checkpoint", "report needs exactly one checkpoint");
      break;
  }

  for (const auto& k : key_table()) c.resolved.emplace_back(k.name, values[k.name]);
  for (const auto& [key, value] : c.resolved) spdlog::debug("config {}={}", key, value);
  return c;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  // Unknown flags are reported by name before CLI11 sees them.
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    const std::string key = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
    if (!known_key(key)) throw UsageError(key, "unknown key");
  }
  CLI::App app("thlda");
  app.set_help_flag();
  std::string positional;
  app.add_option("command_pos", positional);
  std::map<std::string, std::string> storage;
  std::string config_file;
  app.add_option("--config", config_file);
  for (const auto& k : key_table()) app.add_option(std::string("--") + k.name, storage[k.name]);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError("", e.what());
  }
  std::map<std::string, std::string> overrides;
  for (const auto& k : key_table()) {
    if (app.count(std::string("--") + k.name) > 0) overrides[k.name] = storage[k.name];
  }
  if (!positional.empty()) {
    if (overrides.contains("command") && overrides["command"] != positional) {
      throw UsageError("command", "given twice with different values");
    }
    overrides["command"] = positional;
  }
  std::map<std::string, std::string> file_values;
  if (!config_file.empty()) {
    std::string text;
    try {
      text = read_text_file(config_file);
    } catch (const IoError& e) {
      throw UsageError("config", e.what());
    }
    file_values = parse_config_text(text);
  }
  return resolve_config(file_values, overrides);
}

std::string render_manifest(const RunConfig& config) {
  std::ostringstream out;
  out << "# thlda " << kVersion << "\n";
  for (const auto& [key, value] : config.resolved) out << key << "=" << value << "\n";
  return out.str();
}

std::string usage_text() {
  std::ostringstream out;
  out << "usage: thlda <command> [--key value ...] [--config FILE]\n\nkeys:\n";
  for (const auto& k : key_table()) {
    out << "  --" << k.name;
    if (*k.fallback != '\0') out << " (default " << k.fallback << ")";
    out << "\n      " << k.help << "\n";
  }
  return out.str();
}

}  // namespace thlda
