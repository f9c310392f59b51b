#include "thlda/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "thlda/errors.hpp"

namespace thlda {

using Json = nlohmann::ordered_json;

namespace {

constexpr int kCheckpointVersion = 1;

Json parse_json(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0);
  }
}

Json category_json(const CategoryNode& node, const Vocabulary& vocab) {
  Json j;
  j["label"] = node.label;
  Json weights = Json::object();
  for (const auto& tw : node.weights) weights[vocab.term(tw.term)] = tw.weight;
  j["weights"] = std::move(weights);
  j["children"] = Json::array();
  for (const auto& c : node.children) j["children"].push_back(category_json(c, vocab));
  return j;
}

CategoryNode category_from_json(const Json& j, const Vocabulary& vocab) {
  CategoryNode node;
  node.label = j.value("label", std::string{});
  if (j.contains("weights")) {
    for (const auto& [term, weight] : j.at("weights").items()) {
      auto id = vocab.find(term);
      if (!id) throw std::invalid_argument("hierarchy term '" + term + "' is not in the vocabulary");
      node.weights.push_back({*id, weight.get<double>()});
    }
  }
  std::sort(node.weights.begin(), node.weights.end(),
            [](const TermWeight& a, const TermWeight& b) { return a.term < b.term; });
  if (j.contains("children")) {
    for (const auto& c : j.at("children")) node.children.push_back(category_from_json(c, vocab));
  }
  return node;
}

int leaf_depth(const CategoryNode& node) {
  return node.children.empty() ? 0 : 1 + leaf_depth(node.children.front());
}

Json label_json(const std::optional<std::string>& label) { return label ? Json(*label) : Json(nullptr); }

std::optional<std::string> label_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

Json node_json(const TopicTree& tree, NodeId id, const Vocabulary& vocab, std::size_t top_n) {
  const auto& n = tree.node(id);
  Json j;
  j["id"] = id;
  j["level"] = n.level;
  j["label"] = label_json(n.label);
  j["n_docs"] = n.doc_count;
  std::vector<std::pair<TermId, Count>> words(n.word_counts.begin(), n.word_counts.end());
  std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (top_n > 0 && words.size() > top_n) words.resize(top_n);
  Json top = Json::array();
  for (const auto& [term, count] : words) top.push_back(Json::array({vocab.term(term), count}));
  j["top_words"] = std::move(top);
  j["children"] = Json::array();
  for (NodeId c : n.children) j["children"].push_back(node_json(tree, c, vocab, top_n));
  return j;
}

Json hyper_json(const Hyperparams& h) {
  Json j;
  j["gamma"] = h.gamma;
  j["lambda"] = h.lambda;
  j["eta"] = h.eta;
  j["m"] = h.m;
  j["pi"] = h.pi;
  j["depth"] = h.depth;
  return j;
}

Hyperparams hyper_from_json(const Json& j) {
  Hyperparams h;
  h.gamma = j.at("gamma").get<double>();
  h.lambda = j.at("lambda").get<double>();
  h.eta = j.at("eta").get<std::vector<double>>();
  h.m = j.at("m").get<double>();
  h.pi = j.at("pi").get<double>();
  h.depth = j.at("depth").get<int>();
  h.validate();
  return h;
}

Json structure_json(const TopicTree& tree) {
  Json nodes = Json::array();
  for (NodeId id : tree.node_ids()) {
    if (id == tree.root()) continue;
    const auto& n = tree.node(id);
    nodes.push_back(Json{{"id", id}, {"parent", n.parent}, {"label", label_json(n.label)}});
  }
  return nodes;
}

void check_format(const Json& j, const std::string& expected) {
  if (!j.contains("format") || j.at("format").get<std::string>() != expected) {
    throw std::invalid_argument("checkpoint is not a " + expected + " checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) throw std::invalid_argument("unsupported checkpoint version");
}

void check_documents(const Json& docs, const Corpus& corpus) {
  if (!docs.is_array() || docs.size() != corpus.size()) {
    throw std::invalid_argument("checkpoint document count does not match the corpus");
  }
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (docs[d].at("id").get<std::string>() != corpus[d].id) {
      throw std::invalid_argument("checkpoint document '" + docs[d].at("id").get<std::string>() +
                                  "' does not match corpus document '" + corpus[d].id + "'");
    }
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string hierarchy_to_json(const SourceHierarchy& hierarchy, const Vocabulary& vocab) {
  return category_json(hierarchy.root, vocab).dump(2) + "\n";
}

SourceHierarchy hierarchy_from_json(const std::string& text, const Vocabulary& vocab) {
  SourceHierarchy h;
  h.root = category_from_json(parse_json(text, "hierarchy"), vocab);
  h.depth = leaf_depth(h.root);
  validate_hierarchy(h);
  return h;
}

void save_hierarchy(const SourceHierarchy& hierarchy, const Vocabulary& vocab, const std::filesystem::path& path) {
  write_text_file(path, hierarchy_to_json(hierarchy, vocab));
}

SourceHierarchy load_hierarchy(const std::filesystem::path& path, const Vocabulary& vocab) {
  return hierarchy_from_json(read_text_file(path), vocab);
}

std::string tree_to_json(const TopicTree& tree, const Vocabulary& vocab, std::size_t top_n) {
  return node_json(tree, tree.root(), vocab, top_n).dump(2) + "\n";
}

std::string state_to_json(const SamplerState& state, const Corpus& corpus) {
  if (state.paths.size() != corpus.size()) throw std::invalid_argument("state does not cover the corpus");
  Json j;
  j["format"] = "thlda";
  j["version"] = kCheckpointVersion;
  j["hyper"] = hyper_json(state.hyper);
  j["iteration"] = state.iteration;
  j["seed"] = state.seed;
  j["nodes"] = structure_json(state.tree);
  Json docs = Json::array();
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    docs.push_back(Json{{"id", corpus[d].id}, {"path", state.paths[d]}, {"levels", state.levels[d]}});
  }
  j["documents"] = std::move(docs);
  return j.dump() + "\n";
}

SamplerState state_from_json(const std::string& text, const Corpus& corpus) {
  const Json j = parse_json(text, "checkpoint");
  check_format(j, "thlda");
  Hyperparams hyper = hyper_from_json(j.at("hyper"));
  SamplerState state{TopicTree(hyper.depth, corpus.vocab_size()), {}, {}, hyper,
                     j.at("seed").get<std::uint64_t>(), j.at("iteration").get<int>()};
  for (const auto& n : j.at("nodes")) {
    state.tree.add_child_with_id(n.at("parent").get<NodeId>(), n.at("id").get<NodeId>(),
                                 label_from_json(n.at("label")));
  }
  const auto& docs = j.at("documents");
  check_documents(docs, corpus);
  state.paths.resize(corpus.size());
  state.levels.resize(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    state.paths[d] = docs[d].at("path").get<Path>();
    state.levels[d] = docs[d].at("levels").get<std::vector<Level>>();
    const auto tokens = corpus[d].tokens();
    if (state.levels[d].size() != tokens.size()) {
      throw ConsistencyError("checkpoint levels do not match document '" + corpus[d].id + "'");
    }
    for (Level l : state.levels[d]) {
      if (l < 0 || l >= hyper.depth) throw ConsistencyError("checkpoint level out of range");
    }
    state.tree.attach(tokens, state.paths[d], state.levels[d]);
  }
  state.tree.prune_empty();
  return state;
}

void save_state(const SamplerState& state, const Corpus& corpus, const std::filesystem::path& path) {
  write_text_file(path, state_to_json(state, corpus));
}

SamplerState load_state(const std::filesystem::path& path, const Corpus& corpus) {
  return state_from_json(read_text_file(path), corpus);
}

std::string lda_state_to_json(const LdaState& state, const Corpus& corpus) {
  if (state.z.size() != corpus.size()) throw std::invalid_argument("state does not cover the corpus");
  Json j;
  j["format"] = "lda";
  j["version"] = kCheckpointVersion;
  j["num_topics"] = state.num_topics;
  j["alpha"] = state.alpha;
  j["eta"] = state.eta;
  j["iteration"] = state.iteration;
  j["seed"] = state.seed;
  Json docs = Json::array();
  for (std::size_t d = 0; d < corpus.size(); ++d) docs.push_back(Json{{"id", corpus[d].id}, {"z", state.z[d]}});
  j["documents"] = std::move(docs);
  return j.dump() + "\n";
}

LdaState lda_state_from_json(const std::string& text, const Corpus& corpus) {
  const Json j = parse_json(text, "checkpoint");
  check_format(j, "lda");
  LdaState s;
  s.num_topics = j.at("num_topics").get<int>();
  if (s.num_topics < 1) throw std::invalid_argument("checkpoint has no topics");
  s.vocab_size = corpus.vocab_size();
  s.alpha = j.at("alpha").get<double>();
  s.eta = j.at("eta").get<double>();
  s.iteration = j.at("iteration").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  const auto& docs = j.at("documents");
  check_documents(docs, corpus);
  const auto K = static_cast<std::size_t>(s.num_topics);
  s.doc_topic.assign(corpus.size() * K, 0);
  s.topic_word.assign(K * s.vocab_size, 0);
  s.topic_total.assign(K, 0);
  s.z.resize(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    s.z[d] = docs[d].at("z").get<std::vector<int>>();
    const auto tokens = corpus[d].tokens();
    if (s.z[d].size() != tokens.size()) throw ConsistencyError("checkpoint topics do not match a document");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const int k = s.z[d][i];
      if (k < 0 || k >= s.num_topics) throw ConsistencyError("checkpoint topic out of range");
      ++s.n_dk(d, k);
      ++s.n_kw(k, tokens[i]);
      ++s.topic_total[static_cast<std::size_t>(k)];
    }
  }
  return s;
}

void save_lda_state(const LdaState& state, const Corpus& corpus, const std::filesystem::path& path) {
  write_text_file(path, lda_state_to_json(state, corpus));
}

LdaState load_lda_state(const std::filesystem::path& path, const Corpus& corpus) {
  return lda_state_from_json(read_text_file(path), corpus);
}

std::string checkpoint_format(const std::filesystem::path& path) {
  const Json j = parse_json(read_text_file(path), "checkpoint");
  if (!j.contains("format")) throw std::invalid_argument(path.string() + " has no checkpoint format field");
  return j.at("format").get<std::string>();
}

}  // namespace thlda
