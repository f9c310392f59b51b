#include "thlda/source_knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "thlda/errors.hpp"

namespace thlda {

namespace {

struct BuildNode {
  std::string label;
  std::unordered_map<TermId, Count> counts;
  std::size_t direct_docs = 0;
  std::vector<BuildNode> children;

  BuildNode& child(const std::string& name) {
    for (auto& c : children) {
      if (c.label == name) return c;
    }
    children.push_back(BuildNode{name, {}, 0, {}});
    return children.back();
  }
};

void collect_leaf_depths(const CategoryNode& node, int depth, std::set<int>& out) {
  if (node.children.empty()) {
    out.insert(depth);
    return;
  }
  for (const auto& c : node.children) collect_leaf_depths(c, depth + 1, out);
}

CategoryNode finalize(const BuildNode& node, const std::vector<double>& idf,
                      const std::vector<Count>& df, int top_k) {
  CategoryNode out;
  out.label = node.label;
  SparseVector weighted;
  for (const auto& [term, count] : node.counts) {
    if (df[static_cast<std::size_t>(term)] == 0) {
      throw std::invalid_argument("labelled document uses a term absent from the idf corpus");
    }
    const double w = static_cast<double>(count) * idf[static_cast<std::size_t>(term)];
    if (w > 0.0) weighted.push_back({term, w});
  }
  std::sort(weighted.begin(), weighted.end(), [](const TermWeight& a, const TermWeight& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.term < b.term;
  });
  if (weighted.size() > static_cast<std::size_t>(top_k)) weighted.resize(static_cast<std::size_t>(top_k));
  std::sort(weighted.begin(), weighted.end(),
            [](const TermWeight& a, const TermWeight& b) { return a.term < b.term; });
  out.weights = std::move(weighted);
  for (const auto& c : node.children) out.children.push_back(finalize(c, idf, df, top_k));
  return out;
}

void validate_node(const CategoryNode& node) {
  std::set<std::string> seen;
  for (const auto& c : node.children) {
    if (!seen.insert(c.label).second) {
      throw std::invalid_argument("duplicate sibling label '" + c.label + "'");
    }
    validate_node(c);
  }
  for (std::size_t i = 0; i < node.weights.size(); ++i) {
    if (!(node.weights[i].weight > 0.0)) throw std::invalid_argument("non-positive node weight");
    if (i > 0 && node.weights[i].term <= node.weights[i - 1].term) {
      throw std::invalid_argument("node weights not sorted by term");
    }
  }
}

}  // namespace

SourceHierarchy build_hierarchy(const std::map<CategoryPath, std::vector<Document>>& labeled_docs,
                                const Corpus& corpus, int top_k) {
  if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
  if (labeled_docs.empty()) throw std::invalid_argument("no labelled categories");
  if (corpus.empty()) throw std::invalid_argument("idf corpus is empty");

  BuildNode root;
  for (const auto& [path, docs] : labeled_docs) {
    if (path.empty()) throw std::invalid_argument("category path must not be empty");
    if (docs.empty()) throw std::invalid_argument("category '" + join_labels(path) + "' has no documents");
    std::vector<BuildNode*> chain{&root};
    for (const auto& label : path) {
      if (label.empty() || label.find('/') != std::string::npos) {
        throw std::invalid_argument("invalid category label '" + label + "'");
      }
      chain.push_back(&chain.back()->child(label));
    }
    chain.back()->direct_docs += docs.size();
    for (const auto& doc : docs) {
      for (const auto& e : doc.entries) {
        if (e.term < 0 || static_cast<std::size_t>(e.term) >= corpus.vocab_size()) {
          throw std::invalid_argument("labelled document term outside the vocabulary");
        }
        for (auto* n : chain) n->counts[e.term] += e.count;
      }
    }
  }

  std::vector<Count> df(corpus.vocab_size(), 0);
  for (const auto& doc : corpus.documents()) {
    for (const auto& e : doc.entries) ++df[static_cast<std::size_t>(e.term)];
  }
  const auto idf = inverse_document_frequency(corpus);

  SourceHierarchy h;
  h.root = finalize(root, idf, df, top_k);
  std::set<int> leaf_depths;
  collect_leaf_depths(h.root, 0, leaf_depths);
  if (leaf_depths.size() != 1) throw std::invalid_argument("category leaves sit at different depths");
  h.depth = *leaf_depths.begin();
  return h;
}

void validate_hierarchy(const SourceHierarchy& hierarchy) {
  validate_node(hierarchy.root);
  std::set<int> leaf_depths;
  collect_leaf_depths(hierarchy.root, 0, leaf_depths);
  if (leaf_depths.size() != 1) throw std::invalid_argument("category leaves sit at different depths");
  if (*leaf_depths.begin() != hierarchy.depth) {
    throw std::invalid_argument("hierarchy depth does not match its leaves");
  }
}

double cosine_similarity(const SparseVector& u, const SparseVector& v) {
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (const auto& e : u) nu += e.weight * e.weight;
  for (const auto& e : v) nv += e.weight * e.weight;
  if (nu == 0.0 || nv == 0.0) return 0.0;
  auto i = u.begin();
  auto j = v.begin();
  while (i != u.end() && j != v.end()) {
    if (i->term < j->term) {
      ++i;
    } else if (j->term < i->term) {
      ++j;
    } else {
      dot += i->weight * j->weight;
      ++i;
      ++j;
    }
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine of vectors with different sizes");
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

PriorPath label_document(const SparseVector& doc, const SourceHierarchy& hierarchy, LabelMode mode) {
  PriorPath path;
  const CategoryNode* current = &hierarchy.root;
  while (!current->children.empty()) {
    const CategoryNode* best = nullptr;
    double best_sim = -1.0;
    for (const auto& child : current->children) {
      const double sim = cosine_similarity(doc, child.weights);
      if (sim > best_sim) {
        best_sim = sim;
        best = &child;
      }
    }
    if (mode == LabelMode::kTruncateOnZero && best_sim <= 0.0) break;
    path.push_back(best->label);
    current = best;
  }
  return path;
}

PriorPath label_document(const Document& doc, const SourceHierarchy& hierarchy, LabelMode mode) {
  return label_document(to_sparse_vector(doc), hierarchy, mode);
}

bool is_hierarchy_path(const PriorPath& path, const SourceHierarchy& hierarchy) {
  if (static_cast<int>(path.size()) > hierarchy.depth) return false;
  const CategoryNode* current = &hierarchy.root;
  for (const auto& label : path) {
    auto it = std::find_if(current->children.begin(), current->children.end(),
                           [&](const CategoryNode& c) { return c.label == label; });
    if (it == current->children.end()) return false;
    current = &*it;
  }
  return true;
}

std::string join_labels(const PriorPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '/';
    out += path[i];
  }
  return out;
}

PriorPath split_labels(const std::string& text) {
  PriorPath out;
  if (text.empty()) return out;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, '/')) {
    if (part.empty()) throw std::invalid_argument("empty label in path '" + text + "'");
    out.push_back(part);
  }
  return out;
}

void write_prior_paths(const std::vector<std::string>& doc_ids, const std::vector<PriorPath>& paths,
                       const std::filesystem::path& file) {
  if (doc_ids.size() != paths.size()) throw std::invalid_argument("ids and paths differ in length");
  std::ofstream out(file);
  if (!out) throw IoError("cannot write prior paths to " + file.string());
  for (std::size_t i = 0; i < paths.size(); ++i) out << doc_ids[i] << '\t' << join_labels(paths[i]) << '\n';
  if (!out) throw IoError("write failed for " + file.string());
}

std::map<std::string, PriorPath> read_prior_paths(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open prior paths " + file.string());
  std::map<std::string, PriorPath> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected doc_id<TAB>labels", line_no);
    try {
      if (!out.emplace(line.substr(0, tab), split_labels(line.substr(tab + 1))).second) {
        throw ParseError("duplicate document id", line_no);
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

std::vector<PriorPath> align_prior_paths(const Corpus& corpus,
                                         const std::map<std::string, PriorPath>& by_id) {
  std::vector<PriorPath> out(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto it = by_id.find(corpus[d].id);
    if (it != by_id.end()) out[d] = it->second;
  }
  return out;
}

}  // namespace thlda
