#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "thlda/corpus.hpp"
#include "thlda/types.hpp"

namespace thlda {

struct CategoryNode {
  std::string label;
  SparseVector weights;  // top-k tf-idf terms, all > 0, sorted by term
  std::vector<CategoryNode> children;
};

// Labelled category tree built from source-domain documents. The root is
// unlabelled; `depth` counts levels below it.
struct SourceHierarchy {
  CategoryNode root;
  int depth = 0;
};

using CategoryPath = std::vector<std::string>;

inline constexpr int kDefaultTopK = 50;

// Each node's vector is the top_k terms of summed counts over every document
// in its subtree, weighted by idf computed on `corpus`. Ties go to the lower
// term index. Sibling order is the lexicographic order of the paths.
SourceHierarchy build_hierarchy(const std::map<CategoryPath, std::vector<Document>>& labeled_docs,
                                const Corpus& corpus, int top_k = kDefaultTopK);

// Throws std::invalid_argument when labels repeat among siblings, leaves sit
// at different depths, or a weight is not positive.
void validate_hierarchy(const SourceHierarchy& hierarchy);

// u.v / (|u||v|), 0 when either norm vanishes.
double cosine_similarity(const SparseVector& u, const SparseVector& v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

enum class LabelMode {
  kFirstSibling,    // an all-zero similarity row still picks the first child
  kTruncateOnZero,  // stop descending when no child shares a term
};

// Greedy descent: at each level take the child with the highest cosine
// similarity (first sibling on ties) among the children of the previous pick.
PriorPath label_document(const SparseVector& doc, const SourceHierarchy& hierarchy,
                         LabelMode mode = LabelMode::kFirstSibling);
PriorPath label_document(const Document& doc, const SourceHierarchy& hierarchy,
                         LabelMode mode = LabelMode::kFirstSibling);

// True when `path` follows parent/child links of the hierarchy from the root.
bool is_hierarchy_path(const PriorPath& path, const SourceHierarchy& hierarchy);

// TSV "doc_id<TAB>label1/label2/...".
void write_prior_paths(const std::vector<std::string>& doc_ids, const std::vector<PriorPath>& paths,
                       const std::filesystem::path& file);
std::map<std::string, PriorPath> read_prior_paths(const std::filesystem::path& file);

// One prior path per corpus document, looked up by id; missing ids map to an
// empty path.
std::vector<PriorPath> align_prior_paths(const Corpus& corpus,
                                         const std::map<std::string, PriorPath>& by_id);

std::string join_labels(const PriorPath& path);
PriorPath split_labels(const std::string& text);

}  // namespace thlda
