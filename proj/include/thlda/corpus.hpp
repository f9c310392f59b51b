#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "thlda/types.hpp"

namespace thlda {

class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws std::invalid_argument on a duplicate term.
  explicit Vocabulary(std::vector<std::string> terms);

  static Vocabulary load(const std::filesystem::path& path);
  // Vocabulary of `n` synthetic terms "w0".."w{n-1}".
  static Vocabulary numbered(std::size_t n);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::string& term(TermId id) const { return terms_.at(static_cast<std::size_t>(id)); }
  std::optional<TermId> find(const std::string& term) const;
  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
};

// Bag-of-words document. `entries` sorted by term, every count >= 1.
struct Document {
  std::string id;
  std::vector<TermCount> entries;

  Document() = default;
  Document(std::string doc_id, std::vector<TermCount> counts);

  Count length() const noexcept { return length_; }
  Count count_of(TermId term) const;
  // One term id per token, grouped by term in ascending order.
  std::vector<TermId> tokens() const;

 private:
  Count length_ = 0;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Document> documents, std::shared_ptr<const Vocabulary> vocabulary);

  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  const std::vector<Document>& documents() const noexcept { return documents_; }
  const Vocabulary& vocabulary() const { return *vocabulary_; }
  std::shared_ptr<const Vocabulary> vocabulary_ptr() const { return vocabulary_; }
  std::size_t vocab_size() const { return vocabulary_ ? vocabulary_->size() : 0; }
  Count total_tokens() const;

 private:
  std::vector<Document> documents_;
  std::shared_ptr<const Vocabulary> vocabulary_;
};

// Parses one "M i1:c1 ... iM:cM" line. Throws ParseError naming `line_number`.
Document parse_document_line(const std::string& line, std::size_t vocab_size, long line_number,
                             std::string id);

// Reads a sparse corpus file. Document ids are the 0-based index of the
// non-empty line. Blank lines are skipped; an empty result is an error.
Corpus load_corpus(const std::filesystem::path& path, const std::filesystem::path& vocab_path);
Corpus load_corpus(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocabulary);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct CorpusSplit {
  Corpus train;
  Corpus heldout;
};

// Deterministic shuffle-and-cut; |heldout| = round(D * heldout_fraction).
CorpusSplit split_corpus(const Corpus& corpus, double heldout_fraction, std::uint64_t seed);

// weight(d, w) = count(d, w) * ln(D / df(w)). Zero weights are kept so the
// sparsity pattern matches the document.
std::vector<SparseVector> compute_tfidf(const Corpus& corpus);

// ln(D / df(w)) per term; terms absent from the corpus get 0.
std::vector<double> inverse_document_frequency(const Corpus& corpus);

SparseVector to_sparse_vector(const Document& doc);

}  // namespace thlda
