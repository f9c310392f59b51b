#include "thlda/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "thlda/errors.hpp"
#include "thlda/rng.hpp"

namespace thlda {

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], static_cast<TermId>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary term '" + terms_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path.string());
  std::vector<std::string> terms;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError("empty vocabulary term", line_no);
    terms.push_back(line);
  }
  try {
    return Vocabulary(std::move(terms));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
}

Vocabulary Vocabulary::numbered(std::size_t n) {
  std::vector<std::string> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) terms.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(terms));
}

std::optional<TermId> Vocabulary::find(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Document::Document(std::string doc_id, std::vector<TermCount> counts)
    : id(std::move(doc_id)), entries(std::move(counts)) {
  std::sort(entries.begin(), entries.end(),
            [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].count < 1) throw std::invalid_argument("document counts must be positive");
    if (i > 0 && entries[i].term == entries[i - 1].term) {
      throw std::invalid_argument("duplicate term in document");
    }
    length_ += entries[i].count;
  }
}

Count Document::count_of(TermId term) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), term,
                             [](const TermCount& e, TermId t) { return e.term < t; });
  return (it != entries.end() && it->term == term) ? it->count : 0;
}

std::vector<TermId> Document::tokens() const {
  std::vector<TermId> out;
  out.reserve(static_cast<std::size_t>(length_));
  for (const auto& e : entries) out.insert(out.end(), static_cast<std::size_t>(e.count), e.term);
  return out;
}

Corpus::Corpus(std::vector<Document> documents, std::shared_ptr<const Vocabulary> vocabulary)
    : documents_(std::move(documents)), vocabulary_(std::move(vocabulary)) {
  if (!vocabulary_) throw std::invalid_argument("corpus requires a vocabulary");
  const auto v = static_cast<TermId>(vocabulary_->size());
  for (const auto& d : documents_) {
    for (const auto& e : d.entries) {
      if (e.term < 0 || e.term >= v) {
        throw std::invalid_argument("document '" + d.id + "' has term index out of range");
      }
    }
  }
}

Count Corpus::total_tokens() const {
  return std::accumulate(documents_.begin(), documents_.end(), Count{0},
                         [](Count acc, const Document& d) { return acc + d.length(); });
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Document parse_document_line(const std::string& line, std::size_t vocab_size, long line_number,
                             std::string id) {
  std::istringstream tokens(line);
  std::string token;
  if (!(tokens >> token)) throw ParseError("empty line", line_number);
  long declared = 0;
  if (!parse_number(token, declared) || declared < 0) {
    throw ParseError("bad unique-term count '" + token + "'", line_number);
  }
  if (declared == 0) throw ParseError("empty document", line_number);
  std::vector<TermCount> entries;
  while (tokens >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
      throw ParseError("expected index:count, got '" + token + "'", line_number);
    }
    long long index = 0;
    long long count = 0;
    std::string_view view(token);
    if (!parse_number(view.substr(0, colon), index) || !parse_number(view.substr(colon + 1), count)) {
      throw ParseError("malformed pair '" + token + "'", line_number);
    }
    if (index < 0 || static_cast<std::size_t>(index) >= vocab_size) {
      throw ParseError("index out of range", line_number);
    }
    if (count < 1) throw ParseError("non-positive count", line_number);
    entries.push_back({static_cast<TermId>(index), static_cast<Count>(count)});
  }
  if (static_cast<long>(entries.size()) != declared) {
    throw ParseError("declared " + std::to_string(declared) + " terms but found " +
                         std::to_string(entries.size()),
                     line_number);
  }
  try {
    return Document(std::move(id), std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_number);
  }
}

Corpus load_corpus(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocabulary) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::vector<Document> docs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    docs.push_back(parse_document_line(line, vocabulary->size(), line_no,
                                       std::to_string(docs.size())));
  }
  if (docs.empty()) throw ParseError("empty corpus: " + path.string(), 0);
  return Corpus(std::move(docs), std::move(vocabulary));
}

Corpus load_corpus(const std::filesystem::path& path, const std::filesystem::path& vocab_path) {
  return load_corpus(path, std::make_shared<const Vocabulary>(Vocabulary::load(vocab_path)));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  for (const auto& doc : corpus.documents()) {
    out << doc.entries.size();
    for (const auto& e : doc.entries) out << ' ' << e.term << ':' << e.count;
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

CorpusSplit split_corpus(const Corpus& corpus, double heldout_fraction, std::uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("cannot split an empty corpus");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) {
    throw std::invalid_argument("heldout fraction must lie in (0, 1)");
  }
  const std::size_t d = corpus.size();
  const auto n_heldout = static_cast<std::size_t>(std::llround(static_cast<double>(d) * heldout_fraction));
  if (n_heldout == 0 || n_heldout >= d) {
    throw std::invalid_argument("heldout fraction leaves one side of the split empty");
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = d - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_heldout));
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(n_heldout), order.end());
  std::sort(held.begin(), held.end());
  std::sort(kept.begin(), kept.end());
  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<Document> docs;
    docs.reserve(idx.size());
    for (auto i : idx) docs.push_back(corpus[i]);
    return Corpus(std::move(docs), corpus.vocabulary_ptr());
  };
  return {gather(kept), gather(held)};
}

std::vector<double> inverse_document_frequency(const Corpus& corpus) {
  std::vector<Count> df(corpus.vocab_size(), 0);
  for (const auto& doc : corpus.documents()) {
    for (const auto& e : doc.entries) ++df[static_cast<std::size_t>(e.term)];
  }
  const double n_docs = static_cast<double>(corpus.size());
  std::vector<double> idf(df.size(), 0.0);
  for (std::size_t w = 0; w < df.size(); ++w) {
    if (df[w] > 0) idf[w] = std::log(n_docs / static_cast<double>(df[w]));
  }
  return idf;
}

std::vector<SparseVector> compute_tfidf(const Corpus& corpus) {
  if (corpus.empty()) throw std::invalid_argument("tf-idf of an empty corpus");
  const auto idf = inverse_document_frequency(corpus);
  std::vector<SparseVector> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) {
    SparseVector v;
    v.reserve(doc.entries.size());
    for (const auto& e : doc.entries) {
      v.push_back({e.term, static_cast<double>(e.count) * idf[static_cast<std::size_t>(e.term)]});
    }
    out.push_back(std::move(v));
  }
  return out;
}

SparseVector to_sparse_vector(const Document& doc) {
  SparseVector v;
  v.reserve(doc.entries.size());
  for (const auto& e : doc.entries) v.push_back({e.term, static_cast<double>(e.count)});
  return v;
}

}  // namespace thlda
