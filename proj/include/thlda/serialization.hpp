#pragma once

#include <filesystem>
#include <string>

#include "thlda/corpus.hpp"
#include "thlda/lda.hpp"
#include "thlda/sampler.hpp"
#include "thlda/source_knowledge.hpp"
#include "thlda/topic_tree.hpp"

namespace thlda {

// {label, weights: {term: weight}, children: [...]}; terms by vocabulary string.
std::string hierarchy_to_json(const SourceHierarchy& hierarchy, const Vocabulary& vocab);
SourceHierarchy hierarchy_from_json(const std::string& text, const Vocabulary& vocab);
void save_hierarchy(const SourceHierarchy& hierarchy, const Vocabulary& vocab, const std::filesystem::path& path);
SourceHierarchy load_hierarchy(const std::filesystem::path& path, const Vocabulary& vocab);

// {id, level, label, n_docs, top_words: [[term, count], ...], children: [...]}.
// top_n == 0 lists every word.
std::string tree_to_json(const TopicTree& tree, const Vocabulary& vocab, std::size_t top_n = 0);

// Full sampler checkpoint: hyperparameters, tree structure with ids and
// labels, and per-document paths and levels. Counts are rebuilt from the
// assignments on load.
std::string state_to_json(const SamplerState& state, const Corpus& corpus);
SamplerState state_from_json(const std::string& text, const Corpus& corpus);
void save_state(const SamplerState& state, const Corpus& corpus, const std::filesystem::path& path);
SamplerState load_state(const std::filesystem::path& path, const Corpus& corpus);

std::string lda_state_to_json(const LdaState& state, const Corpus& corpus);
LdaState lda_state_from_json(const std::string& text, const Corpus& corpus);
void save_lda_state(const LdaState& state, const Corpus& corpus, const std::filesystem::path& path);
LdaState load_lda_state(const std::filesystem::path& path, const Corpus& corpus);

// "thlda" or "lda", read from a checkpoint's format field.
std::string checkpoint_format(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace thlda
