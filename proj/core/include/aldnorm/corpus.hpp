// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aldnorm {

using Tokens = std::vector<std::string>;

struct LabeledSentence {
  std::string label;
  Tokens tokens;

  bool operator==(const LabeledSentence&) const = default;
};

struct ClassificationCorpus {
  std::vector<std::string> labels;  // inventory, in first-seen order unless given
  std::vector<LabeledSentence> instances;

  bool operator==(const ClassificationCorpus&) const = default;
};

struct NormalizationPair {
  Tokens raw;
  Tokens normalized;

  bool operator==(const NormalizationPair&) const = default;
};

struct NormalizationCorpus {
  std::vector<NormalizationPair> pairs;

  bool operator==(const NormalizationCorpus&) const = default;
};

// slang token -> expansion tokens
using SlangDictionary = std::map<std::string, Tokens>;

// `label<TAB>text` per line, text tokenized with `tokenize`; blank lines are
// skipped. With an inventory, labels outside it are parse errors; without
// one, the inventory is collected from the file.
ClassificationCorpus load_classification(const std::filesystem::path& path,
                                         const std::vector<std::string>* inventory = nullptr);
ClassificationCorpus read_classification(std::istream& in, const std::string& source,
                                         const std::vector<std::string>* inventory = nullptr);
void write_classification(const std::filesystem::path& path, const ClassificationCorpus& corpus);

// `raw tokens<TAB>normalized tokens`, both sides space-separated.
NormalizationCorpus load_normalization(const std::filesystem::path& path);
NormalizationCorpus read_normalization(std::istream& in, const std::string& source);
void write_normalization(const std::filesystem::path& path, const NormalizationCorpus& corpus);

// `slang<TAB>expansion` per line.
SlangDictionary load_slang_dictionary(const std::filesystem::path& path);
SlangDictionary read_slang_dictionary(std::istream& in, const std::string& source);
void write_slang_dictionary(const std::filesystem::path& path, const SlangDictionary& dictionary);

// One pair per sentence that contains at least one dictionary key: the
// original tokens and the tokens with every key spliced out for its expansion.
NormalizationCorpus augment_with_slang(const ClassificationCorpus& corpus, const SlangDictionary& dictionary);

std::string join_tokens(const Tokens& tokens);

}  // namespace aldnorm
