// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "aldnorm/errors.hpp"
#include "aldnorm/vocabulary.hpp"

namespace aldnorm {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot write file");
  return out;
}

Tokens split_spaces(std::string_view text) {
  Tokens out;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

// Splits `line` at its single TAB. Returns false when there is none.
bool split_tab(const std::string& line, std::string& left, std::string& right) {
  auto pos = line.find('\t');
  if (pos == std::string::npos) return false;
  left = line.substr(0, pos);
  right = line.substr(pos + 1);
  if (!right.empty() && right.back() == '\r') right.pop_back();
  return true;
}

}  // namespace

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

ClassificationCorpus read_classification(std::istream& in, const std::string& source,
                                         const std::vector<std::string>* inventory) {
  ClassificationCorpus corpus;
  if (inventory) corpus.labels = *inventory;
  std::string line, label, text;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    if (!split_tab(line, label, text)) throw ParseError(source, lineno, "missing TAB between label and text");
    if (label.empty()) throw ParseError(source, lineno, "empty label");
    if (text.find('\t') != std::string::npos) throw ParseError(source, lineno, "more than one TAB");
    auto known = std::find(corpus.labels.begin(), corpus.labels.end(), label);
    if (known == corpus.labels.end()) {
      if (inventory) throw ParseError(source, lineno, "unknown label '" + label + "'");
      corpus.labels.push_back(label);
    }
    auto tokens = tokenize(text);
    if (tokens.empty()) throw ParseError(source, lineno, "empty text");
    corpus.instances.push_back({label, std::move(tokens)});
  }
  return corpus;
}

ClassificationCorpus load_classification(const std::filesystem::path& path,
                                         const std::vector<std::string>* inventory) {
  auto in = open_input(path);
  return read_classification(in, path.string(), inventory);
}

void write_classification(const std::filesystem::path& path, const ClassificationCorpus& corpus) {
  auto out = open_output(path);
  for (const auto& s : corpus.instances) out << s.label << '\t' << join_tokens(s.tokens) << '\n';
}

NormalizationCorpus read_normalization(std::istream& in, const std::string& source) {
  NormalizationCorpus corpus;
  std::string line, raw, norm;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    if (!split_tab(line, raw, norm)) throw ParseError(source, lineno, "missing TAB between raw and normalized text");
    if (norm.find('\t') != std::string::npos) throw ParseError(source, lineno, "more than one TAB");
    NormalizationPair p{split_spaces(raw), split_spaces(norm)};
    if (p.raw.empty()) throw ParseError(source, lineno, "empty raw side");
    if (p.normalized.empty()) throw ParseError(source, lineno, "empty normalized side");
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

NormalizationCorpus load_normalization(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_normalization(in, path.string());
}

void write_normalization(const std::filesystem::path& path, const NormalizationCorpus& corpus) {
  auto out = open_output(path);
  for (const auto& p : corpus.pairs) out << join_tokens(p.raw) << '\t' << join_tokens(p.normalized) << '\n';
}

SlangDictionary read_slang_dictionary(std::istream& in, const std::string& source) {
  SlangDictionary dict;
  std::string line, key, expansion;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    if (!split_tab(line, key, expansion)) throw ParseError(source, lineno, "missing TAB between slang and expansion");
    if (expansion.find('\t') != std::string::npos) throw ParseError(source, lineno, "more than one TAB");
    auto key_tokens = split_spaces(key);
    auto exp_tokens = split_spaces(expansion);
    if (key_tokens.size() != 1) throw ParseError(source, lineno, "slang side must be exactly one token");
    if (exp_tokens.empty()) throw ParseError(source, lineno, "empty expansion");
    if (!dict.emplace(key_tokens[0], std::move(exp_tokens)).second) {
      throw ParseError(source, lineno, "duplicate slang entry '" + key_tokens[0] + "'");
    }
  }
  return dict;
}

SlangDictionary load_slang_dictionary(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_slang_dictionary(in, path.string());
}

void write_slang_dictionary(const std::filesystem::path& path, const SlangDictionary& dictionary) {
  auto out = open_output(path);
  for (const auto& [k, v] : dictionary) out << k << '\t' << join_tokens(v) << '\n';
}

NormalizationCorpus augment_with_slang(const ClassificationCorpus& corpus, const SlangDictionary& dictionary) {
  NormalizationCorpus out;
  for (const auto& s : corpus.instances) {
    Tokens normalized;
    bool hit = false;
    for (const auto& tok : s.tokens) {
      auto it = dictionary.find(tok);
      if (it == dictionary.end()) {
        normalized.push_back(tok);
      } else {
        hit = true;
        normalized.insert(normalized.end(), it->second.begin(), it->second.end());
      }
    }
    if (hit) out.pairs.push_back({s.tokens, std::move(normalized)});
  }
  return out;
}

}  // namespace aldnorm
