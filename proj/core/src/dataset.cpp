// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "aldnorm/errors.hpp"

namespace aldnorm {

void Lexicon::save(const std::filesystem::path& dir) const {
  words.save(dir / "words.vocab");
  chars.save(dir / "chars.vocab");
  targets.save(dir / "targets.vocab");
  std::ofstream out(dir / "labels.txt", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "labels.txt").string());
  for (const auto& l : labels) out << l << '\n';
}

Lexicon Lexicon::load(const std::filesystem::path& dir) {
  Lexicon lex;
  lex.words = Vocabulary::load(dir / "words.vocab");
  lex.chars = Vocabulary::load(dir / "chars.vocab");
  lex.targets = Vocabulary::load(dir / "targets.vocab");
  std::ifstream in(dir / "labels.txt", std::ios::binary);
  if (!in) throw ParseError((dir / "labels.txt").string() + ": cannot open file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError((dir / "labels.txt").string(), lineno, "empty label");
    if (std::find(lex.labels.begin(), lex.labels.end(), line) != lex.labels.end()) {
      throw ParseError((dir / "labels.txt").string(), lineno, "duplicate label '" + line + "'");
    }
    lex.labels.push_back(line);
  }
  return lex;
}

Lexicon build_lexicon(const ClassificationCorpus* ald, const NormalizationCorpus* tn) {
  Lexicon lex;
  auto add_source = [&](const Tokens& tokens) {
    for (const auto& t : tokens) {
      lex.words.add(t);
      for (const auto& c : codepoints(t)) lex.chars.add(c);
    }
  };
  if (ald) {
    lex.labels = ald->labels;
    for (const auto& s : ald->instances) add_source(s.tokens);
  }
  if (tn) {
    for (const auto& p : tn->pairs) {
      add_source(p.raw);
      for (const auto& t : p.normalized) lex.targets.add(t);
    }
  }
  return lex;
}

ModelConfig sized_config(ModelConfig base, const Lexicon& lexicon) {
  base.word_vocab = lexicon.words.size();
  base.char_vocab = lexicon.chars.size();
  base.target_vocab = lexicon.targets.size();
  base.num_labels = std::max<std::size_t>(lexicon.labels.size(), 2);
  return base;
}

EncodedSentence encode_tokens(const Tokens& tokens, const Lexicon& lexicon, std::size_t max_len, EncodeStats* stats) {
  if (tokens.empty()) throw ContractError("encode: empty sentence");
  if (tokens.size() > max_len) {
    if (stats) ++stats->truncated;
    Tokens cut(tokens.begin(), tokens.begin() + static_cast<long>(max_len));
    return encode_sentence(cut, lexicon.words, lexicon.chars);
  }
  return encode_sentence(tokens, lexicon.words, lexicon.chars);
}

std::vector<AldExample> encode_classification(const ClassificationCorpus& corpus, const Lexicon& lexicon,
                                              std::size_t max_len, EncodeStats* stats) {
  std::vector<AldExample> out;
  out.reserve(corpus.instances.size());
  for (const auto& s : corpus.instances) {
    auto it = std::find(lexicon.labels.begin(), lexicon.labels.end(), s.label);
    if (it == lexicon.labels.end()) throw ConfigError("encode: label '" + s.label + "' is not in the inventory");
    out.push_back({encode_tokens(s.tokens, lexicon, max_len, stats), static_cast<int>(it - lexicon.labels.begin())});
  }
  return out;
}

std::vector<TnExample> encode_normalization(const NormalizationCorpus& corpus, const Lexicon& lexicon,
                                            std::size_t max_len, EncodeStats* stats) {
  std::vector<TnExample> out;
  out.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs) {
    TnExample ex;
    ex.source = encode_tokens(p.raw, lexicon, max_len, stats);
    ex.raw.assign(p.raw.begin(), p.raw.begin() + static_cast<long>(std::min(max_len, p.raw.size())));
    const std::size_t m = std::min(max_len, p.normalized.size());
    if (m < p.normalized.size() && stats && p.raw.size() <= max_len) ++stats->truncated;
    ex.gold.assign(p.normalized.begin(), p.normalized.begin() + static_cast<long>(m));
    ex.target = lexicon.targets.encode(ex.gold);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace aldnorm
