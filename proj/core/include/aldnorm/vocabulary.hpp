// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aldnorm {

// Lowercases ASCII letters and splits on whitespace; each ASCII punctuation
// character becomes its own token.
std::vector<std::string> tokenize(std::string_view text);

// Splits a UTF-8 string into one string per codepoint. Bytes that do not form
// a valid sequence are kept as single-byte units.
std::vector<std::string> codepoints(std::string_view token);

// Token <-> id mapping. Ids 0..3 are reserved for PAD, UNK, BOS and EOS.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kReserved = 4;

  Vocabulary();

  // Returns the id of `token`, inserting it if new.
  int add(std::string_view token);
  // Unseen tokens map to kUnk.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const noexcept { return tokens_.size(); }

  std::vector<int> encode(std::span<const std::string> tokens) const;

  // One token per line; line k (0-based) holds id k + kReserved.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace aldnorm
