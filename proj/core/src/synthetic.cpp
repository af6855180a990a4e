// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/synthetic.hpp"

#include <set>
#include <unordered_map>

#include "aldnorm/errors.hpp"
#include "aldnorm/random.hpp"

namespace aldnorm {

void SyntheticSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synthetic spec: " + what);
  };
  require(!labels.empty(), "at least one class required");
  require(std::set<std::string>(labels.begin(), labels.end()).size() == labels.size(), "duplicate labels");
  require(cues_per_class >= 1, "cues_per_class must be positive");
  require(filler_words >= 1, "filler_words must be positive");
  require(min_len >= 1 && min_len <= max_len, "bad length range");
  require(min_cues >= 1 && min_cues <= max_cues, "bad cue count range");
  require(max_cues + 1 <= min_len, "sentences too short for cues plus a marker");
  require(marker_rate >= 0.0 && marker_rate <= 1.0, "marker_rate outside [0, 1]");
  require(marker_rate == 0.0 || (ald_markers >= 1 && tn_markers >= 1), "markers required when marker_rate > 0");
  require(dictionary_size <= labels.size() * cues_per_class + filler_words, "dictionary larger than the clean vocabulary");
  for (double p : {ald_train_corruption, ald_eval_corruption, tn_corruption}) {
    require(p >= 0.0 && p <= 1.0, "corruption rates must lie in [0, 1]");
  }
}

namespace {

class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string make(std::size_t min_len, std::size_t max_len, bool digits) {
    static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
    static constexpr char kMixed[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    while (true) {
      const std::size_t len = min_len + rng_.below(max_len - min_len + 1);
      std::string w;
      for (std::size_t i = 0; i < len; ++i) {
        w.push_back(digits ? kMixed[rng_.below(36)] : kLetters[rng_.below(26)]);
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

}  // namespace

SyntheticCorpora generate_synthetic(std::uint64_t seed, const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(seed);
  WordFactory words(rng);
  SyntheticCorpora out;
  const std::size_t K = spec.labels.size();

  out.cues.resize(K);
  for (auto& c : out.cues)
    for (std::size_t i = 0; i < spec.cues_per_class; ++i) c.push_back(words.make(4, 7, false));
  for (std::size_t i = 0; i < spec.filler_words; ++i) out.filler.push_back(words.make(3, 6, false));
  for (std::size_t i = 0; i < spec.ald_markers; ++i) out.ald_markers.push_back(words.make(3, 5, false));
  for (std::size_t i = 0; i < spec.tn_markers; ++i) out.tn_markers.push_back(words.make(3, 5, false));

  std::vector<std::string> clean_pool;
  if (spec.corrupt_cues) {
    for (const auto& c : out.cues) clean_pool.insert(clean_pool.end(), c.begin(), c.end());
  }
  clean_pool.insert(clean_pool.end(), out.filler.begin(), out.filler.end());
  if (!spec.corrupt_cues) {
    for (const auto& c : out.cues) clean_pool.insert(clean_pool.end(), c.begin(), c.end());
  }
  std::unordered_map<std::string, std::string> corrupt;  // clean -> slang
  for (std::size_t i = 0; i < spec.dictionary_size; ++i) {
    auto slang = words.make(2, 4, true);
    corrupt.emplace(clean_pool[i], slang);
    out.dictionary.emplace(slang, Tokens{clean_pool[i]});
  }

  auto maybe_corrupt = [&](Tokens tokens, double rate) {
    for (auto& t : tokens) {
      auto it = corrupt.find(t);
      if (it != corrupt.end() && rng.bernoulli(rate)) t = it->second;
    }
    return tokens;
  };
  auto length = [&] { return spec.min_len + rng.below(spec.max_len - spec.min_len + 1); };
  auto pick = [&](const std::vector<std::string>& from) { return from[rng.below(from.size())]; };

  auto ald_sentence = [&](std::size_t label) {
    const std::size_t n = length();
    const std::size_t cues = spec.min_cues + rng.below(spec.max_cues - spec.min_cues + 1);
    Tokens t;
    for (std::size_t i = 0; i < cues; ++i) t.push_back(pick(out.cues[label]));
    if (rng.bernoulli(spec.marker_rate)) t.push_back(pick(out.ald_markers));
    while (t.size() < n) t.push_back(pick(out.filler));
    shuffle(t, rng);
    return t;
  };
  auto ald_split = [&](std::size_t count, double corruption) {
    ClassificationCorpus c;
    c.labels = spec.labels;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t label = i % K;
      c.instances.push_back({spec.labels[label], maybe_corrupt(ald_sentence(label), corruption)});
    }
    shuffle(c.instances, rng);
    return c;
  };
  std::vector<std::string> tn_pool;
  for (const auto& c : out.cues) tn_pool.insert(tn_pool.end(), c.begin(), c.end());
  tn_pool.insert(tn_pool.end(), out.filler.begin(), out.filler.end());
  auto tn_split = [&](std::size_t count) {
    NormalizationCorpus c;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t n = length();
      Tokens clean;
      if (rng.bernoulli(spec.marker_rate)) clean.push_back(pick(out.tn_markers));
      while (clean.size() < n) clean.push_back(pick(tn_pool));
      shuffle(clean, rng);
      c.pairs.push_back({maybe_corrupt(clean, spec.tn_corruption), clean});
    }
    return c;
  };

  out.ald_train = ald_split(spec.ald_train, spec.ald_train_corruption);
  out.ald_dev = ald_split(spec.ald_dev, spec.ald_eval_corruption);
  out.ald_test = ald_split(spec.ald_test, spec.ald_eval_corruption);
  out.tn_train = tn_split(spec.tn_train);
  out.tn_dev = tn_split(spec.tn_dev);
  out.tn_test = tn_split(spec.tn_test);
  return out;
}

}  // namespace aldnorm
