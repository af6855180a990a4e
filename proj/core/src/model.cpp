// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/model.hpp"

#include <sstream>

namespace aldnorm {

ModelConfig ModelConfig::tiny(std::size_t word_vocab, std::size_t char_vocab, std::size_t target_vocab,
                              std::size_t num_labels) {
  ModelConfig c;
  c.word_vocab = word_vocab;
  c.char_vocab = char_vocab;
  c.target_vocab = target_vocab;
  c.num_labels = num_labels;
  c.d_word = 4;
  c.d_char = 3;
  c.d_sbw = 3;
  c.d_pe = 2;
  c.max_len = 8;
  c.d_model = 8;
  c.heads = 2;
  c.ffn_multiplier = 2;
  c.shared_layers = 1;
  c.ald_layers = 1;
  c.tn_layers = 2;
  c.decoder_layers = 2;
  c.classifier_hidden = 4;
  c.discriminator_hidden = 4;
  c.discriminator_layers = 2;
  return c;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model: ") + name + " must be positive");
  };
  positive(d_word, "d_word");
  positive(d_char, "d_char");
  positive(d_sbw, "d_sbw");
  positive(char_width, "char_width");
  positive(d_pe, "d_pe");
  positive(max_len, "max_len");
  positive(d_model, "d_model");
  positive(heads, "heads");
  positive(ffn_multiplier, "ffn_multiplier");
  positive(shared_layers, "shared_layers");
  positive(ald_layers, "ald_layers");
  positive(tn_layers, "tn_layers");
  positive(decoder_layers, "decoder_layers");
  positive(classifier_hidden, "classifier_hidden");
  positive(discriminator_hidden, "discriminator_hidden");
  positive(discriminator_layers, "discriminator_layers");
  if (d_model % heads != 0) {
    throw ConfigError("model: d_model " + std::to_string(d_model) + " not divisible by " + std::to_string(heads) +
                      " heads");
  }
  if (num_labels < 2) throw ConfigError("model: at least two labels required");
  const auto reserved = static_cast<std::size_t>(Vocabulary::kReserved);
  if (word_vocab < reserved || char_vocab < reserved || target_vocab < reserved) {
    throw ConfigError("model: vocabularies must include the reserved ids");
  }
}

EmbeddingConfig ModelConfig::embedding() const {
  EmbeddingConfig e;
  e.word_vocab = word_vocab;
  e.char_vocab = char_vocab;
  e.d_word = d_word;
  e.d_char = d_char;
  e.d_sbw = d_sbw;
  e.char_width = char_width;
  e.d_pe = d_pe;
  e.max_len = max_len;
  return e;
}

EncoderConfig ModelConfig::encoder(EncoderRole role) const {
  EncoderConfig e;
  e.d_in = d_word + d_sbw + d_pe;
  e.d_model = d_model;
  e.heads = heads;
  e.ffn_multiplier = ffn_multiplier;
  e.max_len = max_len;
  switch (role) {
    case EncoderRole::shared: e.layers = shared_layers; break;
    case EncoderRole::ald_private: e.layers = ald_layers; break;
    case EncoderRole::tn_private: e.layers = tn_layers; break;
  }
  return e;
}

DecoderConfig ModelConfig::decoder() const {
  DecoderConfig d;
  d.d_model = d_model;
  d.memory_width = 2 * d_model;
  d.heads = heads;
  d.layers = decoder_layers;
  d.ffn_multiplier = ffn_multiplier;
  d.target_vocab = target_vocab;
  // room for BOS plus a full-length target
  d.max_len = max_len + 1;
  return d;
}

std::string ModelConfig::canonical() const {
  std::ostringstream o;
  o << "word_vocab=" << word_vocab << ";char_vocab=" << char_vocab << ";target_vocab=" << target_vocab
    << ";num_labels=" << num_labels << ";d_word=" << d_word << ";d_char=" << d_char << ";d_sbw=" << d_sbw
    << ";char_width=" << char_width << ";d_pe=" << d_pe << ";max_len=" << max_len << ";d_model=" << d_model
    << ";heads=" << heads << ";ffn_multiplier=" << ffn_multiplier << ";shared_layers=" << shared_layers
    << ";ald_layers=" << ald_layers << ";tn_layers=" << tn_layers << ";decoder_layers=" << decoder_layers
    << ";classifier_hidden=" << classifier_hidden << ";discriminator_hidden=" << discriminator_hidden
    << ";discriminator_layers=" << discriminator_layers;
  return o.str();
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t ModelConfig::fingerprint() const { return fnv1a(canonical()); }

std::string_view group_name(ParamGroup group) {
  switch (group) {
    case ParamGroup::embeddings: return "embeddings";
    case ParamGroup::shared: return "shared";
    case ParamGroup::ald_private: return "ald_private";
    case ParamGroup::tn_private: return "tn_private";
    case ParamGroup::classifier: return "classifier";
    case ParamGroup::normalizer: return "normalizer";
    case ParamGroup::discriminator: return "discriminator";
  }
  return "unknown";
}

namespace {
const ModelConfig& validated(const ModelConfig& c) {
  c.validate();
  return c;
}
}  // namespace

template <typename T>
JointModel<T>::JointModel(const ModelConfig& config, std::uint64_t seed)
    : config_(validated(config)),
      init_rng_(seed),
      embeddings_(config.embedding(), init_rng_),
      shared_(EncoderRole::shared, config.encoder(EncoderRole::shared), init_rng_),
      ald_private_(EncoderRole::ald_private, config.encoder(EncoderRole::ald_private), init_rng_),
      tn_private_(EncoderRole::tn_private, config.encoder(EncoderRole::tn_private), init_rng_),
      classifier_(config.d_model, config.classifier_hidden, config.num_labels, init_rng_),
      normalizer_(config.decoder(), init_rng_),
      discriminator_(config.d_model, config.discriminator_hidden, config.discriminator_layers, init_rng_) {}

template <typename T>
SentenceFeatures<T> JointModel<T>::features(const EncodedSentence& sentence, TaskId task, ForwardContext& ctx) const {
  SentenceFeatures<T> f;
  f.input = embeddings_.embed_sequence(sentence);
  f.shared = shared_.encode(f.input, {}, ctx);
  f.priv = (task == TaskId::ald ? ald_private_ : tn_private_).encode(f.input, {}, ctx);
  return f;
}

template <typename T>
Tensor<T> JointModel<T>::classify(const SentenceFeatures<T>& f, ForwardContext& ctx) const {
  return classifier_.classify(f.shared, f.priv, {}, ctx);
}

template <typename T>
Tensor<T> JointModel<T>::classify(const EncodedSentence& sentence, ForwardContext& ctx) const {
  return classify(features(sentence, TaskId::ald, ctx), ctx);
}

template <typename T>
Tensor<T> JointModel<T>::memory(const SentenceFeatures<T>& f) const {
  return concat({f.shared, f.priv}, 1);
}

template <typename T>
Tensor<T> JointModel<T>::normalization_loss(const SentenceFeatures<T>& f, std::span<const int> target,
                                            ForwardContext& ctx) const {
  return normalizer_.loss(memory(f), {}, target, ctx);
}

template <typename T>
DecodeResult JointModel<T>::normalize(const EncodedSentence& sentence, std::size_t max_len, bool keep_trace) const {
  ForwardContext inference;
  return normalizer_.decode(memory(features(sentence, TaskId::tn, inference)), {}, max_len, keep_trace);
}

template <typename T>
Tensor<T> JointModel<T>::discriminate(const Tensor<T>& shared, bool reverse, ForwardContext& ctx) const {
  return discriminator_.discriminate(shared, {}, reverse, ctx);
}

template <typename T>
AttentionCapture JointModel<T>::capture_attention(const EncodedSentence& sentence) const {
  ForwardContext inference;
  AttentionCapture c;
  auto x = embeddings_.embed_sequence(sentence);
  shared_.encode(x, {}, inference, &c.shared);
  ald_private_.encode(x, {}, inference, &c.ald_private);
  tn_private_.encode(x, {}, inference, &c.tn_private);
  return c;
}

template <typename T>
const EncoderStack<T>& JointModel<T>::encoder(EncoderRole role) const {
  switch (role) {
    case EncoderRole::shared: return shared_;
    case EncoderRole::ald_private: return ald_private_;
    case EncoderRole::tn_private: return tn_private_;
  }
  return shared_;
}

template <typename T>
ParameterList<T> JointModel<T>::parameters(ParamGroup group) const {
  ParameterList<T> out;
  const std::string prefix = std::string(group_name(group)) + ".";
  switch (group) {
    case ParamGroup::embeddings: embeddings_.collect(out, prefix); break;
    case ParamGroup::shared: shared_.collect(out, prefix); break;
    case ParamGroup::ald_private: ald_private_.collect(out, prefix); break;
    case ParamGroup::tn_private: tn_private_.collect(out, prefix); break;
    case ParamGroup::classifier: classifier_.collect(out, prefix); break;
    case ParamGroup::normalizer: normalizer_.collect(out, prefix); break;
    case ParamGroup::discriminator: discriminator_.collect(out, prefix); break;
  }
  return out;
}

template <typename T>
ParameterList<T> JointModel<T>::parameters(std::span<const ParamGroup> groups) const {
  ParameterList<T> out;
  for (auto g : groups) {
    auto part = parameters(g);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

template <typename T>
ParameterList<T> JointModel<T>::parameters() const {
  return parameters(std::span<const ParamGroup>(kAllGroups));
}

template class JointModel<float>;
template class JointModel<double>;

}  // namespace aldnorm
