// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/decoders.hpp"

#include <numeric>

#include "aldnorm/vocabulary.hpp"

namespace aldnorm {

template <typename T>
ClassifierHead<T>::ClassifierHead(std::size_t d_model, std::size_t hidden, std::size_t num_labels, Rng& rng)
    : num_labels_(num_labels), lstm_(2 * d_model, hidden, 1, rng), projection_(2 * hidden, num_labels, rng) {
  if (num_labels < 2) throw ConfigError("classifier: at least two labels required");
}

template <typename T>
Tensor<T> ClassifierHead<T>::logits(const Tensor<T>& shared, const Tensor<T>& private_features,
                                    const AttentionMask& mask, ForwardContext& ctx) const {
  if (shared.rows() != private_features.rows()) {
    throw ContractError("classify: shared features have " + std::to_string(shared.rows()) +
                        " rows, private features " + std::to_string(private_features.rows()));
  }
  auto joined = concat({shared, private_features}, 1);
  auto out = lstm_.forward(joined, ctx, mask.key_padding);
  return projection_(apply_dropout(out.pooled, ctx));
}

template <typename T>
Tensor<T> ClassifierHead<T>::classify(const Tensor<T>& shared, const Tensor<T>& private_features,
                                      const AttentionMask& mask, ForwardContext& ctx) const {
  return softmax(logits(shared, private_features, mask, ctx), 1);
}

template <typename T>
void ClassifierHead<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  lstm_.collect(out, prefix + "lstm.");
  projection_.collect(out, prefix + "out.");
}

template <typename T>
DecoderLayer<T>::DecoderLayer(std::size_t d_model, std::size_t memory_width, std::size_t heads,
                              std::size_t ffn_hidden, Rng& rng)
    : self_attention_(d_model, d_model, d_model, heads, rng),
      norm1_(d_model),
      cross_attention_(d_model, memory_width, d_model, heads, rng),
      norm2_(d_model),
      ffn_(d_model, ffn_hidden, rng),
      norm3_(d_model) {}

template <typename T>
Tensor<T> DecoderLayer<T>::forward(const Tensor<T>& x, const Tensor<T>& memory, const AttentionMask& memory_mask,
                                   ForwardContext& ctx) const {
  AttentionMask causal;
  causal.causal = true;
  auto h = norm1_(add(x, apply_sublayer_dropout(self_attention_.forward(x, x, causal), ctx)));
  h = norm2_(add(h, apply_sublayer_dropout(cross_attention_.forward(h, memory, memory_mask), ctx)));
  return norm3_(add(h, apply_sublayer_dropout(ffn_(h), ctx)));
}

template <typename T>
void DecoderLayer<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  self_attention_.collect(out, prefix + "self_attn.");
  norm1_.collect(out, prefix + "norm1.");
  cross_attention_.collect(out, prefix + "cross_attn.");
  norm2_.collect(out, prefix + "norm2.");
  ffn_.collect(out, prefix + "ffn.");
  norm3_.collect(out, prefix + "norm3.");
}

template <typename T>
NormalizerDecoder<T>::NormalizerDecoder(const DecoderConfig& config, Rng& rng) : config_(config) {
  if (config.target_vocab < static_cast<std::size_t>(Vocabulary::kReserved)) {
    throw ConfigError("normalizer: target vocabulary must include the reserved ids");
  }
  if (config.layers == 0) throw ConfigError("normalizer: at least one decoder layer required");
  target_table_ = make_weight<T>(config.target_vocab, config.d_model, rng);
  position_table_ = make_weight<T>(config.max_len, config.d_model, rng);
  for (std::size_t l = 0; l < config.layers; ++l) {
    layers_.emplace_back(config.d_model, config.memory_width, config.heads, config.ffn_multiplier * config.d_model,
                         rng);
  }
  projection_ = Linear<T>(config.d_model, config.target_vocab, rng);
}

template <typename T>
Tensor<T> NormalizerDecoder<T>::logits(const Tensor<T>& memory, const AttentionMask& memory_mask,
                                       std::span<const int> input_ids, ForwardContext& ctx) const {
  const std::size_t m = input_ids.size();
  if (m == 0) throw ContractError("normalizer: empty decoder input");
  if (m > config_.max_len) {
    throw SequenceLengthError("normalizer: decoder input of " + std::to_string(m) + " exceeds maximum length " +
                              std::to_string(config_.max_len));
  }
  if (memory.cols() != config_.memory_width) {
    throw ShapeError("normalizer: memory " + shape_str(memory.shape()) + " does not have width " +
                     std::to_string(config_.memory_width));
  }
  std::vector<int> positions(m);
  std::iota(positions.begin(), positions.end(), 0);
  auto x = add(gather_rows(target_table_, input_ids), gather_rows(position_table_, positions));
  x = apply_sublayer_dropout(x, ctx);
  for (const auto& layer : layers_) x = layer.forward(x, memory, memory_mask, ctx);
  return projection_(x);
}

template <typename T>
Tensor<T> NormalizerDecoder<T>::loss(const Tensor<T>& memory, const AttentionMask& memory_mask,
                                     std::span<const int> gold, ForwardContext& ctx) const {
  if (gold.empty()) throw ContractError("normalizer: gold target has length 0");
  std::vector<int> inputs{Vocabulary::kBos};
  inputs.insert(inputs.end(), gold.begin(), gold.end());
  std::vector<int> targets(gold.begin(), gold.end());
  targets.push_back(Vocabulary::kEos);
  auto ce = cross_entropy(logits(memory, memory_mask, inputs, ctx), targets);
  return scale(ce, T(1) / static_cast<T>(targets.size()));
}

template <typename T>
DecodeResult NormalizerDecoder<T>::decode(const Tensor<T>& memory, const AttentionMask& memory_mask,
                                          std::size_t max_len, bool keep_trace) const {
  if (max_len > config_.max_len) {
    throw SequenceLengthError("normalizer: max_len " + std::to_string(max_len) + " exceeds " +
                              std::to_string(config_.max_len));
  }
  DecodeResult result;
  ForwardContext inference;
  std::vector<int> prefix{Vocabulary::kBos};
  for (std::size_t step = 0; step < max_len; ++step) {
    auto z = logits(memory, memory_mask, prefix, inference);
    const std::size_t V = z.cols();
    auto last = softmax(slice_rows(z, z.rows() - 1, z.rows()), 1);
    auto p = last.values();
    std::size_t best = 0;
    for (std::size_t k = 1; k < V; ++k) {
      if (p[k] > p[best]) best = k;
    }
    const int token = static_cast<int>(best);
    if (keep_trace) result.trace.push_back({token, std::vector<double>(p.begin(), p.end())});
    if (token == Vocabulary::kEos) return result;
    result.tokens.push_back(token);
    prefix.push_back(token);
  }
  result.truncated = true;
  return result;
}

template <typename T>
void NormalizerDecoder<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + "target_table", target_table_});
  out.push_back({prefix + "position_table", position_table_});
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].collect(out, prefix + "layer" + std::to_string(l) + ".");
  projection_.collect(out, prefix + "out.");
}

template class ClassifierHead<float>;
template class ClassifierHead<double>;
template class DecoderLayer<float>;
template class DecoderLayer<double>;
template class NormalizerDecoder<float>;
template class NormalizerDecoder<double>;

}  // namespace aldnorm
