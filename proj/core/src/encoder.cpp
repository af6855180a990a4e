// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/encoder.hpp"

#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace aldnorm {

std::string_view role_name(EncoderRole role) {
  switch (role) {
    case EncoderRole::shared: return "shared";
    case EncoderRole::ald_private: return "ald_private";
    case EncoderRole::tn_private: return "tn_private";
  }
  return "unknown";
}

std::optional<EncoderRole> parse_role(std::string_view name) {
  for (auto r : {EncoderRole::shared, EncoderRole::ald_private, EncoderRole::tn_private}) {
    if (role_name(r) == name) return r;
  }
  return std::nullopt;
}

template <typename T>
EncoderLayer<T>::EncoderLayer(std::size_t d_model, std::size_t heads, std::size_t ffn_hidden, Rng& rng)
    : attention_(d_model, d_model, d_model, heads, rng),
      norm1_(d_model),
      ffn_(d_model, ffn_hidden, rng),
      norm2_(d_model) {}

template <typename T>
Tensor<T> EncoderLayer<T>::forward(const Tensor<T>& x, const AttentionMask& mask, ForwardContext& ctx,
                                   std::vector<Tensor<T>>* weights) const {
  auto attended = attention_.forward(x, x, mask, weights);
  auto h = norm1_(add(x, apply_sublayer_dropout(attended, ctx)));
  return norm2_(add(h, apply_sublayer_dropout(ffn_(h), ctx)));
}

template <typename T>
void EncoderLayer<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  attention_.collect(out, prefix + "attn.");
  norm1_.collect(out, prefix + "norm1.");
  ffn_.collect(out, prefix + "ffn.");
  norm2_.collect(out, prefix + "norm2.");
}

template <typename T>
EncoderStack<T>::EncoderStack(EncoderRole role, const EncoderConfig& config, Rng& rng)
    : role_(role), config_(config) {
  if (config.layers == 0) throw ConfigError("encoder: at least one layer required");
  if (config.heads == 0 || config.d_model % config.heads != 0) {
    throw ConfigError("encoder: d_model " + std::to_string(config.d_model) + " not divisible by " +
                      std::to_string(config.heads) + " heads");
  }
  input_projection_ = Linear<T>(config.d_in, config.d_model, rng);
  layers_.reserve(config.layers);
  for (std::size_t l = 0; l < config.layers; ++l) {
    layers_.emplace_back(config.d_model, config.heads, config.ffn_multiplier * config.d_model, rng);
  }
}

template <typename T>
Tensor<T> EncoderStack<T>::encode(const Tensor<T>& x, const AttentionMask& mask, ForwardContext& ctx,
                                  AttentionRecord* record) const {
  const std::size_t n = x.rows();
  if (n > config_.max_len) {
    throw SequenceLengthError("encoder: " + std::to_string(n) + " tokens exceed maximum length " +
                              std::to_string(config_.max_len));
  }
  if (x.cols() != config_.d_in) {
    throw ShapeError("encoder: input " + shape_str(x.shape()) + " does not have width " + std::to_string(config_.d_in));
  }
  if (record) {
    record->length = n;
    record->weights.clear();
  }
  auto h = apply_sublayer_dropout(input_projection_(x), ctx);
  std::vector<Tensor<T>> weights;
  for (const auto& layer : layers_) {
    h = layer.forward(h, mask, ctx, record ? &weights : nullptr);
    if (record) {
      auto& per_head = record->weights.emplace_back();
      for (const auto& w : weights) per_head.emplace_back(w.values().begin(), w.values().end());
    }
  }
  return h;
}

template <typename T>
void EncoderStack<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  input_projection_.collect(out, prefix + "input.");
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].collect(out, prefix + "layer" + std::to_string(l) + ".");
}

void write_attention_dump(std::ostream& out, std::string_view role, const std::vector<std::string>& tokens,
                          const AttentionRecord& record) {
  const std::size_t n = record.length;
  if (tokens.size() != n) throw ContractError("attention dump: token count does not match record length");
  for (std::size_t l = 0; l < record.weights.size(); ++l) {
    for (std::size_t h = 0; h < record.weights[l].size(); ++h) {
      out << "attention\t" << role << '\t' << l << '\t' << h << '\t' << n << '\n';
      out << "tokens";
      for (const auto& t : tokens) out << '\t' << t;
      out << '\n';
      const auto& m = record.weights[l][h];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j) out << '\t';
          out << std::setprecision(17) << m[i * n + j];
        }
        out << '\n';
      }
    }
  }
}

namespace {
std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::size_t parse_size(const std::string& s, std::size_t lineno) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("attention dump", lineno, "bad integer '" + s + "'");
  return v;
}
}  // namespace

std::vector<AttentionDumpEntry> read_attention_dump(std::istream& in) {
  std::vector<AttentionDumpEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError("attention dump", lineno + 1, std::string("missing ") + what);
    ++lineno;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto head = split_tabs(line);
    if (head.size() != 5 || head[0] != "attention") throw ParseError("attention dump", lineno, "expected block header");
    AttentionDumpEntry e;
    e.role = head[1];
    e.layer = parse_size(head[2], lineno);
    e.head = parse_size(head[3], lineno);
    const std::size_t n = parse_size(head[4], lineno);
    next("token line");
    auto toks = split_tabs(line);
    if (toks.size() != n + 1 || toks[0] != "tokens") throw ParseError("attention dump", lineno, "bad token line");
    e.tokens.assign(toks.begin() + 1, toks.end());
    for (std::size_t i = 0; i < n; ++i) {
      next("matrix row");
      auto cells = split_tabs(line);
      if (cells.size() != n) throw ParseError("attention dump", lineno, "row has wrong width");
      auto& row = e.matrix.emplace_back();
      for (const auto& c : cells) row.push_back(std::stod(c));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

template class EncoderLayer<float>;
template class EncoderLayer<double>;
template class EncoderStack<float>;
template class EncoderStack<double>;

}  // namespace aldnorm
