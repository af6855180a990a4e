// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace aldnorm {

namespace {

using Kind = CheckpointError::Kind;
constexpr const char* kModelKey = "model.config";

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_ += s;
  }
  void raw(const char* p, std::size_t n) { bytes_.append(p, n); }
  template <typename T>
  void scalars(std::span<const T> values) {
    for (T x : values) {
      if constexpr (sizeof(T) == 4) {
        u32(std::bit_cast<std::uint32_t>(x));
      } else {
        u64(std::bit_cast<std::uint64_t>(x));
      }
    }
  }
  std::string& bytes() { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string bytes_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::string str() {
    const std::size_t n = u32();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  std::vector<T> scalars(std::uint64_t n) {
    need(n * sizeof(T));
    std::vector<T> out(n);
    for (auto& x : out) {
      if constexpr (sizeof(T) == 4) {
        x = std::bit_cast<T>(u32());
      } else {
        x = std::bit_cast<T>(u64());
      }
    }
    return out;
  }
  void skip(std::uint64_t n) {
    need(n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::uint64_t n) const {
    if (n > end_ - pos_) throw CheckpointError(Kind::integrity, "checkpoint: unexpected end of data");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += n;
    return v;
  }
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

struct ParamRecord {
  std::string name;
  Shape shape;
  std::size_t offset = 0;  // into the file bytes
};

struct OptimizerRecord {
  std::string name;
  std::uint64_t t = 0;
  std::uint64_t n = 0;
  std::size_t offset = 0;
};

struct ParsedFile {
  std::string bytes;
  CheckpointHeader header;
  std::vector<ParamRecord> params;
  std::vector<OptimizerRecord> optimizer;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::io, "checkpoint: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw CheckpointError(Kind::io, "checkpoint: read failed for " + path.string());
  return buf.str();
}

ParsedFile parse(const std::filesystem::path& path) {
  ParsedFile f;
  f.bytes = read_file(path);
  const std::string& b = f.bytes;
  const std::string where = path.string();
  if (b.size() < sizeof(kCheckpointMagic) || std::memcmp(b.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw CheckpointError(Kind::bad_magic, "checkpoint: " + where + " is not a checkpoint file");
  }
  if (b.size() < sizeof(kCheckpointMagic) + 4) throw CheckpointError(Kind::integrity, "checkpoint: " + where + " is truncated");
  Reader head(b, b.size());
  head.skip(sizeof(kCheckpointMagic));
  f.header.version = head.u32();
  if (f.header.version != kCheckpointVersion) {
    throw CheckpointError(Kind::version, "checkpoint: " + where + " has format version " +
                                             std::to_string(f.header.version) + ", expected " +
                                             std::to_string(kCheckpointVersion));
  }
  if (b.size() < sizeof(kCheckpointMagic) + 4 + 8) throw CheckpointError(Kind::integrity, "checkpoint: " + where + " is truncated");
  const std::size_t body = b.size() - 8;
  Reader tail(b, b.size());
  tail.skip(body);
  if (tail.u64() != fnv1a(std::string_view(b).substr(0, body))) {
    throw CheckpointError(Kind::integrity, "checkpoint: " + where + " fails its checksum (truncated or corrupted)");
  }

  Reader r(b, body);
  r.skip(sizeof(kCheckpointMagic) + 4);
  f.header.fingerprint = r.u64();
  f.header.scalar_bytes = r.u32();
  if (f.header.scalar_bytes != 4 && f.header.scalar_bytes != 8) {
    throw CheckpointError(Kind::integrity, "checkpoint: unsupported scalar width " + std::to_string(f.header.scalar_bytes));
  }
  const std::uint32_t np = r.u32();
  for (std::uint32_t i = 0; i < np; ++i) {
    ParamRecord p;
    p.name = r.str();
    const std::uint32_t rank = r.u32();
    for (std::uint32_t d = 0; d < rank; ++d) p.shape.push_back(static_cast<std::size_t>(r.u64()));
    p.offset = r.pos();
    r.skip(shape_numel(p.shape) * f.header.scalar_bytes);
    f.params.push_back(std::move(p));
  }
  const std::uint32_t no = r.u32();
  for (std::uint32_t i = 0; i < no; ++i) {
    OptimizerRecord o;
    o.name = r.str();
    o.t = r.u64();
    o.n = r.u64();
    o.offset = r.pos();
    r.skip(2 * o.n * f.header.scalar_bytes);
    f.optimizer.push_back(std::move(o));
  }
  const std::uint32_t nm = r.u32();
  for (std::uint32_t i = 0; i < nm; ++i) {
    auto key = r.str();
    auto value = r.str();
    f.header.metadata[key] = value;
  }
  if (r.pos() != body) throw CheckpointError(Kind::integrity, "checkpoint: trailing bytes in " + where);
  auto model = f.header.metadata.find(kModelKey);
  if (model == f.header.metadata.end()) {
    throw CheckpointError(Kind::integrity, "checkpoint: " + where + " has no model configuration");
  }
  try {
    f.header.config = parse_model_config(model->second);
  } catch (const Error& e) {
    throw CheckpointError(Kind::integrity, std::string("checkpoint: ") + e.what());
  }
  f.header.metadata.erase(model);
  return f;
}

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(Kind::io, "checkpoint: cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw CheckpointError(Kind::io, "checkpoint: write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw CheckpointError(Kind::io, "checkpoint: cannot move checkpoint into " + path.string());
  }
}

using SizeField = std::size_t ModelConfig::*;

const std::vector<std::pair<std::string, SizeField>>& config_fields() {
  static const std::vector<std::pair<std::string, SizeField>> fields{
      {"word_vocab", &ModelConfig::word_vocab},
      {"char_vocab", &ModelConfig::char_vocab},
      {"target_vocab", &ModelConfig::target_vocab},
      {"num_labels", &ModelConfig::num_labels},
      {"d_word", &ModelConfig::d_word},
      {"d_char", &ModelConfig::d_char},
      {"d_sbw", &ModelConfig::d_sbw},
      {"char_width", &ModelConfig::char_width},
      {"d_pe", &ModelConfig::d_pe},
      {"max_len", &ModelConfig::max_len},
      {"d_model", &ModelConfig::d_model},
      {"heads", &ModelConfig::heads},
      {"ffn_multiplier", &ModelConfig::ffn_multiplier},
      {"shared_layers", &ModelConfig::shared_layers},
      {"ald_layers", &ModelConfig::ald_layers},
      {"tn_layers", &ModelConfig::tn_layers},
      {"decoder_layers", &ModelConfig::decoder_layers},
      {"classifier_hidden", &ModelConfig::classifier_hidden},
      {"discriminator_hidden", &ModelConfig::discriminator_hidden},
      {"discriminator_layers", &ModelConfig::discriminator_layers},
  };
  return fields;
}

}  // namespace

ModelConfig parse_model_config(const std::string& canonical) {
  ModelConfig c;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(canonical);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("model config: malformed entry '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    std::size_t parsed = 0;
    std::size_t used = 0;
    try {
      parsed = std::stoull(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw ConfigError("model config: bad value for " + key);
    seen[key] = parsed;
  }
  for (const auto& [name, field] : config_fields()) {
    auto it = seen.find(name);
    if (it == seen.end()) throw ConfigError("model config: missing " + name);
    c.*field = it->second;
    seen.erase(it);
  }
  if (!seen.empty()) throw ConfigError("model config: unknown key " + seen.begin()->first);
  return c;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const JointModel<T>& model, const Adam<T>* optimizer,
                     const Metadata& metadata) {
  if (metadata.contains(kModelKey)) throw ContractError(std::string("checkpoint: metadata key ") + kModelKey + " is reserved");
  Writer w;
  w.raw(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.u32(kCheckpointVersion);
  w.u64(model.config().fingerprint());
  w.u32(sizeof(T));
  const auto params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.tensor.rank()));
    for (auto d : p.tensor.shape()) w.u64(d);
    w.scalars(p.tensor.values());
  }
  if (optimizer != nullptr) {
    const auto& states = optimizer->states();
    w.u32(static_cast<std::uint32_t>(states.size()));
    for (const auto& [name, s] : states) {
      w.str(name);
      w.u64(s.t);
      w.u64(s.m.size());
      w.scalars(std::span<const T>(s.m));
      w.scalars(std::span<const T>(s.v));
    }
  } else {
    w.u32(0);
  }
  Metadata all = metadata;
  all[kModelKey] = model.config().canonical();
  w.u32(static_cast<std::uint32_t>(all.size()));
  for (const auto& [k, v] : all) {
    w.str(k);
    w.str(v);
  }
  const auto sum = fnv1a(w.bytes());
  w.u64(sum);
  write_atomically(path, w.bytes());
}

template <typename T>
CheckpointHeader load_checkpoint(const std::filesystem::path& path, JointModel<T>& model, Adam<T>* optimizer,
                                 bool force) {
  auto f = parse(path);
  const auto& h = f.header;
  if (h.scalar_bytes != sizeof(T)) {
    throw CheckpointError(Kind::mismatch, "checkpoint: stored " + std::to_string(8 * h.scalar_bytes) +
                                              "-bit values, model uses " + std::to_string(8 * sizeof(T)) + "-bit");
  }
  if (h.fingerprint != model.config().fingerprint() && !force) {
    throw CheckpointError(Kind::fingerprint, "checkpoint: configuration fingerprint differs from the model's "
                                             "(stored " + h.config.canonical() + ")");
  }
  const auto params = model.parameters();
  if (params.size() != f.params.size()) {
    throw CheckpointError(Kind::mismatch, "checkpoint: stores " + std::to_string(f.params.size()) +
                                              " parameters, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != f.params[i].name || params[i].tensor.shape() != f.params[i].shape) {
      throw CheckpointError(Kind::mismatch, "checkpoint: parameter " + std::to_string(i) + " is " + f.params[i].name +
                                                " " + shape_str(f.params[i].shape) + ", model expects " +
                                                params[i].name + " " + shape_str(params[i].tensor.shape()));
    }
  }
  std::map<std::string, AdamState<T>> states;
  for (const auto& o : f.optimizer) {
    Reader r(f.bytes, f.bytes.size() - 8);
    r.skip(o.offset);
    AdamState<T> s;
    s.t = o.t;
    s.m = r.template scalars<T>(o.n);
    s.v = r.template scalars<T>(o.n);
    states[o.name] = std::move(s);
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    Reader r(f.bytes, f.bytes.size() - 8);
    r.skip(f.params[i].offset);
    auto values = r.template scalars<T>(params[i].tensor.numel());
    auto dst = params[i].tensor;  // shares storage with the model
    std::copy(values.begin(), values.end(), dst.mutable_values().begin());
  }
  if (optimizer != nullptr) optimizer->states() = std::move(states);
  return h;
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) { return parse(path).header; }

void save_bundle(const std::filesystem::path& dir, const JointModel<float>& model, const Lexicon& lexicon,
                 const Adam<float>* optimizer, const Metadata& metadata) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CheckpointError(Kind::io, "checkpoint: cannot create " + dir.string());
  lexicon.save(dir);
  save_checkpoint(dir / kCheckpointFile, model, optimizer, metadata);
}

ModelBundle load_bundle(const std::filesystem::path& dir, const ModelConfig* expected, bool force) {
  ModelBundle b;
  auto header = read_checkpoint_header(dir / kCheckpointFile);
  if (expected != nullptr && expected->fingerprint() != header.fingerprint && !force) {
    throw CheckpointError(Kind::fingerprint, "checkpoint: configuration fingerprint differs from the requested "
                                             "model (stored " + header.config.canonical() + ")");
  }
  b.lexicon = Lexicon::load(dir);
  b.model = std::make_unique<JointModel<float>>(header.config, 0);
  b.header = load_checkpoint(dir / kCheckpointFile, *b.model, static_cast<Adam<float>*>(nullptr), true);
  return b;
}

template void save_checkpoint(const std::filesystem::path&, const JointModel<float>&, const Adam<float>*,
                              const Metadata&);
template void save_checkpoint(const std::filesystem::path&, const JointModel<double>&, const Adam<double>*,
                              const Metadata&);
template CheckpointHeader load_checkpoint(const std::filesystem::path&, JointModel<float>&, Adam<float>*, bool);
template CheckpointHeader load_checkpoint(const std::filesystem::path&, JointModel<double>&, Adam<double>*, bool);

}  // namespace aldnorm
