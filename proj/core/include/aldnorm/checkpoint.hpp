// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "aldnorm/dataset.hpp"
#include "aldnorm/model.hpp"
#include "aldnorm/optim.hpp"

namespace aldnorm {

// Binary layout, all integers little-endian:
//   "ALDNRMCK" | u32 version | u64 config fingerprint | u32 scalar bytes
//   u32 count, then per parameter: u32 name length, name, u32 rank, u64 dims, values
//   u32 count, then per optimizer state: u32 name length, name, u64 t, u64 n, m[n], v[n]
//   u32 count, then per metadata entry: u32 key length, key, u32 value length, value
//   u64 FNV-1a of every preceding byte
inline constexpr char kCheckpointMagic[8] = {'A', 'L', 'D', 'N', 'R', 'M', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using Metadata = std::map<std::string, std::string>;

struct CheckpointHeader {
  std::uint32_t version = 0;
  std::uint64_t fingerprint = 0;
  std::uint32_t scalar_bytes = 0;
  ModelConfig config;  // rebuilt from the stored canonical listing
  Metadata metadata;   // user entries; the model listing is not included
};

// Writes to a sibling temporary file and renames it into place.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const JointModel<T>& model, const Adam<T>* optimizer = nullptr,
                     const Metadata& metadata = {});

// Validates the whole file before touching `model` or `optimizer`. A
// fingerprint mismatch is an error unless `force`; the parameter list must
// still agree in names and shapes.
template <typename T>
CheckpointHeader load_checkpoint(const std::filesystem::path& path, JointModel<T>& model, Adam<T>* optimizer = nullptr,
                                 bool force = false);

// Reads and validates the file without loading parameters.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

ModelConfig parse_model_config(const std::string& canonical);

// A checkpoint directory: model.ckpt plus the lexicon files.
struct ModelBundle {
  Lexicon lexicon;
  std::unique_ptr<JointModel<float>> model;
  CheckpointHeader header;
};

inline constexpr const char* kCheckpointFile = "model.ckpt";

void save_bundle(const std::filesystem::path& dir, const JointModel<float>& model, const Lexicon& lexicon,
                 const Adam<float>* optimizer = nullptr, const Metadata& metadata = {});

// `expected`, when given, is compared by fingerprint against the stored
// configuration (error unless `force`).
ModelBundle load_bundle(const std::filesystem::path& dir, const ModelConfig* expected = nullptr, bool force = false);

}  // namespace aldnorm
