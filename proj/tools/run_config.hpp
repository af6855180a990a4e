// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aldnorm/model.hpp"
#include "aldnorm/training.hpp"

namespace aldnorm::cli {

enum class Precision { f32, f64 };

// Everything a run needs. Parsed from `key = value` lines; `#` starts a
// comment. Defaults are the published settings.
struct RunConfig {
  TrainConfig train;
  ModelConfig model;  // vocabulary sizes are filled from the data
  Precision precision = Precision::f32;

  std::optional<std::filesystem::path> ald_train, ald_dev, ald_test;
  std::optional<std::filesystem::path> tn_train, tn_dev, tn_test;
  std::optional<std::filesystem::path> slang_dictionary;
  std::optional<std::filesystem::path> vocab_dir;  // reuse a saved lexicon
  std::optional<std::filesystem::path> checkpoint_dir;
  std::optional<std::filesystem::path> metrics_file;
  std::vector<std::string> labels;  // ALD label inventory; empty collects it from the data

  // Input paths must name existing files and output locations must have an
  // existing parent directory. Throws ConfigError naming the key.
  void validate_paths(bool for_training) const;
};

// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Applies one `key=value` override on top of an existing config.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

// Every recognized key, in the order written by `write_run_config`.
const std::vector<std::string>& run_config_keys();
void write_run_config(std::ostream& out, const RunConfig& config);

}  // namespace aldnorm::cli
