// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "aldnorm/errors.hpp"

namespace aldnorm::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t to_size(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw ConfigError("integer out of range: '" + v + "'");
  }
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return d;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string from_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

fs::path resolve(const std::string& v, const fs::path& base) {
  fs::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&, const fs::path&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Key size_key(std::string name, std::size_t TrainConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v, const fs::path&) { c.train.*field = to_size(v); },
          [field](const RunConfig& c) { return std::to_string(c.train.*field); }};
}

Key double_key(std::string name, double TrainConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v, const fs::path&) { c.train.*field = to_double(v); },
          [field](const RunConfig& c) { return from_double(c.train.*field); }};
}

Key bool_key(std::string name, bool TrainConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v, const fs::path&) { c.train.*field = to_bool(v); },
          [field](const RunConfig& c) { return from_bool(c.train.*field); }};
}

Key model_key(std::string name, std::size_t ModelConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v, const fs::path&) { c.model.*field = to_size(v); },
          [field](const RunConfig& c) { return std::to_string(c.model.*field); }};
}

Key path_key(std::string name, std::optional<fs::path> RunConfig::*field) {
  return {name,
          [field](RunConfig& c, const std::string& v, const fs::path& base) {
            if (v.empty()) {
              (c.*field).reset();
            } else {
              c.*field = resolve(v, base);
            }
          },
          [field](const RunConfig& c) { return (c.*field) ? (c.*field)->string() : std::string(); }};
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"preset",
                 [](RunConfig& c, const std::string& v, const fs::path&) {
                   if (v == "tiny") {
                     c.model = ModelConfig::tiny(c.model.word_vocab, c.model.char_vocab, c.model.target_vocab,
                                                 c.model.num_labels);
                   } else if (v == "default") {
                     c.model = ModelConfig{};
                   } else {
                     throw ConfigError("expected tiny or default, got '" + v + "'");
                   }
                 },
                 nullptr});
    k.push_back({"mode",
                 [](RunConfig& c, const std::string& v, const fs::path&) {
                   auto m = parse_mode(v);
                   if (!m) throw ConfigError("expected joint, ald_only or tn_only, got '" + v + "'");
                   c.train.mode = *m;
                 },
                 [](const RunConfig& c) { return std::string(mode_name(c.train.mode)); }});
    k.push_back({"precision",
                 [](RunConfig& c, const std::string& v, const fs::path&) {
                   if (v == "f32") {
                     c.precision = Precision::f32;
                   } else if (v == "f64") {
                     c.precision = Precision::f64;
                   } else {
                     throw ConfigError("expected f32 or f64, got '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) { return std::string(c.precision == Precision::f32 ? "f32" : "f64"); }});
    k.push_back(size_key("seed", &TrainConfig::seed));
    k.push_back(double_key("learning_rate", &TrainConfig::learning_rate));
    k.push_back(size_key("tn_batch", &TrainConfig::tn_batch));
    k.push_back(size_key("ald_batch", &TrainConfig::ald_batch));
    k.push_back(double_key("dropout", &TrainConfig::dropout));
    k.push_back(double_key("sublayer_dropout", &TrainConfig::sublayer_dropout));
    k.push_back({"lambda", [](RunConfig& c, const std::string& v, const fs::path&) { c.train.weights.lambda = to_double(v); },
                 [](const RunConfig& c) { return from_double(c.train.weights.lambda); }});
    k.push_back({"beta", [](RunConfig& c, const std::string& v, const fs::path&) { c.train.weights.beta = to_double(v); },
                 [](const RunConfig& c) { return from_double(c.train.weights.beta); }});
    k.push_back(bool_key("warm_start", &TrainConfig::warm_start));
    k.push_back(size_key("warm_max_epochs", &TrainConfig::warm_max_epochs));
    k.push_back(double_key("warm_threshold", &TrainConfig::warm_threshold));
    k.push_back(size_key("warm_window", &TrainConfig::warm_window));
    k.push_back(size_key("max_epochs", &TrainConfig::max_epochs));
    k.push_back(size_key("patience", &TrainConfig::patience));
    k.push_back(size_key("discriminator_steps", &TrainConfig::discriminator_steps));
    k.push_back(bool_key("stop_at_perfect_dev", &TrainConfig::stop_at_perfect_dev));
    k.push_back(bool_key("restore_best", &TrainConfig::restore_best));
    k.push_back(double_key("clip_norm", &TrainConfig::clip_norm));
    k.push_back(bool_key("evaluate_tn_f1", &TrainConfig::evaluate_tn_f1));
    k.push_back(size_key("max_decode_len", &TrainConfig::max_decode_len));
    k.push_back({"grid_learning_rates",
                 [](RunConfig& c, const std::string& v, const fs::path&) {
                   c.train.grid_learning_rates.clear();
                   for (const auto& item : split_list(v)) c.train.grid_learning_rates.push_back(to_double(item));
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> items;
                   for (double lr : c.train.grid_learning_rates) items.push_back(from_double(lr));
                   return join(items);
                 }});
    k.push_back(double_key("grid_lambda_min", &TrainConfig::grid_lambda_min));
    k.push_back(double_key("grid_lambda_max", &TrainConfig::grid_lambda_max));
    k.push_back(double_key("grid_beta_min", &TrainConfig::grid_beta_min));
    k.push_back(double_key("grid_beta_max", &TrainConfig::grid_beta_max));

    k.push_back(model_key("d_word", &ModelConfig::d_word));
    k.push_back(model_key("d_char", &ModelConfig::d_char));
    k.push_back(model_key("d_sbw", &ModelConfig::d_sbw));
    k.push_back(model_key("char_width", &ModelConfig::char_width));
    k.push_back(model_key("d_pe", &ModelConfig::d_pe));
    k.push_back(model_key("max_len", &ModelConfig::max_len));
    k.push_back(model_key("d_model", &ModelConfig::d_model));
    k.push_back(model_key("heads", &ModelConfig::heads));
    k.push_back(model_key("ffn_multiplier", &ModelConfig::ffn_multiplier));
    k.push_back(model_key("shared_layers", &ModelConfig::shared_layers));
    k.push_back(model_key("ald_layers", &ModelConfig::ald_layers));
    k.push_back(model_key("tn_layers", &ModelConfig::tn_layers));
    k.push_back(model_key("decoder_layers", &ModelConfig::decoder_layers));
    k.push_back(model_key("classifier_hidden", &ModelConfig::classifier_hidden));
    k.push_back(model_key("discriminator_hidden", &ModelConfig::discriminator_hidden));
    k.push_back(model_key("discriminator_layers", &ModelConfig::discriminator_layers));

    k.push_back(path_key("ald_train", &RunConfig::ald_train));
    k.push_back(path_key("ald_dev", &RunConfig::ald_dev));
    k.push_back(path_key("ald_test", &RunConfig::ald_test));
    k.push_back(path_key("tn_train", &RunConfig::tn_train));
    k.push_back(path_key("tn_dev", &RunConfig::tn_dev));
    k.push_back(path_key("tn_test", &RunConfig::tn_test));
    k.push_back(path_key("slang_dictionary", &RunConfig::slang_dictionary));
    k.push_back(path_key("vocab_dir", &RunConfig::vocab_dir));
    k.push_back(path_key("checkpoint_dir", &RunConfig::checkpoint_dir));
    k.push_back(path_key("metrics_file", &RunConfig::metrics_file));
    k.push_back({"labels", [](RunConfig& c, const std::string& v, const fs::path&) { c.labels = split_list(v); },
                 [](const RunConfig& c) { return join(c.labels); }});
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value, const fs::path& base_dir) {
  const Key* k = find_key(key);
  if (k == nullptr) throw ConfigError("unknown key '" + key + "'");
  try {
    k->set(config, value, base_dir);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

RunConfig parse_run_config(std::istream& in, const std::string& source, const fs::path& base_dir) {
  RunConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)),
                    base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    config.train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(in, path.string(), path.parent_path());
}

void RunConfig::validate_paths(bool for_training) const {
  auto input = [](const char* key, const std::optional<fs::path>& p) {
    if (!p) return;
    std::error_code ec;
    if (!fs::is_regular_file(*p, ec)) throw ConfigError(std::string(key) + ": no such file " + p->string());
  };
  input("ald_train", ald_train);
  input("ald_dev", ald_dev);
  input("ald_test", ald_test);
  input("tn_train", tn_train);
  input("tn_dev", tn_dev);
  input("tn_test", tn_test);
  input("slang_dictionary", slang_dictionary);
  if (vocab_dir) {
    std::error_code ec;
    if (!fs::is_directory(*vocab_dir, ec)) throw ConfigError("vocab_dir: no such directory " + vocab_dir->string());
  }
  auto output = [](const char* key, const fs::path& p) {
    const auto parent = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    std::error_code ec;
    if (!fs::is_directory(parent, ec)) throw ConfigError(std::string(key) + ": parent directory " + parent.string() + " does not exist");
  };
  if (!for_training) return;
  const bool uses_ald = train.mode != TrainMode::tn_only;
  const bool uses_tn = train.mode != TrainMode::ald_only;
  if (uses_ald && !ald_train) throw ConfigError("ald_train: required for mode " + std::string(mode_name(train.mode)));
  if (uses_tn && !tn_train && !slang_dictionary) {
    throw ConfigError("tn_train: required for mode " + std::string(mode_name(train.mode)) +
                      " (or give slang_dictionary to derive TN pairs)");
  }
  if (!checkpoint_dir) throw ConfigError("checkpoint_dir: required for training");
  output("checkpoint_dir", *checkpoint_dir);
  if (metrics_file && metrics_file->parent_path() != *checkpoint_dir) output("metrics_file", *metrics_file);
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void write_run_config(std::ostream& out, const RunConfig& config) {
  for (const auto& k : keys()) {
    if (!k.get) continue;
    const auto v = k.get(config);
    if (v.empty()) continue;
    out << k.name << " = " << v << '\n';
  }
}

}  // namespace aldnorm::cli
