// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aldnorm::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitDivergence = 4,
  kExitVerification = 5,
};

// Maps an exception escaping a command to its exit code.
int exit_code_for(const std::exception& e);

struct TrainOptions {
  std::filesystem::path config;
  std::vector<std::string> overrides;  // key=value
};

struct EvalOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> ald, tn;
  std::optional<std::filesystem::path> predictions;     // one label per line, scored against `ald`
  std::optional<std::filesystem::path> tn_predictions;  // one sentence per line, scored against `tn`
  std::optional<std::filesystem::path> config;
  bool force = false;
  std::size_t max_len = 64;
};

struct InferOptions {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> input;  // stdin when absent
  std::optional<std::filesystem::path> config;
  bool force = false;
  std::size_t max_len = 64;
};

struct GradcheckOptions {
  std::optional<std::filesystem::path> config;
  std::uint64_t seed = 1;
  std::string inject_fault;
};

struct DumpOptions {
  std::filesystem::path checkpoint;
  std::string sentence;
  std::optional<std::filesystem::path> output;  // stdout when absent
};

struct GenerateOptions {
  std::filesystem::path output;
  std::uint64_t seed = 1;
  double ald_train_corruption = 0.0;
  double ald_eval_corruption = 0.0;
};

int cmd_train(const TrainOptions& options, std::ostream& out);
int cmd_eval(const EvalOptions& options, std::ostream& out);
int cmd_classify(const InferOptions& options, std::istream& in, std::ostream& out);
int cmd_normalize(const InferOptions& options, std::istream& in, std::ostream& out);
int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out);
int cmd_dump_attention(const DumpOptions& options, std::ostream& out);
int cmd_generate(const GenerateOptions& options, std::ostream& out);

// Parses argv, dispatches, and turns errors into exit codes.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace aldnorm::cli
