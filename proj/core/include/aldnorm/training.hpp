// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <functional>
#include <map>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aldnorm/losses.hpp"
#include "aldnorm/metrics.hpp"
#include "aldnorm/model.hpp"

namespace aldnorm {

struct AldExample {
  EncodedSentence sentence;
  int label = 0;
};

struct TnExample {
  EncodedSentence source;
  std::vector<int> target;  // target-vocabulary ids, no BOS/EOS
  std::vector<std::string> raw;
  std::vector<std::string> gold;
};

struct TaskData {
  std::vector<AldExample> ald_train, ald_dev;
  std::vector<TnExample> tn_train, tn_dev;
};

enum class TrainMode { joint, ald_only, tn_only };

std::string_view mode_name(TrainMode mode);
std::optional<TrainMode> parse_mode(std::string_view name);

struct TrainConfig {
  double learning_rate = 5e-4;
  std::size_t tn_batch = 32;
  std::size_t ald_batch = 16;
  double dropout = 0.4;             // recurrent head inputs
  double sublayer_dropout = 0.1;    // Transformer sublayer outputs
  LossWeights weights;
  TrainMode mode = TrainMode::joint;

  bool warm_start = true;
  std::size_t warm_max_epochs = 20;
  double warm_threshold = 0.01;  // relative dev TN loss improvement
  std::size_t warm_window = 2;   // measured over this many epochs

  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  // Extra discriminator-only updates after each joint ALD turn, on the
  // detached shared features of that turn and the preceding TN turn.
  std::size_t discriminator_steps = 0;
  bool stop_at_perfect_dev = true;  // stop once dev weighted F1 reaches 1
  bool restore_best = true;         // false keeps the final parameters
  double clip_norm = 5.0;
  std::uint64_t seed = 1;

  // Greedy decoding of the TN dev set each epoch; off skips dev TN F1.
  bool evaluate_tn_f1 = true;
  std::size_t max_decode_len = 64;

  // Search ranges; training itself uses the values above.
  std::vector<double> grid_learning_rates{1e-3, 1e-4};
  double grid_lambda_min = 0.01, grid_lambda_max = 0.1;
  double grid_beta_min = 0.01, grid_beta_max = 0.1;

  void validate() const;
};

enum class Phase { warm, joint, standalone };

std::string_view phase_name(Phase phase);

struct TurnRecord {
  Phase phase = Phase::joint;
  TaskId task = TaskId::tn;
  std::size_t epoch = 0;
  double task_loss = 0.0;
  double adv_loss = 0.0;
  double dif_loss = 0.0;
  double total = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based, counted across phases
  Phase phase = Phase::joint;
  double tn_loss = 0.0;   // mean per-sentence training loss, 0 if no TN turns
  double ald_loss = 0.0;
  double adv_loss = 0.0;
  double dif_loss = 0.0;
  std::optional<double> disc_accuracy;
  std::optional<double> dev_precision, dev_recall, dev_weighted_f1;
  std::optional<double> dev_tn_loss, dev_tn_f1;
};

struct MetricsReport {
  std::vector<EpochRecord> epochs;
  std::vector<TurnRecord> turns;
  std::size_t warm_epochs = 0;
  std::optional<std::size_t> best_epoch;
  std::optional<double> best_dev_f1;
  std::optional<double> best_dev_tn_loss;
  bool early_stopped = false;
  std::size_t clamped_probabilities = 0;
};

// One line per epoch with a fixed key order, then a summary line.
void write_metrics(std::ostream& out, const MetricsReport& report);

struct TrainHooks {
  std::function<void(Phase, TaskId)> before_turn;
  std::function<void(Phase, TaskId)> after_turn;
};

// Deterministic 10% holdout used when a task has no dev split.
template <typename Example>
std::pair<std::vector<Example>, std::vector<Example>> holdout_split(const std::vector<Example>& data, double fraction,
                                                                    std::uint64_t seed);

template <typename T>
ClassificationReport evaluate_ald(const JointModel<T>& model, const std::vector<AldExample>& data);

// Mean teacher-forced loss over the examples.
template <typename T>
double evaluate_tn_loss(const JointModel<T>& model, const std::vector<TnExample>& data);

template <typename T>
NormalizationReport evaluate_tn(const JointModel<T>& model, const std::vector<TnExample>& data,
                                const Vocabulary& targets, std::size_t max_len);

template <typename T>
class Trainer {
 public:
  Trainer(JointModel<T>& model, TrainConfig config, const Vocabulary* targets = nullptr);

  // Runs warm start (when enabled) and the main phase, then restores the best
  // dev snapshot unless `restore_best` is off. On divergence restores the last completed epoch and
  // rethrows.
  MetricsReport train(TaskData data, const TrainHooks& hooks = {});

  Adam<T>& optimizer() noexcept { return adam_; }
  const TrainConfig& config() const noexcept { return config_; }

 private:
  struct Snapshot {
    std::vector<std::vector<T>> values;
    std::map<std::string, AdamState<T>> optimizer;
  };

  struct TurnTotals {
    double task = 0.0, adv = 0.0, dif = 0.0;
    std::size_t sentences = 0, disc_correct = 0, disc_seen = 0;
  };

  TurnRecord tn_turn(std::span<const TnExample* const> batch, Phase phase, TurnTotals& totals);
  TurnRecord ald_turn(std::span<const AldExample* const> batch, Phase phase, TurnTotals& totals);
  void step(std::span<const ParamGroup> groups);
  void train_discriminator(const std::vector<Tensor<T>>& ald_shared);

  Snapshot snapshot() const;
  void restore(const Snapshot& s);
  void evaluate_dev(const TaskData& data, EpochRecord& rec);

  JointModel<T>& model_;
  TrainConfig config_;
  const Vocabulary* targets_;
  Adam<T> adam_;
  Rng rng_;
  ParameterList<T> all_;
  std::size_t clamped_ = 0;
  std::vector<Tensor<T>> tn_shared_;  // detached, from the last joint TN turn
};

// Fresh discriminator trained on frozen shared-encoder features of
// `train_ald` vs `train_tn`, scored on `eval_ald` vs `eval_tn`.
struct ProbeConfig {
  std::size_t epochs = 30;
  std::size_t batch = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 7;
};

template <typename T>
double probe_discriminator_accuracy(const JointModel<T>& model, const std::vector<AldExample>& train_ald,
                                    const std::vector<TnExample>& train_tn, const std::vector<AldExample>& eval_ald,
                                    const std::vector<TnExample>& eval_tn, const ProbeConfig& config);

}  // namespace aldnorm
