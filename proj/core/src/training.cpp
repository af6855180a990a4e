// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "aldnorm/errors.hpp"

namespace aldnorm {

std::string_view mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::joint: return "joint";
    case TrainMode::ald_only: return "ald_only";
    case TrainMode::tn_only: return "tn_only";
  }
  return "unknown";
}

std::optional<TrainMode> parse_mode(std::string_view name) {
  for (auto m : {TrainMode::joint, TrainMode::ald_only, TrainMode::tn_only}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::warm: return "warm";
    case Phase::joint: return "joint";
    case Phase::standalone: return "standalone";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("train config: " + what);
  };
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(tn_batch >= 1 && ald_batch >= 1, "batch sizes must be at least 1");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(sublayer_dropout >= 0.0 && sublayer_dropout < 1.0, "sublayer_dropout must lie in [0, 1)");
  weights.validate();
  require(warm_threshold > 0.0, "warm_threshold must be positive");
  require(warm_window >= 1, "warm_window must be at least 1");
  require(max_epochs >= 1, "max_epochs must be at least 1");
  require(patience >= 1, "patience must be at least 1");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(max_decode_len >= 1, "max_decode_len must be at least 1");
  for (double lr : grid_learning_rates) require(lr > 0.0, "grid learning rates must be positive");
  require(grid_lambda_min >= 0.0 && grid_lambda_min <= grid_lambda_max, "grid lambda range is empty");
  require(grid_beta_min >= 0.0 && grid_beta_min <= grid_beta_max, "grid beta range is empty");
}

namespace {

void put(std::ostream& out, const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << '\t' << key << '=' << buf;
}

void put(std::ostream& out, const char* key, const std::optional<double>& v) {
  if (v) {
    put(out, key, *v);
  } else {
    out << '\t' << key << "=na";
  }
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

template <typename T>
std::vector<double> to_double(const Tensor<T>& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

constexpr ParamGroup kWarmGroups[] = {ParamGroup::embeddings, ParamGroup::shared, ParamGroup::tn_private,
                                      ParamGroup::normalizer};
constexpr ParamGroup kTnJointGroups[] = {ParamGroup::embeddings, ParamGroup::shared, ParamGroup::tn_private,
                                         ParamGroup::normalizer, ParamGroup::discriminator};
constexpr ParamGroup kAldJointGroups[] = {ParamGroup::embeddings, ParamGroup::shared, ParamGroup::ald_private,
                                          ParamGroup::classifier, ParamGroup::discriminator};
constexpr ParamGroup kAldAloneGroups[] = {ParamGroup::embeddings, ParamGroup::shared, ParamGroup::ald_private,
                                          ParamGroup::classifier};

}  // namespace

void write_metrics(std::ostream& out, const MetricsReport& report) {
  for (const auto& e : report.epochs) {
    out << "epoch=" << e.epoch << "\tphase=" << phase_name(e.phase);
    put(out, "tn_loss", e.tn_loss);
    put(out, "ald_loss", e.ald_loss);
    put(out, "adv_loss", e.adv_loss);
    put(out, "dif_loss", e.dif_loss);
    put(out, "disc_acc", e.disc_accuracy);
    put(out, "dev_p", e.dev_precision);
    put(out, "dev_r", e.dev_recall);
    put(out, "dev_wf1", e.dev_weighted_f1);
    put(out, "dev_tn_loss", e.dev_tn_loss);
    put(out, "dev_tn_f1", e.dev_tn_f1);
    out << '\n';
  }
  out << "summary\tepochs=" << report.epochs.size() << "\twarm_epochs=" << report.warm_epochs << "\tbest_epoch=";
  if (report.best_epoch) {
    out << *report.best_epoch;
  } else {
    out << "na";
  }
  put(out, "best_dev_wf1", report.best_dev_f1);
  put(out, "best_dev_tn_loss", report.best_dev_tn_loss);
  out << "\tearly_stopped=" << (report.early_stopped ? 1 : 0) << "\tclamped=" << report.clamped_probabilities << '\n';
}

template <typename Example>
std::pair<std::vector<Example>, std::vector<Example>> holdout_split(const std::vector<Example>& data, double fraction,
                                                                    std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);
  std::size_t held = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(data.size())));
  if (data.size() < 2) held = 0;
  held = std::min(held, data.size() - (data.empty() ? 0 : 1));
  std::vector<std::size_t> dev_idx(order.begin(), order.begin() + static_cast<long>(held));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(held), order.end());
  std::sort(dev_idx.begin(), dev_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::pair<std::vector<Example>, std::vector<Example>> out;
  for (auto i : train_idx) out.first.push_back(data[i]);
  for (auto i : dev_idx) out.second.push_back(data[i]);
  return out;
}

template std::pair<std::vector<AldExample>, std::vector<AldExample>> holdout_split(const std::vector<AldExample>&,
                                                                                   double, std::uint64_t);
template std::pair<std::vector<TnExample>, std::vector<TnExample>> holdout_split(const std::vector<TnExample>&, double,
                                                                                 std::uint64_t);

template <typename T>
ClassificationReport evaluate_ald(const JointModel<T>& model, const std::vector<AldExample>& data) {
  ConfusionMatrix cm(model.config().num_labels);
  ForwardContext inference;
  for (const auto& ex : data) {
    auto p = to_double(model.classify(ex.sentence, inference));
    cm.add(ex.label, static_cast<int>(argmax(p)));
  }
  return classification_report(cm);
}

template <typename T>
double evaluate_tn_loss(const JointModel<T>& model, const std::vector<TnExample>& data) {
  if (data.empty()) return 0.0;
  ForwardContext inference;
  double total = 0.0;
  for (const auto& ex : data) {
    auto f = model.features(ex.source, TaskId::tn, inference);
    total += static_cast<double>(model.normalization_loss(f, ex.target, inference).item());
  }
  return total / static_cast<double>(data.size());
}

template <typename T>
NormalizationReport evaluate_tn(const JointModel<T>& model, const std::vector<TnExample>& data,
                                const Vocabulary& targets, std::size_t max_len) {
  NormalizationScorer scorer;
  for (const auto& ex : data) {
    auto r = model.normalize(ex.source, std::min(max_len, model.config().max_len));
    std::vector<std::string> predicted;
    predicted.reserve(r.tokens.size());
    for (int id : r.tokens) predicted.push_back(targets.token(id));
    scorer.add(ex.raw, predicted, ex.gold);
  }
  return scorer.report();
}

template <typename T>
Trainer<T>::Trainer(JointModel<T>& model, TrainConfig config, const Vocabulary* targets)
    : model_(model),
      config_(std::move(config)),
      targets_(targets),
      adam_(AdamConfig{.learning_rate = config_.learning_rate}),
      rng_(config_.seed ^ 0xA5A5A5A5ull),
      all_(model.parameters()) {
  config_.validate();
}

template <typename T>
void Trainer<T>::step(std::span<const ParamGroup> groups) {
  model_.zero_pad_grad();
  auto active = model_.parameters(groups);
  clip_grad_norm(active, config_.clip_norm);
  adam_.step(active);
}

template <typename T>
Tensor<T> detached(const Tensor<T>& x) {
  return Tensor<T>::from(x.shape(), std::vector<T>(x.values().begin(), x.values().end()));
}

template <typename T>
void Trainer<T>::train_discriminator(const std::vector<Tensor<T>>& ald_shared) {
  static constexpr std::array<ParamGroup, 1> kDisc{ParamGroup::discriminator};
  std::vector<const Tensor<T>*> inputs;
  std::vector<int> ids;
  for (const auto& x : tn_shared_) {
    inputs.push_back(&x);
    ids.push_back(static_cast<int>(TaskId::tn));
  }
  for (const auto& x : ald_shared) {
    inputs.push_back(&x);
    ids.push_back(static_cast<int>(TaskId::ald));
  }
  auto params = model_.parameters(kDisc);
  for (std::size_t k = 0; k < config_.discriminator_steps; ++k) {
    zero_grads(params);
    Tape<T> tape;
    Tensor<T> loss;
    {
      TapeScope<T> scope(tape);
      ForwardContext ctx{true, config_.dropout, config_.sublayer_dropout, &rng_};
      std::vector<Tensor<T>> dists;
      for (const auto* x : inputs) dists.push_back(model_.discriminate(*x, false, ctx));
      loss = adv_loss<T>(dists, ids, &clamped_);
    }
    tape.backward(loss);
    step(kDisc);
  }
  tn_shared_.clear();
}

template <typename T>
TurnRecord Trainer<T>::tn_turn(std::span<const TnExample* const> batch, Phase phase, TurnTotals& totals) {
  const bool adversarial = phase == Phase::joint;
  zero_grads(all_);
  Tape<T> tape;
  Tensor<T> task, adv = Tensor<T>::scalar(T(0)), dif = Tensor<T>::scalar(T(0)), total;
  std::vector<Tensor<T>> disc;
  {
    TapeScope<T> scope(tape);
    ForwardContext ctx{true, config_.dropout, config_.sublayer_dropout, &rng_};
    std::vector<Tensor<T>> terms, privs, shareds;
    for (const TnExample* ex : batch) {
      auto f = model_.features(ex->source, TaskId::tn, ctx);
      terms.push_back(model_.normalization_loss(f, ex->target, ctx));
      if (adversarial) {
        disc.push_back(model_.discriminate(f.shared, true, ctx));
        privs.push_back(f.priv);
        shareds.push_back(f.shared);
      }
    }
    task = sum(concat<T>(std::span<const Tensor<T>>(terms), 0));
    if (adversarial) {
      std::vector<int> ids(batch.size(), static_cast<int>(TaskId::tn));
      adv = adv_loss<T>(disc, ids, &clamped_);
      dif = diff_loss<T>(privs, shareds);
      if (config_.discriminator_steps > 0) {
        tn_shared_.clear();
        for (const auto& x : shareds) tn_shared_.push_back(detached(x));
      }
    }
    total = total_loss(task, adv, dif, config_.weights);
  }
  tape.backward(total);
  if (adversarial) {
    step(kTnJointGroups);
  } else {
    step(kWarmGroups);
  }
  TurnRecord rec{phase, TaskId::tn, 0, static_cast<double>(task.item()), static_cast<double>(adv.item()),
                 static_cast<double>(dif.item()), static_cast<double>(total.item())};
  totals.task += rec.task_loss;
  totals.adv += rec.adv_loss;
  totals.dif += rec.dif_loss * static_cast<double>(batch.size());
  totals.sentences += batch.size();
  for (const auto& d : disc) {
    totals.disc_correct += d.values()[1] > d.values()[0] ? 1 : 0;
    ++totals.disc_seen;
  }
  return rec;
}

template <typename T>
TurnRecord Trainer<T>::ald_turn(std::span<const AldExample* const> batch, Phase phase, TurnTotals& totals) {
  const bool adversarial = phase == Phase::joint;
  zero_grads(all_);
  Tape<T> tape;
  Tensor<T> task, adv = Tensor<T>::scalar(T(0)), dif = Tensor<T>::scalar(T(0)), total;
  std::vector<Tensor<T>> disc, ald_shared;
  {
    TapeScope<T> scope(tape);
    ForwardContext ctx{true, config_.dropout, config_.sublayer_dropout, &rng_};
    std::vector<Tensor<T>> dists, privs, shareds;
    std::vector<int> gold;
    for (const AldExample* ex : batch) {
      auto f = model_.features(ex->sentence, TaskId::ald, ctx);
      dists.push_back(model_.classify(f, ctx));
      gold.push_back(ex->label);
      if (adversarial) {
        disc.push_back(model_.discriminate(f.shared, true, ctx));
        privs.push_back(f.priv);
        shareds.push_back(f.shared);
      }
    }
    task = task_loss<T>(dists, gold, &clamped_);
    if (adversarial) {
      std::vector<int> ids(batch.size(), static_cast<int>(TaskId::ald));
      adv = adv_loss<T>(disc, ids, &clamped_);
      dif = diff_loss<T>(privs, shareds);
      if (config_.discriminator_steps > 0) {
        for (const auto& x : shareds) ald_shared.push_back(detached(x));
      }
    }
    total = total_loss(task, adv, dif, config_.weights);
  }
  tape.backward(total);
  if (adversarial) {
    step(kAldJointGroups);
    if (config_.discriminator_steps > 0) train_discriminator(ald_shared);
  } else {
    step(kAldAloneGroups);
  }
  TurnRecord rec{phase, TaskId::ald, 0, static_cast<double>(task.item()), static_cast<double>(adv.item()),
                 static_cast<double>(dif.item()), static_cast<double>(total.item())};
  totals.task += rec.task_loss;
  totals.adv += rec.adv_loss;
  totals.dif += rec.dif_loss * static_cast<double>(batch.size());
  totals.sentences += batch.size();
  for (const auto& d : disc) {
    totals.disc_correct += d.values()[0] >= d.values()[1] ? 1 : 0;
    ++totals.disc_seen;
  }
  return rec;
}

template <typename T>
typename Trainer<T>::Snapshot Trainer<T>::snapshot() const {
  Snapshot s;
  for (const auto& p : all_) s.values.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  s.optimizer = adam_.states();
  return s;
}

template <typename T>
void Trainer<T>::restore(const Snapshot& s) {
  for (std::size_t i = 0; i < all_.size(); ++i) {
    auto dst = all_[i].tensor.mutable_values();
    std::copy(s.values[i].begin(), s.values[i].end(), dst.begin());
  }
  adam_.states() = s.optimizer;
}

template <typename T>
void Trainer<T>::evaluate_dev(const TaskData& data, EpochRecord& rec) {
  if (config_.mode != TrainMode::tn_only && !data.ald_dev.empty() && rec.phase != Phase::warm) {
    auto r = evaluate_ald(model_, data.ald_dev);
    rec.dev_precision = r.weighted_precision;
    rec.dev_recall = r.weighted_recall;
    rec.dev_weighted_f1 = r.weighted_f1;
  }
  if (config_.mode != TrainMode::ald_only && !data.tn_dev.empty()) {
    rec.dev_tn_loss = evaluate_tn_loss(model_, data.tn_dev);
    if (config_.evaluate_tn_f1 && targets_ != nullptr) {
      rec.dev_tn_f1 = evaluate_tn(model_, data.tn_dev, *targets_, config_.max_decode_len).f1;
    }
  }
}

template <typename T>
MetricsReport Trainer<T>::train(TaskData data, const TrainHooks& hooks) {
  const bool uses_ald = config_.mode != TrainMode::tn_only;
  const bool uses_tn = config_.mode != TrainMode::ald_only;
  if (uses_ald && data.ald_train.empty()) throw ConfigError("train: ALD training corpus is empty");
  if (uses_tn && data.tn_train.empty()) throw ConfigError("train: TN training corpus is empty");
  if (uses_ald && data.ald_dev.empty()) std::tie(data.ald_train, data.ald_dev) = holdout_split(data.ald_train, 0.1, config_.seed);
  if (uses_tn && data.tn_dev.empty()) std::tie(data.tn_train, data.tn_dev) = holdout_split(data.tn_train, 0.1, config_.seed);

  MetricsReport report;
  Snapshot last_good = snapshot();
  std::optional<Snapshot> best;
  std::size_t epoch_counter = 0;

  auto batches_of = [&](std::size_t n, std::size_t size) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng_);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < n; i += size) {
      out.emplace_back(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(std::min(n, i + size)));
    }
    return out;
  };
  auto tn_ptrs = [&](const std::vector<std::size_t>& idx) {
    std::vector<const TnExample*> p;
    for (auto i : idx) p.push_back(&data.tn_train[i]);
    return p;
  };
  auto ald_ptrs = [&](const std::vector<std::size_t>& idx) {
    std::vector<const AldExample*> p;
    for (auto i : idx) p.push_back(&data.ald_train[i]);
    return p;
  };
  auto run_turn = [&](Phase phase, TaskId task, auto&& fn) {
    if (hooks.before_turn) hooks.before_turn(phase, task);
    TurnRecord rec = fn();
    rec.epoch = epoch_counter;
    report.turns.push_back(rec);
    if (hooks.after_turn) hooks.after_turn(phase, task);
  };
  auto finish_epoch = [&](Phase phase, const TurnTotals& tn, const TurnTotals& ald) {
    EpochRecord rec;
    rec.epoch = epoch_counter;
    rec.phase = phase;
    rec.tn_loss = tn.sentences ? tn.task / static_cast<double>(tn.sentences) : 0.0;
    rec.ald_loss = ald.sentences ? ald.task / static_cast<double>(ald.sentences) : 0.0;
    const std::size_t adv_sentences = phase == Phase::joint ? tn.sentences + ald.sentences : 0;
    rec.adv_loss = adv_sentences ? (tn.adv + ald.adv) / static_cast<double>(adv_sentences) : 0.0;
    rec.dif_loss = adv_sentences ? (tn.dif + ald.dif) / static_cast<double>(adv_sentences) : 0.0;
    const std::size_t seen = tn.disc_seen + ald.disc_seen;
    if (seen) rec.disc_accuracy = static_cast<double>(tn.disc_correct + ald.disc_correct) / static_cast<double>(seen);
    evaluate_dev(data, rec);
    report.epochs.push_back(rec);
    return rec;
  };

  try {
    if (config_.mode == TrainMode::joint && config_.warm_start) {
      std::vector<double> dev_losses;
      for (std::size_t e = 0; e < config_.warm_max_epochs; ++e) {
        ++epoch_counter;
        TurnTotals tn, none;
        for (const auto& b : batches_of(data.tn_train.size(), config_.tn_batch)) {
          auto ptrs = tn_ptrs(b);
          run_turn(Phase::warm, TaskId::tn, [&] { return tn_turn(ptrs, Phase::warm, tn); });
        }
        auto rec = finish_epoch(Phase::warm, tn, none);
        last_good = snapshot();
        ++report.warm_epochs;
        dev_losses.push_back(rec.dev_tn_loss.value_or(rec.tn_loss));
        const std::size_t w = config_.warm_window;
        if (dev_losses.size() > w) {
          const double before = dev_losses[dev_losses.size() - 1 - w], now = dev_losses.back();
          if ((before - now) / std::abs(before) < config_.warm_threshold) break;
        }
      }
    }

    const Phase main_phase = config_.mode == TrainMode::joint ? Phase::joint : Phase::standalone;
    std::vector<std::vector<std::size_t>> tn_queue;
    std::size_t tn_next = 0;
    std::size_t since_best = 0;
    for (std::size_t e = 0; e < config_.max_epochs; ++e) {
      ++epoch_counter;
      TurnTotals tn, ald;
      if (config_.mode == TrainMode::tn_only) {
        for (const auto& b : batches_of(data.tn_train.size(), config_.tn_batch)) {
          auto ptrs = tn_ptrs(b);
          run_turn(main_phase, TaskId::tn, [&] { return tn_turn(ptrs, main_phase, tn); });
        }
      } else {
        for (const auto& b : batches_of(data.ald_train.size(), config_.ald_batch)) {
          if (config_.mode == TrainMode::joint) {
            if (tn_next == tn_queue.size()) {
              tn_queue = batches_of(data.tn_train.size(), config_.tn_batch);
              tn_next = 0;
            }
            auto tp = tn_ptrs(tn_queue[tn_next++]);
            run_turn(main_phase, TaskId::tn, [&] { return tn_turn(tp, main_phase, tn); });
          }
          auto ap = ald_ptrs(b);
          run_turn(main_phase, TaskId::ald, [&] { return ald_turn(ap, main_phase, ald); });
        }
      }
      auto rec = finish_epoch(main_phase, tn, ald);
      last_good = snapshot();

      bool improved = false, perfect = false;
      if (config_.mode == TrainMode::tn_only) {
        const double loss = rec.dev_tn_loss.value_or(rec.tn_loss);
        improved = !report.best_dev_tn_loss || loss < *report.best_dev_tn_loss;
        if (improved) report.best_dev_tn_loss = loss;
      } else {
        const double f1 = rec.dev_weighted_f1.value_or(0.0);
        improved = !report.best_dev_f1 || f1 > *report.best_dev_f1;
        if (improved) report.best_dev_f1 = f1;
        perfect = config_.stop_at_perfect_dev && f1 >= 1.0;
        if (improved && rec.dev_tn_loss) report.best_dev_tn_loss = rec.dev_tn_loss;
      }
      if (improved) {
        report.best_epoch = rec.epoch;
        best = last_good;
        since_best = 0;
      } else if (++since_best >= config_.patience) {
        report.early_stopped = true;
        break;
      }
      if (perfect) {
        report.early_stopped = e + 1 < config_.max_epochs;
        break;
      }
    }
  } catch (const DivergenceError& e) {
    restore(last_good);
    report.clamped_probabilities = clamped_;
    throw DivergenceError(std::string(e.what()) + " (epoch " + std::to_string(epoch_counter) +
                          "; parameters restored to the last completed epoch)");
  }
  if (best && config_.restore_best) restore(*best);
  report.clamped_probabilities = clamped_;
  return report;
}

template <typename T>
double probe_discriminator_accuracy(const JointModel<T>& model, const std::vector<AldExample>& train_ald,
                                    const std::vector<TnExample>& train_tn, const std::vector<AldExample>& eval_ald,
                                    const std::vector<TnExample>& eval_tn, const ProbeConfig& config) {
  ForwardContext inference;
  auto frozen = [&](const EncodedSentence& s, TaskId task) {
    auto f = model.features(s, task, inference);
    return Tensor<T>::from(f.shared.shape(), std::vector<T>(f.shared.values().begin(), f.shared.values().end()));
  };
  auto collect = [&](const std::vector<AldExample>& a, const std::vector<TnExample>& t) {
    const std::size_t n = std::min(a.size(), t.size());
    std::vector<std::pair<Tensor<T>, int>> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.emplace_back(frozen(a[i].sentence, TaskId::ald), static_cast<int>(TaskId::ald));
      out.emplace_back(frozen(t[i].source, TaskId::tn), static_cast<int>(TaskId::tn));
    }
    return out;
  };
  auto train = collect(train_ald, train_tn);
  auto eval = collect(eval_ald, eval_tn);
  if (train.empty() || eval.empty()) throw ConfigError("probe: both tasks need training and evaluation sentences");

  Rng rng(config.seed);
  const auto& mc = model.config();
  TaskDiscriminator<T> probe(mc.d_model, mc.discriminator_hidden, mc.discriminator_layers, rng);
  ParameterList<T> params;
  probe.collect(params, "probe.");
  Adam<T> adam(AdamConfig{.learning_rate = config.learning_rate});
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    shuffle(order, rng);
    for (std::size_t i = 0; i < order.size(); i += config.batch) {
      zero_grads(params);
      Tape<T> tape;
      Tensor<T> loss;
      {
        TapeScope<T> scope(tape);
        std::vector<Tensor<T>> dists;
        std::vector<int> ids;
        for (std::size_t j = i; j < std::min(order.size(), i + config.batch); ++j) {
          dists.push_back(probe.discriminate(train[order[j]].first, {}, false, inference));
          ids.push_back(train[order[j]].second);
        }
        loss = adv_loss<T>(dists, ids);
      }
      tape.backward(loss);
      clip_grad_norm(params, 5.0);
      adam.step(params);
    }
  }
  std::size_t correct = 0;
  for (const auto& [x, id] : eval) {
    auto p = to_double(probe.discriminate(x, {}, false, inference));
    correct += static_cast<int>(argmax(p)) == id ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(eval.size());
}

#define ALDNORM_INSTANTIATE(T)                                                                                       \
  template ClassificationReport evaluate_ald(const JointModel<T>&, const std::vector<AldExample>&);                  \
  template double evaluate_tn_loss(const JointModel<T>&, const std::vector<TnExample>&);                             \
  template NormalizationReport evaluate_tn(const JointModel<T>&, const std::vector<TnExample>&, const Vocabulary&,   \
                                           std::size_t);                                                             \
  template class Trainer<T>;                                                                                         \
  template double probe_discriminator_accuracy(const JointModel<T>&, const std::vector<AldExample>&,                 \
                                               const std::vector<TnExample>&, const std::vector<AldExample>&,        \
                                               const std::vector<TnExample>&, const ProbeConfig&);
ALDNORM_INSTANTIATE(float)
ALDNORM_INSTANTIATE(double)
#undef ALDNORM_INSTANTIATE

}  // namespace aldnorm
