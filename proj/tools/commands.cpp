// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aldnorm/checkpoint.hpp"
#include "aldnorm/dataset.hpp"
#include "aldnorm/gradcheck.hpp"
#include "aldnorm/synthetic.hpp"
#include "aldnorm/tensor.hpp"
#include "aldnorm/training.hpp"
#include "aldnorm/vocabulary.hpp"
#include "run_config.hpp"

namespace aldnorm::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_classification(std::ostream& out, const std::string& tag, const ClassificationReport& r, std::size_t n) {
  out << tag << "\tn=" << n << "\tp=" << fixed(r.weighted_precision) << "\tr=" << fixed(r.weighted_recall)
      << "\twf1=" << fixed(r.weighted_f1) << "\tacc=" << fixed(r.accuracy) << '\n';
}

void print_normalization(std::ostream& out, const std::string& tag, const NormalizationReport& r, std::size_t n) {
  out << tag << "\tn=" << n << "\tp=" << fixed(r.precision) << "\tr=" << fixed(r.recall) << "\tf1=" << fixed(r.f1)
      << "\ttoken_acc=" << fixed(r.token_accuracy) << "\tsentence_acc=" << fixed(r.sentence_accuracy) << '\n';
}

struct Corpora {
  std::optional<ClassificationCorpus> ald_train, ald_dev, ald_test;
  NormalizationCorpus tn_train;
  std::optional<NormalizationCorpus> tn_dev, tn_test;
};

Corpora load_corpora(const RunConfig& rc) {
  Corpora c;
  const std::vector<std::string>* inventory = rc.labels.empty() ? nullptr : &rc.labels;
  if (rc.ald_train) {
    c.ald_train = load_classification(*rc.ald_train, inventory);
    inventory = &c.ald_train->labels;
  }
  if (rc.ald_dev) c.ald_dev = load_classification(*rc.ald_dev, inventory);
  if (rc.ald_test) c.ald_test = load_classification(*rc.ald_test, inventory);
  if (rc.tn_train) c.tn_train = load_normalization(*rc.tn_train);
  if (rc.slang_dictionary && c.ald_train) {
    const auto extra = augment_with_slang(*c.ald_train, load_slang_dictionary(*rc.slang_dictionary));
    c.tn_train.pairs.insert(c.tn_train.pairs.end(), extra.pairs.begin(), extra.pairs.end());
  }
  if (rc.tn_dev) c.tn_dev = load_normalization(*rc.tn_dev);
  if (rc.tn_test) c.tn_test = load_normalization(*rc.tn_test);
  return c;
}

RunConfig with_overrides(const fs::path& path, const std::vector<std::string>& overrides) {
  RunConfig rc = load_run_config(path);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
    apply_setting(rc, o.substr(0, eq), o.substr(eq + 1));
  }
  rc.train.validate();
  return rc;
}

ModelBundle open_bundle(const fs::path& dir, const std::optional<fs::path>& config, bool force) {
  if (!config) return load_bundle(dir);
  const RunConfig rc = load_run_config(*config);
  const Lexicon lexicon = Lexicon::load(dir);
  const ModelConfig expected = sized_config(rc.model, lexicon);
  return load_bundle(dir, &expected, force);
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_lines(in);
}

template <typename Fn>
int for_each_input(const InferOptions& options, std::istream& in, Fn&& fn) {
  std::vector<std::string> lines;
  std::string source = "<stdin>";
  if (options.input) {
    lines = read_lines(*options.input);
    source = options.input->string();
  } else {
    lines = read_lines(in);
  }
  const auto bundle = open_bundle(options.checkpoint, options.config, options.force);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = tokenize(lines[i]);
    if (tokens.empty()) throw ParseError(source, i + 1, "empty sentence");
    fn(bundle, encode_tokens(tokens, bundle.lexicon, bundle.model->config().max_len));
  }
  return kExitOk;
}

ModelConfig gradcheck_model(const std::optional<fs::path>& config) {
  if (!config) return ModelConfig::tiny(20, 12, 15, 3);
  ModelConfig m = load_run_config(*config).model;
  m.word_vocab = 20;
  m.char_vocab = 12;
  m.target_vocab = 15;
  m.num_labels = 3;
  return m;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* c = dynamic_cast<const CheckpointError*>(&e)) {
    return c->kind() == CheckpointError::Kind::fingerprint ? kExitConfig : kExitData;
  }
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const VocabularyError*>(&e) ||
      dynamic_cast<const ContractError*>(&e) || dynamic_cast<const SequenceLengthError*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitData;
  }
  return kExitInternal;
}

int cmd_train(const TrainOptions& options, std::ostream& out) {
  const RunConfig rc = with_overrides(options.config, options.overrides);
  if (rc.precision != Precision::f32) {
    throw ConfigError("precision: training writes float32 checkpoints; f64 is reserved for gradcheck");
  }
  rc.validate_paths(true);

  const Corpora corpora = load_corpora(rc);
  const Lexicon lexicon = rc.vocab_dir ? Lexicon::load(*rc.vocab_dir)
                                       : build_lexicon(corpora.ald_train ? &*corpora.ald_train : nullptr,
                                                       corpora.tn_train.pairs.empty() ? nullptr : &corpora.tn_train);
  const ModelConfig mc = sized_config(rc.model, lexicon);
  mc.validate();

  TaskData data;
  if (rc.train.mode != TrainMode::tn_only) {
    data.ald_train = encode_classification(*corpora.ald_train, lexicon, mc.max_len);
    if (corpora.ald_dev) data.ald_dev = encode_classification(*corpora.ald_dev, lexicon, mc.max_len);
    if (data.ald_train.empty()) throw ParseError("ald_train: no instances");
  }
  if (rc.train.mode != TrainMode::ald_only) {
    data.tn_train = encode_normalization(corpora.tn_train, lexicon, mc.max_len);
    if (corpora.tn_dev) data.tn_dev = encode_normalization(*corpora.tn_dev, lexicon, mc.max_len);
    if (data.tn_train.empty()) throw ParseError("tn_train: no pairs");
  }

  JointModel<float> model(mc, rc.train.seed);
  Trainer<float> trainer(model, rc.train, &lexicon.targets);
  const MetricsReport report = trainer.train(std::move(data));

  const fs::path dir = *rc.checkpoint_dir;
  fs::create_directories(dir);
  std::ostringstream config_text;
  write_run_config(config_text, rc);
  save_bundle(dir, model, lexicon, &trainer.optimizer(),
              {{"mode", std::string(mode_name(rc.train.mode))}, {"run.config", config_text.str()}});
  const fs::path metrics_path = rc.metrics_file.value_or(dir / "metrics.tsv");
  {
    std::ofstream m(metrics_path);
    if (!m) throw ParseError("cannot write " + metrics_path.string());
    write_metrics(m, report);
  }
  out << "checkpoint\t" << (dir / kCheckpointFile).string() << '\n';
  out << "metrics\t" << metrics_path.string() << '\n';
  if (corpora.ald_test && rc.train.mode != TrainMode::tn_only) {
    const auto test = encode_classification(*corpora.ald_test, lexicon, mc.max_len);
    print_classification(out, "test_ald", evaluate_ald(model, test), test.size());
  }
  if (corpora.tn_test && rc.train.mode != TrainMode::ald_only) {
    const auto test = encode_normalization(*corpora.tn_test, lexicon, mc.max_len);
    print_normalization(out, "test_tn", evaluate_tn(model, test, lexicon.targets, rc.train.max_decode_len),
                        test.size());
  }
  return kExitOk;
}

int cmd_eval(const EvalOptions& options, std::ostream& out) {
  if (!options.ald && !options.tn) throw ConfigError("eval: give --ald and/or --tn");
  if (options.predictions && !options.ald) throw ConfigError("eval: --predictions needs --ald");
  if (options.tn_predictions && !options.tn) throw ConfigError("eval: --tn-predictions needs --tn");
  const bool needs_model = (options.ald && !options.predictions) || (options.tn && !options.tn_predictions);
  if (needs_model && !options.checkpoint) throw ConfigError("eval: --checkpoint required without predictions");

  std::optional<ModelBundle> bundle;
  if (options.checkpoint) bundle = open_bundle(*options.checkpoint, options.config, options.force);

  if (options.ald) {
    const auto* inventory = bundle ? &bundle->lexicon.labels : nullptr;
    const auto gold = load_classification(*options.ald, inventory);
    const auto& labels = gold.labels;
    ClassificationReport report;
    if (options.predictions) {
      const auto lines = read_lines(*options.predictions);
      std::vector<std::string> predicted;
      for (const auto& line : lines) {
        if (!line.empty()) predicted.push_back(line.substr(0, line.find('\t')));
      }
      if (predicted.size() != gold.instances.size()) {
        throw ParseError(options.predictions->string() + ": " + std::to_string(predicted.size()) +
                         " predictions for " + std::to_string(gold.instances.size()) + " instances");
      }
      ConfusionMatrix cm(labels.size());
      for (std::size_t i = 0; i < predicted.size(); ++i) {
        const auto g = std::find(labels.begin(), labels.end(), gold.instances[i].label);
        const auto p = std::find(labels.begin(), labels.end(), predicted[i]);
        if (p == labels.end()) throw ParseError(options.predictions->string(), i + 1, "unknown label '" + predicted[i] + "'");
        cm.add(static_cast<int>(g - labels.begin()), static_cast<int>(p - labels.begin()));
      }
      report = classification_report(cm);
    } else {
      const auto data = encode_classification(gold, bundle->lexicon, bundle->model->config().max_len);
      report = evaluate_ald(*bundle->model, data);
    }
    print_classification(out, "ald", report, gold.instances.size());
  }

  if (options.tn) {
    const auto gold = load_normalization(*options.tn);
    NormalizationReport report;
    if (options.tn_predictions) {
      const auto lines = read_lines(*options.tn_predictions);
      if (lines.size() != gold.pairs.size()) {
        throw ParseError(options.tn_predictions->string() + ": " + std::to_string(lines.size()) +
                         " predictions for " + std::to_string(gold.pairs.size()) + " pairs");
      }
      NormalizationScorer scorer;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        std::vector<std::string> predicted;
        std::istringstream words(lines[i]);
        for (std::string w; words >> w;) predicted.push_back(w);
        scorer.add(gold.pairs[i].raw, predicted, gold.pairs[i].normalized);
      }
      report = scorer.report();
    } else {
      const auto data = encode_normalization(gold, bundle->lexicon, bundle->model->config().max_len);
      report = evaluate_tn(*bundle->model, data, bundle->lexicon.targets, options.max_len);
    }
    print_normalization(out, "tn", report, gold.pairs.size());
  }
  return kExitOk;
}

int cmd_classify(const InferOptions& options, std::istream& in, std::ostream& out) {
  return for_each_input(options, in, [&](const ModelBundle& bundle, const EncodedSentence& sentence) {
    ForwardContext ctx;
    const auto dist = bundle.model->classify(sentence, ctx);
    const auto probs = dist.values();
    const auto best = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    const auto& labels = bundle.lexicon.labels;
    out << (best < labels.size() ? labels[best] : std::to_string(best)) << '\t' << fixed(probs[best]) << '\n';
  });
}

int cmd_normalize(const InferOptions& options, std::istream& in, std::ostream& out) {
  return for_each_input(options, in, [&](const ModelBundle& bundle, const EncodedSentence& sentence) {
    const auto result = bundle.model->normalize(sentence, std::min(options.max_len, bundle.model->config().max_len));
    Tokens words;
    for (int id : result.tokens) words.push_back(bundle.lexicon.targets.token(id));
    out << join_tokens(words) << '\n';
  });
}

int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out) {
  const ModelConfig model = gradcheck_model(options.config);
  GradcheckConfig gc;
  gc.seed = options.seed;
  if (!options.inject_fault.empty()) set_backward_fault(options.inject_fault);
  GradcheckReport report;
  try {
    report = run_gradcheck(model, gc);
  } catch (...) {
    clear_backward_fault();
    throw;
  }
  clear_backward_fault();
  write_gradcheck(out, report);
  return report.passed() ? kExitOk : kExitVerification;
}

int cmd_dump_attention(const DumpOptions& options, std::ostream& out) {
  const auto tokens = tokenize(options.sentence);
  if (tokens.empty()) throw ContractError("dump-attention: sentence has no tokens");
  const auto bundle = load_bundle(options.checkpoint);
  const auto sentence = encode_tokens(tokens, bundle.lexicon, bundle.model->config().max_len);
  const Tokens shown(tokens.begin(), tokens.begin() + static_cast<long>(sentence.words.size()));
  const auto capture = bundle.model->capture_attention(sentence);
  auto write_all = [&](std::ostream& o) {
    write_attention_dump(o, role_name(EncoderRole::shared), shown, capture.shared);
    write_attention_dump(o, role_name(EncoderRole::ald_private), shown, capture.ald_private);
    write_attention_dump(o, role_name(EncoderRole::tn_private), shown, capture.tn_private);
  };
  if (options.output) {
    std::ofstream f(*options.output);
    if (!f) throw ParseError("cannot write " + options.output->string());
    write_all(f);
    out << "attention\t" << options.output->string() << '\n';
  } else {
    write_all(out);
  }
  return kExitOk;
}

int cmd_generate(const GenerateOptions& options, std::ostream& out) {
  SyntheticSpec spec;
  spec.ald_train_corruption = options.ald_train_corruption;
  spec.ald_eval_corruption = options.ald_eval_corruption;
  spec.validate();
  const auto corpora = generate_synthetic(options.seed, spec);
  const fs::path dir = options.output;
  fs::create_directories(dir);
  write_classification(dir / "ald_train.tsv", corpora.ald_train);
  write_classification(dir / "ald_dev.tsv", corpora.ald_dev);
  write_classification(dir / "ald_test.tsv", corpora.ald_test);
  write_normalization(dir / "tn_train.tsv", corpora.tn_train);
  write_normalization(dir / "tn_dev.tsv", corpora.tn_dev);
  write_normalization(dir / "tn_test.tsv", corpora.tn_test);
  write_slang_dictionary(dir / "slang.tsv", corpora.dictionary);
  {
    std::ofstream cfg(dir / "tiny.cfg");
    cfg << "# Synthetic corpora with the tiny model.\n"
        << "preset = tiny\n"
        << "seed = " << options.seed << "\n"
        << "learning_rate = 0.001\n"
        << "max_epochs = 60\n"
        << "tn_batch = 8\n"
        << "warm_max_epochs = 5\n"
        << "ald_train = ald_train.tsv\n"
        << "ald_dev = ald_dev.tsv\n"
        << "ald_test = ald_test.tsv\n"
        << "tn_train = tn_train.tsv\n"
        << "tn_dev = tn_dev.tsv\n"
        << "tn_test = tn_test.tsv\n"
        << "checkpoint_dir = model\n";
  }
  for (const char* name : {"ald_train.tsv", "ald_dev.tsv", "ald_test.tsv", "tn_train.tsv", "tn_dev.tsv", "tn_test.tsv",
                           "slang.tsv", "tiny.cfg"}) {
    out << "wrote\t" << (dir / name).string() << '\n';
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shared-private aggressive language detection with text normalization", "aldnorm"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("-c,--config", train.config, "Config file")->required();
  train_cmd->add_option("--set", train.overrides, "Override a config key (key=value)");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint or a predictions file");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint directory");
  eval_cmd->add_option("--ald", eval.ald, "Gold classification file");
  eval_cmd->add_option("--tn", eval.tn, "Gold normalization file");
  eval_cmd->add_option("--predictions", eval.predictions, "Predicted labels, one per line");
  eval_cmd->add_option("--tn-predictions", eval.tn_predictions, "Predicted sentences, one per line");
  eval_cmd->add_option("--config", eval.config, "Config whose model must match the checkpoint");
  eval_cmd->add_flag("--force", eval.force, "Load despite a configuration mismatch");
  eval_cmd->add_option("--max-len", eval.max_len, "Decoding limit");

  InferOptions infer;
  auto add_infer = [&](CLI::App* cmd) {
    cmd->add_option("--checkpoint", infer.checkpoint, "Checkpoint directory")->required();
    cmd->add_option("-i,--input", infer.input, "One sentence per line (default stdin)");
    cmd->add_option("--config", infer.config, "Config whose model must match the checkpoint");
    cmd->add_flag("--force", infer.force, "Load despite a configuration mismatch");
    cmd->add_option("--max-len", infer.max_len, "Decoding limit");
  };
  auto* classify_cmd = app.add_subcommand("classify", "Print label and confidence per sentence");
  add_infer(classify_cmd);
  auto* normalize_cmd = app.add_subcommand("normalize", "Print the normalized form of each sentence");
  add_infer(normalize_cmd);

  GradcheckOptions grad;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every parameter group");
  grad_cmd->add_option("--config", grad.config, "Config supplying model dimensions (default tiny)");
  grad_cmd->add_option("--seed", grad.seed, "Model and input seed");
  grad_cmd->add_option("--inject-fault", grad.inject_fault, "Corrupt one backward rule")->group("");

  DumpOptions dump;
  auto* dump_cmd = app.add_subcommand("dump-attention", "Write attention weights of all three encoders");
  dump_cmd->add_option("--checkpoint", dump.checkpoint, "Checkpoint directory")->required();
  dump_cmd->add_option("-s,--sentence", dump.sentence, "Sentence to encode")->required();
  dump_cmd->add_option("-o,--output", dump.output, "Output file (default stdout)");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write synthetic corpora and a sample config");
  gen_cmd->add_option("-o,--output", gen.output, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--ald-train-corruption", gen.ald_train_corruption, "Slang rate on ALD train cues");
  gen_cmd->add_option("--ald-eval-corruption", gen.ald_eval_corruption, "Slang rate on ALD dev/test cues");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (classify_cmd->parsed()) return cmd_classify(infer, in, out);
    if (normalize_cmd->parsed()) return cmd_normalize(infer, in, out);
    if (grad_cmd->parsed()) {
      const int code = cmd_gradcheck(grad, out);
      if (code != kExitOk) err << "error: gradient check failed\n";
      return code;
    }
    if (dump_cmd->parsed()) return cmd_dump_attention(dump, out);
    if (gen_cmd->parsed()) return cmd_generate(gen, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitInternal;
}

}  // namespace aldnorm::cli
