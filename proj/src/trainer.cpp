#include "smartmixed/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "smartmixed/errors.hpp"

namespace smartmixed {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

constexpr std::size_t kEvalBatch = 512;

std::size_t count_correct(const Matrix& logits,
                          const std::vector<std::size_t>& labels) {
  std::size_t correct = 0;
  for (std::size_t b = 0; b < logits.rows; ++b) {
    if (argmax(logits.row(b), logits.cols) == labels[b]) {
      ++correct;
    }
  }
  return correct;
}

template <typename InferFn>
EvalResult evaluate_with(InferFn&& infer, const Dataset& ds) {
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < ds.size(); start += kEvalBatch) {
    const std::size_t end = std::min(start + kEvalBatch, ds.size());
    Matrix x(end - start, ds.images.cols);
    std::vector<std::size_t> labels(ds.labels.begin() + start,
                                    ds.labels.begin() + end);
    std::copy(ds.images.row(start), ds.images.row(start) + x.size(),
              x.data.begin());
    Matrix logits = infer(x);
    auto [loss, grad] = softmax_xent(logits, labels);
    (void)grad;
    loss_sum += loss * static_cast<double>(end - start);
    correct += count_correct(logits, labels);
  }
  EvalResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
  r.loss = loss_sum / static_cast<double>(ds.size());
  return r;
}

}  // namespace

EvalResult evaluate(const NetworkPhase1& net, const Dataset& ds) {
  return evaluate_with([&](const Matrix& x) { return infer_forward(net, x); },
                       ds);
}

EvalResult evaluate(const NetworkMixed& net, const Dataset& ds) {
  return evaluate_with([&](const Matrix& x) { return grouped_infer(net, x); },
                       ds);
}

Strategy parse_strategy(const std::string& text) {
  if (text == "smartmixed") {
    return Strategy::smartmixed();
  }
  std::string name = text;
  if (name.rfind("fixed:", 0) == 0) {
    name = name.substr(6);
  }
  return Strategy::fixed(activation_from_name(name));
}

std::string strategy_name(const Strategy& s) {
  return s.selective ? "smartmixed" : activation_name(s.fixed_kind);
}

void validate_config(const TrainConfig& cfg, const TrainData& data) {
  if (cfg.architecture.size() < 2) {
    throw ConfigError("architecture needs at least 2 layers");
  }
  for (std::size_t w : cfg.architecture) {
    if (w < 1) throw ConfigError("layer widths must be >= 1");
  }
  if (cfg.batch_size < 1) {
    throw ConfigError("batch_size must be >= 1");
  }
  if (!(cfg.tau > 0.0)) {
    throw ConfigError("tau must be > 0");
  }
  if (cfg.architecture.front() != data.train.images.cols) {
    throw ConfigError("architecture input width " +
                      std::to_string(cfg.architecture.front()) +
                      " != data dimension " +
                      std::to_string(data.train.images.cols));
  }
  for (std::size_t label : data.train.labels) {
    if (label >= cfg.architecture.back()) {
      throw ConfigError("label exceeds output width");
    }
  }
}

namespace {

struct EpochStats {
  double loss = 0.0;
  double acc = 0.0;
};

/// One epoch of minibatch updates on a Phase-1 network.
EpochStats run_phase1_epoch(NetworkPhase1& net, OptimizerState& opt,
                            const TrainConfig& cfg, const Dataset& train,
                            Rng& shuffle_rng, Rng& noise_rng) {
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (Batch& batch : batches(train, cfg.batch_size, shuffle_rng)) {
    auto [logits, cache] = forward(net, batch.x, noise_rng, cfg.noise_mode);
    auto [loss, dlogits] = softmax_xent(logits, batch.labels);
    Gradients grads = backward(net, cache, dlogits);
    adam_step(net, grads, opt);
    loss_sum += loss * static_cast<double>(batch.x.rows);
    correct += count_correct(logits, batch.labels);
  }
  EpochStats s;
  s.loss = loss_sum / static_cast<double>(train.size());
  s.acc = static_cast<double>(correct) / static_cast<double>(train.size());
  return s;
}

EpochStats run_mixed_epoch(NetworkMixed& net, OptimizerState& opt,
                           const TrainConfig& cfg, const Dataset& train,
                           Rng& shuffle_rng) {
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (Batch& batch : batches(train, cfg.batch_size, shuffle_rng)) {
    auto [logits, cache] = grouped_forward(net, batch.x);
    auto [loss, dlogits] = softmax_xent(logits, batch.labels);
    Gradients grads = grouped_backward(net, cache, dlogits);
    adam_step(net, grads, opt);
    loss_sum += loss * static_cast<double>(batch.x.rows);
    correct += count_correct(logits, batch.labels);
  }
  EpochStats s;
  s.loss = loss_sum / static_cast<double>(train.size());
  s.acc = static_cast<double>(correct) / static_cast<double>(train.size());
  return s;
}

long long count_selection_changes(const ActivationAssignment& before,
                                  const ActivationAssignment& after) {
  long long changes = 0;
  for (std::size_t l = 0; l < before.layers.size(); ++l) {
    for (std::size_t i = 0; i < before.layers[l].size(); ++i) {
      if (before.layers[l][i] != after.layers[l][i]) {
        ++changes;
      }
    }
  }
  return changes;
}

}  // namespace

std::pair<NetworkPhase1, std::vector<EpochLog>> train_phase1(
    const TrainConfig& cfg, const TrainData& data) {
  if (!cfg.strategy.selective) {
    throw ConfigError("train_phase1 requires the smartmixed strategy");
  }
  validate_config(cfg, data);

  NetworkPhase1 net = init_network(cfg.architecture, cfg.seed);
  net.set_temperature(cfg.tau, cfg.eps);
  OptimizerState opt = init_optimizer(net, cfg.adam);
  Rng master(cfg.seed);
  Rng noise_rng = master.child(kNoiseStream);
  Rng shuffle_rng = master.child(kShuffleStream);

  std::vector<EpochLog> logs;
  ActivationAssignment prev = extract_assignment(net);
  for (std::size_t epoch = 1; epoch <= cfg.phase1_epochs; ++epoch) {
    EpochStats train_stats =
        run_phase1_epoch(net, opt, cfg, data.train, shuffle_rng, noise_rng);
    EvalResult val = evaluate(net, data.val);
    ActivationAssignment current = extract_assignment(net);

    EpochLog log;
    log.phase = "phase1";
    log.epoch = epoch;
    log.train_loss = train_stats.loss;
    log.train_acc = train_stats.acc;
    log.val_loss = val.loss;
    log.val_acc = val.accuracy;
    log.selection_changes = count_selection_changes(prev, current);
    logs.push_back(log);
    prev = std::move(current);
  }
  return {std::move(net), std::move(logs)};
}

NetworkMixed transition(const NetworkPhase1& net) { return freeze(net); }

std::vector<EpochLog> train_phase2(NetworkMixed& net, const TrainConfig& cfg,
                                   const TrainData& data,
                                   std::size_t epoch_offset) {
  validate_config(cfg, data);
  OptimizerState opt = init_optimizer(net, cfg.adam);
  Rng master(cfg.seed);
  Rng shuffle_rng = master.child(kShuffleStream).child(2);

  std::vector<EpochLog> logs;
  for (std::size_t epoch = 1; epoch <= cfg.phase2_epochs; ++epoch) {
    EpochStats train_stats =
        run_mixed_epoch(net, opt, cfg, data.train, shuffle_rng);
    EvalResult val = evaluate(net, data.val);
    EpochLog log;
    log.phase = "phase2";
    log.epoch = epoch_offset + epoch;
    log.train_loss = train_stats.loss;
    log.train_acc = train_stats.acc;
    log.val_loss = val.loss;
    log.val_acc = val.accuracy;
    logs.push_back(log);
  }
  return logs;
}

std::pair<NetworkMixed, std::vector<EpochLog>> train_fixed_baseline(
    const TrainConfig& cfg, const TrainData& data) {
  if (cfg.strategy.selective) {
    throw ConfigError("train_fixed_baseline requires a fixed strategy");
  }
  validate_config(cfg, data);
  NetworkMixed net =
      make_uniform_mixed(cfg.architecture, cfg.strategy.fixed_kind, cfg.seed);
  OptimizerState opt = init_optimizer(net, cfg.adam);
  Rng master(cfg.seed);
  Rng shuffle_rng = master.child(kShuffleStream);

  std::vector<EpochLog> logs;
  const std::size_t total = cfg.total_epochs();
  for (std::size_t epoch = 1; epoch <= total; ++epoch) {
    EpochStats train_stats =
        run_mixed_epoch(net, opt, cfg, data.train, shuffle_rng);
    EvalResult val = evaluate(net, data.val);
    EpochLog log;
    log.phase = "fixed";
    log.epoch = epoch;
    log.train_loss = train_stats.loss;
    log.train_acc = train_stats.acc;
    log.val_loss = val.loss;
    log.val_acc = val.accuracy;
    logs.push_back(log);
  }
  return {std::move(net), std::move(logs)};
}

SmartMixedResult train_smartmixed(const TrainConfig& cfg,
                                  const TrainData& data) {
  SmartMixedResult result;
  auto [net, logs1] = train_phase1(cfg, data);
  result.mixed = transition(net);
  result.phase1 = std::move(net);
  result.logs = std::move(logs1);
  std::vector<EpochLog> logs2 =
      train_phase2(result.mixed, cfg, data, cfg.phase1_epochs);
  result.logs.insert(result.logs.end(), logs2.begin(), logs2.end());
  return result;
}

TrainOutcome train(const TrainConfig& cfg, const TrainData& data) {
  TrainOutcome outcome;
  if (cfg.strategy.selective) {
    SmartMixedResult r = train_smartmixed(cfg, data);
    outcome.phase1 = std::move(r.phase1);
    outcome.mixed = std::move(r.mixed);
    outcome.logs = std::move(r.logs);
  } else {
    auto [net, logs] = train_fixed_baseline(cfg, data);
    outcome.mixed = std::move(net);
    outcome.logs = std::move(logs);
  }
  return outcome;
}

std::vector<std::array<std::size_t, kActivationCount>> assignment_histogram(
    const ActivationAssignment& assignment) {
  std::vector<std::array<std::size_t, kActivationCount>> hist;
  for (const auto& kinds : assignment.layers) {
    std::array<std::size_t, kActivationCount> counts{};
    for (ActivationKind kind : kinds) {
      ++counts[static_cast<std::size_t>(kind)];
    }
    hist.push_back(counts);
  }
  return hist;
}

void write_epoch_csv(const std::string& path,
                     const std::vector<EpochLog>& logs) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) {
    throw IoError("cannot write '" + path + "'");
  }
  f << "phase,epoch,train_loss,val_loss,train_acc,val_acc,selection_changes\n";
  char buf[512];
  for (const EpochLog& log : logs) {
    std::string changes;
    if (log.selection_changes >= 0) {
      changes = std::to_string(log.selection_changes);
    }
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g,%.17g,%.17g,%s\n",
                  log.phase.c_str(), log.epoch, log.train_loss, log.val_loss,
                  log.train_acc, log.val_acc, changes.c_str());
    f << buf;
  }
  if (!f) {
    throw IoError("short write to '" + path + "'");
  }
}

}  // namespace smartmixed
