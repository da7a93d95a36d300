#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smartmixed/grouped.hpp"
#include "smartmixed/mnist.hpp"
#include "smartmixed/network.hpp"

namespace smartmixed {

/// Either the two-phase selective strategy or a fixed activation everywhere.
struct Strategy {
  bool selective = true;
  ActivationKind fixed_kind = ActivationKind::ReLU;

  static Strategy smartmixed() { return Strategy{true, ActivationKind::ReLU}; }
  static Strategy fixed(ActivationKind kind) { return Strategy{false, kind}; }
};

/// Accepts "smartmixed", an activation name ("relu"), or "fixed:relu".
Strategy parse_strategy(const std::string& text);
std::string strategy_name(const Strategy& s);

struct TrainConfig {
  std::vector<std::size_t> architecture;
  std::size_t phase1_epochs = 50;
  std::size_t phase2_epochs = 350;
  double tau = 1.0;
  double eps = 1e-20;
  std::size_t batch_size = 128;
  AdamConfig adam;
  std::uint64_t seed = 0;
  NoiseMode noise_mode = NoiseMode::PerBatch;
  Strategy strategy = Strategy::smartmixed();

  std::size_t total_epochs() const { return phase1_epochs + phase2_epochs; }
};

struct EpochLog {
  std::string phase;  // "phase1", "phase2" or "fixed"
  std::size_t epoch = 0;  // 1-based, global across the run
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  /// Neurons whose max-logit choice changed since the previous epoch;
  /// meaningful in phase 1 only (-1 elsewhere).
  long long selection_changes = -1;
};

struct TrainData {
  Dataset train;
  Dataset val;
};

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

/// Deterministic evaluation; Phase-1 networks run zero-noise with the
/// max-logit activation per neuron.
EvalResult evaluate(const NetworkPhase1& net, const Dataset& ds);
EvalResult evaluate(const NetworkMixed& net, const Dataset& ds);

/// Phase 1: minibatch training with stochastic activation selection.
std::pair<NetworkPhase1, std::vector<EpochLog>> train_phase1(
    const TrainConfig& cfg, const TrainData& data);

/// Freeze to the max-logit choices; histogram reporting is the caller's
/// (see assignment_histogram).
NetworkMixed transition(const NetworkPhase1& net);

/// Phase 2: continued training of the frozen network. Epoch numbering in
/// the logs continues from epoch_offset.
std::vector<EpochLog> train_phase2(NetworkMixed& net, const TrainConfig& cfg,
                                   const TrainData& data,
                                   std::size_t epoch_offset);

/// A fixed-activation baseline trained for the same total budget
/// (phase1_epochs + phase2_epochs).
std::pair<NetworkMixed, std::vector<EpochLog>> train_fixed_baseline(
    const TrainConfig& cfg, const TrainData& data);

struct SmartMixedResult {
  NetworkPhase1 phase1;  // state at the end of phase 1
  NetworkMixed mixed;    // final network
  std::vector<EpochLog> logs;
};

/// The full two-phase schedule: phase 1, transition, phase 2.
SmartMixedResult train_smartmixed(const TrainConfig& cfg,
                                  const TrainData& data);

/// Runs the configured strategy and returns the final mixed network plus
/// logs (and the phase-1 network for selective runs).
struct TrainOutcome {
  std::optional<NetworkPhase1> phase1;
  NetworkMixed mixed;
  std::vector<EpochLog> logs;
};
TrainOutcome train(const TrainConfig& cfg, const TrainData& data);

/// Per-layer counts of assigned activations.
std::vector<std::array<std::size_t, kActivationCount>> assignment_histogram(
    const ActivationAssignment& assignment);

/// Streams logs as CSV:
/// phase,epoch,train_loss,val_loss,train_acc,val_acc,selection_changes
/// (selection_changes is blank outside phase 1).
void write_epoch_csv(const std::string& path,
                     const std::vector<EpochLog>& logs);

/// Checks the architecture against the dataset and the widths against the
/// config invariants; throws ConfigError.
void validate_config(const TrainConfig& cfg, const TrainData& data);

}  // namespace smartmixed
