#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smartmixed/trainer.hpp"

namespace smartmixed {

/// The 18 reference feedforward topologies the suite sweeps by default.
const std::vector<std::vector<std::size_t>>& default_architectures();

/// smartmixed plus the six fixed baselines.
std::vector<Strategy> default_strategies();

/// "784x512x10"-style id used in records and CSV output.
std::string architecture_id(const std::vector<std::size_t>& architecture);
std::vector<std::size_t> parse_architecture(const std::string& text);

enum class ScalePreset { Desk, Paper };

struct SuiteConfig {
  std::vector<std::vector<std::size_t>> architectures;  // >= 1
  std::vector<Strategy> strategies;                     // >= 2
  TrainConfig base;  // shared hyperparameter overrides; per-run seed derived
  ScalePreset preset = ScalePreset::Desk;
  /// Stratified subsample of the 60k train pool taken before the 90/10
  /// split; 0 means the full pool. Presets fill this.
  std::size_t subsample = 0;
  std::uint64_t suite_seed = 0;
  std::size_t workers = 1;
};

/// Fills epochs/subsample from the preset: desk = 10k images, 5+15 epochs;
/// paper = full data, 50+350 epochs.
void apply_preset(SuiteConfig& cfg);

struct RunRecord {
  std::string architecture;
  std::string strategy;
  std::uint64_t seed = 0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::size_t rank = 0;  // 1-based within the architecture
};

/// Deterministic per-run seed: a hash of (suite seed, architecture id,
/// strategy name).
std::uint64_t run_seed(std::uint64_t suite_seed,
                       const std::string& architecture_id,
                       const std::string& strategy_name);

/// Ranks records within each architecture by test accuracy (descending),
/// ties by validation accuracy then strategy name.
void assign_ranks(std::vector<RunRecord>& records);

/// Artifacts of one selective run the suite keeps for the aggregated
/// activation analyses.
struct MixedSnapshot {
  std::string architecture;
  ActivationAssignment assignment;
  std::vector<DenseLayer> layers;
};

struct SuiteResult {
  std::vector<RunRecord> records;
  std::vector<MixedSnapshot> smartmixed_nets;
};

/// Runs every (architecture, strategy) pair; per_run, when set, is invoked
/// after each finished run (already ranked records are not available then).
/// A failed run aborts the remaining queue and rethrows after the workers
/// join; records finished before the failure stay in the result.
SuiteResult run_suite(const SuiteConfig& cfg, const TrainData& data,
                      const Dataset& test,
                      const std::function<void(const RunRecord&)>& per_run = {});

/// Mean reciprocal rank; throws RankError on a rank below 1.
double mrr(const std::vector<std::size_t>& ranks);

struct MrrRow {
  std::string strategy;
  double value = 0.0;
};
std::vector<MrrRow> mrr_table(const std::vector<RunRecord>& records);

/// counts[strategy][rank-1] over all architectures.
struct RankingDistribution {
  std::vector<std::string> strategies;
  std::vector<std::vector<std::size_t>> counts;
};
RankingDistribution ranking_distribution(const std::vector<RunRecord>& records);

/// Per hidden layer, the fraction of neurons per pool member (sums to 1).
std::vector<std::array<double, kActivationCount>> activation_distribution(
    const ActivationAssignment& assignment);

/// Mean hidden-to-hidden connection weight per (source kind, target kind)
/// pair. Cells without any pair are absent (count 0). Input->hidden and
/// hidden->output matrices are excluded: those endpoints have no kind.
struct WeightMeans {
  std::array<std::array<double, kActivationCount>, kActivationCount> sum{};
  std::array<std::array<std::size_t, kActivationCount>, kActivationCount>
      count{};

  double mean(std::size_t s, std::size_t t) const {
    return sum[s][t] / static_cast<double>(count[s][t]);
  }
  bool present(std::size_t s, std::size_t t) const {
    return count[s][t] > 0;
  }
  /// Pair-count-weighted merge, for aggregation across networks.
  void merge(const WeightMeans& other);
};

WeightMeans interactivation_weight_means(const NetworkMixed& net);
WeightMeans interactivation_weight_means(
    const std::vector<DenseLayer>& layers,
    const ActivationAssignment& assignment);

/// CSV/JSON writers. Columns are stable; doubles are emitted with %.17g so
/// re-parsing reproduces them exactly.
void write_rankings_csv(const std::string& path,
                        const std::vector<RunRecord>& records);
void write_rankings_json(const std::string& path,
                         const std::vector<RunRecord>& records);
std::vector<RunRecord> read_rankings_json(const std::string& path);
void write_mrr_csv(const std::string& path, const std::vector<MrrRow>& rows);
void write_rank_dist_csv(const std::string& path,
                         const RankingDistribution& dist);
void write_act_dist_csv(
    const std::string& path,
    const std::vector<std::array<double, kActivationCount>>& dist);
void write_weight_means_csv(const std::string& path, const WeightMeans& wm);

}  // namespace smartmixed
