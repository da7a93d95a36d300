#include "smartmixed/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "smartmixed/errors.hpp"

namespace smartmixed {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::vector<std::size_t>>& default_architectures() {
  static const std::vector<std::vector<std::size_t>> archs = {
      {784, 512, 10},
      {784, 512, 256, 128, 10},
      {784, 512, 256, 128, 64, 10},
      {784, 512, 256, 256, 128, 10},
      {784, 256, 128, 10},
      {784, 768, 10},
      {784, 768, 512, 10},
      {784, 768, 512, 512, 10},
      {784, 768, 512, 512, 256, 10},
      {784, 768, 512, 512, 256, 256, 10},
      {784, 768, 512, 512, 256, 256, 128, 10},
      {784, 768, 512, 512, 256, 256, 128, 128, 10},
      {784, 768, 512, 512, 256, 256, 128, 128, 64, 10},
      {784, 768, 512, 512, 256, 256, 128, 128, 64, 64, 10},
      {784, 768, 512, 512, 256, 256, 128, 128, 64, 64, 32, 10},
      {784, 768, 512, 512, 256, 256, 128, 128, 64, 64, 32, 32, 10},
      {784, 768, 512, 512, 256, 256, 128, 128, 64, 64, 32, 32, 16, 10},
      {784, 768, 512, 512, 256, 256, 128, 128, 64, 64, 32, 32, 16, 16, 10},
  };
  return archs;
}

std::vector<Strategy> default_strategies() {
  std::vector<Strategy> s;
  s.push_back(Strategy::smartmixed());
  for (ActivationKind kind : kAllActivations) {
    s.push_back(Strategy::fixed(kind));
  }
  return s;
}

std::string architecture_id(const std::vector<std::size_t>& architecture) {
  std::string id;
  for (std::size_t i = 0; i < architecture.size(); ++i) {
    if (i) id += 'x';
    id += std::to_string(architecture[i]);
  }
  return id;
}

std::vector<std::size_t> parse_architecture(const std::string& text) {
  std::vector<std::size_t> widths;
  std::string token;
  std::istringstream in(text);
  // accept both "784x512x10" and "784,512,10"
  const char sep = text.find('x') != std::string::npos ? 'x' : ',';
  while (std::getline(in, token, sep)) {
    if (token.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(token, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad architecture token '" + token + "'");
    }
    if (pos != token.size() || v == 0) {
      throw ConfigError("bad architecture token '" + token + "'");
    }
    widths.push_back(static_cast<std::size_t>(v));
  }
  if (widths.size() < 2) {
    throw ConfigError("architecture needs at least 2 layers");
  }
  return widths;
}

void apply_preset(SuiteConfig& cfg) {
  switch (cfg.preset) {
    case ScalePreset::Desk:
      cfg.subsample = 10000;
      cfg.base.phase1_epochs = 5;
      cfg.base.phase2_epochs = 15;
      break;
    case ScalePreset::Paper:
      cfg.subsample = 0;
      cfg.base.phase1_epochs = 50;
      cfg.base.phase2_epochs = 350;
      break;
  }
}

std::uint64_t run_seed(std::uint64_t suite_seed,
                       const std::string& architecture_id,
                       const std::string& strategy_name) {
  const std::string key = architecture_id + "|" + strategy_name;
  return Rng(suite_seed).child(fnv1a64(key.c_str())).seed();
}

void assign_ranks(std::vector<RunRecord>& records) {
  // group indices by architecture, preserving first-seen order
  std::vector<std::string> archs;
  for (const RunRecord& r : records) {
    if (std::find(archs.begin(), archs.end(), r.architecture) == archs.end()) {
      archs.push_back(r.architecture);
    }
  }
  for (const std::string& arch : archs) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].architecture == arch) idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const RunRecord& ra = records[a];
      const RunRecord& rb = records[b];
      if (ra.test_acc != rb.test_acc) return ra.test_acc > rb.test_acc;
      if (ra.val_acc != rb.val_acc) return ra.val_acc > rb.val_acc;
      return ra.strategy < rb.strategy;
    });
    for (std::size_t r = 0; r < idx.size(); ++r) {
      records[idx[r]].rank = r + 1;
    }
  }
}

SuiteResult run_suite(const SuiteConfig& cfg, const TrainData& data,
                      const Dataset& test,
                      const std::function<void(const RunRecord&)>& per_run) {
  if (cfg.architectures.empty()) {
    throw ConfigError("suite needs at least one architecture");
  }
  if (cfg.strategies.size() < 2) {
    throw ConfigError("suite needs at least two strategies");
  }

  struct Task {
    std::size_t arch_index;
    std::size_t strategy_index;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < cfg.architectures.size(); ++a) {
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
      tasks.push_back({a, s});
    }
  }

  SuiteResult result;
  result.records.resize(tasks.size());
  std::vector<char> done(tasks.size(), 0);
  std::vector<MixedSnapshot> snapshots(tasks.size());
  std::vector<char> has_snapshot(tasks.size(), 0);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex mu;

  auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      try {
        const auto& arch = cfg.architectures[tasks[t].arch_index];
        const Strategy& strategy = cfg.strategies[tasks[t].strategy_index];
        const std::string arch_id = architecture_id(arch);
        const std::string strat = strategy_name(strategy);

        TrainConfig run_cfg = cfg.base;
        run_cfg.architecture = arch;
        run_cfg.strategy = strategy;
        run_cfg.seed = run_seed(cfg.suite_seed, arch_id, strat);

        TrainOutcome outcome = train(run_cfg, data);
        EvalResult val = evaluate(outcome.mixed, data.val);
        EvalResult tst = evaluate(outcome.mixed, test);

        RunRecord rec;
        rec.architecture = arch_id;
        rec.strategy = strat;
        rec.seed = run_cfg.seed;
        rec.val_acc = val.accuracy;
        rec.test_acc = tst.accuracy;

        if (strategy.selective) {
          MixedSnapshot snap;
          snap.architecture = arch_id;
          snap.assignment = outcome.mixed.assignment;
          snap.layers = outcome.mixed.layers;
          snapshots[t] = std::move(snap);
          has_snapshot[t] = 1;
        }

        {
          std::lock_guard<std::mutex> lock(mu);
          result.records[t] = rec;
          done[t] = 1;
          if (per_run) per_run(rec);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, cfg.workers);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n_workers; ++i) {
    threads.emplace_back(worker);
  }
  for (std::thread& th : threads) {
    th.join();
  }

  // compact to finished runs (drops holes when a failure aborted the queue)
  std::vector<RunRecord> finished;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (done[t]) finished.push_back(std::move(result.records[t]));
    if (has_snapshot[t]) {
      result.smartmixed_nets.push_back(std::move(snapshots[t]));
    }
  }
  result.records = std::move(finished);
  assign_ranks(result.records);

  if (first_error) {
    std::rethrow_exception(first_error);
  }
  return result;
}

double mrr(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) {
    throw RankError("mrr of an empty rank list");
  }
  double sum = 0.0;
  for (std::size_t r : ranks) {
    if (r < 1) {
      throw RankError("rank must be >= 1");
    }
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

namespace {

std::vector<std::string> strategies_in_order(
    const std::vector<RunRecord>& records) {
  std::vector<std::string> out;
  for (const RunRecord& r : records) {
    if (std::find(out.begin(), out.end(), r.strategy) == out.end()) {
      out.push_back(r.strategy);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<MrrRow> mrr_table(const std::vector<RunRecord>& records) {
  std::vector<MrrRow> rows;
  for (const std::string& strat : strategies_in_order(records)) {
    std::vector<std::size_t> ranks;
    for (const RunRecord& r : records) {
      if (r.strategy == strat) ranks.push_back(r.rank);
    }
    rows.push_back({strat, mrr(ranks)});
  }
  return rows;
}

RankingDistribution ranking_distribution(
    const std::vector<RunRecord>& records) {
  RankingDistribution dist;
  dist.strategies = strategies_in_order(records);
  std::size_t max_rank = 0;
  for (const RunRecord& r : records) {
    max_rank = std::max(max_rank, r.rank);
  }
  dist.counts.assign(dist.strategies.size(),
                     std::vector<std::size_t>(max_rank, 0));
  for (const RunRecord& r : records) {
    const auto it =
        std::find(dist.strategies.begin(), dist.strategies.end(), r.strategy);
    dist.counts[it - dist.strategies.begin()][r.rank - 1] += 1;
  }
  return dist;
}

std::vector<std::array<double, kActivationCount>> activation_distribution(
    const ActivationAssignment& assignment) {
  std::vector<std::array<double, kActivationCount>> dist;
  for (const auto& kinds : assignment.layers) {
    std::array<double, kActivationCount> fractions{};
    for (ActivationKind kind : kinds) {
      fractions[static_cast<std::size_t>(kind)] += 1.0;
    }
    for (double& f : fractions) {
      f /= static_cast<double>(kinds.size());
    }
    dist.push_back(fractions);
  }
  return dist;
}

void WeightMeans::merge(const WeightMeans& other) {
  for (std::size_t s = 0; s < kActivationCount; ++s) {
    for (std::size_t t = 0; t < kActivationCount; ++t) {
      sum[s][t] += other.sum[s][t];
      count[s][t] += other.count[s][t];
    }
  }
}

WeightMeans interactivation_weight_means(
    const std::vector<DenseLayer>& layers,
    const ActivationAssignment& assignment) {
  if (assignment.layers.size() < 2) {
    throw InsufficientDepthError(
        "inter-activation weight means need at least two hidden layers");
  }
  WeightMeans wm;
  // dense layer l (1-based among hidden transitions) maps hidden layer l-1
  // -> hidden layer l; both endpoints carry assignments
  for (std::size_t l = 1; l + 1 < layers.size(); ++l) {
    const Matrix& w = layers[l].w;  // target x source
    const auto& src_kinds = assignment.layers[l - 1];
    const auto& dst_kinds = assignment.layers[l];
    for (std::size_t i = 0; i < w.rows; ++i) {
      const std::size_t t = static_cast<std::size_t>(dst_kinds[i]);
      const double* row = w.row(i);
      for (std::size_t j = 0; j < w.cols; ++j) {
        const std::size_t s = static_cast<std::size_t>(src_kinds[j]);
        wm.sum[s][t] += row[j];
        wm.count[s][t] += 1;
      }
    }
  }
  return wm;
}

WeightMeans interactivation_weight_means(const NetworkMixed& net) {
  return interactivation_weight_means(net.layers, net.assignment);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) {
    throw IoError("cannot write '" + path + "'");
  }
  return f;
}

}  // namespace

void write_rankings_csv(const std::string& path,
                        const std::vector<RunRecord>& records) {
  std::ofstream f = open_out(path);
  f << "architecture,strategy,seed,val_acc,test_acc,rank\n";
  for (const RunRecord& r : records) {
    f << r.architecture << ',' << r.strategy << ',' << r.seed << ','
      << fmt17(r.val_acc) << ',' << fmt17(r.test_acc) << ',' << r.rank
      << '\n';
  }
}

void write_rankings_json(const std::string& path,
                         const std::vector<RunRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (const RunRecord& r : records) {
    out.push_back({{"architecture", r.architecture},
                   {"strategy", r.strategy},
                   {"seed", r.seed},
                   {"val_acc", r.val_acc},
                   {"test_acc", r.test_acc},
                   {"rank", r.rank}});
  }
  std::ofstream f = open_out(path);
  f << out.dump(2) << '\n';
}

std::vector<RunRecord> read_rankings_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw IoError("cannot open '" + path + "'");
  }
  nlohmann::json in = nlohmann::json::parse(f);
  std::vector<RunRecord> records;
  for (const nlohmann::json& j : in) {
    RunRecord r;
    r.architecture = j.at("architecture").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.val_acc = j.at("val_acc").get<double>();
    r.test_acc = j.at("test_acc").get<double>();
    r.rank = j.at("rank").get<std::size_t>();
    records.push_back(std::move(r));
  }
  return records;
}

void write_mrr_csv(const std::string& path, const std::vector<MrrRow>& rows) {
  std::ofstream f = open_out(path);
  f << "strategy,mrr\n";
  for (const MrrRow& r : rows) {
    f << r.strategy << ',' << fmt17(r.value) << '\n';
  }
}

void write_rank_dist_csv(const std::string& path,
                         const RankingDistribution& dist) {
  std::ofstream f = open_out(path);
  f << "strategy,rank,count\n";
  for (std::size_t s = 0; s < dist.strategies.size(); ++s) {
    for (std::size_t r = 0; r < dist.counts[s].size(); ++r) {
      f << dist.strategies[s] << ',' << (r + 1) << ',' << dist.counts[s][r]
        << '\n';
    }
  }
}

void write_act_dist_csv(
    const std::string& path,
    const std::vector<std::array<double, kActivationCount>>& dist) {
  std::ofstream f = open_out(path);
  f << "layer,activation,fraction\n";
  for (std::size_t l = 0; l < dist.size(); ++l) {
    for (std::size_t j = 0; j < kActivationCount; ++j) {
      f << (l + 1) << ',' << activation_name(kAllActivations[j]) << ','
        << fmt17(dist[l][j]) << '\n';
    }
  }
}

void write_weight_means_csv(const std::string& path, const WeightMeans& wm) {
  std::ofstream f = open_out(path);
  f << "source,target,mean,pair_count\n";
  for (std::size_t s = 0; s < kActivationCount; ++s) {
    for (std::size_t t = 0; t < kActivationCount; ++t) {
      f << activation_name(kAllActivations[s]) << ','
        << activation_name(kAllActivations[t]) << ',';
      if (wm.present(s, t)) {
        f << fmt17(wm.mean(s, t));
      }
      f << ',' << wm.count[s][t] << '\n';
    }
  }
}

}  // namespace smartmixed
