#pragma once

// Experiment configuration, parallel Monte Carlo replications, and
// CSV / summary output for the bandit, equivalence and chain experiments.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bts/random.hpp"

namespace bts {

enum class ExperimentKind { Bandit, Equivalence, RlChain };

std::string_view to_string(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Bandit;

  /// bandit: classic | bayes | besa | greedy; rl-chain: ensemble | bootstrap | egreedy.
  std::vector<std::string> algorithms;
  /// Artificial history length(s). The bandit grid runs every listed value.
  std::vector<std::size_t> m_values;

  double epsilon = 0.01;
  std::size_t horizon = 1000;
  std::size_t replications = 20;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool freeze_artificial = false;
  bool deterministic_ties = false;

  std::size_t draws = 10000;

  std::size_t chain_length = 10;
  std::size_t episode_horizon = 10;
  std::size_t episodes = 500;
  std::size_t models = 10;
  double baseline_epsilon = 0.1;
  std::size_t window_start = 400;
};

/// Defaults for each experiment kind (algorithm list, M grid, sizes).
ExperimentConfig default_config(ExperimentKind kind);

/// Throws std::invalid_argument naming the offending field.
void validate(const ExperimentConfig &config);

/// Sets one field from its textual key (the CLI flag name without dashes).
void apply_config_value(ExperimentConfig &config, std::string_view key,
                        std::string_view value);

/// Flat `key = value` lines; blank lines and `#` comments are ignored.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string &path);

/// Runs `body(r)` for r in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)> &body);

struct RegretRow {
  std::size_t rep = 0;
  std::size_t t = 0;  // 1-based timestep
  double regret = 0.0;
  std::string algorithm;
  std::size_t m = 0;

  friend bool operator==(const RegretRow &, const RegretRow &) = default;
};

struct RegretTable {
  std::vector<RegretRow> rows;
};

/// Every (algorithm, M) variant in config order; replication r of every
/// variant uses seed base + r.
RegretTable run_bandit_experiment(const ExperimentConfig &config);

struct EquivalenceGrid {
  std::vector<int> alphas{1, 2, 3};
  std::vector<int> betas{1, 2, 3};
  std::vector<std::size_t> successes{0, 1, 2, 3};
  std::vector<std::size_t> failures{0, 1, 2, 3};
};

struct KsCell {
  int alpha = 1;
  int beta = 1;
  std::size_t successes = 0;
  std::size_t failures = 0;
  double statistic = 0.0;
};

/// Per cell: KS distance between n bootstrap theta draws and n direct Beta
/// posterior draws.
std::vector<KsCell> run_equivalence_suite(const EquivalenceGrid &grid, std::size_t n,
                                          Rng &rng);

struct RlRow {
  std::size_t rep = 0;
  std::size_t episode = 0;  // 1-based
  double reward = 0.0;
  std::string algorithm;

  friend bool operator==(const RlRow &, const RlRow &) = default;
};

struct RlTable {
  std::vector<RlRow> rows;
};

/// Chain experiment: each algorithm for each replication (seed base + r).
RlTable run_rl_experiment(const ExperimentConfig &config);

void emit_csv(const RegretTable &table, std::ostream &out);
void emit_csv(const std::vector<KsCell> &cells, std::ostream &out);
void emit_csv(const RlTable &table, std::ostream &out);

/// File variants; throw std::runtime_error mentioning the path on IO failure.
void emit_csv(const RegretTable &table, const std::string &path);
void emit_csv(const std::vector<KsCell> &cells, const std::string &path);
void emit_csv(const RlTable &table, const std::string &path);

RegretTable parse_regret_csv(std::istream &in);

/// Ten significant digits, as written to CSV.
std::string format_number(double value);

struct RegretSummary {
  std::string algorithm;
  std::size_t m = 0;
  std::size_t replications = 0;
  double mean_final = 0.0;
  double median_final = 0.0;
  /// Share of replications whose final regret is at least 0.9 * epsilon * T.
  double stuck_fraction = 0.0;
};

std::vector<RegretSummary> summarize(const RegretTable &table, double epsilon);

struct RlSummary {
  std::string algorithm;
  std::size_t replications = 0;
  double window_mean = 0.0;  // mean reward over episodes [window_start, last]
};

std::vector<RlSummary> summarize(const RlTable &table, std::size_t window_start);

std::string format_summary(const std::vector<RegretSummary> &rows);
std::string format_summary(const std::vector<RlSummary> &rows);

}  // namespace bts
