#pragma once

// Multi-armed bandit environments, bootstrapped Thompson sampling, the exact
// Beta-Bernoulli Thompson oracle, and regret accounting.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bts/bootstrap.hpp"
#include "bts/random.hpp"
#include "bts/select.hpp"

namespace bts {

struct Observation {
  std::size_t arm = 0;
  double outcome = 0.0;

  friend bool operator==(const Observation &, const Observation &) = default;
};

using BanditHistory = std::vector<Observation>;

/// Independent-arm environment. Rewards equal outcomes.
class BanditEnv {
 public:
  using OutcomeSampler = std::function<double(Rng &)>;

  BanditEnv(std::vector<OutcomeSampler> samplers, Eigen::VectorXd expected_rewards);

  std::size_t arm_count() const { return samplers_.size(); }
  const Eigen::VectorXd &expected_rewards() const { return expected_; }
  double expected_reward(std::size_t arm) const;
  double optimal_reward() const { return expected_.maxCoeff(); }
  std::size_t optimal_arm() const;

  double pull(std::size_t arm, Rng &rng) const;

 private:
  std::vector<OutcomeSampler> samplers_;
  Eigen::VectorXd expected_;
};

/// Two arms: arm 0 always pays epsilon; arm 1 pays 1 with probability
/// 2 * epsilon and 0 otherwise. Requires 0 < epsilon < 1/2.
BanditEnv make_dirac_env(double epsilon);

/// Bernoulli arms with the given success probabilities.
BanditEnv make_bernoulli_env(std::vector<double> means);

/// Per-arm plug-in estimates. `mean[a]` is meaningful only where
/// `visited[a]` holds.
struct ArmEstimate {
  Eigen::VectorXd mean;
  std::vector<bool> visited;
};

/// Weighted mean outcome of each arm; arms with no positive weight are
/// flagged unvisited.
ArmEstimate fit_plugin_model(const WeightedDataset<Observation> &combined,
                             std::size_t arm_count);
ArmEstimate fit_plugin_model(const BanditHistory &combined, std::size_t arm_count);

/// Generator of M artificial (arm, outcome) pairs per call.
class ArtificialHistorySampler {
 public:
  using Generator = std::function<BanditHistory(Rng &)>;

  ArtificialHistorySampler() = default;
  ArtificialHistorySampler(std::size_t m, Generator generator);

  std::size_t size() const { return m_; }
  BanditHistory operator()(Rng &rng) const;

 private:
  std::size_t m_ = 0;
  Generator generator_;
};

/// M pairs cycling through the arms (arm i mod A), outcomes uniform on [0, 1].
ArtificialHistorySampler uniform_outcome_sampler(std::size_t arm_count,
                                                 std::size_t m);

/// Deterministic artificial data: alpha[a] ones and beta[a] zeros for each
/// arm. Paired with the Bayesian bootstrap this reproduces Beta-prior
/// Thompson sampling.
ArtificialHistorySampler beta_prior_sampler(std::span<const int> alpha,
                                            std::span<const int> beta);

/// Bootstrap the combined dataset independently within each arm. The
/// returned weights are the within-arm resampled probabilities.
WeightedDataset<Observation> stratified_resample(
    const WeightedDataset<Observation> &combined, std::size_t arm_count,
    BootstrapKind kind, Rng &rng);

/// One step of bootstrapped Thompson sampling given an already drawn
/// artificial history. Arms absent from the combined data are pulled first.
std::size_t bootstrap_thompson_step(const BanditHistory &history,
                                    const BanditHistory &artificial,
                                    BootstrapKind kind, std::size_t arm_count,
                                    Rng &rng, TieBreak ties = TieBreak::Uniform);

/// As above, drawing a fresh artificial history from `sampler` first.
std::size_t bootstrap_thompson_step(const BanditHistory &history,
                                    const ArtificialHistorySampler &sampler,
                                    BootstrapKind kind, std::size_t arm_count,
                                    Rng &rng, TieBreak ties = TieBreak::Uniform);

/// Plug-in greedy choice on real data only, unvisited arms first.
std::size_t greedy_step(const BanditHistory &history, std::size_t arm_count,
                        Rng &rng, TieBreak ties = TieBreak::Uniform);

struct BetaPrior {
  int alpha = 1;
  int beta = 1;
};

/// Thompson sampling with exact Beta posteriors: theta_a is drawn from
/// Beta(alpha_a + successes_a, beta_a + failures_a).
std::size_t exact_thompson_bernoulli_step(std::span<const std::size_t> successes,
                                          std::span<const std::size_t> failures,
                                          std::span<const BetaPrior> priors,
                                          Rng &rng,
                                          TieBreak ties = TieBreak::Uniform);

/// Bayesian bootstrap of (alpha + successes) ones and (beta + failures)
/// zeros, returning the reweighted mean.
double bayes_bootstrap_theta_sample(int alpha, int beta, std::size_t successes,
                                    std::size_t failures, Rng &rng);

/// Element t is the summed expected-reward gap of actions[0..t].
std::vector<double> cumulative_regret(const BanditEnv &env,
                                      std::span<const std::size_t> actions);

struct BanditRun {
  std::vector<std::size_t> actions;
  std::vector<double> outcomes;
};

struct BootstrapThompsonOptions {
  BootstrapKind kind = BootstrapKind::Bayes;
  ArtificialHistorySampler sampler;
  /// Draw the artificial history once per run instead of every step.
  bool freeze_artificial = false;
  TieBreak ties = TieBreak::Uniform;
};

BanditRun run_bootstrap_thompson(const BanditEnv &env,
                                 const BootstrapThompsonOptions &options,
                                 std::size_t horizon, Rng &rng);

BanditRun run_greedy(const BanditEnv &env, std::size_t horizon, Rng &rng,
                     TieBreak ties = TieBreak::Uniform);

/// Exact Thompson sampling; outcomes must be 0 or 1.
BanditRun run_exact_thompson(const BanditEnv &env,
                             std::span<const BetaPrior> priors,
                             std::size_t horizon, Rng &rng,
                             TieBreak ties = TieBreak::Uniform);

}  // namespace bts
