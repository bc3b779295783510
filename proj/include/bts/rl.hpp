#pragma once

// Episodic reinforcement learning with bootstrapped value-function
// randomization. The value-function fitter is tabular least-squares value
// iteration over weighted episodes; exploration comes from bootstrapping the
// episode set after mixing in optimistic artificial episodes.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

#include "bts/bootstrap.hpp"
#include "bts/random.hpp"
#include "bts/select.hpp"

namespace bts {

struct MdpDims {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::size_t horizon = 0;

  friend bool operator==(const MdpDims &, const MdpDims &) = default;
};

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;

  friend bool operator==(const Transition &, const Transition &) = default;
};

/// One episode: exactly `horizon` transitions, step t at index t.
struct Episode {
  std::vector<Transition> steps;

  friend bool operator==(const Episode &, const Episode &) = default;
};

using WeightedEpisodeSet = WeightedDataset<Episode>;

double episode_return(const Episode &episode);

/// Throws if the episode does not fit `dims`.
void validate_episode(const Episode &episode, const MdpDims &dims);

/// Finite-horizon MDP with time-indexed kernel and mean rewards.
/// `transitions[t]` has one row per (s, a) at row s * A + a, one column per
/// next state. `rewards[t]` is S x A.
class EpisodicMDP {
 public:
  EpisodicMDP(MdpDims dims, std::vector<Eigen::MatrixXd> transitions,
              std::vector<Eigen::MatrixXd> rewards, std::size_t initial_state);

  const MdpDims &dims() const { return dims_; }
  std::size_t initial_state() const { return initial_state_; }
  double reward(std::size_t t, std::size_t s, std::size_t a) const;
  Eigen::RowVectorXd transition_row(std::size_t t, std::size_t s, std::size_t a) const;
  const Eigen::MatrixXd &transitions(std::size_t t) const { return transitions_[t]; }
  const Eigen::MatrixXd &rewards(std::size_t t) const { return rewards_[t]; }

  std::size_t sample_next(std::size_t t, std::size_t s, std::size_t a, Rng &rng) const;

 private:
  MdpDims dims_;
  std::vector<Eigen::MatrixXd> transitions_;
  std::vector<Eigen::MatrixXd> rewards_;
  std::size_t initial_state_;
};

/// Q_t(s, a) for t in [0, horizon). One S x A block per timestep.
class ValueTable {
 public:
  explicit ValueTable(const MdpDims &dims);

  const MdpDims &dims() const { return dims_; }
  double operator()(std::size_t t, std::size_t s, std::size_t a) const {
    return q_[t](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  double &operator()(std::size_t t, std::size_t s, std::size_t a) {
    return q_[t](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  const Eigen::MatrixXd &at(std::size_t t) const { return q_[t]; }
  Eigen::MatrixXd &at(std::size_t t) { return q_[t]; }

 private:
  MdpDims dims_;
  std::vector<Eigen::MatrixXd> q_;
};

/// Weighted sufficient statistics for tabular LSVI. Adding an episode costs
/// O(horizon); solving costs O(horizon * S * A * S) regardless of how many
/// episodes were added.
class LsviStatistics {
 public:
  explicit LsviStatistics(const MdpDims &dims);

  void add(const Episode &episode, double weight);
  bool empty() const { return count_ == 0; }
  ValueTable solve() const;

 private:
  MdpDims dims_;
  std::size_t count_ = 0;
  std::vector<Eigen::MatrixXd> weight_;         // S x A
  std::vector<Eigen::MatrixXd> reward_sum_;     // S x A
  std::vector<Eigen::MatrixXd> next_weight_;    // (S * A) x S
};

/// Backward induction on weighted episodes. Unvisited cells are 0.
ValueTable fit_q_lsvi(const WeightedEpisodeSet &data, const MdpDims &dims);

Episode rollout_greedy(const EpisodicMDP &mdp, const ValueTable &q, Rng &rng,
                       TieBreak ties = TieBreak::Uniform);

/// With probability epsilon a uniformly random action, else greedy.
Episode rollout_epsilon_greedy(const EpisodicMDP &mdp, const ValueTable &q,
                               double epsilon, Rng &rng,
                               TieBreak ties = TieBreak::Uniform);

/// Generator of M synthetic episodes per call.
class ArtificialEpisodeSampler {
 public:
  using Generator = std::function<std::vector<Episode>(Rng &)>;

  ArtificialEpisodeSampler() = default;
  ArtificialEpisodeSampler(std::size_t m, Generator generator);

  std::size_t size() const { return m_; }
  std::vector<Episode> operator()(Rng &rng) const;

 private:
  std::size_t m_ = 0;
  Generator generator_;
};

/// M episodes whose states, actions and next states are uniform and whose
/// rewards are uniform on (0, max_reward]. Unit weights.
WeightedEpisodeSet make_optimistic_artificial_episodes(const MdpDims &dims,
                                                       std::size_t m, Rng &rng,
                                                       double max_reward = 1.0);

ArtificialEpisodeSampler optimistic_episode_sampler(const MdpDims &dims,
                                                    std::size_t m,
                                                    double max_reward = 1.0);

/// States 0..n-1 starting at 0; action 0 (left) resets to state 0, action 1
/// (right) moves one state right, saturating at n-1. Reward 1 for right in
/// the last state, 0 elsewhere. Requires horizon >= n >= 3.
EpisodicMDP make_chain_mdp(std::size_t n, std::size_t horizon);

inline constexpr std::size_t kChainLeft = 0;
inline constexpr std::size_t kChainRight = 1;

struct EpisodeStep {
  Episode episode;
  WeightedEpisodeSet history;
};

/// One episode of bootstrapped value randomization: draw artificial
/// episodes, take one bootstrap sample of the combined set, fit Q, act
/// greedily for a full episode, append it to the history.
EpisodeStep episode_step_alg4(const WeightedEpisodeSet &history,
                              const ArtificialEpisodeSampler &sampler,
                              const EpisodicMDP &mdp, BootstrapKind kind, Rng &rng,
                              TieBreak ties = TieBreak::Uniform);

/// Per-episode returns of repeated episode_step_alg4.
std::vector<double> run_bootstrap_rl(const EpisodicMDP &mdp,
                                     const ArtificialEpisodeSampler &sampler,
                                     BootstrapKind kind, std::size_t episodes,
                                     Rng &rng, TieBreak ties = TieBreak::Uniform);

/// K value models, each owning its artificial episodes, a persistent
/// Exp(1)-weighted copy of the real episodes, and a private random stream.
/// Old weights are never redrawn; each new episode gets one fresh weight per
/// model.
class IncrementalEnsemble {
 public:
  IncrementalEnsemble(const MdpDims &dims, std::size_t k,
                      const ArtificialEpisodeSampler &sampler, Rng &master);

  std::size_t model_count() const { return models_.size(); }
  const WeightedEpisodeSet &model_data(std::size_t k) const { return models_[k].data; }
  const ValueTable &model_values(std::size_t k) const { return models_[k].q; }

  struct Outcome {
    Episode episode;
    std::size_t model = 0;
  };

  /// Act for one episode with a uniformly chosen model, then fold the
  /// episode into every model.
  Outcome run_episode(const EpisodicMDP &mdp, Rng &master,
                      TieBreak ties = TieBreak::Uniform);

 private:
  struct Model {
    Rng rng;
    WeightedEpisodeSet data;
    LsviStatistics stats;
    ValueTable q;
  };

  void add_episode(Model &model, const Episode &episode);

  MdpDims dims_;
  std::vector<Model> models_;
};

struct EnsembleTrace {
  std::vector<double> rewards;
  std::vector<std::size_t> models;
};

EnsembleTrace incremental_ensemble_run(const EpisodicMDP &mdp, std::size_t k,
                                       const ArtificialEpisodeSampler &sampler,
                                       std::size_t episodes, Rng &rng,
                                       TieBreak ties = TieBreak::Uniform);

/// Baseline: refit on all real episodes (unit weights) before each episode
/// and act epsilon-greedily. No artificial data.
std::vector<double> epsilon_greedy_run(const EpisodicMDP &mdp, double epsilon,
                                       std::size_t episodes, Rng &rng,
                                       TieBreak ties = TieBreak::Lowest);

}  // namespace bts
