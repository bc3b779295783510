#include "bts/rl.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace bts {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_dims(const MdpDims &dims) {
  if (dims.states == 0 || dims.actions == 0 || dims.horizon == 0)
    throw std::invalid_argument("MDP dimensions must be positive");
}

}  // namespace

double episode_return(const Episode &episode) {
  double total = 0.0;
  for (const auto &step : episode.steps) total += step.reward;
  return total;
}

void validate_episode(const Episode &episode, const MdpDims &dims) {
  if (episode.steps.size() != dims.horizon)
    throw std::invalid_argument("episode length " + std::to_string(episode.steps.size()) +
                                " differs from horizon " + std::to_string(dims.horizon));
  for (const auto &step : episode.steps) {
    if (step.state >= dims.states || step.next_state >= dims.states)
      throw std::invalid_argument("episode state out of range");
    if (step.action >= dims.actions)
      throw std::invalid_argument("episode action out of range");
    if (!std::isfinite(step.reward))
      throw std::invalid_argument("episode reward is not finite");
  }
}

EpisodicMDP::EpisodicMDP(MdpDims dims, std::vector<Eigen::MatrixXd> transitions,
                         std::vector<Eigen::MatrixXd> rewards, std::size_t initial_state)
    : dims_(dims),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      initial_state_(initial_state) {
  require_dims(dims_);
  if (transitions_.size() != dims_.horizon || rewards_.size() != dims_.horizon)
    throw std::invalid_argument("one transition and reward block per timestep");
  if (initial_state_ >= dims_.states)
    throw std::invalid_argument("initial state out of range");
  for (std::size_t t = 0; t < dims_.horizon; ++t) {
    const auto &p = transitions_[t];
    if (p.rows() != idx(dims_.states * dims_.actions) || p.cols() != idx(dims_.states))
      throw std::invalid_argument("transition block has wrong shape");
    if ((p.array() < 0.0).any())
      throw std::invalid_argument("negative transition probability");
    if (((p.rowwise().sum().array() - 1.0).abs() > kNormalizationTolerance).any())
      throw std::invalid_argument("transition rows must sum to one");
    if (rewards_[t].rows() != idx(dims_.states) || rewards_[t].cols() != idx(dims_.actions))
      throw std::invalid_argument("reward block has wrong shape");
  }
}

double EpisodicMDP::reward(std::size_t t, std::size_t s, std::size_t a) const {
  return rewards_.at(t)(idx(s), idx(a));
}

Eigen::RowVectorXd EpisodicMDP::transition_row(std::size_t t, std::size_t s,
                                               std::size_t a) const {
  return transitions_.at(t).row(idx(s * dims_.actions + a));
}

std::size_t EpisodicMDP::sample_next(std::size_t t, std::size_t s, std::size_t a,
                                     Rng &rng) const {
  const auto row = transitions_[t].row(idx(s * dims_.actions + a));
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    acc += row(j);
    if (u < acc) return static_cast<std::size_t>(j);
  }
  // Rounding left u above the accumulated mass: take the last reachable state.
  for (Eigen::Index j = row.size() - 1; j >= 0; --j)
    if (row(j) > 0.0) return static_cast<std::size_t>(j);
  return 0;
}

ValueTable::ValueTable(const MdpDims &dims)
    : dims_(dims),
      q_(dims.horizon, Eigen::MatrixXd::Zero(idx(dims.states), idx(dims.actions))) {}

LsviStatistics::LsviStatistics(const MdpDims &dims)
    : dims_(dims),
      weight_(dims.horizon, Eigen::MatrixXd::Zero(idx(dims.states), idx(dims.actions))),
      reward_sum_(weight_),
      next_weight_(dims.horizon, Eigen::MatrixXd::Zero(idx(dims.states * dims.actions),
                                                       idx(dims.states))) {
  require_dims(dims_);
}

void LsviStatistics::add(const Episode &episode, double weight) {
  validate_episode(episode, dims_);
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("weights must be finite and nonnegative");
  ++count_;
  if (weight == 0.0) return;
  for (std::size_t t = 0; t < dims_.horizon; ++t) {
    const auto &step = episode.steps[t];
    const auto s = idx(step.state);
    const auto a = idx(step.action);
    weight_[t](s, a) += weight;
    reward_sum_[t](s, a) += weight * step.reward;
    next_weight_[t](idx(step.state * dims_.actions + step.action), idx(step.next_state)) +=
        weight;
  }
}

ValueTable LsviStatistics::solve() const {
  if (count_ == 0) throw std::invalid_argument("empty dataset");
  ValueTable q(dims_);
  Eigen::VectorXd next_value = Eigen::VectorXd::Zero(idx(dims_.states));
  for (std::size_t t = dims_.horizon; t-- > 0;) {
    // Weighted targets r + max_a' Q_{t+1}(s', a'), summed per (s, a).
    const Eigen::VectorXd continuation = next_weight_[t] * next_value;
    auto &block = q.at(t);
    for (std::size_t s = 0; s < dims_.states; ++s) {
      for (std::size_t a = 0; a < dims_.actions; ++a) {
        const double w = weight_[t](idx(s), idx(a));
        if (w <= 0.0) continue;
        block(idx(s), idx(a)) =
            (reward_sum_[t](idx(s), idx(a)) + continuation(idx(s * dims_.actions + a))) / w;
      }
    }
    next_value = block.rowwise().maxCoeff();
  }
  return q;
}

ValueTable fit_q_lsvi(const WeightedEpisodeSet &data, const MdpDims &dims) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  LsviStatistics stats(dims);
  for (std::size_t i = 0; i < data.size(); ++i) stats.add(data.item(i), data.weight(i));
  return stats.solve();
}

Episode rollout_epsilon_greedy(const EpisodicMDP &mdp, const ValueTable &q,
                               double epsilon, Rng &rng, TieBreak ties) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (!(q.dims() == mdp.dims()))
    throw std::invalid_argument("value table does not match the MDP");
  const auto &dims = mdp.dims();
  Episode episode;
  episode.steps.reserve(dims.horizon);
  std::size_t s = mdp.initial_state();
  for (std::size_t t = 0; t < dims.horizon; ++t) {
    std::size_t a = 0;
    if (epsilon > 0.0 && bernoulli(epsilon, rng))
      a = uniform_index(dims.actions, rng);
    else
      a = select_argmax(q.at(t).row(idx(s)).transpose(), ties, rng);
    const double r = mdp.reward(t, s, a);
    const std::size_t next = mdp.sample_next(t, s, a, rng);
    episode.steps.push_back({s, a, r, next});
    s = next;
  }
  return episode;
}

Episode rollout_greedy(const EpisodicMDP &mdp, const ValueTable &q, Rng &rng,
                       TieBreak ties) {
  return rollout_epsilon_greedy(mdp, q, 0.0, rng, ties);
}

ArtificialEpisodeSampler::ArtificialEpisodeSampler(std::size_t m, Generator generator)
    : m_(m), generator_(std::move(generator)) {
  if (m_ > 0 && !generator_)
    throw std::invalid_argument("a nonempty artificial sampler needs a generator");
}

std::vector<Episode> ArtificialEpisodeSampler::operator()(Rng &rng) const {
  if (m_ == 0) return {};
  auto out = generator_(rng);
  if (out.size() != m_)
    throw std::logic_error("artificial episode generator returned " +
                           std::to_string(out.size()) + " episodes, expected " +
                           std::to_string(m_));
  return out;
}

WeightedEpisodeSet make_optimistic_artificial_episodes(const MdpDims &dims,
                                                       std::size_t m, Rng &rng,
                                                       double max_reward) {
  require_dims(dims);
  if (m < 1) throw std::invalid_argument("M must be at least 1");
  if (!(max_reward > 0.0)) throw std::invalid_argument("max reward must be positive");
  std::vector<Episode> episodes(m);
  for (auto &ep : episodes) {
    ep.steps.reserve(dims.horizon);
    for (std::size_t t = 0; t < dims.horizon; ++t) {
      const std::size_t s = uniform_index(dims.states, rng);
      const std::size_t a = uniform_index(dims.actions, rng);
      const std::size_t next = uniform_index(dims.states, rng);
      const double r = max_reward * (1.0 - uniform01(rng));
      ep.steps.push_back({s, a, r, next});
    }
  }
  return WeightedEpisodeSet(std::move(episodes));
}

ArtificialEpisodeSampler optimistic_episode_sampler(const MdpDims &dims, std::size_t m,
                                                    double max_reward) {
  if (m == 0) return {};
  return ArtificialEpisodeSampler(m, [dims, m, max_reward](Rng &rng) {
    return make_optimistic_artificial_episodes(dims, m, rng, max_reward).items();
  });
}

EpisodicMDP make_chain_mdp(std::size_t n, std::size_t horizon) {
  if (n < 3) throw std::invalid_argument("chain length must be at least 3");
  if (horizon < n) throw std::invalid_argument("horizon must be at least the chain length");
  const MdpDims dims{n, 2, horizon};
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(idx(n * 2), idx(n));
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(idx(n), 2);
  for (std::size_t s = 0; s < n; ++s) {
    p(idx(s * 2 + kChainLeft), 0) = 1.0;
    p(idx(s * 2 + kChainRight), idx(std::min(s + 1, n - 1))) = 1.0;
  }
  r(idx(n - 1), idx(kChainRight)) = 1.0;
  return EpisodicMDP(dims, std::vector<Eigen::MatrixXd>(horizon, p),
                     std::vector<Eigen::MatrixXd>(horizon, r), 0);
}

EpisodeStep episode_step_alg4(const WeightedEpisodeSet &history,
                              const ArtificialEpisodeSampler &sampler,
                              const EpisodicMDP &mdp, BootstrapKind kind, Rng &rng,
                              TieBreak ties) {
  if (kind == BootstrapKind::Besa)
    throw std::invalid_argument("BESA is not defined for episodic data");
  const WeightedEpisodeSet artificial(sampler(rng));
  const auto combined = augment_with_artificial(history, artificial);
  const auto sample = resample(combined, kind, rng);
  const auto q = fit_q_lsvi(sample.as_dataset(), mdp.dims());
  EpisodeStep out{rollout_greedy(mdp, q, rng, ties), history};
  out.history.push_back(out.episode);
  return out;
}

std::vector<double> run_bootstrap_rl(const EpisodicMDP &mdp,
                                     const ArtificialEpisodeSampler &sampler,
                                     BootstrapKind kind, std::size_t episodes, Rng &rng,
                                     TieBreak ties) {
  std::vector<double> rewards;
  rewards.reserve(episodes);
  WeightedEpisodeSet history;
  for (std::size_t l = 0; l < episodes; ++l) {
    auto step = episode_step_alg4(history, sampler, mdp, kind, rng, ties);
    rewards.push_back(episode_return(step.episode));
    history = std::move(step.history);
  }
  return rewards;
}

IncrementalEnsemble::IncrementalEnsemble(const MdpDims &dims, std::size_t k,
                                         const ArtificialEpisodeSampler &sampler,
                                         Rng &master)
    : dims_(dims) {
  require_dims(dims_);
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  models_.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Model model{spawn_rng(master), {}, LsviStatistics(dims_), ValueTable(dims_)};
    for (const auto &ep : sampler(model.rng)) add_episode(model, ep);
    if (!model.stats.empty()) model.q = model.stats.solve();
    models_.push_back(std::move(model));
  }
}

void IncrementalEnsemble::add_episode(Model &model, const Episode &episode) {
  const double w = exponential1(model.rng);
  model.data.push_back(episode, w);
  model.stats.add(episode, w);
}

IncrementalEnsemble::Outcome IncrementalEnsemble::run_episode(const EpisodicMDP &mdp,
                                                              Rng &master,
                                                              TieBreak ties) {
  if (!(mdp.dims() == dims_)) throw std::invalid_argument("MDP does not match ensemble");
  Outcome out;
  out.model = uniform_index(models_.size(), master);
  out.episode = rollout_greedy(mdp, models_[out.model].q, master, ties);
  for (auto &model : models_) {
    add_episode(model, out.episode);
    model.q = model.stats.solve();
  }
  return out;
}

EnsembleTrace incremental_ensemble_run(const EpisodicMDP &mdp, std::size_t k,
                                       const ArtificialEpisodeSampler &sampler,
                                       std::size_t episodes, Rng &rng, TieBreak ties) {
  IncrementalEnsemble ensemble(mdp.dims(), k, sampler, rng);
  EnsembleTrace trace;
  trace.rewards.reserve(episodes);
  trace.models.reserve(episodes);
  for (std::size_t l = 0; l < episodes; ++l) {
    const auto out = ensemble.run_episode(mdp, rng, ties);
    trace.rewards.push_back(episode_return(out.episode));
    trace.models.push_back(out.model);
  }
  return trace;
}

std::vector<double> epsilon_greedy_run(const EpisodicMDP &mdp, double epsilon,
                                       std::size_t episodes, Rng &rng, TieBreak ties) {
  LsviStatistics stats(mdp.dims());
  ValueTable q(mdp.dims());
  std::vector<double> rewards;
  rewards.reserve(episodes);
  for (std::size_t l = 0; l < episodes; ++l) {
    const auto ep = rollout_epsilon_greedy(mdp, q, epsilon, rng, ties);
    rewards.push_back(episode_return(ep));
    stats.add(ep, 1.0);
    q = stats.solve();
  }
  return rewards;
}

}  // namespace bts
