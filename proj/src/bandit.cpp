#include "bts/bandit.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace bts {

BanditEnv::BanditEnv(std::vector<OutcomeSampler> samplers,
                     Eigen::VectorXd expected_rewards)
    : samplers_(std::move(samplers)), expected_(std::move(expected_rewards)) {
  if (samplers_.size() < 2)
    throw std::invalid_argument("a bandit needs at least two arms");
  if (static_cast<std::size_t>(expected_.size()) != samplers_.size())
    throw std::invalid_argument("one expected reward per arm is required");
}

double BanditEnv::expected_reward(std::size_t arm) const {
  if (arm >= arm_count()) throw std::out_of_range("arm index out of range");
  return expected_(static_cast<Eigen::Index>(arm));
}

std::size_t BanditEnv::optimal_arm() const {
  Eigen::Index best = 0;
  expected_.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

double BanditEnv::pull(std::size_t arm, Rng &rng) const {
  if (arm >= arm_count()) throw std::out_of_range("arm index out of range");
  return samplers_[arm](rng);
}

BanditEnv make_dirac_env(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("epsilon must lie in (0, 1/2)");
  std::vector<BanditEnv::OutcomeSampler> samplers{
      [epsilon](Rng &) { return epsilon; },
      [epsilon](Rng &rng) { return bernoulli(2.0 * epsilon, rng) ? 1.0 : 0.0; }};
  Eigen::VectorXd expected(2);
  expected << epsilon, 2.0 * epsilon;
  return BanditEnv(std::move(samplers), std::move(expected));
}

BanditEnv make_bernoulli_env(std::vector<double> means) {
  std::vector<BanditEnv::OutcomeSampler> samplers;
  Eigen::VectorXd expected(static_cast<Eigen::Index>(means.size()));
  for (std::size_t a = 0; a < means.size(); ++a) {
    const double p = means[a];
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("Bernoulli mean must lie in [0, 1]");
    samplers.emplace_back([p](Rng &rng) { return bernoulli(p, rng) ? 1.0 : 0.0; });
    expected(static_cast<Eigen::Index>(a)) = p;
  }
  return BanditEnv(std::move(samplers), std::move(expected));
}

ArmEstimate fit_plugin_model(const WeightedDataset<Observation> &combined,
                             std::size_t arm_count) {
  Eigen::VectorXd weighted_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arm_count));
  Eigen::VectorXd total_weight = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arm_count));
  for (std::size_t i = 0; i < combined.size(); ++i) {
    const auto &obs = combined.item(i);
    if (obs.arm >= arm_count) throw std::out_of_range("arm index out of range");
    const auto a = static_cast<Eigen::Index>(obs.arm);
    weighted_sum(a) += combined.weight(i) * obs.outcome;
    total_weight(a) += combined.weight(i);
  }
  ArmEstimate est{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arm_count)),
                  std::vector<bool>(arm_count, false)};
  for (std::size_t a = 0; a < arm_count; ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    if (total_weight(i) > 0.0) {
      est.mean(i) = weighted_sum(i) / total_weight(i);
      est.visited[a] = true;
    }
  }
  return est;
}

ArmEstimate fit_plugin_model(const BanditHistory &combined, std::size_t arm_count) {
  return fit_plugin_model(WeightedDataset<Observation>(combined), arm_count);
}

ArtificialHistorySampler::ArtificialHistorySampler(std::size_t m, Generator generator)
    : m_(m), generator_(std::move(generator)) {
  if (m_ > 0 && !generator_)
    throw std::invalid_argument("a nonempty artificial history needs a generator");
}

BanditHistory ArtificialHistorySampler::operator()(Rng &rng) const {
  if (m_ == 0) return {};
  BanditHistory out = generator_(rng);
  if (out.size() != m_)
    throw std::logic_error("artificial history generator returned " +
                           std::to_string(out.size()) + " pairs, expected " +
                           std::to_string(m_));
  return out;
}

ArtificialHistorySampler uniform_outcome_sampler(std::size_t arm_count, std::size_t m) {
  if (arm_count == 0) throw std::invalid_argument("arm count must be positive");
  return ArtificialHistorySampler(m, [arm_count, m](Rng &rng) {
    BanditHistory h;
    h.reserve(m);
    for (std::size_t i = 0; i < m; ++i) h.push_back({i % arm_count, uniform01(rng)});
    return h;
  });
}

ArtificialHistorySampler beta_prior_sampler(std::span<const int> alpha,
                                            std::span<const int> beta) {
  if (alpha.size() != beta.size())
    throw std::invalid_argument("alpha and beta differ in length");
  BanditHistory fixed;
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    if (alpha[a] < 1 || beta[a] < 1)
      throw std::invalid_argument("prior parameters must be positive integers");
    for (int i = 0; i < alpha[a]; ++i) fixed.push_back({a, 1.0});
    for (int i = 0; i < beta[a]; ++i) fixed.push_back({a, 0.0});
  }
  const std::size_t m = fixed.size();
  return ArtificialHistorySampler(m, [fixed = std::move(fixed)](Rng &) { return fixed; });
}

namespace {

std::vector<WeightedDataset<double>> split_by_arm(
    const WeightedDataset<Observation> &combined, std::size_t arm_count) {
  std::vector<std::vector<double>> outcomes(arm_count);
  std::vector<std::vector<double>> weights(arm_count);
  for (std::size_t i = 0; i < combined.size(); ++i) {
    const auto &obs = combined.item(i);
    if (obs.arm >= arm_count) throw std::out_of_range("arm index out of range");
    outcomes[obs.arm].push_back(obs.outcome);
    weights[obs.arm].push_back(combined.weight(i));
  }
  std::vector<WeightedDataset<double>> out;
  out.reserve(arm_count);
  for (std::size_t a = 0; a < arm_count; ++a) {
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(
        weights[a].data(), static_cast<Eigen::Index>(weights[a].size()));
    out.emplace_back(std::move(outcomes[a]), std::move(w));
  }
  return out;
}

WeightedDataset<Observation> combine(const BanditHistory &history,
                                     const BanditHistory &artificial) {
  return augment_with_artificial(WeightedDataset<Observation>(history),
                                 WeightedDataset<Observation>(artificial));
}

// Forced pull among arms with no data; nullopt once every arm has data.
std::optional<std::size_t> forced_pull(const std::vector<bool> &visited,
                                       TieBreak ties, Rng &rng) {
  std::vector<bool> unvisited(visited.size());
  bool any = false;
  for (std::size_t a = 0; a < visited.size(); ++a) {
    unvisited[a] = !visited[a];
    any = any || unvisited[a];
  }
  if (!any) return std::nullopt;
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(visited.size()));
  return select_argmax(zeros, ties, rng, unvisited);
}

}  // namespace

WeightedDataset<Observation> stratified_resample(
    const WeightedDataset<Observation> &combined, std::size_t arm_count,
    BootstrapKind kind, Rng &rng) {
  const auto per_arm = split_by_arm(combined, arm_count);
  std::vector<Observation> items;
  std::vector<double> weights;
  for (std::size_t a = 0; a < arm_count; ++a) {
    if (per_arm[a].empty()) continue;
    const auto measure = resample(per_arm[a], kind, rng);
    for (std::size_t i = 0; i < measure.size(); ++i) {
      items.push_back({a, measure.point(i)});
      weights.push_back(measure.probability(i));
    }
  }
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(
      weights.data(), static_cast<Eigen::Index>(weights.size()));
  return WeightedDataset<Observation>(std::move(items), std::move(w));
}

std::size_t bootstrap_thompson_step(const BanditHistory &history,
                                    const BanditHistory &artificial,
                                    BootstrapKind kind, std::size_t arm_count,
                                    Rng &rng, TieBreak ties) {
  if (arm_count < 2) throw std::invalid_argument("a bandit needs at least two arms");
  if (kind == BootstrapKind::Besa && arm_count != 2)
    throw std::invalid_argument("BESA is defined for exactly two arms");

  const auto combined = combine(history, artificial);
  const auto before = fit_plugin_model(combined, arm_count);
  if (auto arm = forced_pull(before.visited, ties, rng)) return *arm;

  if (kind == BootstrapKind::Besa) {
    const auto per_arm = split_by_arm(combined, 2);
    Eigen::VectorXd est(2);
    for (std::size_t a = 0; a < 2; ++a)
      est(static_cast<Eigen::Index>(a)) = besa_subsample_estimate(
          per_arm[a], per_arm[1 - a].size(), mean_of, rng);
    return select_argmax(est, ties, rng);
  }

  const auto fitted = fit_plugin_model(stratified_resample(combined, arm_count, kind, rng),
                                       arm_count);
  return select_argmax(fitted.mean, ties, rng);
}

std::size_t bootstrap_thompson_step(const BanditHistory &history,
                                    const ArtificialHistorySampler &sampler,
                                    BootstrapKind kind, std::size_t arm_count,
                                    Rng &rng, TieBreak ties) {
  const auto artificial = sampler(rng);
  return bootstrap_thompson_step(history, artificial, kind, arm_count, rng, ties);
}

std::size_t greedy_step(const BanditHistory &history, std::size_t arm_count, Rng &rng,
                        TieBreak ties) {
  const auto est = fit_plugin_model(history, arm_count);
  if (auto arm = forced_pull(est.visited, ties, rng)) return *arm;
  return select_argmax(est.mean, ties, rng);
}

std::size_t exact_thompson_bernoulli_step(std::span<const std::size_t> successes,
                                          std::span<const std::size_t> failures,
                                          std::span<const BetaPrior> priors,
                                          Rng &rng, TieBreak ties) {
  const std::size_t arms = priors.size();
  if (successes.size() != arms || failures.size() != arms)
    throw std::invalid_argument("counts and priors differ in length");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(arms));
  for (std::size_t a = 0; a < arms; ++a) {
    if (priors[a].alpha <= 0 || priors[a].beta <= 0)
      throw std::invalid_argument("prior parameters must be positive");
    theta(static_cast<Eigen::Index>(a)) =
        sample_beta(static_cast<double>(priors[a].alpha) + static_cast<double>(successes[a]),
                    static_cast<double>(priors[a].beta) + static_cast<double>(failures[a]),
                    rng);
  }
  return select_argmax(theta, ties, rng);
}

double bayes_bootstrap_theta_sample(int alpha, int beta, std::size_t successes,
                                    std::size_t failures, Rng &rng) {
  if (alpha < 1 || beta < 1)
    throw std::invalid_argument("prior parameters must be positive integers");
  const std::size_t ones = static_cast<std::size_t>(alpha) + successes;
  const std::size_t zeros = static_cast<std::size_t>(beta) + failures;
  std::vector<double> labels(ones, 1.0);
  labels.resize(ones + zeros, 0.0);
  return mean_of(bayes_reweight(WeightedDataset<double>(std::move(labels)), rng));
}

std::vector<double> cumulative_regret(const BanditEnv &env,
                                      std::span<const std::size_t> actions) {
  std::vector<double> out;
  out.reserve(actions.size());
  const double best = env.optimal_reward();
  double acc = 0.0;
  for (const auto a : actions) {
    acc += best - env.expected_reward(a);
    out.push_back(acc);
  }
  return out;
}

BanditRun run_bootstrap_thompson(const BanditEnv &env,
                                 const BootstrapThompsonOptions &options,
                                 std::size_t horizon, Rng &rng) {
  BanditRun run;
  run.actions.reserve(horizon);
  run.outcomes.reserve(horizon);
  BanditHistory history;
  history.reserve(horizon);
  BanditHistory frozen;
  if (options.freeze_artificial) frozen = options.sampler(rng);
  for (std::size_t t = 0; t < horizon; ++t) {
    const BanditHistory artificial =
        options.freeze_artificial ? frozen : options.sampler(rng);
    const auto arm = bootstrap_thompson_step(history, artificial, options.kind,
                                             env.arm_count(), rng, options.ties);
    const double y = env.pull(arm, rng);
    history.push_back({arm, y});
    run.actions.push_back(arm);
    run.outcomes.push_back(y);
  }
  return run;
}

BanditRun run_greedy(const BanditEnv &env, std::size_t horizon, Rng &rng, TieBreak ties) {
  BanditRun run;
  BanditHistory history;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto arm = greedy_step(history, env.arm_count(), rng, ties);
    const double y = env.pull(arm, rng);
    history.push_back({arm, y});
    run.actions.push_back(arm);
    run.outcomes.push_back(y);
  }
  return run;
}

BanditRun run_exact_thompson(const BanditEnv &env, std::span<const BetaPrior> priors,
                             std::size_t horizon, Rng &rng, TieBreak ties) {
  if (priors.size() != env.arm_count())
    throw std::invalid_argument("one prior per arm is required");
  std::vector<std::size_t> successes(env.arm_count(), 0);
  std::vector<std::size_t> failures(env.arm_count(), 0);
  BanditRun run;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto arm = exact_thompson_bernoulli_step(successes, failures, priors, rng, ties);
    const double y = env.pull(arm, rng);
    if (y == 1.0) ++successes[arm];
    else if (y == 0.0) ++failures[arm];
    else throw std::invalid_argument("exact Thompson sampling needs 0/1 outcomes");
    run.actions.push_back(arm);
    run.outcomes.push_back(y);
  }
  return run;
}

}  // namespace bts
