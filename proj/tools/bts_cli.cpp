// Command-line driver for the bandit regret, bootstrap/posterior equivalence
// and chain exploration experiments.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bts/harness.hpp"
#include "bts/stats.hpp"

namespace {

constexpr double kKsThreshold = 0.033;

struct Subcommand {
  bts::ExperimentKind kind;
  CLI::App *app = nullptr;
  std::map<std::string, std::string> values;
  std::vector<std::string> flags;
  std::string config_path;
};

void add_value(Subcommand &sub, const std::string &key, const std::string &help) {
  sub.app->add_option("--" + key, sub.values[key], help);
}

void add_flag(Subcommand &sub, const std::string &key, const std::string &help) {
  sub.app->add_flag("--" + key, help);
  sub.flags.push_back(key);
}

bts::ExperimentConfig resolve(const Subcommand &sub) {
  auto config = bts::default_config(sub.kind);
  auto given = [&](const std::string &key) { return sub.app->count("--" + key) > 0; };
  if (!sub.config_path.empty())
    for (const auto &[key, value] : bts::read_config_file(sub.config_path))
      if (!given(key)) bts::apply_config_value(config, key, value);
  for (const auto &[key, value] : sub.values)
    if (given(key)) bts::apply_config_value(config, key, value);
  for (const auto &key : sub.flags)
    if (given(key)) bts::apply_config_value(config, key, "true");
  if (!config.seed) {
    std::random_device entropy;
    config.seed = (std::uint64_t{entropy()} << 32) | entropy();
    std::cout << "seed: " << *config.seed << "\n";
  }
  if (config.output.empty())
    config.output = sub.kind == bts::ExperimentKind::RlChain
                        ? "rl_chain.csv"
                        : std::string(bts::to_string(sub.kind)) + ".csv";
  return config;
}

int run(const bts::ExperimentConfig &config) {
  switch (config.kind) {
    case bts::ExperimentKind::Bandit: {
      const auto table = bts::run_bandit_experiment(config);
      bts::emit_csv(table, config.output);
      std::cout << bts::format_summary(bts::summarize(table, config.epsilon));
      break;
    }
    case bts::ExperimentKind::Equivalence: {
      bts::validate(config);
      bts::Rng rng = bts::make_rng(*config.seed);
      const auto cells = bts::run_equivalence_suite(bts::EquivalenceGrid{}, config.draws, rng);
      bts::emit_csv(cells, config.output);
      const auto worst = std::max_element(cells.begin(), cells.end(),
                                          [](const auto &a, const auto &b) {
                                            return a.statistic < b.statistic;
                                          });
      const auto passing = std::count_if(cells.begin(), cells.end(), [](const auto &c) {
        return c.statistic < kKsThreshold;
      });
      std::cout << "cells: " << cells.size() << "  below " << kKsThreshold << ": " << passing
                << "  max KS: " << bts::format_number(worst->statistic) << " at (alpha="
                << worst->alpha << ", beta=" << worst->beta << ", s=" << worst->successes
                << ", f=" << worst->failures << ")\n"
                << "asymptotic 1% critical value for n=m=" << config.draws << ": "
                << bts::format_number(bts::ks_critical_value(0.01, config.draws, config.draws))
                << "\n";
      break;
    }
    case bts::ExperimentKind::RlChain: {
      const auto table = bts::run_rl_experiment(config);
      bts::emit_csv(table, config.output);
      std::cout << bts::format_summary(bts::summarize(table, config.window_start));
      break;
    }
  }
  std::cout << "wrote " << config.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Bootstrapped Thompson sampling experiments"};
  app.require_subcommand(1);

  std::vector<Subcommand> subs(3);
  subs[0] = {bts::ExperimentKind::Bandit,
             app.add_subcommand("bandit", "two-arm regret experiment"), {}, {}, {}};
  subs[1] = {bts::ExperimentKind::Equivalence,
             app.add_subcommand("equivalence", "Bayesian bootstrap vs Beta posterior KS grid"),
             {}, {}, {}};
  subs[2] = {bts::ExperimentKind::RlChain,
             app.add_subcommand("rl-chain", "deep exploration on a chain MDP"), {}, {}, {}};

  for (auto &sub : subs) {
    sub.app->add_option("--config", sub.config_path, "key = value file; flags override it");
    add_value(sub, "seed", "base seed (drawn from entropy and printed when omitted)");
    add_value(sub, "output", "CSV output path");
    add_value(sub, "replications", "Monte Carlo replications");
    add_value(sub, "threads", "worker threads (0 = all cores)");
  }
  auto &bandit = subs[0];
  add_value(bandit, "algorithm", "comma list of classic,bayes,besa,greedy");
  add_value(bandit, "M", "comma list of artificial history lengths");
  add_value(bandit, "epsilon", "environment epsilon in (0, 1/2)");
  add_value(bandit, "horizon", "timesteps per replication");
  add_flag(bandit, "freeze-artificial", "draw the artificial history once per run");
  add_flag(bandit, "deterministic-ties", "break argmax ties toward the lowest arm");

  add_value(subs[1], "draws", "draws per sampler per grid cell");

  auto &chain = subs[2];
  add_value(chain, "algorithm", "comma list of ensemble,bootstrap,egreedy");
  add_value(chain, "M", "artificial episodes per model");
  add_value(chain, "chain-length", "number of chain states");
  add_value(chain, "episode-horizon", "steps per episode");
  add_value(chain, "episodes", "episodes per replication");
  add_value(chain, "models", "ensemble size K");
  add_value(chain, "baseline-epsilon", "exploration rate of the epsilon-greedy baseline");
  add_value(chain, "window-start", "first episode of the summary window");
  add_flag(chain, "deterministic-ties", "break argmax ties toward the lowest action");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto &sub : subs)
      if (sub.app->parsed()) return run(resolve(sub));
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
