#include <doctest.h>

#include <cmath>
#include <vector>

#include "bts/bandit.hpp"
#include "bts/stats.hpp"

using namespace bts;

namespace {

double beta_pdf(double x, double a, double b) {
  return std::exp((a - 1) * std::log(x) + (b - 1) * std::log1p(-x) + std::lgamma(a + b) -
                  std::lgamma(a) - std::lgamma(b));
}

// P(X > Y) for independent X ~ Beta(a1, b1), Y ~ Beta(a2, b2) by midpoint
// quadrature of f_X(x) * F_Y(x), with F_Y accumulated on the same grid.
double prob_beta_greater(double a1, double b1, double a2, double b2) {
  const int n = 200000;
  const double h = 1.0 / n;
  double cdf_y = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    const double fy = beta_pdf(x, a2, b2) * h;
    total += beta_pdf(x, a1, b1) * h * (cdf_y + 0.5 * fy);
    cdf_y += fy;
  }
  return total;
}

const BanditHistory kStuck{{0, 0.01}, {1, 0.0}};

}  // namespace

TEST_CASE("dirac environment") {
  const auto env = make_dirac_env(0.01);
  CHECK(env.arm_count() == 2);
  CHECK(env.expected_reward(0) == doctest::Approx(0.01));
  CHECK(env.expected_reward(1) == doctest::Approx(0.02));
  CHECK(env.optimal_arm() == 1);
  CHECK(env.optimal_reward() == doctest::Approx(0.02));
  Rng rng = make_rng(1);
  std::size_t ones = 0;
  for (int i = 0; i < 100000; ++i) {
    CHECK(env.pull(0, rng) == 0.01);
    const double y = env.pull(1, rng);
    CHECK((y == 0.0 || y == 1.0));
    ones += y == 1.0;
  }
  CHECK(std::abs(ones / 100000.0 - 0.02) < 0.002);
  CHECK(env.optimal_reward() - env.expected_reward(0) == doctest::Approx(0.01));
  CHECK_THROWS_AS(make_dirac_env(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_dirac_env(0.5), std::invalid_argument);
  CHECK_THROWS_AS(env.pull(2, rng), std::out_of_range);
}

TEST_CASE("plug-in model") {
  const auto est = fit_plugin_model(kStuck, 2);
  CHECK(est.visited == std::vector<bool>{true, true});
  CHECK(est.mean(0) == doctest::Approx(0.01));
  CHECK(est.mean(1) == 0.0);

  const auto none = fit_plugin_model(BanditHistory{}, 3);
  CHECK(none.visited == std::vector<bool>{false, false, false});

  const auto third = fit_plugin_model(BanditHistory{{1, 0.0}, {1, 1.0}, {1, 1.0}}, 2);
  CHECK_FALSE(third.visited[0]);
  CHECK(third.mean(1) == doctest::Approx(2.0 / 3.0));

  Eigen::VectorXd w(2);
  w << 1.0, 3.0;
  const auto weighted =
      fit_plugin_model(WeightedDataset<Observation>({{0, 0.0}, {0, 1.0}}, w), 2);
  CHECK(weighted.mean(0) == doctest::Approx(0.75));
}

TEST_CASE("artificial history samplers") {
  Rng rng = make_rng(2);
  CHECK(ArtificialHistorySampler{}(rng).empty());
  const auto uniform = uniform_outcome_sampler(2, 2);
  for (int i = 0; i < 100; ++i) {
    const auto h = uniform(rng);
    REQUIRE(h.size() == 2);
    CHECK(h[0].arm == 0);
    CHECK(h[1].arm == 1);
    for (const auto &o : h) CHECK((o.outcome >= 0.0 && o.outcome < 1.0));
  }
  const std::vector<int> alpha{2, 1}, beta{1, 3};
  const auto prior = beta_prior_sampler(alpha, beta);
  CHECK(prior.size() == 7);
  const auto h = prior(rng);
  const auto est = fit_plugin_model(h, 2);
  CHECK(est.mean(0) == doctest::Approx(2.0 / 3.0));
  CHECK(est.mean(1) == doctest::Approx(0.25));
  const ArtificialHistorySampler wrong(3, [](Rng &) { return BanditHistory{{0, 1.0}}; });
  CHECK_THROWS_AS(wrong(rng), std::logic_error);
}

TEST_CASE("stuck history is absorbing without artificial data") {
  for (auto kind : {BootstrapKind::Classic, BootstrapKind::Bayes, BootstrapKind::Besa}) {
    CAPTURE(to_string(kind));
    Rng rng = make_rng(3);
    for (int i = 0; i < 1000; ++i)
      REQUIRE(bootstrap_thompson_step(kStuck, ArtificialHistorySampler{}, kind, 2, rng) == 0);
  }
}

TEST_CASE("unvisited arms are pulled first") {
  const auto env = make_dirac_env(0.01);
  for (auto kind : {BootstrapKind::Classic, BootstrapKind::Bayes, BootstrapKind::Besa}) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng = make_rng(seed);
      BootstrapThompsonOptions opts;
      opts.kind = kind;
      const auto run = run_bootstrap_thompson(env, opts, 2, rng);
      CHECK(run.actions[0] != run.actions[1]);
    }
  }
  const auto three = make_bernoulli_env({0.1, 0.5, 0.9});
  Rng rng = make_rng(9);
  BootstrapThompsonOptions opts;
  const auto run = run_bootstrap_thompson(three, opts, 3, rng);
  std::vector<std::size_t> sorted = run.actions;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("artificial data escapes the stuck history") {
  const auto sampler = uniform_outcome_sampler(2, 2);
  for (auto kind : {BootstrapKind::Classic, BootstrapKind::Bayes, BootstrapKind::Besa}) {
    CAPTURE(to_string(kind));
    Rng rng = make_rng(4);
    int arm1 = 0;
    for (int i = 0; i < 10000; ++i)
      arm1 += bootstrap_thompson_step(kStuck, sampler, kind, 2, rng) == 1;
    CHECK(arm1 > 0);
  }
}

TEST_CASE("argmax ties are split evenly") {
  const BanditHistory symmetric{{0, 0.5}, {1, 0.5}};
  Rng rng = make_rng(5);
  int arm0 = 0;
  for (int i = 0; i < 10000; ++i)
    arm0 += bootstrap_thompson_step(symmetric, ArtificialHistorySampler{},
                                    BootstrapKind::Classic, 2, rng) == 0;
  CHECK(std::abs(arm0 / 10000.0 - 0.5) < 0.02);
  for (int i = 0; i < 100; ++i)
    CHECK(bootstrap_thompson_step(symmetric, ArtificialHistorySampler{},
                                  BootstrapKind::Classic, 2, rng, TieBreak::Lowest) == 0);
}

TEST_CASE("BESA needs two arms") {
  Rng rng = make_rng(6);
  CHECK_THROWS_AS(bootstrap_thompson_step({}, ArtificialHistorySampler{}, BootstrapKind::Besa,
                                          3, rng),
                  std::invalid_argument);
}

TEST_CASE("step never returns an out-of-range arm") {
  Rng rng = make_rng(7);
  const auto env = make_bernoulli_env({0.2, 0.4, 0.6, 0.8});
  BootstrapThompsonOptions opts;
  opts.kind = BootstrapKind::Classic;
  opts.sampler = uniform_outcome_sampler(4, 4);
  const auto run = run_bootstrap_thompson(env, opts, 300, rng);
  for (auto a : run.actions) CHECK(a < 4);
}

TEST_CASE("exact Thompson step") {
  Rng rng = make_rng(8);
  const std::vector<BetaPrior> flat{{1, 1}, {1, 1}};

  SUBCASE("symmetric without data") {
    const std::vector<std::size_t> zero{0, 0};
    int arm0 = 0;
    for (int i = 0; i < 10000; ++i)
      arm0 += exact_thompson_bernoulli_step(zero, zero, flat, rng) == 0;
    CHECK(std::abs(arm0 / 10000.0 - 0.5) < 0.02);
  }

  SUBCASE("one success against one failure") {
    const double oracle = prob_beta_greater(2, 1, 1, 2);
    CHECK(oracle == doctest::Approx(5.0 / 6.0).epsilon(1e-6));
    const std::vector<std::size_t> s{1, 0}, f{0, 1};
    int arm0 = 0;
    for (int i = 0; i < 10000; ++i) arm0 += exact_thompson_bernoulli_step(s, f, flat, rng) == 0;
    CHECK(std::abs(arm0 / 10000.0 - oracle) < 0.02);
  }

  SUBCASE("bootstrap step with Beta-prior artificial data agrees") {
    const std::vector<int> ones{1, 1};
    const auto prior = beta_prior_sampler(ones, ones);
    const BanditHistory history{{0, 1.0}, {1, 0.0}};
    int arm0 = 0;
    for (int i = 0; i < 10000; ++i)
      arm0 += bootstrap_thompson_step(history, prior, BootstrapKind::Bayes, 2, rng) == 0;
    CHECK(std::abs(arm0 / 10000.0 - prob_beta_greater(2, 1, 1, 2)) < 0.02);
  }

  SUBCASE("flat posterior draw is uniform") {
    std::vector<double> theta(10000), uniform(10000);
    Rng u = make_rng(80);
    for (auto &x : theta) x = sample_beta(1.0, 1.0, rng);
    for (auto &x : uniform) x = uniform01(u);
    CHECK(two_sample_ks(theta, uniform) < 0.033);
  }

  SUBCASE("bad priors") {
    const std::vector<std::size_t> zero{0, 0};
    const std::vector<BetaPrior> bad{{0, 1}, {1, 1}};
    CHECK_THROWS_AS(exact_thompson_bernoulli_step(zero, zero, bad, rng), std::invalid_argument);
  }
}

TEST_CASE("bootstrap theta sample matches the Beta posterior") {
  Rng rng = make_rng(9);
  Rng ref = make_rng(90);
  auto ks_against_beta = [&](int a, int b, std::size_t s, std::size_t f) {
    std::vector<double> boot(10000), direct(10000);
    for (auto &x : boot) x = bayes_bootstrap_theta_sample(a, b, s, f, rng);
    for (auto &x : direct) x = sample_beta(a + static_cast<double>(s), b + static_cast<double>(f), ref);
    return two_sample_ks(boot, direct);
  };
  std::vector<double> flat(10000), uniform(10000);
  for (auto &x : flat) x = bayes_bootstrap_theta_sample(1, 1, 0, 0, rng);
  for (auto &x : uniform) x = uniform01(ref);
  CHECK(two_sample_ks(flat, uniform) < 0.033);
  CHECK(ks_against_beta(2, 1, 0, 0) < 0.033);
  CHECK(ks_against_beta(1, 1, 3, 1) < 0.033);
  // A mislabeled posterior (counts swapped) must be distinguishable.
  std::vector<double> boot(10000), swapped(10000);
  for (auto &x : boot) x = bayes_bootstrap_theta_sample(1, 1, 3, 1, rng);
  for (auto &x : swapped) x = sample_beta(2.0, 4.0, ref);
  CHECK(two_sample_ks(boot, swapped) > 0.2);
  CHECK_THROWS_AS(bayes_bootstrap_theta_sample(0, 1, 0, 0, rng), std::invalid_argument);
}

TEST_CASE("cumulative regret") {
  const auto env = make_dirac_env(0.01);
  const std::vector<std::size_t> optimal(50, 1);
  for (double r : cumulative_regret(env, optimal)) CHECK(r == 0.0);

  const std::vector<std::size_t> stuck(1000, 0);
  CHECK(cumulative_regret(env, stuck).back() == doctest::Approx(10.0));

  std::vector<std::size_t> alternating;
  for (int i = 0; i < 10; ++i) alternating.push_back(i % 2);
  CHECK(cumulative_regret(env, alternating).back() == doctest::Approx(0.05));

  const std::vector<std::size_t> bad{0, 2};
  CHECK_THROWS_AS(cumulative_regret(env, bad), std::out_of_range);
}

TEST_CASE("cumulative regret is nondecreasing and bounded") {
  Rng rng = make_rng(10);
  const auto env = make_bernoulli_env({0.3, 0.7, 0.5});
  const double max_gap = 0.4;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> actions(1 + uniform_index(200, rng));
    for (auto &a : actions) a = uniform_index(3, rng);
    const auto regret = cumulative_regret(env, actions);
    for (std::size_t t = 0; t < regret.size(); ++t) {
      if (t > 0) CHECK(regret[t] >= regret[t - 1]);
      CHECK(regret[t] <= (t + 1) * max_gap + 1e-12);
    }
  }
}

TEST_CASE("bootstrap Thompson with Beta-prior data tracks exact Thompson") {
  const auto env = make_bernoulli_env({0.4, 0.6});
  const std::vector<int> ones{1, 1};
  const std::vector<BetaPrior> flat{{1, 1}, {1, 1}};
  BootstrapThompsonOptions opts;
  opts.kind = BootstrapKind::Bayes;
  opts.sampler = beta_prior_sampler(ones, ones);
  const std::size_t reps = 2000, horizon = 40;
  std::vector<double> boot_pulls, exact_pulls;
  for (std::size_t r = 0; r < reps; ++r) {
    Rng a = make_rng(1000 + r), b = make_rng(50000 + r);
    const auto run_a = run_bootstrap_thompson(env, opts, horizon, a);
    const auto run_b = run_exact_thompson(env, flat, horizon, b);
    boot_pulls.push_back(std::count(run_a.actions.begin(), run_a.actions.end(), 1u));
    exact_pulls.push_back(std::count(run_b.actions.begin(), run_b.actions.end(), 1u));
  }
  CHECK(two_sample_ks(boot_pulls, exact_pulls) < ks_critical_value(0.01, reps, reps));
}

TEST_CASE("frozen artificial history is drawn once") {
  const auto env = make_dirac_env(0.01);
  int calls = 0;
  BootstrapThompsonOptions opts;
  opts.sampler = ArtificialHistorySampler(2, [&calls](Rng &rng) {
    ++calls;
    return BanditHistory{{0, uniform01(rng)}, {1, uniform01(rng)}};
  });
  opts.freeze_artificial = true;
  Rng rng = make_rng(11);
  run_bootstrap_thompson(env, opts, 100, rng);
  CHECK(calls == 1);
  opts.freeze_artificial = false;
  run_bootstrap_thompson(env, opts, 100, rng);
  CHECK(calls == 101);
}

TEST_CASE("greedy baseline") {
  Rng rng = make_rng(12);
  CHECK(greedy_step(kStuck, 2, rng) == 0);
  const auto run = run_greedy(make_dirac_env(0.01), 20, rng);
  CHECK(run.actions[0] != run.actions[1]);
}
