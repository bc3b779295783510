#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "bts/bootstrap.hpp"
#include "bts/stats.hpp"
#include "oracles.hpp"

using namespace bts;

namespace {

std::vector<std::size_t> count_vector(const EmpiricalMeasure<double> &m, std::size_t n) {
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t i = 0; i < m.size(); ++i)
    counts[m.source()[i]] = static_cast<std::size_t>(std::lround(m.probability(i) * n));
  return counts;
}

double weighted_variance(const EmpiricalMeasure<double> &m) {
  const double mu = mean_of(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    acc += m.probability(i) * (m.point(i) - mu) * (m.point(i) - mu);
  return acc;
}

WeightedDataset<double> random_dataset(Rng &rng, bool unit_weights) {
  const std::size_t n = 1 + uniform_index(12, rng);
  std::vector<double> items(n);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    items[i] = uniform01(rng) * 10.0 - 5.0;
    w(static_cast<Eigen::Index>(i)) = unit_weights ? 1.0 : uniform01(rng) * 3.0 + 1e-3;
  }
  return {std::move(items), std::move(w)};
}

}  // namespace

TEST_CASE("weighted dataset validates its invariants") {
  CHECK_THROWS_AS(WeightedDataset<double>({1.0, 2.0}, Eigen::VectorXd::Ones(3)),
                  std::invalid_argument);
  Eigen::VectorXd neg(2);
  neg << 1.0, -0.5;
  CHECK_THROWS_AS(WeightedDataset<double>({1.0, 2.0}, neg), std::invalid_argument);
  CHECK_THROWS_AS(WeightedDataset<double>({1.0, 2.0}, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
  WeightedDataset<double> d({1.0});
  CHECK(d.is_unweighted());
  d.push_back(2.0, 0.0);
  CHECK(d.size() == 2);
  CHECK_FALSE(d.is_unweighted());
  WeightedDataset<double> empty;
  CHECK_THROWS_AS(empty.push_back(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("classic resample") {
  Rng rng = make_rng(1);

  SUBCASE("single element has one resample") {
    const auto m = classic_resample(WeightedDataset<double>({5.0}), rng);
    REQUIRE(m.size() == 1);
    CHECK(m.point(0) == 5.0);
    CHECK(m.probability(0) == 1.0);
  }

  SUBCASE("two elements give multiples of one half") {
    for (int i = 0; i < 200; ++i) {
      const auto m = classic_resample(WeightedDataset<double>({0.0, 1.0}), rng);
      for (std::size_t j = 0; j < m.size(); ++j) {
        const double twice = m.probability(j) * 2.0;
        CHECK(twice == doctest::Approx(std::round(twice)).epsilon(1e-12));
      }
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_WITH(classic_resample(WeightedDataset<double>{}, rng), "empty dataset");
    Eigen::VectorXd w(2);
    w << 1.0, 2.0;
    CHECK_THROWS_WITH(classic_resample(WeightedDataset<double>({0.0, 1.0}, w), rng),
                      "classic bootstrap requires unweighted data");
  }

  SUBCASE("frequency of mean 0.5 on {0, 1}") {
    // Of the four ordered resamples, (0,1) and (1,0) have mean 0.5.
    const auto oracle = oracle::bootstrap_count_vectors(2);
    const double p_half = oracle.at({1, 1});
    CHECK(p_half == doctest::Approx(0.5));
    std::size_t hits = 0;
    const std::size_t k = 100000;
    for (std::size_t i = 0; i < k; ++i)
      if (mean_of(classic_resample(WeightedDataset<double>({0.0, 1.0}), rng)) == 0.5) ++hits;
    CHECK(std::abs(static_cast<double>(hits) / k - p_half) < 0.02);
  }
}

TEST_CASE("classic bootstrap matches multinomial enumeration for N <= 3") {
  Rng rng = make_rng(7);
  for (std::size_t n = 1; n <= 3; ++n) {
    CAPTURE(n);
    std::vector<double> items(n);
    std::iota(items.begin(), items.end(), 0.0);
    const WeightedDataset<double> data(items);
    const auto oracle = oracle::bootstrap_count_vectors(n);
    std::map<std::vector<std::size_t>, double> freq;
    const std::size_t k = 100000;
    for (std::size_t i = 0; i < k; ++i) freq[count_vector(classic_resample(data, rng), n)] += 1.0 / k;
    for (const auto &[counts, p] : oracle) CHECK(std::abs(freq[counts] - p) < 0.02);
    CHECK(freq.size() == oracle.size());
  }
}

TEST_CASE("bayes reweight") {
  Rng rng = make_rng(2);

  SUBCASE("single point normalizes to one") {
    const auto m = bayes_reweight(WeightedDataset<double>({3.5}), rng);
    CHECK(m.size() == 1);
    CHECK(m.probability(0) == 1.0);
  }

  SUBCASE("support is the whole dataset with positive mass") {
    const WeightedDataset<double> data({1.0, 2.0, 3.0, 4.0});
    const auto m = bayes_reweight(data, rng);
    CHECK(m.size() == 4);
    CHECK((m.probabilities().array() > 0.0).all());
    CHECK(std::abs(m.probabilities().sum() - 1.0) <= 1e-12);
  }

  SUBCASE("pre-weights multiply into the draw") {
    Eigen::VectorXd w(2);
    w << 0.0, 1.0;
    const auto m = bayes_reweight(WeightedDataset<double>({7.0, 9.0}, w), rng);
    CHECK(m.probability(0) == 0.0);
    CHECK(m.probability(1) == 1.0);
  }

  SUBCASE("two-point weighted mean is uniform") {
    // w1 / (w1 + w2) for iid Exp(1) is Beta(1, 1).
    const WeightedDataset<double> data({1.0, 0.0});
    Rng uniform_rng = make_rng(99);
    std::vector<double> phi, uniform;
    std::size_t below_half = 0;
    for (int i = 0; i < 10000; ++i) {
      phi.push_back(mean_of(bayes_reweight(data, rng)));
      uniform.push_back(uniform01(uniform_rng));
      if (phi.back() <= 0.5) ++below_half;
    }
    CHECK(std::abs(below_half / 10000.0 - 0.5) < 0.02);
    CHECK(two_sample_ks(phi, uniform) < 0.033);
  }

  SUBCASE("empty") {
    CHECK_THROWS_WITH(bayes_reweight(WeightedDataset<double>{}, rng), "empty dataset");
  }
}

TEST_CASE("bayes reweight is exchangeable under permutation") {
  Rng rng = make_rng(3);
  const WeightedDataset<double> data({0.1, 2.0, -1.0, 4.0, 0.5});
  const WeightedDataset<double> permuted({4.0, 0.5, 0.1, -1.0, 2.0});
  std::vector<double> a, b;
  for (int i = 0; i < 10000; ++i) {
    a.push_back(weighted_variance(bayes_reweight(data, rng)));
    b.push_back(weighted_variance(bayes_reweight(permuted, rng)));
  }
  CHECK(two_sample_ks(a, b) < 0.033);
}

TEST_CASE("resampler outputs are probability measures") {
  Rng gen = make_rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto unit = random_dataset(gen, true);
    const auto weighted = random_dataset(gen, false);
    for (const auto &m : {classic_resample(unit, gen), bayes_reweight(unit, gen),
                          bayes_reweight(weighted, gen)}) {
      CHECK(std::abs(m.probabilities().sum() - 1.0) <= 1e-12);
      CHECK((m.probabilities().array() >= 0.0).all());
    }
    const auto c = classic_resample(unit, gen);
    CHECK(c.size() <= unit.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      REQUIRE(c.source()[i] < unit.size());
      CHECK(c.point(i) == unit.item(c.source()[i]));
      const double scaled = c.probability(i) * static_cast<double>(unit.size());
      CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
    }
  }
}

TEST_CASE("resamplers are deterministic given the seed") {
  const WeightedDataset<double> data({0.3, 1.7, 2.2, 9.0});
  for (auto kind : {BootstrapKind::Classic, BootstrapKind::Bayes}) {
    Rng a = make_rng(42), b = make_rng(42);
    CHECK(bootstrap_distribution(data, mean_of, 50, kind, a) ==
          bootstrap_distribution(data, mean_of, 50, kind, b));
  }
  Rng a = make_rng(5), b = make_rng(5);
  CHECK(besa_subsample_estimate(data, 7, mean_of, a) ==
        besa_subsample_estimate(data, 7, mean_of, b));
}

TEST_CASE("bootstrap distribution") {
  Rng rng = make_rng(4);

  SUBCASE("single sample mode") {
    const auto ys = bootstrap_distribution(WeightedDataset<double>({5.0}), mean_of, 1,
                                           BootstrapKind::Classic, rng);
    CHECK(ys == std::vector<double>{5.0});
  }

  SUBCASE("classic frequencies on {0, 1}") {
    const auto ys = bootstrap_distribution(WeightedDataset<double>({0.0, 1.0}), mean_of,
                                           100000, BootstrapKind::Classic, rng);
    std::map<double, double> freq;
    for (double y : ys) freq[y] += 1.0 / ys.size();
    CHECK(std::abs(freq[0.0] - 0.25) < 0.02);
    CHECK(std::abs(freq[0.5] - 0.5) < 0.02);
    CHECK(std::abs(freq[1.0] - 0.25) < 0.02);
  }

  SUBCASE("bayes on one 1 and one 0 is uniform") {
    const auto ys = bootstrap_distribution(WeightedDataset<double>({1.0, 0.0}), mean_of,
                                           10000, BootstrapKind::Bayes, rng);
    Rng u = make_rng(1234);
    std::vector<double> uniform(10000);
    for (auto &x : uniform) x = uniform01(u);
    CHECK(two_sample_ks(ys, uniform) < 0.033);
  }

  SUBCASE("errors") {
    CHECK_THROWS_WITH(bootstrap_distribution(WeightedDataset<double>({1.0}), mean_of, 1,
                                             BootstrapKind::Besa, rng),
                      "BESA has its own entry point");
    CHECK_THROWS_WITH(bootstrap_distribution(WeightedDataset<double>{}, mean_of, 1,
                                             BootstrapKind::Bayes, rng),
                      "empty dataset");
    CHECK_THROWS_AS(bootstrap_distribution(WeightedDataset<double>({1.0}), mean_of, 0,
                                           BootstrapKind::Bayes, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("augment with artificial data") {
  const WeightedDataset<double> history({1.0, 2.0, 3.0});
  const WeightedDataset<double> artificial({0.5, 0.25});
  const auto combined = augment_with_artificial(history, artificial);
  CHECK(combined.size() == 5);
  CHECK(combined.items() == std::vector<double>{1.0, 2.0, 3.0, 0.5, 0.25});
  CHECK(combined.is_unweighted());

  const auto no_prior = augment_with_artificial(history, WeightedDataset<double>{});
  CHECK(no_prior.items() == history.items());
  CHECK(no_prior.weights() == history.weights());

  const auto prior_only = augment_with_artificial(WeightedDataset<double>{}, artificial);
  CHECK(prior_only.items() == artificial.items());

  Eigen::VectorXd w(2);
  w << 2.0, 0.5;
  const auto weighted = augment_with_artificial(history, WeightedDataset<double>({4.0, 5.0}, w));
  CHECK(weighted.weight(3) == 2.0);
  CHECK(weighted.weight(4) == 0.5);
}

TEST_CASE("besa subsample estimate") {
  Rng rng = make_rng(6);

  SUBCASE("single point") {
    CHECK(besa_subsample_estimate(WeightedDataset<double>({0.7}), 3, mean_of, rng) ==
          doctest::Approx(0.7));
  }

  SUBCASE("subsample of one picks one item uniformly") {
    const WeightedDataset<double> data({1.0, 2.0, 3.0});
    std::map<double, int> freq;
    for (int i = 0; i < 30000; ++i) ++freq[besa_subsample_estimate(data, 1, mean_of, rng)];
    CHECK(freq.size() == 3);
    for (const auto &[value, count] : freq) CHECK(std::abs(count / 30000.0 - 1.0 / 3.0) < 0.02);
  }

  SUBCASE("subsample of two from {0, 1}") {
    std::map<double, double> freq;
    for (int i = 0; i < 100000; ++i)
      freq[besa_subsample_estimate(WeightedDataset<double>({0.0, 1.0}), 2, mean_of, rng)] +=
          1e-5;
    CHECK(std::abs(freq[0.0] - 0.25) < 0.02);
    CHECK(std::abs(freq[0.5] - 0.5) < 0.02);
    CHECK(std::abs(freq[1.0] - 0.25) < 0.02);
  }

  SUBCASE("errors") {
    CHECK_THROWS_WITH(besa_subsample_estimate(WeightedDataset<double>{}, 1, mean_of, rng),
                      "empty dataset");
    CHECK_THROWS_AS(besa_subsample_estimate(WeightedDataset<double>({1.0}), 0, mean_of, rng),
                    std::invalid_argument);
  }
}
