#pragma once

// Weighted empirical measures and the bootstrap resamplers that act on them.
//
// A resampler maps a WeightedDataset to a random EmpiricalMeasure; an
// estimator functional maps that measure to an estimate. Repeating K times
// gives the bootstrap distribution of the estimate. Artificial data is mixed
// in by plain concatenation before resampling, so it is treated exactly like
// observed data.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "bts/random.hpp"

namespace bts {

inline constexpr double kNormalizationTolerance = 1e-12;

enum class BootstrapKind { Classic, Bayes, Besa };

inline std::string_view to_string(BootstrapKind kind) {
  switch (kind) {
    case BootstrapKind::Classic: return "classic";
    case BootstrapKind::Bayes: return "bayes";
    case BootstrapKind::Besa: return "besa";
  }
  return "unknown";
}

inline std::optional<BootstrapKind> parse_bootstrap_kind(std::string_view s) {
  if (s == "classic") return BootstrapKind::Classic;
  if (s == "bayes") return BootstrapKind::Bayes;
  if (s == "besa") return BootstrapKind::Besa;
  return std::nullopt;
}

template <class T>
class WeightedDataset {
 public:
  WeightedDataset() = default;

  explicit WeightedDataset(std::vector<T> items)
      : items_(std::move(items)),
        weights_(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(items_.size()))) {}

  WeightedDataset(std::vector<T> items, Eigen::VectorXd weights)
      : items_(std::move(items)), weights_(std::move(weights)) {
    if (static_cast<std::size_t>(weights_.size()) != items_.size())
      throw std::invalid_argument("items and weights differ in length");
    if (!items_.empty()) {
      if ((weights_.array() < 0.0).any() || !weights_.allFinite())
        throw std::invalid_argument("weights must be finite and nonnegative");
      if (weights_.sum() <= 0.0)
        throw std::invalid_argument("at least one weight must be positive");
    }
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  const std::vector<T> &items() const { return items_; }
  const Eigen::VectorXd &weights() const { return weights_; }
  const T &item(std::size_t i) const { return items_[i]; }
  double weight(std::size_t i) const {
    return weights_(static_cast<Eigen::Index>(i));
  }

  bool is_unweighted() const {
    return (weights_.array() == 1.0).all();
  }

  void push_back(T item, double weight = 1.0) {
    if (!(weight >= 0.0) || !std::isfinite(weight))
      throw std::invalid_argument("weights must be finite and nonnegative");
    if (weight == 0.0 && (items_.empty() || weights_.sum() <= 0.0))
      throw std::invalid_argument("at least one weight must be positive");
    items_.push_back(std::move(item));
    weights_.conservativeResize(weights_.size() + 1);
    weights_(weights_.size() - 1) = weight;
  }

 private:
  std::vector<T> items_;
  Eigen::VectorXd weights_;
};

/// Point-mass probability measure. `source` records, for each support point,
/// its index in the dataset it was drawn from.
template <class T>
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<T> support, Eigen::VectorXd probabilities,
                   std::vector<std::size_t> source)
      : support_(std::move(support)),
        probabilities_(std::move(probabilities)),
        source_(std::move(source)) {
    if (static_cast<std::size_t>(probabilities_.size()) != support_.size() ||
        source_.size() != support_.size())
      throw std::invalid_argument("support and probabilities differ in length");
    if ((probabilities_.array() < 0.0).any())
      throw std::invalid_argument("negative probability");
    if (std::abs(probabilities_.sum() - 1.0) > kNormalizationTolerance)
      throw std::invalid_argument("probabilities do not sum to one");
  }

  std::size_t size() const { return support_.size(); }
  const std::vector<T> &support() const { return support_; }
  const Eigen::VectorXd &probabilities() const { return probabilities_; }
  const std::vector<std::size_t> &source() const { return source_; }
  const T &point(std::size_t i) const { return support_[i]; }
  double probability(std::size_t i) const {
    return probabilities_(static_cast<Eigen::Index>(i));
  }

  /// The measure viewed as a dataset whose weights are the probabilities.
  WeightedDataset<T> as_dataset() const {
    return WeightedDataset<T>(support_, probabilities_);
  }

 private:
  std::vector<T> support_;
  Eigen::VectorXd probabilities_;
  std::vector<std::size_t> source_;
};

/// An estimator maps a measure to an estimate and must be deterministic.
template <class F, class T>
concept EstimatorFunctional =
    std::invocable<const F &, const EmpiricalMeasure<T> &>;

template <class F, class T>
using EstimateOf = std::invoke_result_t<const F &, const EmpiricalMeasure<T> &>;

/// Expectation of a real-valued measure.
inline double mean_of(const EmpiricalMeasure<double> &measure) {
  double acc = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i)
    acc += measure.probability(i) * measure.point(i);
  return acc;
}

namespace detail {

template <class T>
EmpiricalMeasure<T> measure_from_counts(const WeightedDataset<T> &data,
                                        const std::vector<std::size_t> &counts,
                                        std::size_t draws) {
  std::vector<T> support;
  std::vector<std::size_t> source;
  std::vector<double> probs;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    support.push_back(data.item(i));
    source.push_back(i);
    probs.push_back(static_cast<double>(counts[i]) / static_cast<double>(draws));
  }
  Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(
      probs.data(), static_cast<Eigen::Index>(probs.size()));
  p /= p.sum();
  return EmpiricalMeasure<T>(std::move(support), std::move(p), std::move(source));
}

template <class T>
void require_nonempty(const WeightedDataset<T> &data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
}

}  // namespace detail

/// Efron's bootstrap: N uniform draws with replacement, relative frequencies.
template <class T>
EmpiricalMeasure<T> classic_resample(const WeightedDataset<T> &data, Rng &rng) {
  detail::require_nonempty(data);
  if (!data.is_unweighted())
    throw std::invalid_argument("classic bootstrap requires unweighted data");
  const std::size_t n = data.size();
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t k = 0; k < n; ++k) ++counts[uniform_index(n, rng)];
  return detail::measure_from_counts(data, counts, n);
}

/// Bayesian bootstrap: each item's weight is multiplied by a fresh Exp(1)
/// draw and the result normalized. Support is the whole dataset.
template <class T>
EmpiricalMeasure<T> bayes_reweight(const WeightedDataset<T> &data, Rng &rng) {
  detail::require_nonempty(data);
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = data.weights()(i) * exponential1(rng);
  w /= w.sum();
  std::vector<std::size_t> source(data.size());
  for (std::size_t i = 0; i < source.size(); ++i) source[i] = i;
  return EmpiricalMeasure<T>(data.items(), std::move(w), std::move(source));
}

/// One draw from the resampler selected by `kind`.
template <class T>
EmpiricalMeasure<T> resample(const WeightedDataset<T> &data, BootstrapKind kind,
                             Rng &rng) {
  switch (kind) {
    case BootstrapKind::Classic: return classic_resample(data, rng);
    case BootstrapKind::Bayes: return bayes_reweight(data, rng);
    case BootstrapKind::Besa: break;
  }
  throw std::invalid_argument("BESA has its own entry point");
}

/// K bootstrap replicates of phi. The relative-frequency measure over the
/// returned values is the bootstrap estimate of phi's distribution; K = 1 is
/// the single-sample mode used for Thompson-style action selection.
template <class T, class F>
  requires EstimatorFunctional<F, T>
std::vector<EstimateOf<F, T>> bootstrap_distribution(
    const WeightedDataset<T> &data, const F &phi, std::size_t k,
    BootstrapKind kind, Rng &rng) {
  if (kind == BootstrapKind::Besa)
    throw std::invalid_argument("BESA has its own entry point");
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  detail::require_nonempty(data);
  std::vector<EstimateOf<F, T>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(phi(resample(data, kind, rng)));
  return out;
}

/// Observed data followed by artificial data, weights carried over as-is.
template <class T>
WeightedDataset<T> augment_with_artificial(const WeightedDataset<T> &history,
                                           const WeightedDataset<T> &artificial) {
  if (artificial.empty()) return history;
  if (history.empty()) return artificial;
  std::vector<T> items = history.items();
  items.insert(items.end(), artificial.items().begin(), artificial.items().end());
  Eigen::VectorXd w(history.weights().size() + artificial.weights().size());
  w << history.weights(), artificial.weights();
  return WeightedDataset<T>(std::move(items), std::move(w));
}

/// BESA estimate for one arm: phi of a with-replacement subsample whose size
/// is the other arm's pull count.
template <class T, class F>
  requires EstimatorFunctional<F, T>
EstimateOf<F, T> besa_subsample_estimate(const WeightedDataset<T> &data_self,
                                         std::size_t count_other, const F &phi,
                                         Rng &rng) {
  detail::require_nonempty(data_self);
  if (count_other < 1) throw std::invalid_argument("count_other must be at least 1");
  if (!data_self.is_unweighted())
    throw std::invalid_argument("BESA requires unweighted data");
  const std::size_t n = data_self.size();
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t k = 0; k < count_other; ++k) ++counts[uniform_index(n, rng)];
  return phi(detail::measure_from_counts(data_self, counts, count_other));
}

}  // namespace bts
