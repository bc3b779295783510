#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bts/random.hpp"

namespace bts {

enum class TieBreak { Uniform, Lowest };

/// Index of the largest entry among those with `eligible[i]` set (all
/// entries when `eligible` is empty). Exact ties go to a uniformly random
/// candidate, or to the lowest index under TieBreak::Lowest.
inline std::size_t select_argmax(const Eigen::Ref<const Eigen::VectorXd> &values,
                                 TieBreak ties, Rng &rng,
                                 const std::vector<bool> &eligible = {}) {
  std::vector<std::size_t> best;
  double best_value = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!eligible.empty() && !eligible[idx]) continue;
    if (best.empty() || values(i) > best_value) {
      best.assign(1, idx);
      best_value = values(i);
    } else if (values(i) == best_value) {
      best.push_back(idx);
    }
  }
  if (best.empty()) throw std::invalid_argument("no eligible entry to select");
  if (best.size() == 1 || ties == TieBreak::Lowest) return best.front();
  return best[uniform_index(best.size(), rng)];
}

}  // namespace bts
