#pragma once

#include <cstddef>
#include <vector>

namespace bts {

/// Two-sample Kolmogorov-Smirnov statistic: the largest absolute gap between
/// the two empirical CDFs. Inputs need not be sorted.
double two_sample_ks(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sided critical value c(alpha) * sqrt((n + m) / (n * m)),
/// c(alpha) = sqrt(-ln(alpha / 2) / 2).
double ks_critical_value(double alpha, std::size_t n, std::size_t m);

double mean(const std::vector<double> &values);
double median(std::vector<double> values);

}  // namespace bts
