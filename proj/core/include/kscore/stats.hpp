#pragma once

#include <span>

namespace kscore {

/// Linear-interpolation quantile (the "type 7" estimator), q in [0, 1].
/// Throws std::invalid_argument on empty input.
double quantile(std::span<const double> values, double q);

double median(std::span<const double> values);
double mean(std::span<const double> values);

/// Q3 - Q1.
double interquartile_range(std::span<const double> values);

}  // namespace kscore
