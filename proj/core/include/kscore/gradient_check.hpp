#pragma once

#include <cstdint>

#include "kscore/policy_net.hpp"

namespace kscore {

struct GradientCheckResult {
  int cases = 0;
  Eigen::Index entries = 0;
  double max_relative_error = 0.0;
};

/// Relative error |a - n| / max(|a|, |n|), or 0 when both are below `floor`.
double gradient_relative_error(double analytic, double numeric, double floor = 1e-8);

/// Compares backward() against central finite differences of objective() on
/// `cases` random small networks with random observations, actions and coefficients.
GradientCheckResult gradient_check(int cases, std::uint64_t seed, double step = 1e-5);

/// Single network/sample variant.
double max_gradient_error(const PolicyValueNet& net, const Eigen::VectorXd& observation, int action,
                          const BackwardCoefficients& coefs, double step = 1e-5);

}  // namespace kscore
