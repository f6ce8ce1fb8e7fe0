#pragma once

// Central finite-difference checker used only by tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "stint/net.hpp"

namespace stint::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
};

/// relative error = |analytic - numeric| / max(|analytic|, |numeric|, floor)
template <typename Real>
GradCheckResult finite_difference_check(InterpolationNetwork<Real>& net, const std::function<double()>& loss,
                                        const std::function<void()>& analytic, double step, double floor) {
  net.zero_grad();
  analytic();
  GradCheckResult result;
  for (auto& p : net.parameters()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const Real saved = p.value[i];
      p.value[i] = static_cast<Real>(saved + step);
      const double plus = loss();
      p.value[i] = static_cast<Real>(saved - step);
      const double minus = loss();
      p.value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double exact = static_cast<double>(p.grad[i]);
      const double denom = std::max({std::abs(exact), std::abs(numeric), floor});
      const double rel = std::abs(exact - numeric) / denom;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = p.name + "[" + std::to_string(i) + "]";
      }
      ++result.checked;
    }
  }
  return result;
}

}  // namespace stint::testing
