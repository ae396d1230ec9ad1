#pragma once

#include <functional>

namespace valvest::brent {

struct Minimum {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

inline constexpr int kMaxEvaluations = 200;

/// Brent's method (golden section with parabolic steps) on [lo, hi]. The
/// argument tolerance is absolute. Returns the best point found within
/// kMaxEvaluations evaluations. Tolerances below sqrt(machine epsilon) relative to
/// the bracket are not attainable and act as that limit.
/// Throws std::invalid_argument unless lo < hi and tol > 0.
Minimum brent_min(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace valvest::brent
