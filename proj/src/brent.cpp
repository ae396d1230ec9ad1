#include "valvest/brent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace valvest::brent {

Minimum brent_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("brent_min needs lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("brent_min needs a positive tolerance");

  // Boost stops on a relative tolerance 2^(1 - bits) |x|; choose bits so that the
  // bound holds as an absolute tolerance across the whole bracket.
  const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
  const int max_bits = std::numeric_limits<double>::digits / 2;
  const int bits = std::clamp(static_cast<int>(std::ceil(1.0 - std::log2(tol / scale))), 1, max_bits);

  int evaluations = 0;
  auto counted = [&](double x) {
    ++evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  std::uintmax_t max_iter = kMaxEvaluations - 1;  // one evaluation precedes the iterations
  const auto [x, fx] = boost::math::tools::brent_find_minima(counted, lo, hi, bits, max_iter);
  return {x, fx, evaluations};
}

}  // namespace valvest::brent
