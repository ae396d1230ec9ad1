#include "valvest/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "valvest/errors.hpp"

namespace valvest::spectrum {

namespace {

struct Run {
  std::size_t begin;
  std::size_t length;
};

std::vector<Run> gap_free_runs(const Channel& values) {
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < values.size()) {
    if (!values[i]) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < values.size() && values[i]) ++i;
    runs.push_back({begin, i - begin});
  }
  return runs;
}

std::size_t floor_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p * 2 <= n) p *= 2;
  return p;
}

}  // namespace

Periodogram periodogram(const SampledSeries& series, std::string channel) {
  const auto runs = gap_free_runs(series.values);
  std::size_t usable = 0;
  std::size_t longest = 0;
  for (const auto& r : runs) {
    usable += r.length;
    longest = std::max(longest, r.length);
  }
  if (usable < kMinUsableSamples) {
    throw TooShort("periodogram needs at least " + std::to_string(kMinUsableSamples) +
                   " usable samples, got " + std::to_string(usable));
  }
  const std::size_t n = floor_pow2(std::min(longest, kMaxSegmentLength));
  if (n < 64) throw TooShort("no gap-free stretch of at least 64 samples");

  std::vector<double> window(n);
  double window_ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    window_ss += window[i] * window[i];
  }

  const double fs = 1.0 / series.dt_minutes();  // samples per minute
  const std::size_t half = n / 2;
  std::vector<double> raw(half, 0.0);  // bins 1..n/2
  Eigen::FFT<double> fft;
  std::vector<double> buf(n);
  std::vector<std::complex<double>> spec;
  std::size_t segments = 0;
  for (const auto& r : runs) {
    for (std::size_t off = 0; off + n <= r.length; off += n) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += *series.values[r.begin + off + i];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) buf[i] = (*series.values[r.begin + off + i] - mean) * window[i];
      fft.fwd(spec, buf);
      for (std::size_t k = 1; k <= half; ++k) {
        const double scale = (k == half) ? 1.0 : 2.0;
        raw[k - 1] += scale * std::norm(spec[k]) / (fs * window_ss);
      }
      ++segments;
    }
  }
  for (auto& v : raw) v /= static_cast<double>(segments);

  Periodogram pg;
  pg.channel = std::move(channel);
  pg.bin_width = fs / static_cast<double>(n);
  pg.segments = segments;
  pg.segment_length = n;
  pg.frequencies.resize(half);
  pg.power.resize(half);
  const std::size_t reach = kDaniellSpan / 2;
  for (std::size_t k = 0; k < half; ++k) {
    pg.frequencies[k] = static_cast<double>(k + 1) * pg.bin_width;
    const std::size_t lo = k >= reach ? k - reach : 0;
    const std::size_t hi = std::min(half - 1, k + reach);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += raw[j];
    pg.power[k] = s / static_cast<double>(hi - lo + 1);
  }
  return pg;
}

CycleEstimate dominant_cycle(const Periodogram& pg) {
  if (pg.power.empty()) throw std::invalid_argument("empty periodogram");
  const std::size_t skip = pg.power.size() > 2 ? 2 : 0;
  std::size_t best = skip;
  for (std::size_t k = skip + 1; k < pg.power.size(); ++k) {
    if (pg.power[k] > pg.power[best]) best = k;
  }
  std::vector<double> sorted = pg.power;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

  CycleEstimate c;
  c.frequency = pg.frequencies[best];
  c.cycle_minutes = 1.0 / c.frequency;
  c.peak_power = pg.power[best];
  c.prominence = median > 0.0 ? c.peak_power / median : 1.0;
  c.low_confidence = c.prominence < kLowConfidenceProminence;
  return c;
}

int optimal_sampling_time(double cycle_minutes) {
  if (!(cycle_minutes > 0.0)) throw std::invalid_argument("cycle time must be positive");
  const double half = std::floor(cycle_minutes / 2.0);
  return static_cast<int>(std::clamp(half, 1.0, 30.0));
}

int optimal_sampling_time(const CycleEstimate& c) { return optimal_sampling_time(c.cycle_minutes); }

}  // namespace valvest::spectrum
