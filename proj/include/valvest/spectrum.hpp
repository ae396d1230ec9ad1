#pragma once

#include <string>
#include <vector>

#include "valvest/timeseries.hpp"

namespace valvest::spectrum {

/// One-sided power spectral density (units of signal^2 per cycle/minute).
struct Periodogram {
  std::vector<double> frequencies;  ///< cycles per minute, ascending, DC excluded
  std::vector<double> power;
  std::string channel;
  double bin_width = 0.0;      ///< cycles per minute
  std::size_t segments = 0;    ///< number of averaged segments
  std::size_t segment_length = 0;
};

struct CycleEstimate {
  double cycle_minutes = 0.0;
  double frequency = 0.0;  ///< cycles per minute at the peak
  double peak_power = 0.0;
  double prominence = 0.0;  ///< peak power / median power
  bool low_confidence = false;
};

/// Series shorter than this (in usable samples) are rejected.
inline constexpr std::size_t kMinUsableSamples = 512;
/// Longest FFT segment; longer gap-free runs are split into several segments.
inline constexpr std::size_t kMaxSegmentLength = 4096;
/// Daniell smoothing span in bins.
inline constexpr std::size_t kDaniellSpan = 5;
/// Peaks with prominence below this are flagged low-confidence.
inline constexpr double kLowConfidenceProminence = 2.0;

/// Segment-averaged, Hann-tapered, Daniell-smoothed periodogram.
///
/// The segment length is the largest power of two not exceeding the longest
/// gap-free run (capped at kMaxSegmentLength). Every gap-free run contributes its
/// non-overlapping full-length segments; each segment is demeaned and tapered.
/// Throws TooShort when fewer than kMinUsableSamples samples are usable.
Periodogram periodogram(const SampledSeries& series, std::string channel = {});

/// Picks the highest bin, ignoring the two lowest frequencies. Ties go to the
/// lower frequency.
CycleEstimate dominant_cycle(const Periodogram& pg);

/// Half the cycle time, rounded down to whole minutes and clamped to [1, 30].
int optimal_sampling_time(const CycleEstimate& c);
int optimal_sampling_time(double cycle_minutes);

}  // namespace valvest::spectrum
