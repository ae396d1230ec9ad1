#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace valvest::kmeans {

struct Clustering {
  std::vector<double> centers;          ///< ascending
  std::vector<std::size_t> assignment;  ///< value index -> center index
  double sse = 0.0;                     ///< within-cluster sum of squares
};

inline constexpr int kRestarts = 20;

/// k-means on scalars: k-means++ seeding, Lloyd iterations, then single-point
/// moves until no transfer lowers the SSE. The best of kRestarts runs is kept.
/// Deterministic for a given seed. Throws KTooLarge when k exceeds the number of
/// distinct values, std::invalid_argument when k is zero.
Clustering kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed);

/// Within-cluster SSE of an assignment, with centers recomputed as cluster means.
double within_sse(std::span<const double> values, std::span<const std::size_t> assignment, std::size_t k);

}  // namespace valvest::kmeans
