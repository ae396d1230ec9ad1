#include "valvest/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "valvest/errors.hpp"

namespace valvest::kmeans {

namespace {

struct Run {
  std::vector<double> centers;
  std::vector<std::size_t> assignment;
  double sse = std::numeric_limits<double>::infinity();
};

std::size_t nearest(double v, const std::vector<double>& centers) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = (v - centers[c]) * (v - centers[c]);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

std::vector<double> kmeanspp_seeds(std::span<const double> v, std::size_t k, std::mt19937_64& rng) {
  std::vector<double> centers;
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  centers.push_back(v[pick(rng)]);
  std::vector<double> d2(v.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double c = centers[nearest(v[i], centers)];
      d2[i] = (v[i] - c) * (v[i] - c);
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = v.size() - 1;
      for (std::size_t i = 0; i < v.size(); ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
      if (d2[chosen] == 0.0) {
        chosen = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
      }
    }
    centers.push_back(v[chosen]);
  }
  return centers;
}

void recompute_centers(std::span<const double> v, const std::vector<std::size_t>& a, std::vector<double>& centers,
                       std::vector<std::size_t>& counts) {
  const std::size_t k = centers.size();
  std::vector<double> sum(k, 0.0);
  counts.assign(k, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum[a[i]] += v[i];
    ++counts[a[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) centers[c] = sum[c] / static_cast<double>(counts[c]);
  }
}

Run lloyd(std::span<const double> v, std::vector<double> centers) {
  const std::size_t n = v.size();
  const std::size_t k = centers.size();
  Run run;
  run.assignment.assign(n, 0);
  std::vector<std::size_t> counts;
  for (int it = 0; it < 1000; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(v[i], centers);
      if (c != run.assignment[i]) {
        run.assignment[i] = c;
        changed = true;
      }
    }
    recompute_centers(v, run.assignment, centers, counts);
    // An emptied cluster takes over the point farthest from its center.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[run.assignment[i]] < 2) continue;
        const double d = std::abs(v[i] - centers[run.assignment[i]]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      run.assignment[far] = c;
      recompute_centers(v, run.assignment, centers, counts);
      changed = true;
    }
    if (!changed) break;
  }

  // Single-point transfers (Hartigan) reach local optima that Lloyd can miss.
  bool moved = true;
  for (int sweep = 0; moved && sweep < 1000; ++sweep) {
    moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t from = run.assignment[i];
      if (counts[from] < 2) continue;
      const double nf = static_cast<double>(counts[from]);
      const double loss = nf / (nf - 1.0) * (v[i] - centers[from]) * (v[i] - centers[from]);
      std::size_t best = from;
      double best_gain = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if (c == from) continue;
        const double nc = static_cast<double>(counts[c]);
        const double add = nc / (nc + 1.0) * (v[i] - centers[c]) * (v[i] - centers[c]);
        const double gain = loss - add;
        if (gain > best_gain * (1.0 + 1e-12) + 1e-300) {
          best_gain = gain;
          best = c;
        }
      }
      if (best != from && best_gain > 1e-14 * loss) {
        run.assignment[i] = best;
        recompute_centers(v, run.assignment, centers, counts);
        moved = true;
      }
    }
  }
  run.centers = std::move(centers);
  run.sse = within_sse(v, run.assignment, k);
  return run;
}

}  // namespace

double within_sse(std::span<const double> values, std::span<const std::size_t> assignment, std::size_t k) {
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[assignment[i]] += values[i];
    ++count[assignment[i]];
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t c = assignment[i];
    const double d = values[i] - sum[c] / static_cast<double>(count[c]);
    sse += d * d;
  }
  return sse;
}

Clustering kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("k-means needs k >= 1");
  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (k > distinct.size()) {
    throw KTooLarge("k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct.size()) +
                    " distinct values");
  }

  std::mt19937_64 rng(seed);
  Run best;
  for (int r = 0; r < kRestarts; ++r) {
    Run run = lloyd(values, kmeanspp_seeds(values, k, rng));
    if (run.sse < best.sse) best = std::move(run);
  }

  // Relabel so centers ascend.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best.centers[a] < best.centers[b]; });
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;
  Clustering out;
  for (std::size_t r = 0; r < k; ++r) out.centers.push_back(best.centers[order[r]]);
  for (auto a : best.assignment) out.assignment.push_back(rank[a]);
  out.sse = best.sse;
  return out;
}

}  // namespace valvest::kmeans
