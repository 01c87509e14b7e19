#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <vector>

#include "vrec/common.hpp"

namespace vrec {

struct KMeansResult {
  std::vector<int> assignment;
  Table centroids;
  int iterations = 0;
  double inertia = 0;  // sum of squared distances to the assigned centroid
};

namespace detail {

// Lloyd iterations from one k-means++ start. Points are rows; 1 <= k <= rows.
inline KMeansResult kmeans_once(const Table& points, int k, Rng& rng, int max_iterations) {
  const auto n = static_cast<int>(points.rows());
  KMeansResult res;
  res.centroids.resize(k, points.cols());

  std::uniform_int_distribution<int> first(0, n - 1);
  res.centroids.row(0) = points.row(first(rng));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::max());
  for (int c = 1; c < k; ++c) {
    double total = 0;
    for (int i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (points.row(i) - res.centroids.row(c - 1)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    int pick = 0;
    if (total > 0) {
      double x = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        x -= d2[static_cast<std::size_t>(pick)];
        if (x < 0) break;
      }
    }
    res.centroids.row(c) = points.row(pick);
  }

  res.assignment.assign(static_cast<std::size_t>(n), -1);
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        double d = (points.row(i) - res.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.assignment[static_cast<std::size_t>(i)] != best) {
        res.assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Table sums = Table::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      sums.row(res.assignment[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(res.assignment[static_cast<std::size_t>(i)])];
    }
    // empty clusters keep their previous centroid
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0) res.centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
  }
  res.inertia = 0;
  for (int i = 0; i < n; ++i) res.inertia += (points.row(i) - res.centroids.row(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
  return res;
}

}  // namespace detail

// Seeded k-means: `restarts` k-means++ starts, keeping the lowest inertia
// (first one wins ties).
inline KMeansResult kmeans(const Table& points, int k, std::uint64_t seed, int max_iterations = 100,
                           int restarts = 10) {
  if (k < 1) throw InvalidArgument("k-means needs k >= 1");
  if (restarts < 1) throw InvalidArgument("k-means needs at least one start");
  if (max_iterations < 1) throw InvalidArgument("k-means needs at least one iteration");
  if (points.rows() == 0) return {};
  k = std::min(k, static_cast<int>(points.rows()));
  Rng rng(seed);
  KMeansResult best;
  for (int r = 0; r < restarts; ++r) {
    KMeansResult cur = detail::kmeans_once(points, k, rng, max_iterations);
    if (r == 0 || cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

// Fraction of points whose cluster's majority label matches their own label.
inline double purity(const std::vector<int>& clusters, const std::vector<int>& labels) {
  if (clusters.size() != labels.size()) throw InvalidArgument("purity: size mismatch");
  if (clusters.empty()) return 0;
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][labels[i]];
  std::size_t hits = 0;
  for (const auto& [c, counts] : table) {
    int best = 0;
    for (const auto& [l, n] : counts) best = std::max(best, n);
    hits += static_cast<std::size_t>(best);
  }
  return static_cast<double>(hits) / static_cast<double>(clusters.size());
}

}  // namespace vrec
