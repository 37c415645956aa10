#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sgscn/grid.hpp"
#include "sgscn/tensor.hpp"

namespace sgscn {

enum class FeatureMode { rgb, rgb_xy };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

struct KMeansConfig {
  int k = 3;
  int max_iters = 100;
  /// Converged once no centroid moves further than this (Euclidean).
  double tol = 1e-6;
  std::uint64_t seed = 0;
  FeatureMode feature_mode = FeatureMode::rgb;

  /// k must lie in [1, num_points].
  void validate(std::size_t num_points) const;
};

/// Row-major point set, `count` rows of `dim` features.
struct PointSet {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  const double* row(std::size_t i) const { return values.data() + i * dim; }
};

struct KMeansResult {
  std::vector<std::int32_t> assignment;
  PointSet centroids;
  /// Inertia after every assignment step, initial assignment first.
  std::vector<double> inertia_history;
  int iterations = 0;
  bool converged = false;

  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

/// One row per pixel in raster order. rgb: channel values. rgb_xy: channel
/// values followed by row and column, each scaled to [0,1].
PointSet pixel_features(const Tensor<float>& image, FeatureMode mode);

/// k-means++ seeding (D^2 sampling).
PointSet kmeans_plus_plus(const PointSet& points, int k, std::uint64_t seed);

/// Lloyd iterations from the given centroids. Empty clusters are moved to
/// the point currently farthest from its centroid.
KMeansResult lloyd(const PointSet& points, PointSet initial, int max_iters, double tol);

double inertia(const PointSet& points, const PointSet& centroids,
               const std::vector<std::int32_t>& assignment);

KMeansResult kmeans_run(const Tensor<float>& image, const KMeansConfig& config);
LabelMap kmeans_segment(const Tensor<float>& image, const KMeansConfig& config);

}  // namespace sgscn
