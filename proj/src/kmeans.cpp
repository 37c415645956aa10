#include "sgscn/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sgscn/kernels.hpp"

namespace sgscn {

std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::rgb ? "rgb" : "rgb_xy";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "rgb") return FeatureMode::rgb;
  if (text == "rgb_xy") return FeatureMode::rgb_xy;
  throw Error("kmeans: unknown feature mode '" + std::string(text) + "' (rgb|rgb_xy)");
}

void KMeansConfig::validate(std::size_t num_points) const {
  if (k < 1) throw Error("kmeans: k must be >= 1, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > num_points) {
    throw Error("kmeans: k=" + std::to_string(k) + " exceeds the " + std::to_string(num_points) +
                " available pixels");
  }
  if (max_iters < 0) throw Error("kmeans: max_iters must be >= 0");
  if (!(tol >= 0.0)) throw Error("kmeans: tol must be >= 0");
}

PointSet pixel_features(const Tensor<float>& image, FeatureMode mode) {
  require_rank3(image, "pixel_features");
  const std::size_t C = image.dim(0), H = image.dim(1), W = image.dim(2), n = H * W;
  PointSet p;
  p.count = n;
  p.dim = C + (mode == FeatureMode::rgb_xy ? 2 : 0);
  p.values.resize(n * p.dim);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = p.values.data() + i * p.dim;
    for (std::size_t c = 0; c < C; ++c) row[c] = image[c * n + i];
    if (mode == FeatureMode::rgb_xy) {
      row[C] = H > 1 ? static_cast<double>(i / W) / static_cast<double>(H - 1) : 0.0;
      row[C + 1] = W > 1 ? static_cast<double>(i % W) / static_cast<double>(W - 1) : 0.0;
    }
  }
  return p;
}

namespace {

double sq_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0;
  for (std::size_t f = 0; f < dim; ++f) s += (a[f] - b[f]) * (a[f] - b[f]);
  return s;
}

}  // namespace

PointSet kmeans_plus_plus(const PointSet& points, int k, std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > points.count) {
    throw Error("kmeans++: k=" + std::to_string(k) + " invalid for " +
                std::to_string(points.count) + " points");
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = points.count, dim = points.dim;
  PointSet centroids{static_cast<std::size_t>(k), dim, {}};
  centroids.values.reserve(centroids.count * dim);
  auto take = [&](std::size_t i) {
    centroids.values.insert(centroids.values.end(), points.row(i), points.row(i) + dim);
  };

  std::uniform_int_distribution<std::size_t> uniform(0, n - 1);
  take(uniform(rng));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_distance(points.row(i), centroids.row(0), dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int j = 1; j < k; ++j) {
    double total = 0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0) {
      const double target = unit(rng) * total;
      double acc = 0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform(rng);
    }
    take(pick);
    const double* c = centroids.row(static_cast<std::size_t>(j));
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_distance(points.row(i), c, dim));
  }
  return centroids;
}

double inertia(const PointSet& points, const PointSet& centroids,
               const std::vector<std::int32_t>& assignment) {
  double s = 0;
  for (std::size_t i = 0; i < points.count; ++i) {
    s += sq_distance(points.row(i), centroids.row(static_cast<std::size_t>(assignment[i])),
                     points.dim);
  }
  return s;
}

KMeansResult lloyd(const PointSet& points, PointSet initial, int max_iters, double tol) {
  if (initial.dim != points.dim || initial.count == 0) {
    throw ShapeError("lloyd: initial centroids have dim " + std::to_string(initial.dim) +
                     ", points have dim " + std::to_string(points.dim));
  }
  const std::size_t n = points.count, dim = points.dim, k = initial.count;
  KMeansResult r;
  r.centroids = std::move(initial);
  r.assignment.assign(n, 0);
  std::vector<double> dist(n);

  auto assign = [&] {
    kernels::omp::assign_nearest(n, dim, points.values.data(), k, r.centroids.values.data(),
                                 r.assignment.data(), dist.data());
    double s = 0;
    for (double v : dist) s += v;
    r.inertia_history.push_back(s);
  };

  assign();
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  for (int it = 1; it <= max_iters; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(r.assignment[i]);
      ++counts[j];
      for (std::size_t f = 0; f < dim; ++f) sums[j * dim + f] += points.row(i)[f];
    }
    std::vector<char> used(n, 0);
    double movement = 0;
    for (std::size_t j = 0; j < k; ++j) {
      double* c = r.centroids.values.data() + j * dim;
      std::vector<double> next(dim);
      if (counts[j] > 0) {
        for (std::size_t f = 0; f < dim; ++f) {
          next[f] = sums[j * dim + f] / static_cast<double>(counts[j]);
        }
      } else {
        std::size_t far = 0;
        double far_d = -1;
        for (std::size_t i = 0; i < n; ++i) {
          if (!used[i] && dist[i] > far_d) {
            far_d = dist[i];
            far = i;
          }
        }
        used[far] = 1;
        std::copy(points.row(far), points.row(far) + dim, next.begin());
      }
      movement = std::max(movement, std::sqrt(sq_distance(c, next.data(), dim)));
      std::copy(next.begin(), next.end(), c);
    }
    assign();
    r.iterations = it;
    if (movement < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

KMeansResult kmeans_run(const Tensor<float>& image, const KMeansConfig& config) {
  const PointSet points = pixel_features(image, config.feature_mode);
  config.validate(points.count);
  return lloyd(points, kmeans_plus_plus(points, config.k, config.seed), config.max_iters,
               config.tol);
}

LabelMap kmeans_segment(const Tensor<float>& image, const KMeansConfig& config) {
  const auto r = kmeans_run(image, config);
  LabelMap labels(image.dim(1), image.dim(2));
  labels.values = r.assignment;
  return labels;
}

}  // namespace sgscn
