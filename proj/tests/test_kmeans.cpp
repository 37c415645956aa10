#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sgscn/kmeans.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace sgscn;
using namespace testutil;
using namespace oracles;

namespace {

Tensor<float> random_image(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed) {
  return randu({c, h, w}, seed).cast<float>();
}

}  // namespace

TEST_CASE("k distinct colours give k pure clusters") {
  const float colours[4][3] = {{0.1f, 0.2f, 0.3f}, {0.9f, 0.1f, 0.1f}, {0.2f, 0.8f, 0.4f}, {1, 1, 1}};
  Tensor<float> img({3, 8, 8});
  std::mt19937_64 rng(3);
  std::vector<int> truth(64);
  for (std::size_t i = 0; i < 64; ++i) {
    truth[i] = static_cast<int>(i % 4);
    for (std::size_t c = 0; c < 3; ++c) img[c * 64 + i] = colours[truth[i]][c];
  }
  KMeansConfig cfg;
  cfg.k = 4;
  const auto r = kmeans_run(img, cfg);
  CHECK(r.inertia() < 1e-12);
  std::map<int, int> map;
  for (std::size_t i = 0; i < 64; ++i) {
    auto [it, fresh] = map.emplace(truth[i], r.assignment[i]);
    CHECK(it->second == r.assignment[i]);
  }
  std::set<int> used;
  for (auto [t, l] : map) used.insert(l);
  CHECK(used.size() == 4);
}

TEST_CASE("k = 1 puts every pixel in one cluster at the mean colour") {
  const auto img = random_image(3, 6, 7, 1);
  KMeansConfig cfg;
  cfg.k = 1;
  const auto r = kmeans_run(img, cfg);
  for (auto v : r.assignment) CHECK(v == 0);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0;
    for (std::size_t i = 0; i < 42; ++i) m += img[c * 42 + i];
    CHECK(r.centroids.values[c] == doctest::Approx(m / 42).epsilon(1e-12));
  }
}

TEST_CASE("converged result is a local optimum under centroid perturbation") {
  const auto img = random_image(3, 16, 16, 2);
  KMeansConfig cfg;
  cfg.k = 3;
  cfg.seed = 4;
  const auto r = kmeans_run(img, cfg);
  CHECK(r.converged);
  const auto pts = pixel_features(img, FeatureMode::rgb);
  auto nearest_inertia = [&](const PointSet& cents) {
    double s = 0;
    for (std::size_t i = 0; i < pts.count; ++i) {
      double best = INFINITY;
      for (std::size_t j = 0; j < cents.count; ++j) {
        double d = 0;
        for (std::size_t f = 0; f < pts.dim; ++f) d += std::pow(pts.row(i)[f] - cents.row(j)[f], 2);
        best = std::min(best, d);
      }
      s += best;
    }
    return s;
  };
  const double base = nearest_inertia(r.centroids);
  CHECK(std::abs(base - r.inertia()) < 1e-9);
  for (std::size_t j = 0; j < r.centroids.values.size(); ++j) {
    for (double delta : {-0.01, 0.01}) {
      auto moved = r.centroids;
      moved.values[j] += delta;
      CHECK(base <= nearest_inertia(moved));
    }
  }
}

TEST_CASE("matches an independent Lloyd oracle from identical centroids") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = pixel_features(random_image(3, 16, 16, 10 + seed),
                                    seed % 2 ? FeatureMode::rgb_xy : FeatureMode::rgb);
    const auto init = kmeans_plus_plus(pts, 3, seed);
    const auto r = lloyd(pts, init, 100, 1e-6);
    const auto o = oracle_lloyd(rows(pts), rows(init), 100, 1e-6);
    for (std::size_t i = 0; i < pts.count; ++i) CHECK(r.assignment[i] == o.labels[i]);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t f = 0; f < pts.dim; ++f)
        CHECK(std::abs(r.centroids.row(j)[f] - o.centroids[j][f]) < 1e-9);
  }
}

TEST_CASE("inertia never increases and labels partition the pixels") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    KMeansConfig cfg;
    cfg.k = 2 + static_cast<int>(seed % 5);
    cfg.seed = seed;
    const auto r = kmeans_run(random_image(3, 12, 12, 100 + seed), cfg);
    for (std::size_t t = 1; t < r.inertia_history.size(); ++t) {
      CHECK(r.inertia_history[t] <= r.inertia_history[t - 1] + 1e-12);
    }
    CHECK(r.assignment.size() == 144);
    for (auto v : r.assignment) {
      CHECK(v >= 0);
      CHECK(v < cfg.k);
    }
  }
}

TEST_CASE("empty clusters are reseeded from the farthest point") {
  PointSet pts{6, 1, {0.0, 0.1, 0.2, 5.0, 5.1, 9.0}};
  PointSet init{3, 1, {0.1, 5.0, 100.0}};  // the third centroid attracts nothing
  const auto r = lloyd(pts, init, 50, 1e-9);
  std::set<int> used(r.assignment.begin(), r.assignment.end());
  CHECK(used.size() == 3);
  CHECK(r.assignment[5] == 2);
  for (std::size_t t = 1; t < r.inertia_history.size(); ++t) {
    CHECK(r.inertia_history[t] <= r.inertia_history[t - 1]);
  }
  CHECK(r.inertia() == doctest::Approx(0.02 + 0.005));
}

TEST_CASE("configuration errors and determinism") {
  const auto img = random_image(3, 4, 4, 5);
  KMeansConfig cfg;
  cfg.k = 17;
  CHECK_THROWS_AS(kmeans_segment(img, cfg), Error);
  cfg.k = 0;
  CHECK_THROWS_AS(kmeans_segment(img, cfg), Error);
  cfg.k = 16;
  CHECK(count_distinct(kmeans_segment(img, cfg)) == 16);
  cfg.k = 3;
  cfg.seed = 8;
  CHECK(kmeans_segment(img, cfg) == kmeans_segment(img, cfg));
  CHECK_THROWS_AS(parse_feature_mode("hsv"), Error);
  CHECK(parse_feature_mode("rgb_xy") == FeatureMode::rgb_xy);
}

TEST_CASE("rgb_xy features append coordinates scaled to [0,1]") {
  const auto img = random_image(3, 5, 9, 6);
  const auto p = pixel_features(img, FeatureMode::rgb_xy);
  CHECK(p.dim == 5);
  CHECK(p.row(0)[3] == 0.0);
  CHECK(p.row(0)[4] == 0.0);
  CHECK(p.row(44)[3] == 1.0);
  CHECK(p.row(44)[4] == 1.0);
  CHECK(p.row(9 + 4)[3] == doctest::Approx(0.25));
  CHECK(p.row(9 + 4)[4] == doctest::Approx(0.5));
  CHECK(p.row(13)[1] == img[45 + 13]);
}
