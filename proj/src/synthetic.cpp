#include "sgscn/synthetic.hpp"

#include <cmath>
#include <random>

namespace sgscn {

SyntheticSample noisy_square(std::uint64_t seed, double sigma, std::size_t size,
                             std::size_t side) {
  if (side + 4 > size) throw Error("noisy_square: square does not fit with a 2-pixel margin");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> offset(2, size - side - 2);
  const std::size_t r0 = offset(rng), c0 = offset(rng);
  std::normal_distribution<double> noise(0.0, sigma);
  SyntheticSample s{Tensor<float>({3, size, size}), BinaryMask(size, size)};
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t k = 0; k < size; ++k) {
      s.mask(r, k) = r >= r0 && r < r0 + side && k >= c0 && k < c0 + side;
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t k = 0; k < size; ++k) {
        s.image.at(c, r, k) = static_cast<float>((s.mask(r, k) ? 0.9 : 0.1) + noise(rng));
      }
    }
  }
  return s;
}

SyntheticSample random_shape(std::uint64_t seed, double sigma, std::size_t size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double n = static_cast<double>(size);
  const bool disc = u(rng) < 0.5;
  const double cy = n * (0.35 + 0.3 * u(rng)), cx = n * (0.35 + 0.3 * u(rng));
  const double ry = n * (0.15 + 0.12 * u(rng)), rx = disc ? ry : n * (0.15 + 0.12 * u(rng));
  const double softness = 0.5 + u(rng);

  double fg[3], bg[3];
  const double base_fg = 0.55 + 0.35 * u(rng), base_bg = 0.05 + 0.3 * u(rng);
  for (int c = 0; c < 3; ++c) {
    fg[c] = base_fg + 0.1 * (u(rng) - 0.5);
    bg[c] = base_bg + 0.1 * (u(rng) - 0.5);
  }

  std::normal_distribution<double> noise(0.0, sigma);
  SyntheticSample s{Tensor<float>({3, size, size}), BinaryMask(size, size)};
  std::vector<double> alpha(size * size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t k = 0; k < size; ++k) {
      const double y = static_cast<double>(r) + 0.5 - cy, x = static_cast<double>(k) + 0.5 - cx;
      // Signed distance to the boundary, positive inside.
      const double d = disc ? ry - std::hypot(x, y) : std::min(ry - std::abs(y), rx - std::abs(x));
      alpha[r * size + k] = 1.0 / (1.0 + std::exp(-d / softness));
      s.mask(r, k) = d >= 0;
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < size * size; ++i) {
      s.image[c * size * size + i] =
          static_cast<float>(bg[c] + (fg[c] - bg[c]) * alpha[i] + noise(rng));
    }
  }
  return s;
}

std::vector<SyntheticSample> synthetic_suite(std::size_t count, std::uint64_t seed,
                                             std::size_t size) {
  std::vector<SyntheticSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(random_shape(seed * 1000003 + i, i % 2 == 0 ? 0.05 : 0.1, size));
  }
  return out;
}

}  // namespace sgscn
