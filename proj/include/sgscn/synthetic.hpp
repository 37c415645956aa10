#pragma once

#include <cstdint>
#include <vector>

#include "sgscn/grid.hpp"
#include "sgscn/tensor.hpp"

namespace sgscn {

struct SyntheticSample {
  Tensor<float> image;  // [3,H,W]
  BinaryMask mask;
};

/// 32x32 three-channel image: a 12x12 square at a seeded offset with
/// intensity 0.9 on a 0.1 background, plus Gaussian noise of `sigma`.
SyntheticSample noisy_square(std::uint64_t seed, double sigma = 0.05, std::size_t size = 32,
                             std::size_t side = 12);

/// One rectangle or disc with a fuzzy (logistic) edge, random colours and
/// Gaussian noise `sigma`. The mask is the shape before blurring.
SyntheticSample random_shape(std::uint64_t seed, double sigma, std::size_t size = 32);

/// `count` random_shape samples; noise alternates between 0.05 and 0.1.
std::vector<SyntheticSample> synthetic_suite(std::size_t count = 20, std::uint64_t seed = 0,
                                             std::size_t size = 32);

}  // namespace sgscn
