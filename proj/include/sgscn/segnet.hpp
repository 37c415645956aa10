#pragma once

#include <cstdint>
#include <filesystem>

#include "sgscn/optim.hpp"

namespace sgscn {

/// Shape of the segmentation network: `num_layers` blocks of
/// conv3x3 -> ReLU -> channel_norm, each `filters` wide. The width of the
/// last block is the maximum number of clusters the network can express.
struct SegNetConfig {
  int num_layers = 3;
  int filters = 100;
  int input_channels = 3;
  double eps_norm = 1e-5;

  void validate() const;
};

/// Kaiming-uniform weights (bound sqrt(6 / fan_in), fan_in = Ci*9), zero
/// biases. Parameter order is w0, b0, w1, b1, ... Values are drawn in double
/// and narrowed, so float and double networks built from one seed agree.
template <typename T>
ParamSet<T> init_params(const SegNetConfig& config, std::uint64_t seed);

/// Runs the network on a [C,H,W] image and returns the normalised response
/// map [filters,H,W]. The trailing channel_norm of the last block is the
/// zero-mean / unit-variance normalisation the labels are read from.
template <typename T>
Var<T> forward(const ParamSet<T>& params, const SegNetConfig& config, const Tensor<T>& image);

/// Same as above but with the image already on the tape (for input grads).
template <typename T>
Var<T> forward(const ParamSet<T>& params, const SegNetConfig& config, const Var<T>& image);

// Checkpoint file: "SGSN" | u32 version | u32 layers | per layer u32 x4
// (out, in, 3, 3) | per layer: weights then biases as f32. Little-endian.
// Momentum buffers are not stored.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ParamSet<float>& params);
ParamSet<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace sgscn
