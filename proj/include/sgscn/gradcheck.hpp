#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgscn/autodiff.hpp"

namespace sgscn {

template <typename T>
struct GradCheckResult {
  T max_rel_error = 0;
  std::size_t worst_index = 0;
  T autodiff_at_worst = 0;
  T numeric_at_worst = 0;
  std::size_t checked = 0;
  /// Coordinates re-probed with refine_h after a kink at h.
  std::size_t refined = 0;
  /// Coordinates with a kink even at the refined step.
  std::size_t skipped = 0;
};

template <typename T>
using KinkPattern = std::function<std::vector<std::uint8_t>(const Tensor<T>&)>;

/// Compares the autodiff gradient of a scalar function at `x` with central
/// differences (f(x+h e_i) - f(x-h e_i)) / 2h.
/// Per-coordinate error is |a - n| / max(|a|, |n|, abs_floor); the floor
/// keeps coordinates whose true gradient is zero from reporting noise.
/// `indices` restricts the check to a subset (empty: all coordinates).
/// When `pattern` is given, a coordinate is skipped if either probe yields a
/// different pattern than `x` (a ReLU or |.| kink lies inside [x-h, x+h]),
/// unless probing again with `refine_h` (> 0) stays on one side of it.
template <typename T>
GradCheckResult<T> grad_check(const std::function<Var<T>(const Var<T>&)>& f, const Tensor<T>& x,
                              T h, T abs_floor = T(1e-6),
                              std::span<const std::size_t> indices = {},
                              const KinkPattern<T>& pattern = {}, T refine_h = T(0));

struct BatteryCase {
  std::string name;
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t refined = 0;
  std::size_t skipped = 0;
  std::uint64_t worst_seed = 0;
};

struct BatteryReport {
  std::vector<BatteryCase> cases;
  double seconds = 0;

  bool passed(double tolerance) const;
};

/// Float64 central-difference checks of conv2d, channel_norm,
/// softmax_channels, the three loss terms and the full 3-layer network plus
/// total loss on a 1x8x8 input, over `seeds` random instances each.
BatteryReport run_gradcheck_battery(int seeds = 20, double h = 1e-4,
                                    std::uint64_t base_seed = 0);

}  // namespace sgscn
