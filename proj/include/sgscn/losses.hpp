#pragma once

#include <array>
#include <vector>

#include "sgscn/autodiff.hpp"
#include "sgscn/grid.hpp"

namespace sgscn {

/// Coefficients of the joint objective. (1,1,1) is the plain sum.
struct LossWeights {
  double ce = 1.0;
  double ss = 1.0;
  double cc = 1.0;

  void validate() const;
};

struct LossOptions {
  /// Divide CE by H*W, SS by C*H*W and CC by H^2+W^2. Off = raw sums.
  bool normalize = true;
  /// SS over (r,c) in [0,H-2]x[0,W-2] only, i.e. the last row's horizontal
  /// and last column's vertical differences are skipped. Off = every
  /// adjacent pair (anisotropic total variation).
  bool strict_index_bounds = false;
  /// Treat cluster centroids as constants when differentiating CC.
  bool centroid_stop_gradient = false;
};

struct LossBreakdown {
  double ce = 0;
  double ss = 0;
  double cc = 0;
  double total = 0;
};

inline constexpr double kLogClamp = 1e-12;

/// -(1/(H*W)) * sum over pixels of ln probs[label, r, c]; ln is clamped at
/// ln(1e-12). Labels are constants. probs must be [C,H,W] with unit channel
/// sums at every pixel.
template <typename T>
Var<T> cross_entropy_loss(const Var<T>& probs, const LabelMap& labels, bool normalize = true);

/// Sum of |vertical| + |horizontal| neighbour differences over all channels.
/// Maps with a single row or column give 0 (and a warning on stderr).
template <typename T>
Var<T> sparse_spatial_loss(const Var<T>& map, const LossOptions& options = {});

/// Spatial mean (row, col) of each channel's mass, 0-indexed pixel units.
template <typename T>
std::vector<std::array<double, 2>> cluster_centroids(const Tensor<T>& probs);

/// Per channel, the mass-weighted mean squared distance of pixels to that
/// channel's centroid; summed over channels.
template <typename T>
Var<T> context_consistency_loss(const Var<T>& probs, const LossOptions& options = {});

template <typename T>
struct TotalLoss {
  Var<T> total;
  LossBreakdown breakdown;
};

/// Softmaxes `logits` over channels once and evaluates all three terms on the
/// shared probability map.
template <typename T>
TotalLoss<T> total_loss(const Var<T>& logits, const LabelMap& labels, const LossWeights& weights,
                        const LossOptions& options = {});

}  // namespace sgscn
