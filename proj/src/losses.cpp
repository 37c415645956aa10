#include "sgscn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "sgscn/ops.hpp"

namespace sgscn {

void LossWeights::validate() const {
  for (double w : {ce, ss, cc}) {
    if (!std::isfinite(w) || w < 0.0) throw Error("loss weights must be finite and >= 0");
  }
}

template <typename T>
Var<T> cross_entropy_loss(const Var<T>& probs, const LabelMap& labels, bool normalize) {
  const auto& p = probs.value();
  require_rank3(p, "cross_entropy_loss");
  const std::size_t C = p.dim(0), H = p.dim(1), W = p.dim(2), n = H * W;
  if (labels.rows != H || labels.cols != W) {
    throw ShapeError("cross_entropy_loss: label map is " + std::to_string(labels.rows) + "x" +
                     std::to_string(labels.cols) + ", probabilities are " + std::to_string(H) +
                     "x" + std::to_string(W));
  }
  const T clamp = static_cast<T>(kLogClamp);
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= C) {
      throw Error("cross_entropy_loss: label " + std::to_string(label) + " at pixel " +
                  std::to_string(i) + " outside [0, " + std::to_string(C) + ")");
    }
    total -= std::log(std::max(p[label * n + i], clamp));
  }
  const T scale = normalize ? T{1} / static_cast<T>(n) : T{1};
  return make_op<T>("cross_entropy", Tensor<T>({1}, total * scale), {probs},
                    [labels, n, scale, clamp](Node<T>& self) {
                      auto& in = *self.inputs[0];
                      auto& g = in.grad_buffer();
                      const T up = self.grad[0] * scale;
                      for (std::size_t i = 0; i < n; ++i) {
                        const std::size_t at = labels[i] * n + i;
                        if (in.value[at] > clamp) g[at] -= up / in.value[at];
                      }
                    });
}

template <typename T>
Var<T> sparse_spatial_loss(const Var<T>& map, const LossOptions& options) {
  const auto& s = map.value();
  require_rank3(s, "sparse_spatial_loss");
  const std::size_t C = s.dim(0), H = s.dim(1), W = s.dim(2);
  if (H < 2 || W < 2) {
    std::cerr << "warning: sparse_spatial_loss on a " << H << "x" << W
              << " map has no 2-D neighbourhood; returning 0\n";
    return make_op<T>("sparse_spatial", Tensor<T>({1}), {map}, [](Node<T>&) {});
  }
  // Vertical pairs (r,c)-(r+1,c) for r < H-1, c < v_cols; horizontal pairs
  // (r,c)-(r,c+1) for r < h_rows, c < W-1.
  const bool strict = options.strict_index_bounds;
  const std::size_t row_end = H - 1, col_end = W - 1;
  const std::size_t v_cols = strict ? W - 1 : W;  // columns carrying vertical steps
  const std::size_t h_rows = strict ? H - 1 : H;  // rows carrying horizontal steps

  T total = 0;
  for (std::size_t c = 0; c < C; ++c) {
    const T* m = s.raw() + c * H * W;
    for (std::size_t r = 0; r < row_end; ++r) {
      for (std::size_t k = 0; k < v_cols; ++k) total += std::abs(m[(r + 1) * W + k] - m[r * W + k]);
    }
    for (std::size_t r = 0; r < h_rows; ++r) {
      for (std::size_t k = 0; k < col_end; ++k) total += std::abs(m[r * W + k + 1] - m[r * W + k]);
    }
  }
  const T scale = options.normalize ? T{1} / static_cast<T>(C * H * W) : T{1};
  return make_op<T>(
      "sparse_spatial", Tensor<T>({1}, total * scale), {map},
      [C, H, W, row_end, col_end, v_cols, h_rows, scale](Node<T>& self) {
        auto& in = *self.inputs[0];
        auto& g = in.grad_buffer();
        const T up = self.grad[0] * scale;
        auto sign = [](T v) { return v > T{0} ? T{1} : (v < T{0} ? T{-1} : T{0}); };
        for (std::size_t c = 0; c < C; ++c) {
          const T* m = in.value.raw() + c * H * W;
          T* gm = g.raw() + c * H * W;
          for (std::size_t r = 0; r < row_end; ++r) {
            for (std::size_t k = 0; k < v_cols; ++k) {
              const T sg = up * sign(m[(r + 1) * W + k] - m[r * W + k]);
              gm[(r + 1) * W + k] += sg;
              gm[r * W + k] -= sg;
            }
          }
          for (std::size_t r = 0; r < h_rows; ++r) {
            for (std::size_t k = 0; k < col_end; ++k) {
              const T sg = up * sign(m[r * W + k + 1] - m[r * W + k]);
              gm[r * W + k + 1] += sg;
              gm[r * W + k] -= sg;
            }
          }
        }
      });
}

namespace {

// Accumulated in double so float maps of a few hundred pixels per side keep
// their centroids exact to well below a pixel.
struct ChannelMoments {
  double mass;
  double mean_r;
  double mean_c;
  double spread;  // mass-weighted mean squared distance to (mean_r, mean_c)
};

template <typename T>
ChannelMoments channel_moments(const T* p, std::size_t H, std::size_t W) {
  double mass = 0, sr = 0, sc = 0;
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t k = 0; k < W; ++k) {
      const double v = p[r * W + k];
      mass += v;
      sr += static_cast<double>(r) * v;
      sc += static_cast<double>(k) * v;
    }
  }
  mass = std::max(mass, kLogClamp);
  const double mr = sr / mass, mc = sc / mass;
  double spread = 0;
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t k = 0; k < W; ++k) {
      const double dr = static_cast<double>(r) - mr, dc = static_cast<double>(k) - mc;
      spread += (dr * dr + dc * dc) * p[r * W + k];
    }
  }
  return {mass, mr, mc, spread / mass};
}

}  // namespace

template <typename T>
std::vector<std::array<double, 2>> cluster_centroids(const Tensor<T>& probs) {
  require_rank3(probs, "cluster_centroids");
  const std::size_t C = probs.dim(0), H = probs.dim(1), W = probs.dim(2);
  std::vector<std::array<double, 2>> out(C);
  for (std::size_t c = 0; c < C; ++c) {
    const auto m = channel_moments(probs.raw() + c * H * W, H, W);
    out[c] = {m.mean_r, m.mean_c};
  }
  return out;
}

template <typename T>
Var<T> context_consistency_loss(const Var<T>& probs, const LossOptions& options) {
  const auto& p = probs.value();
  require_rank3(p, "context_consistency_loss");
  const std::size_t C = p.dim(0), H = p.dim(1), W = p.dim(2);
  std::vector<ChannelMoments> moments(C);
  T total = 0;
  for (std::size_t c = 0; c < C; ++c) {
    moments[c] = channel_moments(p.raw() + c * H * W, H, W);
    total += static_cast<T>(moments[c].spread);
  }
  const T scale = options.normalize ? T{1} / static_cast<T>(H * H + W * W) : T{1};
  const bool stop_gradient = options.centroid_stop_gradient;
  return make_op<T>(
      "context_consistency", Tensor<T>({1}, total * scale), {probs},
      [C, H, W, scale, stop_gradient, moments = std::move(moments)](Node<T>& self) {
        auto& in = *self.inputs[0];
        auto& g = in.grad_buffer();
        const T up = self.grad[0] * scale;
        for (std::size_t c = 0; c < C; ++c) {
          const auto& m = moments[c];
          const T* pc = in.value.raw() + c * H * W;
          T* gc = g.raw() + c * H * W;
          // Fixed-centroid part: d/dp_j [sum_i p_i d_i / M] = (d_j - spread) / M.
          // Centroid part: dL/dmu = -2 sum_i p_i (x_i - mu) / M and
          // dmu/dp_j = (x_j - mu) / M.
          double dl_dmr = 0, dl_dmc = 0;
          if (!stop_gradient) {
            for (std::size_t r = 0; r < H; ++r) {
              for (std::size_t k = 0; k < W; ++k) {
                const double v = pc[r * W + k];
                dl_dmr -= 2.0 * v * (static_cast<double>(r) - m.mean_r);
                dl_dmc -= 2.0 * v * (static_cast<double>(k) - m.mean_c);
              }
            }
            dl_dmr /= m.mass;
            dl_dmc /= m.mass;
          }
          for (std::size_t r = 0; r < H; ++r) {
            for (std::size_t k = 0; k < W; ++k) {
              const double dr = static_cast<double>(r) - m.mean_r;
              const double dc = static_cast<double>(k) - m.mean_c;
              double d = (dr * dr + dc * dc - m.spread) / m.mass;
              if (!stop_gradient) d += (dl_dmr * dr + dl_dmc * dc) / m.mass;
              gc[r * W + k] += up * static_cast<T>(d);
            }
          }
        }
      });
}

template <typename T>
TotalLoss<T> total_loss(const Var<T>& logits, const LabelMap& labels, const LossWeights& weights,
                        const LossOptions& options) {
  weights.validate();
  const Var<T> probs = softmax_channels(logits);
  const Var<T> terms[3] = {cross_entropy_loss(probs, labels, options.normalize),
                           sparse_spatial_loss(probs, options),
                           context_consistency_loss(probs, options)};
  const T coeffs[3] = {static_cast<T>(weights.ce), static_cast<T>(weights.ss),
                       static_cast<T>(weights.cc)};
  TotalLoss<T> out;
  out.total = weighted_sum<T>(terms, coeffs);
  out.breakdown.ce = static_cast<double>(terms[0].item());
  out.breakdown.ss = static_cast<double>(terms[1].item());
  out.breakdown.cc = static_cast<double>(terms[2].item());
  out.breakdown.total = static_cast<double>(out.total.item());
  return out;
}

#define SGSCN_INSTANTIATE(T)                                                                 \
  template Var<T> cross_entropy_loss<T>(const Var<T>&, const LabelMap&, bool);               \
  template Var<T> sparse_spatial_loss<T>(const Var<T>&, const LossOptions&);                 \
  template std::vector<std::array<double, 2>> cluster_centroids<T>(const Tensor<T>&);        \
  template Var<T> context_consistency_loss<T>(const Var<T>&, const LossOptions&);            \
  template TotalLoss<T> total_loss<T>(const Var<T>&, const LabelMap&, const LossWeights&,    \
                                      const LossOptions&);

SGSCN_INSTANTIATE(float)
SGSCN_INSTANTIATE(double)
#undef SGSCN_INSTANTIATE

}  // namespace sgscn
