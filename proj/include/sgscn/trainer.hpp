#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "sgscn/grid.hpp"
#include "sgscn/losses.hpp"
#include "sgscn/segnet.hpp"

namespace sgscn {

enum class StopReason { max_iters, label_floor, stable };

std::string_view to_string(StopReason reason);

struct TrainConfig {
  double lr = 0.1;
  double momentum = 0.9;
  int max_iters = 500;
  /// Stop once the label map uses this many distinct clusters or fewer.
  int min_labels = 3;
  /// Stop once the label map has not changed for this many iterations.
  int stability_window = 10;
  LossWeights weights;
  LossOptions loss;
  SegNetConfig net;  // input_channels is taken from the image
  std::uint64_t seed = 0;

  void validate() const;

  /// Dermoscopy defaults (lr 0.1).
  static TrainConfig derm();
  /// Ultrasound defaults (lr 0.05).
  static TrainConfig ultrasound();
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  LossBreakdown loss;
  std::size_t num_labels = 0;
  double changed_fraction = 1.0;  // 1.0 on the first iteration
};

struct TrainTrace {
  std::vector<IterationRecord> iterations;
  LabelMap final_labels;
  StopReason stop = StopReason::max_iters;

  friend bool operator==(const TrainTrace&, const TrainTrace&);
};

struct TrainResult {
  LabelMap labels;
  TrainTrace trace;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Per-pixel argmax over channels; ties go to the lowest channel index.
template <typename T>
LabelMap assign_labels(const Tensor<T>& response);

/// Self-supervised training on one image ([C,H,W], values in [0,1]).
/// Each iteration: forward -> argmax labels (constants) -> joint loss ->
/// backward -> SGD step. Deterministic for a given (image, config).
TrainResult train_single_image(const Tensor<float>& image, const TrainConfig& config);

/// Three runs from the same seed with weights (1,0,0), (1,1,0), (1,1,1).
std::array<TrainResult, 3> ablation_run(const Tensor<float>& image, const TrainConfig& config);

inline constexpr std::array<LossWeights, 3> kAblationWeights = {
    LossWeights{1, 0, 0}, LossWeights{1, 1, 0}, LossWeights{1, 1, 1}};
inline constexpr std::array<std::string_view, 3> kAblationNames = {"CE", "CE+SS", "CE+SS+CC"};

/// iteration,ce,ss,cc,total,num_labels,changed_fraction
void write_trace_csv(std::ostream& os, const TrainTrace& trace);

}  // namespace sgscn
