#pragma once

#include <cstdint>
#include <vector>

#include "sgscn/grid.hpp"
#include "sgscn/tensor.hpp"

namespace sgscn {

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0;
};

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt);

struct Match {
  std::int32_t cluster_id = 0;
  BinaryMask mask;
};

/// Cluster with the largest overlap with `gt`. Ties go to the smaller
/// cluster, then the smaller id. Throws on an empty gt or shape mismatch.
Match match_largest_overlap(const LabelMap& labels, const BinaryMask& gt);

/// 2|A∩B| / (|A|+|B|); 1 when both are empty.
double dsc(const BinaryMask& pred, const BinaryMask& gt);
/// Hammoude distance (|A∪B| - |A∩B|) / |A∪B|; 0 when both are empty.
double hammoude(const BinaryMask& pred, const BinaryMask& gt);
/// (fp + fn) / |gt|. Exceeds 1 for heavy over-segmentation. Throws on empty gt.
double xor_measure(const BinaryMask& pred, const BinaryMask& gt);

struct EvalReport {
  std::int32_t matched_cluster_id = 0;
  double dsc = 0, hm = 0, xor_ = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

EvalReport evaluate(const LabelMap& labels, const BinaryMask& gt);

struct MeanStd {
  double mean = 0, std = 0;
};

/// Population standard deviation; {0,0} for an empty sample.
MeanStd mean_std(const std::vector<double>& values);

}  // namespace sgscn
