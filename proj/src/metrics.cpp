#include "sgscn/metrics.hpp"

#include <cmath>
#include <map>

namespace sgscn {

namespace {

void require_same_shape(const auto& a, const auto& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shapes differ (" + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols) + ")");
  }
}

std::size_t count_set(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.values) n += v != 0;
  return n;
}

}  // namespace

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "confusion");
  Confusion c;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool p = pred[i] != 0, g = gt[i] != 0;
    c.tp += p && g;
    c.fp += p && !g;
    c.fn += !p && g;
  }
  return c;
}

Match match_largest_overlap(const LabelMap& labels, const BinaryMask& gt) {
  require_same_shape(labels, gt, "match_largest_overlap");
  if (count_set(gt) == 0) throw Error("match_largest_overlap: ground-truth mask is empty");
  struct Stats {
    std::size_t overlap = 0, size = 0;
  };
  std::map<std::int32_t, Stats> per_cluster;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& s = per_cluster[labels[i]];
    ++s.size;
    s.overlap += gt[i] != 0;
  }
  std::int32_t best = 0;
  Stats best_s;
  bool first = true;
  for (const auto& [id, s] : per_cluster) {
    if (first || s.overlap > best_s.overlap ||
        (s.overlap == best_s.overlap && s.size < best_s.size)) {
      best = id;
      best_s = s;
      first = false;
    }
  }
  Match m{best, BinaryMask(labels.rows, labels.cols)};
  for (std::size_t i = 0; i < labels.size(); ++i) m.mask[i] = labels[i] == best;
  return m;
}

double dsc(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = confusion(pred, gt);
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double hammoude(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = confusion(pred, gt);
  const std::size_t uni = c.tp + c.fp + c.fn;
  return uni == 0 ? 0.0 : static_cast<double>(c.fp + c.fn) / static_cast<double>(uni);
}

double xor_measure(const BinaryMask& pred, const BinaryMask& gt) {
  const auto c = confusion(pred, gt);
  const std::size_t g = c.tp + c.fn;
  if (g == 0) throw Error("xor_measure: ground-truth mask is empty");
  return static_cast<double>(c.fp + c.fn) / static_cast<double>(g);
}

EvalReport evaluate(const LabelMap& labels, const BinaryMask& gt) {
  const auto m = match_largest_overlap(labels, gt);
  const auto c = confusion(m.mask, gt);
  EvalReport r;
  r.matched_cluster_id = m.cluster_id;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.dsc = dsc(m.mask, gt);
  r.hm = hammoude(m.mask, gt);
  r.xor_ = xor_measure(m.mask, gt);
  return r;
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

}  // namespace sgscn
