#include "sgscn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace sgscn {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::label_floor: return "label_floor";
    case StopReason::stable: return "stable";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw Error("train config: lr must be > 0");
  if (!(momentum >= 0.0) || momentum >= 1.0) throw Error("train config: momentum must be in [0,1)");
  if (max_iters < 1) throw Error("train config: max_iters must be >= 1");
  if (min_labels < 2) throw Error("train config: min_labels must be >= 2");
  if (stability_window < 1) throw Error("train config: stability_window must be >= 1");
  weights.validate();
}

TrainConfig TrainConfig::derm() { return TrainConfig{}; }

TrainConfig TrainConfig::ultrasound() {
  TrainConfig c;
  c.lr = 0.05;
  return c;
}

bool operator==(const TrainTrace& a, const TrainTrace& b) {
  if (a.stop != b.stop || a.final_labels != b.final_labels ||
      a.iterations.size() != b.iterations.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    const auto& x = a.iterations[i];
    const auto& y = b.iterations[i];
    if (x.iteration != y.iteration || x.num_labels != y.num_labels ||
        x.changed_fraction != y.changed_fraction || x.loss.ce != y.loss.ce ||
        x.loss.ss != y.loss.ss || x.loss.cc != y.loss.cc || x.loss.total != y.loss.total) {
      return false;
    }
  }
  return true;
}

template <typename T>
LabelMap assign_labels(const Tensor<T>& response) {
  require_rank3(response, "assign_labels");
  const std::size_t C = response.dim(0), n = response.dim(1) * response.dim(2);
  LabelMap labels(response.dim(1), response.dim(2));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    T best_v = response[i];
    for (std::size_t c = 1; c < C; ++c) {
      if (response[c * n + i] > best_v) {
        best_v = response[c * n + i];
        best = c;
      }
    }
    labels[i] = static_cast<std::int32_t>(best);
  }
  return labels;
}

TrainResult train_single_image(const Tensor<float>& image, const TrainConfig& config) {
  config.validate();
  require_rank3(image, "train_single_image");
  if (!image.all_finite()) throw Error("train_single_image: image contains non-finite values");

  SegNetConfig net = config.net;
  net.input_channels = static_cast<int>(image.dim(0));
  ParamSet<float> params = init_params<float>(net, config.seed);
  const auto lr = static_cast<float>(config.lr);
  const auto momentum = static_cast<float>(config.momentum);

  TrainResult result;
  auto& trace = result.trace;
  LabelMap previous;
  int unchanged_run = 0;
  for (int it = 1; it <= config.max_iters; ++it) {
    const Var<float> response = forward(params, net, image);
    LabelMap labels = assign_labels(response.value());
    auto loss = total_loss(response, labels, config.weights, config.loss);

    const auto& b = loss.breakdown;
    if (!std::isfinite(b.total) || !std::isfinite(b.ce) || !std::isfinite(b.ss) ||
        !std::isfinite(b.cc)) {
      char msg[256];
      std::snprintf(msg, sizeof msg,
                    "train_single_image: non-finite loss at iteration %d (ce=%g ss=%g cc=%g "
                    "total=%g)",
                    it, b.ce, b.ss, b.cc, b.total);
      throw TrainingError(msg);
    }

    IterationRecord rec;
    rec.iteration = it;
    rec.loss = b;
    rec.num_labels = count_distinct(labels);
    if (it > 1) {
      std::size_t changed = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) changed += labels[i] != previous[i];
      rec.changed_fraction = static_cast<double>(changed) / static_cast<double>(labels.size());
      unchanged_run = changed == 0 ? unchanged_run + 1 : 0;
    }
    trace.iterations.push_back(rec);
    previous = std::move(labels);

    if (rec.num_labels <= static_cast<std::size_t>(config.min_labels)) {
      trace.stop = StopReason::label_floor;
      break;
    }
    if (unchanged_run >= config.stability_window) {
      trace.stop = StopReason::stable;
      break;
    }
    if (it == config.max_iters) {
      trace.stop = StopReason::max_iters;
      break;
    }

    loss.total.backward();
    sgd_step(params, lr, momentum);
    if (!params.all_finite()) {
      throw TrainingError("train_single_image: parameters became non-finite after iteration " +
                          std::to_string(it));
    }
  }
  trace.final_labels = previous;
  result.labels = std::move(previous);
  return result;
}

std::array<TrainResult, 3> ablation_run(const Tensor<float>& image, const TrainConfig& config) {
  std::array<TrainResult, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    TrainConfig c = config;
    c.weights = kAblationWeights[i];
    out[i] = train_single_image(image, c);
  }
  return out;
}

void write_trace_csv(std::ostream& os, const TrainTrace& trace) {
  os << "iteration,ce,ss,cc,total,num_labels,changed_fraction\n";
  char line[256];
  for (const auto& r : trace.iterations) {
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f,%.6f,%zu,%.6f\n", r.iteration, r.loss.ce,
                  r.loss.ss, r.loss.cc, r.loss.total, r.num_labels, r.changed_fraction);
    os << line;
  }
}

template LabelMap assign_labels<float>(const Tensor<float>&);
template LabelMap assign_labels<double>(const Tensor<double>&);

}  // namespace sgscn
