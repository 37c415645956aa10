#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgscn/dataset.hpp"
#include "sgscn/image_io.hpp"
#include "sgscn/kmeans.hpp"
#include "sgscn/metrics.hpp"
#include "sgscn/trainer.hpp"

namespace sgscn {

inline constexpr const char* kToolVersion = "1.0.0";

enum class Method { sgscn, kmeans };
std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct RunOptions {
  Method method = Method::sgscn;
  DatasetLayout data;
  std::optional<ImageSize> resize = ImageSize{128, 128};
  std::filesystem::path out_dir = "out";
  std::string profile = "derm";  // derm | us
  int k = 3;
  FeatureMode feature_mode = FeatureMode::rgb;
  std::optional<LossWeights> weights;
  std::optional<int> max_iters;
  std::optional<int> min_labels;
  std::uint64_t seed = 0;
  int threads = 1;
  bool verbose = true;
};

/// Profile defaults with command-line overrides applied.
TrainConfig resolve_train_config(const RunOptions& options);
KMeansConfig resolve_kmeans_config(const RunOptions& options);

/// "1,1,0" -> {1,1,0}.
LossWeights parse_weights(std::string_view text);

std::uint64_t fnv1a64(std::string_view text);
/// Global seed XOR FNV-1a of the image file name.
std::uint64_t image_seed(std::uint64_t global_seed, std::string_view name);

struct ImageOutcome {
  std::string name;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::optional<EvalReport> report;
  double seconds = 0;
};

/// Segments every image, writing labels/<stem>.png, trace/<stem>.csv,
/// metrics.csv and summary.csv (when masks exist) and manifest.json under
/// out_dir. Returns 0 when every image succeeded.
int run_segment(const RunOptions& options);

/// The three loss-weight settings per image against ground truth; writes
/// ablation.csv (setting,dsc,hm,xor means) and ablation_images.csv.
int run_ablation(const RunOptions& options);

/// metrics.csv body for the given outcomes (sorted by name).
void write_metrics_csv(std::ostream& os, const std::vector<ImageOutcome>& outcomes);

}  // namespace sgscn
