#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "sgscn/gradcheck.hpp"
#include "sgscn/harness.hpp"
#include "sgscn/synthetic.hpp"

namespace {

using namespace sgscn;

struct DatasetFlags {
  std::string images, masks, out = "out", resize, mask_suffix;
  bool no_resize = false;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f, RunOptions& o, std::string& weights) {
  cmd->add_option("--images", f.images, "Image directory (scanned recursively)")->required();
  cmd->add_option("--masks", f.masks, "Ground-truth mask directory");
  cmd->add_option("--mask-suffix", f.mask_suffix, "Mask stem suffix, e.g. _lesion");
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--profile", o.profile, "Training profile")
      ->check(CLI::IsMember({"derm", "us"}))
      ->capture_default_str();
  cmd->add_option("--weights", weights, "Loss weights CE,SS,CC");
  cmd->add_option("--max-iters", o.max_iters, "Iteration cap");
  cmd->add_option("--min-labels", o.min_labels, "Stop at this many labels or fewer");
  cmd->add_option("--seed", o.seed, "Global seed")->capture_default_str();
  auto* resize = cmd->add_option("--resize", f.resize, "Resize to WxH (default 128x128)");
  cmd->add_flag("--no-resize", f.no_resize, "Keep full resolution")->excludes(resize);
  cmd->add_option("--threads", o.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("!--quiet", o.verbose, "Suppress progress output");
}

void apply(const DatasetFlags& f, const std::string& weights, RunOptions& o) {
  o.data.images_dir = f.images;
  if (!f.masks.empty()) o.data.masks_dir = f.masks;
  o.data.mask_suffix = f.mask_suffix;
  o.out_dir = f.out;
  if (f.no_resize) {
    o.resize.reset();
  } else if (!f.resize.empty()) {
    o.resize = parse_size(f.resize);
  }
  if (!weights.empty()) o.weights = parse_weights(weights);
}

int gradcheck(int seeds, double tolerance) {
  const auto report = run_gradcheck_battery(seeds);
  std::printf("%-34s %14s %8s %8s %8s %6s\n", "case", "max_rel_error", "checked", "refined",
              "skipped", "seed");
  for (const auto& c : report.cases) {
    std::printf("%-34s %14.3e %8zu %8zu %8zu %6llu %s\n", c.name.c_str(), c.max_rel_error,
                c.checked, c.refined, c.skipped, static_cast<unsigned long long>(c.worst_seed),
                c.checked > 0 && c.max_rel_error < tolerance ? "ok" : "FAIL");
  }
  std::printf("%d seeds in %.1f s\n", seeds, report.seconds);
  return report.passed(tolerance) ? 0 : 1;
}

int synth(const std::string& out, const std::string& kind, int count, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out) / "images");
  fs::create_directories(fs::path(out) / "masks");
  for (int i = 0; i < count; ++i) {
    const auto s = kind == "square"
                       ? noisy_square(seed + static_cast<std::uint64_t>(i))
                       : random_shape(seed * 1000003 + static_cast<std::uint64_t>(i),
                                      i % 2 == 0 ? 0.05 : 0.1);
    char name[32];
    std::snprintf(name, sizeof name, "%s_%03d.png", kind.c_str(), i);
    write_image_png(fs::path(out) / "images" / name, s.image);
    write_mask_png(fs::path(out) / "masks" / name, s.mask);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised spatially guided clustering segmentation"};
  app.set_version_flag("--version", std::string(sgscn::kToolVersion));
  app.require_subcommand(1);

  RunOptions seg_opts;
  DatasetFlags seg_flags;
  std::string seg_weights, method = "sgscn", features = "rgb";
  auto* segment = app.add_subcommand("segment", "Segment every image in a directory");
  segment->add_option("--method", method, "Segmentation method")
      ->check(CLI::IsMember({"sgscn", "kmeans"}))
      ->capture_default_str();
  segment->add_option("--k", seg_opts.k, "Clusters for k-means")->capture_default_str();
  segment->add_option("--features", features, "k-means features")
      ->check(CLI::IsMember({"rgb", "rgb_xy"}))
      ->capture_default_str();
  add_dataset_flags(segment, seg_flags, seg_opts, seg_weights);

  RunOptions abl_opts;
  DatasetFlags abl_flags;
  std::string abl_weights;
  auto* ablate = app.add_subcommand("ablate", "Compare CE, CE+SS and CE+SS+CC against ground truth");
  add_dataset_flags(ablate, abl_flags, abl_opts, abl_weights);

  int gc_seeds = 20;
  double gc_tol = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
  gc->add_option("--seeds", gc_seeds, "Random instances per op")->capture_default_str();
  gc->add_option("--tolerance", gc_tol, "Maximum relative error")->capture_default_str();

  std::string synth_out = "synthetic", synth_kind = "shapes";
  int synth_count = 20;
  std::uint64_t synth_seed = 0;
  auto* syn = app.add_subcommand("synth", "Write a synthetic image/mask dataset");
  syn->add_option("--out", synth_out, "Output directory")->capture_default_str();
  syn->add_option("--kind", synth_kind, "square or shapes")
      ->check(CLI::IsMember({"square", "shapes"}))
      ->capture_default_str();
  syn->add_option("--count", synth_count, "Number of images")->capture_default_str();
  syn->add_option("--seed", synth_seed, "Seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*segment) {
      apply(seg_flags, seg_weights, seg_opts);
      seg_opts.method = parse_method(method);
      seg_opts.feature_mode = parse_feature_mode(features);
      return run_segment(seg_opts);
    }
    if (*ablate) {
      apply(abl_flags, abl_weights, abl_opts);
      return run_ablation(abl_opts);
    }
    if (*gc) return gradcheck(gc_seeds, gc_tol);
    if (*syn) return synth(synth_out, synth_kind, synth_count, synth_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
