#include "sgscn/harness.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

namespace sgscn {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(Method method) { return method == Method::sgscn ? "sgscn" : "kmeans"; }

Method parse_method(std::string_view text) {
  if (text == "sgscn") return Method::sgscn;
  if (text == "kmeans") return Method::kmeans;
  throw Error("unknown method '" + std::string(text) + "' (sgscn|kmeans)");
}

LossWeights parse_weights(std::string_view text) {
  double v[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto comma = text.find(',', start);
    if ((i < 2) != (comma != std::string_view::npos)) {
      throw Error("weights: expected three comma-separated numbers, got '" + std::string(text) + "'");
    }
    const std::string part(text.substr(start, i < 2 ? comma - start : std::string_view::npos));
    std::size_t used = 0;
    try {
      v[i] = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) {
      throw Error("weights: '" + part + "' is not a number");
    }
    start = comma + 1;
  }
  LossWeights w{v[0], v[1], v[2]};
  w.validate();
  return w;
}

TrainConfig resolve_train_config(const RunOptions& options) {
  TrainConfig c;
  if (options.profile == "derm") {
    c = TrainConfig::derm();
  } else if (options.profile == "us") {
    c = TrainConfig::ultrasound();
  } else {
    throw Error("unknown profile '" + options.profile + "' (derm|us)");
  }
  if (options.weights) c.weights = *options.weights;
  if (options.max_iters) c.max_iters = *options.max_iters;
  if (options.min_labels) c.min_labels = *options.min_labels;
  c.seed = options.seed;
  c.validate();
  return c;
}

KMeansConfig resolve_kmeans_config(const RunOptions& options) {
  KMeansConfig c;
  c.k = options.k;
  c.feature_mode = options.feature_mode;
  if (options.max_iters) c.max_iters = *options.max_iters;
  c.seed = options.seed;
  return c;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t image_seed(std::uint64_t global_seed, std::string_view name) {
  return global_seed ^ fnv1a64(name);
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

ordered_json config_json(const RunOptions& o) {
  ordered_json j;
  j["method"] = to_string(o.method);
  j["images_dir"] = o.data.images_dir.string();
  j["masks_dir"] = o.data.masks_dir ? ordered_json(o.data.masks_dir->string()) : ordered_json();
  j["mask_suffix"] = o.data.mask_suffix;
  j["resize"] = o.resize ? ordered_json(to_string(*o.resize)) : ordered_json("none");
  j["seed"] = o.seed;
  j["threads"] = o.threads;
  if (o.method == Method::sgscn) {
    const auto t = resolve_train_config(o);
    j["profile"] = o.profile;
    j["lr"] = t.lr;
    j["momentum"] = t.momentum;
    j["max_iters"] = t.max_iters;
    j["min_labels"] = t.min_labels;
    j["stability_window"] = t.stability_window;
    j["weights"] = {t.weights.ce, t.weights.ss, t.weights.cc};
    j["loss"] = {{"normalize", t.loss.normalize},
                 {"strict_index_bounds", t.loss.strict_index_bounds},
                 {"centroid_stop_gradient", t.loss.centroid_stop_gradient}};
    j["net"] = {{"num_layers", t.net.num_layers},
                {"filters", t.net.filters},
                {"eps_norm", t.net.eps_norm}};
  } else {
    const auto k = resolve_kmeans_config(o);
    j["k"] = k.k;
    j["feature_mode"] = to_string(k.feature_mode);
    j["max_iters"] = k.max_iters;
    j["tol"] = k.tol;
  }
  return j;
}

struct LoadedItem {
  Tensor<float> image;
  std::optional<BinaryMask> mask;
};

LoadedItem load_item(const DatasetItem& item, const std::optional<ImageSize>& resize) {
  LoadedItem l{load_image(item.image, resize), std::nullopt};
  if (item.mask) {
    l.mask = load_mask(*item.mask, resize);
    if (!l.mask->same_shape(LabelMap(l.image.dim(1), l.image.dim(2)))) {
      throw Error("mask '" + item.mask->string() + "' is " + std::to_string(l.mask->rows) + "x" +
                  std::to_string(l.mask->cols) + " but image is " +
                  std::to_string(l.image.dim(1)) + "x" + std::to_string(l.image.dim(2)));
    }
  }
  return l;
}

// Runs body(i) for every item, in parallel over items when threads > 1.
// Kernels inside a worker run single-threaded.
template <typename Body>
void for_each_item(std::size_t count, int threads, Body&& body) {
  if (threads <= 1 || count <= 1) {
    omp_set_num_threads(std::max(threads, 1));
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const int saved = omp_get_max_active_levels();
  omp_set_max_active_levels(1);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < static_cast<long>(count); ++i) body(static_cast<std::size_t>(i));
  omp_set_max_active_levels(saved);
}

void write_summary(const fs::path& path, const std::vector<ImageOutcome>& outcomes) {
  std::vector<double> d, h, x;
  for (const auto& o : outcomes) {
    if (!o.report) continue;
    d.push_back(o.report->dsc);
    h.push_back(o.report->hm);
    x.push_back(o.report->xor_);
  }
  std::string text = "metric,mean,std,n\n";
  for (auto [name, v] : {std::pair{"dsc", &d}, std::pair{"hm", &h}, std::pair{"xor", &x}}) {
    const auto ms = mean_std(*v);
    text += std::string(name) + "," + fmt6(ms.mean) + "," + fmt6(ms.std) + "," +
            std::to_string(v->size()) + "\n";
  }
  write_text(path, text);
}

void log_line(bool verbose, const std::string& s) {
  if (!verbose) return;
#pragma omp critical(sgscn_log)
  std::cerr << s << '\n';
}

}  // namespace

void write_metrics_csv(std::ostream& os, const std::vector<ImageOutcome>& outcomes) {
  os << "image,cluster_id,dsc,hm,xor\n";
  std::vector<const ImageOutcome*> sorted;
  for (const auto& o : outcomes) {
    if (o.report) sorted.push_back(&o);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ImageOutcome* a, const ImageOutcome* b) { return a->name < b->name; });
  for (const auto* o : sorted) {
    os << o->name << ',' << o->report->matched_cluster_id << ',' << fmt6(o->report->dsc) << ','
       << fmt6(o->report->hm) << ',' << fmt6(o->report->xor_) << '\n';
  }
}

int run_segment(const RunOptions& options) {
  const auto items = scan_dataset(options.data);
  const auto started = utc_now();
  const TrainConfig train = options.method == Method::sgscn ? resolve_train_config(options)
                                                            : TrainConfig{};
  const KMeansConfig kmeans = resolve_kmeans_config(options);
  fs::create_directories(options.out_dir / "labels");
  fs::create_directories(options.out_dir / "trace");

  std::vector<ImageOutcome> outcomes(items.size());
  std::vector<ordered_json> extra(items.size());
  for_each_item(items.size(), options.threads, [&](std::size_t i) {
    const auto& item = items[i];
    auto& out = outcomes[i];
    out.name = item.name;
    out.seed = image_seed(options.seed, item.name);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto loaded = load_item(item, options.resize);
      LabelMap labels;
      std::ostringstream trace;
      if (options.method == Method::sgscn) {
        TrainConfig c = train;
        c.seed = out.seed;
        auto r = train_single_image(loaded.image, c);
        write_trace_csv(trace, r.trace);
        extra[i]["stop_reason"] = to_string(r.trace.stop);
        extra[i]["iterations"] = r.trace.iterations.size();
        labels = std::move(r.labels);
      } else {
        KMeansConfig c = kmeans;
        c.seed = out.seed;
        const auto r = kmeans_run(loaded.image, c);
        trace << "iteration,inertia\n";
        for (std::size_t it = 0; it < r.inertia_history.size(); ++it) {
          trace << it << ',' << fmt6(r.inertia_history[it]) << '\n';
        }
        extra[i]["iterations"] = r.iterations;
        extra[i]["converged"] = r.converged;
        labels = LabelMap(loaded.image.dim(1), loaded.image.dim(2));
        labels.values = r.assignment;
      }
      write_label_png(options.out_dir / "labels" / (item.stem + ".png"), labels);
      write_text(options.out_dir / "trace" / (item.stem + ".csv"), trace.str());
      extra[i]["num_labels"] = count_distinct(labels);
      if (loaded.mask) out.report = evaluate(labels, *loaded.mask);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log_line(options.verbose, item.name + (out.ok ? ": ok" : ": FAILED " + out.error) +
                                  (out.report ? " dsc=" + fmt6(out.report->dsc) : ""));
  });

  const bool any_mask = options.data.masks_dir.has_value();
  if (any_mask) {
    std::ostringstream csv;
    write_metrics_csv(csv, outcomes);
    write_text(options.out_dir / "metrics.csv", csv.str());
    write_summary(options.out_dir / "summary.csv", outcomes);
  }

  ordered_json manifest;
  manifest["tool"] = "sgscn";
  manifest["version"] = kToolVersion;
  manifest["command"] = "segment";
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["config"] = config_json(options);
  ordered_json images = ordered_json::array();
  int failures = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& o = outcomes[i];
    ordered_json j;
    j["name"] = o.name;
    j["image"] = items[i].image.string();
    j["mask"] = items[i].mask ? ordered_json(items[i].mask->string()) : ordered_json();
    j["seed"] = o.seed;
    j["status"] = o.ok ? "ok" : "failed";
    if (!o.ok) j["error"] = o.error;
    j["label_png"] = (fs::path("labels") / (items[i].stem + ".png")).string();
    j["trace"] = (fs::path("trace") / (items[i].stem + ".csv")).string();
    j["seconds"] = o.seconds;
    for (auto& [k, v] : extra[i].items()) j[k] = v;
    images.push_back(std::move(j));
    failures += !o.ok;
  }
  manifest["images"] = std::move(images);
  manifest["outputs"] = {{"metrics", any_mask ? ordered_json("metrics.csv") : ordered_json()},
                         {"summary", any_mask ? ordered_json("summary.csv") : ordered_json()}};
  write_text(options.out_dir / "manifest.json", manifest.dump(2) + "\n");

  if (options.verbose && any_mask) {
    std::vector<double> d;
    for (const auto& o : outcomes) {
      if (o.report) d.push_back(o.report->dsc);
    }
    const auto ms = mean_std(d);
    std::cerr << "mean dsc " << fmt6(ms.mean) << " +- " << fmt6(ms.std) << " over " << d.size()
              << " images\n";
  }
  return failures == 0 ? 0 : 1;
}

int run_ablation(const RunOptions& options) {
  if (!options.data.masks_dir) throw Error("ablate: ground-truth masks are required (--masks)");
  const auto items = scan_dataset(options.data);
  const auto started = utc_now();
  const TrainConfig train = resolve_train_config(options);
  fs::create_directories(options.out_dir / "trace");

  std::vector<std::array<ImageOutcome, 3>> outcomes(items.size());
  std::vector<std::array<ordered_json, 3>> extra(items.size());
  for_each_item(items.size(), options.threads, [&](std::size_t i) {
    const auto& item = items[i];
    const std::uint64_t seed = image_seed(options.seed, item.name);
    for (auto& o : outcomes[i]) {
      o.name = item.name;
      o.seed = seed;
    }
    try {
      const auto loaded = load_item(item, options.resize);
      TrainConfig c = train;
      c.seed = seed;
      const auto runs = ablation_run(loaded.image, c);
      for (std::size_t s = 0; s < 3; ++s) {
        std::ostringstream trace;
        write_trace_csv(trace, runs[s].trace);
        const std::string tag = s == 0 ? "ce" : s == 1 ? "ce_ss" : "ce_ss_cc";
        write_text(options.out_dir / "trace" / (item.stem + "_" + tag + ".csv"), trace.str());
        outcomes[i][s].report = evaluate(runs[s].labels, *loaded.mask);
        outcomes[i][s].ok = true;
        extra[i][s] = {{"stop_reason", to_string(runs[s].trace.stop)},
                       {"iterations", runs[s].trace.iterations.size()},
                       {"num_labels", count_distinct(runs[s].labels)}};
      }
      log_line(options.verbose, item.name + ": dsc " + fmt6(outcomes[i][0].report->dsc) + " / " +
                                    fmt6(outcomes[i][1].report->dsc) + " / " +
                                    fmt6(outcomes[i][2].report->dsc));
    } catch (const std::exception& e) {
      for (auto& o : outcomes[i]) o.error = e.what();
      log_line(options.verbose, item.name + ": FAILED " + std::string(e.what()));
    }
  });

  std::string table = "setting,dsc,hm,xor\n";
  std::string per_image = "image,setting,cluster_id,dsc,hm,xor\n";
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<double> d, h, x;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& o = outcomes[i][s];
      if (!o.report) continue;
      d.push_back(o.report->dsc);
      h.push_back(o.report->hm);
      x.push_back(o.report->xor_);
    }
    table += std::string(kAblationNames[s]) + "," + fmt6(mean_std(d).mean) + "," +
             fmt6(mean_std(h).mean) + "," + fmt6(mean_std(x).mean) + "\n";
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t s = 0; s < 3; ++s) {
      const auto& o = outcomes[i][s];
      if (!o.report) continue;
      per_image += o.name + "," + std::string(kAblationNames[s]) + "," +
                   std::to_string(o.report->matched_cluster_id) + "," + fmt6(o.report->dsc) +
                   "," + fmt6(o.report->hm) + "," + fmt6(o.report->xor_) + "\n";
    }
  }
  write_text(options.out_dir / "ablation.csv", table);
  write_text(options.out_dir / "ablation_images.csv", per_image);
  if (options.verbose) std::cout << table;

  ordered_json manifest;
  manifest["tool"] = "sgscn";
  manifest["version"] = kToolVersion;
  manifest["command"] = "ablate";
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["config"] = config_json(options);
  ordered_json images = ordered_json::array();
  int failures = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ordered_json j;
    j["name"] = items[i].name;
    j["seed"] = outcomes[i][0].seed;
    j["status"] = outcomes[i][0].ok ? "ok" : "failed";
    if (!outcomes[i][0].ok) j["error"] = outcomes[i][0].error;
    for (std::size_t s = 0; s < 3; ++s) j["runs"][std::string(kAblationNames[s])] = extra[i][s];
    images.push_back(std::move(j));
    failures += !outcomes[i][0].ok;
  }
  manifest["images"] = std::move(images);
  write_text(options.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace sgscn
