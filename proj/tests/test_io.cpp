#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <sstream>

#include "sgscn/harness.hpp"
#include "sgscn/synthetic.hpp"

using namespace sgscn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sgscn_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_dataset(const fs::path& root, std::size_t count, std::uint64_t seed) {
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  for (std::size_t i = 0; i < count; ++i) {
    const auto s = noisy_square(seed + i, 0.05, 16, 6);
    const auto name = "img" + std::to_string(i);
    write_image_png(root / "images" / (name + ".png"), s.image);
    write_mask_png(root / "masks" / (name + ".png"), s.mask);
  }
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("load_image scales 8-bit values and keeps channel count") {
  const auto dir = scratch("load");
  cv::Mat bgr(2, 3, CV_8UC3, cv::Scalar(0, 0, 0));
  bgr.at<cv::Vec3b>(0, 0) = {255, 0, 0};  // blue
  bgr.at<cv::Vec3b>(1, 2) = {0, 0, 255};  // red
  cv::imwrite((dir / "c.png").string(), bgr);
  const auto img = load_image(dir / "c.png");
  REQUIRE(img.shape() == Shape{3, 2, 3});
  CHECK(img[2 * 6 + 0] == 1.0f);  // B plane at (0,0)
  CHECK(img[0 * 6 + 0] == 0.0f);
  CHECK(img[0 * 6 + 5] == 1.0f);  // R plane at (1,2)

  cv::Mat gray(4, 4, CV_8UC1, cv::Scalar(51));
  cv::imwrite((dir / "g.png").string(), gray);
  const auto g = load_image(dir / "g.png");
  CHECK(g.shape() == Shape{1, 4, 4});
  CHECK(g[7] == doctest::Approx(0.2f));

  cv::Mat cb(2, 2, CV_8UC1);
  cb.at<uchar>(0, 0) = 255, cb.at<uchar>(0, 1) = 0, cb.at<uchar>(1, 0) = 0, cb.at<uchar>(1, 1) = 255;
  cv::imwrite((dir / "cb.png").string(), cb);
  const auto up = load_image(dir / "cb.png", ImageSize{8, 8});
  CHECK(up.shape() == Shape{1, 8, 8});
  CHECK(up[0] == 1.0f);
  CHECK(up[63] == 1.0f);
  CHECK(up[7] == 0.0f);
  CHECK(up[56] == 0.0f);
  for (float v : up.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }

  CHECK_THROWS_AS(load_image(dir / "missing.png"), Error);
  std::ofstream(dir / "junk.png") << "not an image";
  CHECK_THROWS_AS(load_image(dir / "junk.png"), Error);
}

TEST_CASE("masks threshold at 128") {
  const auto dir = scratch("mask");
  cv::Mat m(1, 4, CV_8UC1);
  m.at<uchar>(0, 0) = 0, m.at<uchar>(0, 1) = 127, m.at<uchar>(0, 2) = 128, m.at<uchar>(0, 3) = 255;
  cv::imwrite((dir / "m.png").string(), m);
  const auto mask = load_mask(dir / "m.png");
  CHECK(mask.values == std::vector<std::uint8_t>{0, 0, 1, 1});
}

TEST_CASE("label PNG round trip") {
  const auto dir = scratch("labels");
  LabelMap labels(5, 7);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::int32_t>((i * 37) % 256);
  write_label_png(dir / "l.png", labels);
  CHECK(read_label_png(dir / "l.png") == labels);
  const cv::Mat raw = cv::imread((dir / "l.png").string(), cv::IMREAD_UNCHANGED);
  CHECK(raw.channels() == 3);  // palette expands to colour for generic readers
  labels[3] = 256;
  CHECK_THROWS_AS(write_label_png(dir / "bad.png", labels), Error);
  cv::imwrite((dir / "gray.png").string(), cv::Mat(2, 2, CV_8UC1, cv::Scalar(3)));
  CHECK_THROWS_AS(read_label_png(dir / "gray.png"), Error);
  CHECK(palette_colour(0) == std::array<std::uint8_t, 3>{0, 0, 0});
  CHECK(palette_colour(1) != palette_colour(2));
}

TEST_CASE("dataset pairing") {
  const auto dir = scratch("dataset");
  fs::create_directories(dir / "im/sub");
  fs::create_directories(dir / "gt");
  const auto img = noisy_square(1, 0.05, 8, 3);
  write_image_png(dir / "im/b.png", img.image);
  write_image_png(dir / "im/sub/a.png", img.image);
  std::ofstream(dir / "im/notes.txt") << "x";
  write_mask_png(dir / "gt/a_mask.png", img.mask);
  write_mask_png(dir / "gt/b_mask.png", img.mask);

  DatasetLayout layout{dir / "im", dir / "gt", "_mask"};
  const auto items = scan_dataset(layout);
  REQUIRE(items.size() == 2);
  CHECK(items[0].name == "a.png");
  CHECK(items[0].mask->filename() == "a_mask.png");

  fs::remove(dir / "gt/b_mask.png");
  CHECK_THROWS_AS(scan_dataset(layout), Error);
  write_mask_png(dir / "gt/b_mask.png", img.mask);
  write_mask_png(dir / "gt/b_mask.bmp", img.mask);
  CHECK_THROWS_AS(scan_dataset(layout), Error);
  fs::remove(dir / "gt/b_mask.bmp");

  write_image_png(dir / "im/sub/b.jpg", img.image);
  CHECK_THROWS_AS(scan_dataset(layout), Error);  // duplicate stem
  fs::remove(dir / "im/sub/b.jpg");

  // shared tree
  write_mask_png(dir / "im/b_mask.png", img.mask);
  write_mask_png(dir / "im/sub/a_mask.png", img.mask);
  const auto shared = scan_dataset({dir / "im", dir / "im", "_mask"});
  CHECK(shared.size() == 2);
  CHECK_THROWS_AS(scan_dataset({dir / "im", dir / "im", ""}), Error);

  CHECK_THROWS_AS(scan_dataset({dir / "nope", std::nullopt, ""}), Error);
  CHECK(scan_dataset({dir / "gt", std::nullopt, ""}).size() == 2);
}

TEST_CASE("argument parsing helpers") {
  CHECK(parse_size("128x96") == ImageSize{128, 96});
  CHECK(to_string(ImageSize{4, 5}) == "4x5");
  for (const char* bad : {"", "128", "0x5", "ax3", "3x-1", "3x3x3"}) {
    CHECK_THROWS_AS(parse_size(bad), Error);
  }
  const auto w = parse_weights("1,0.5,0");
  CHECK(w.ce == 1.0);
  CHECK(w.ss == 0.5);
  CHECK(w.cc == 0.0);
  CHECK_THROWS_AS(parse_weights("1,2"), Error);
  CHECK_THROWS_AS(parse_weights("1,-1,0"), Error);
  CHECK(parse_method("kmeans") == Method::kmeans);
  CHECK_THROWS_AS(parse_method("slic"), Error);
}

TEST_CASE("per-image seeds") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(image_seed(0, "a") == fnv1a64("a"));
  CHECK(image_seed(7, "a") == (7 ^ fnv1a64("a")));
  CHECK(image_seed(7, "a.png") != image_seed(7, "b.png"));
}

TEST_CASE("profiles and overrides") {
  RunOptions o;
  CHECK(resolve_train_config(o).lr == 0.1);
  o.profile = "us";
  CHECK(resolve_train_config(o).lr == 0.05);
  o.max_iters = 7;
  o.min_labels = 4;
  o.weights = LossWeights{1, 0, 0};
  const auto t = resolve_train_config(o);
  CHECK(t.max_iters == 7);
  CHECK(t.min_labels == 4);
  CHECK(t.weights.ss == 0.0);
  o.profile = "ct";
  CHECK_THROWS_AS(resolve_train_config(o), Error);
}

TEST_CASE("segment run writes every artefact") {
  const auto dir = scratch("segment");
  write_dataset(dir, 3, 40);
  RunOptions o;
  o.method = Method::kmeans;
  o.data = {dir / "images", dir / "masks", ""};
  o.resize = std::nullopt;
  o.out_dir = dir / "out";
  o.verbose = false;
  REQUIRE(run_segment(o) == 0);
  const auto metrics = csv_lines(dir / "out/metrics.csv");
  REQUIRE(metrics.size() == 4);
  CHECK(metrics[0] == "image,cluster_id,dsc,hm,xor");
  CHECK(metrics[1].rfind("img0.png,", 0) == 0);
  const auto summary = csv_lines(dir / "out/summary.csv");
  CHECK(summary[0] == "metric,mean,std,n");
  CHECK(summary.size() == 4);
  for (int i = 0; i < 3; ++i) {
    const auto labels = read_label_png(dir / "out/labels" / ("img" + std::to_string(i) + ".png"));
    CHECK(labels.rows == 16);
    CHECK(count_distinct(labels) <= 3);
    CHECK(fs::exists(dir / "out/trace" / ("img" + std::to_string(i) + ".csv")));
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "out/manifest.json"));
  CHECK(manifest["tool"] == "sgscn");
  CHECK(manifest["version"] == kToolVersion);
  CHECK(manifest["config"]["method"] == "kmeans");
  CHECK(manifest["images"].size() == 3);
  for (const auto& entry : manifest["images"]) CHECK(entry.contains("seed"));
}

TEST_CASE("segment output is identical across thread counts") {
  const auto dir = scratch("threads");
  write_dataset(dir, 4, 70);
  auto run = [&](Method method, int threads) {
    RunOptions o;
    o.method = method;
    o.data = {dir / "images", dir / "masks", ""};
    o.resize = std::nullopt;
    o.out_dir = dir / ("out_" + std::string(to_string(method)) + std::to_string(threads));
    o.threads = threads;
    o.max_iters = 5;
    o.verbose = false;
    REQUIRE(run_segment(o) == 0);
    return o.out_dir;
  };
  for (auto m : {Method::kmeans, Method::sgscn}) {
    const auto a = run(m, 1), b = run(m, 3);
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
    for (int i = 0; i < 4; ++i) {
      const auto f = "labels/img" + std::to_string(i) + ".png";
      CHECK(slurp(a / f) == slurp(b / f));
    }
  }
}

TEST_CASE("ablation needs masks and writes a 3-row table") {
  const auto dir = scratch("ablate");
  write_dataset(dir, 2, 90);
  RunOptions o;
  o.data = {dir / "images", std::nullopt, ""};
  o.resize = std::nullopt;
  o.out_dir = dir / "out";
  o.max_iters = 4;
  o.verbose = false;
  CHECK_THROWS_AS(run_ablation(o), Error);
  o.data.masks_dir = dir / "masks";
  REQUIRE(run_ablation(o) == 0);
  const auto rows = csv_lines(dir / "out/ablation.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "setting,dsc,hm,xor");
  CHECK(rows[1].rfind("CE,", 0) == 0);
  CHECK(rows[2].rfind("CE+SS,", 0) == 0);
  CHECK(rows[3].rfind("CE+SS+CC,", 0) == 0);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(std::count(rows[i].begin(), rows[i].end(), ',') == 3);
  }
  CHECK(fs::exists(dir / "out/trace/img0_ce_ss_cc.csv"));
}

TEST_CASE("segment without masks skips metrics") {
  const auto dir = scratch("nomask");
  write_dataset(dir, 1, 5);
  RunOptions o;
  o.method = Method::kmeans;
  o.data = {dir / "images", std::nullopt, ""};
  o.resize = ImageSize{8, 8};
  o.out_dir = dir / "out";
  o.verbose = false;
  REQUIRE(run_segment(o) == 0);
  CHECK_FALSE(fs::exists(dir / "out/metrics.csv"));
  CHECK(read_label_png(dir / "out/labels/img0.png").cols == 8);
}
