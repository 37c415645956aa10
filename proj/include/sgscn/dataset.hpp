#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sgscn {

struct DatasetLayout {
  std::filesystem::path images_dir;
  std::optional<std::filesystem::path> masks_dir;
  /// Mask stem = image stem + suffix ("IMD002" -> "IMD002_lesion").
  std::string mask_suffix;
};

struct DatasetItem {
  std::string name;  // file name, unique within the dataset
  std::string stem;
  std::filesystem::path image;
  std::optional<std::filesystem::path> mask;
};

bool is_image_file(const std::filesystem::path& path);

/// Recursively collects images (PNG/JPEG/BMP/PGM), sorted by file name.
/// With a masks directory, every image must resolve to exactly one mask.
/// When images and masks share a tree, files whose stem ends in the mask
/// suffix are treated as masks only.
std::vector<DatasetItem> scan_dataset(const DatasetLayout& layout);

}  // namespace sgscn
