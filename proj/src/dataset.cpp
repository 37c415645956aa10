#include "sgscn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "sgscn/tensor.hpp"

namespace sgscn {

namespace fs = std::filesystem;

bool is_image_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".pgm";
}

namespace {

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("dataset: '" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<DatasetItem> scan_dataset(const DatasetLayout& layout) {
  const auto images = list_images(layout.images_dir);
  const bool shared_tree =
      layout.masks_dir && fs::equivalent(layout.images_dir, *layout.masks_dir);
  if (shared_tree && layout.mask_suffix.empty()) {
    throw Error("dataset: images and masks share '" + layout.images_dir.string() +
                "'; a mask suffix is required to tell them apart");
  }

  std::map<std::string, std::vector<fs::path>> masks_by_stem;
  if (layout.masks_dir) {
    for (const auto& p : list_images(*layout.masks_dir)) {
      masks_by_stem[p.stem().string()].push_back(p);
    }
  }

  std::vector<DatasetItem> items;
  std::map<std::string, fs::path> seen;
  for (const auto& p : images) {
    const std::string stem = p.stem().string();
    if (shared_tree && ends_with(stem, layout.mask_suffix)) continue;
    const std::string name = p.filename().string();
    if (auto [it, fresh] = seen.emplace(stem, p); !fresh) {
      throw Error("dataset: images '" + it->second.string() + "' and '" + p.string() +
                  "' share the stem '" + stem + "'");
    }
    DatasetItem item{name, stem, p, std::nullopt};
    if (layout.masks_dir) {
      const auto found = masks_by_stem.find(stem + layout.mask_suffix);
      if (found == masks_by_stem.end()) {
        throw Error("dataset: no mask '" + stem + layout.mask_suffix + ".*' for image '" +
                    p.string() + "'");
      }
      if (found->second.size() != 1) {
        throw Error("dataset: " + std::to_string(found->second.size()) + " candidate masks for '" +
                    p.string() + "'");
      }
      item.mask = found->second.front();
    }
    items.push_back(std::move(item));
  }
  std::sort(items.begin(), items.end(),
            [](const DatasetItem& a, const DatasetItem& b) { return a.name < b.name; });
  if (items.empty()) throw Error("dataset: no images found in '" + layout.images_dir.string() + "'");
  return items;
}

}  // namespace sgscn
