#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "sgscn/grid.hpp"
#include "sgscn/tensor.hpp"

namespace sgscn {

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Parses "WxH", e.g. "128x128".
ImageSize parse_size(std::string_view text);
std::string to_string(const ImageSize& size);

/// Decodes PNG/JPEG/BMP/PGM to [C,H,W] floats (8-bit value / 255). Colour
/// images become RGB (alpha dropped); grayscale stays single-channel.
/// Optional bilinear resize.
Tensor<float> load_image(const std::filesystem::path& path,
                         std::optional<ImageSize> resize = std::nullopt);

/// Grayscale mask binarised at >= 128; optional nearest-neighbour resize.
BinaryMask load_mask(const std::filesystem::path& path,
                     std::optional<ImageSize> resize = std::nullopt);

/// Bilinear resize of a [C,H,W] tensor (pixel-centre aligned).
Tensor<float> resize_bilinear(const Tensor<float>& image, ImageSize size);

/// Writes an 8-bit indexed-palette PNG where pixel value i is label i.
/// Labels must lie in [0, 255].
void write_label_png(const std::filesystem::path& path, const LabelMap& labels);
LabelMap read_label_png(const std::filesystem::path& path);

/// 8-bit PNG of a [C,H,W] image in [0,1] (values clamped, rounded).
void write_image_png(const std::filesystem::path& path, const Tensor<float>& image);
/// 8-bit grayscale PNG, 255 for set pixels.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Deterministic, visually distinct colour for palette entry i.
std::array<std::uint8_t, 3> palette_colour(int index);

}  // namespace sgscn
