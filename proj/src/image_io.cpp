#include "sgscn/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace sgscn {

ImageSize parse_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  ImageSize s;
  auto parse = [&](std::string_view part, int& out) {
    const auto r = std::from_chars(part.data(), part.data() + part.size(), out);
    return r.ec == std::errc{} && r.ptr == part.data() + part.size() && out > 0;
  };
  if (x == std::string_view::npos || !parse(text.substr(0, x), s.width) ||
      !parse(text.substr(x + 1), s.height)) {
    throw Error("invalid size '" + std::string(text) + "', expected WxH with positive integers");
  }
  return s;
}

std::string to_string(const ImageSize& size) {
  return std::to_string(size.width) + "x" + std::to_string(size.height);
}

namespace {

cv::Mat read_or_throw(const std::filesystem::path& path, int flags) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error("cannot read image '" + path.string() + "': no such file");
  }
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw Error("cannot decode image '" + path.string() + "': unsupported format");
  return m;
}

}  // namespace

Tensor<float> load_image(const std::filesystem::path& path, std::optional<ImageSize> resize) {
  cv::Mat m = read_or_throw(path, cv::IMREAD_ANYCOLOR);
  if (m.channels() == 4) {
    cv::cvtColor(m, m, cv::COLOR_BGRA2RGB);
  } else if (m.channels() == 3) {
    cv::cvtColor(m, m, cv::COLOR_BGR2RGB);
  }
  const auto C = static_cast<std::size_t>(m.channels());
  const auto H = static_cast<std::size_t>(m.rows), W = static_cast<std::size_t>(m.cols);
  Tensor<float> out({C, H, W});
  for (std::size_t r = 0; r < H; ++r) {
    const auto* row = m.ptr<std::uint8_t>(static_cast<int>(r));
    for (std::size_t k = 0; k < W; ++k) {
      for (std::size_t c = 0; c < C; ++c) out.at(c, r, k) = row[k * C + c] / 255.0f;
    }
  }
  return resize ? resize_bilinear(out, *resize) : out;
}

Tensor<float> resize_bilinear(const Tensor<float>& image, ImageSize size) {
  require_rank3(image, "resize_bilinear");
  const std::size_t C = image.dim(0);
  const int H = static_cast<int>(image.dim(1)), W = static_cast<int>(image.dim(2));
  Tensor<float> out({C, static_cast<std::size_t>(size.height), static_cast<std::size_t>(size.width)});
  const std::size_t plane_out = static_cast<std::size_t>(size.height) * size.width;
  for (std::size_t c = 0; c < C; ++c) {
    const cv::Mat src(H, W, CV_32F, const_cast<float*>(image.raw() + c * H * W));
    cv::Mat dst(size.height, size.width, CV_32F, out.raw() + c * plane_out);
    cv::resize(src, dst, dst.size(), 0, 0, cv::INTER_LINEAR);
  }
  return out;
}

BinaryMask load_mask(const std::filesystem::path& path, std::optional<ImageSize> resize) {
  cv::Mat m = read_or_throw(path, cv::IMREAD_GRAYSCALE);
  if (resize) cv::resize(m, m, cv::Size(resize->width, resize->height), 0, 0, cv::INTER_NEAREST);
  BinaryMask out(static_cast<std::size_t>(m.rows), static_cast<std::size_t>(m.cols));
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    for (int k = 0; k < m.cols; ++k) out(r, k) = row[k] >= 128;
  }
  return out;
}

void write_image_png(const std::filesystem::path& path, const Tensor<float>& image) {
  require_rank3(image, "write_image_png");
  const int C = static_cast<int>(image.dim(0));
  if (C != 1 && C != 3) throw Error("write_image_png: need 1 or 3 channels, got " + std::to_string(C));
  const int H = static_cast<int>(image.dim(1)), W = static_cast<int>(image.dim(2));
  cv::Mat m(H, W, C == 3 ? CV_8UC3 : CV_8UC1);
  for (int r = 0; r < H; ++r) {
    auto* row = m.ptr<std::uint8_t>(r);
    for (int k = 0; k < W; ++k) {
      for (int c = 0; c < C; ++c) {
        const float v = std::clamp(image.at(c, r, k), 0.0f, 1.0f);
        // OpenCV stores BGR.
        row[k * C + (C == 3 ? 2 - c : 0)] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  if (!cv::imwrite(path.string(), m)) throw Error("write_image_png: cannot write '" + path.string() + "'");
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  cv::Mat m(static_cast<int>(mask.rows), static_cast<int>(mask.cols), CV_8UC1);
  for (std::size_t i = 0; i < mask.size(); ++i) m.data[i] = mask[i] ? 255 : 0;
  if (!cv::imwrite(path.string(), m)) throw Error("write_mask_png: cannot write '" + path.string() + "'");
}

std::array<std::uint8_t, 3> palette_colour(int index) {
  // Golden-ratio hue walk at fixed saturation/value.
  const double hue = std::fmod(index * 0.618033988749895, 1.0) * 6.0;
  const int sector = static_cast<int>(hue);
  const double f = hue - sector, v = 0.95, s = index == 0 ? 0.0 : 0.75;
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double rgb[3];
  switch (sector % 6) {
    case 0: rgb[0] = v, rgb[1] = t, rgb[2] = p; break;
    case 1: rgb[0] = q, rgb[1] = v, rgb[2] = p; break;
    case 2: rgb[0] = p, rgb[1] = v, rgb[2] = t; break;
    case 3: rgb[0] = p, rgb[1] = q, rgb[2] = v; break;
    case 4: rgb[0] = t, rgb[1] = p, rgb[2] = v; break;
    default: rgb[0] = v, rgb[1] = p, rgb[2] = q; break;
  }
  if (index == 0) rgb[0] = rgb[1] = rgb[2] = 0.0;
  return {static_cast<std::uint8_t>(rgb[0] * 255 + 0.5), static_cast<std::uint8_t>(rgb[1] * 255 + 0.5),
          static_cast<std::uint8_t>(rgb[2] * 255 + 0.5)};
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp; these helpers keep only trivially
// destructible locals between setjmp and the libpng calls.
bool png_write_indexed(std::FILE* f, png_uint_32 width, png_uint_32 height,
                       const png_color* palette, int palette_size, const png_byte* pixels) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_PLTE(png, info, palette, palette_size);
  png_write_info(png, info);
  for (png_uint_32 r = 0; r < height; ++r) png_write_row(png, pixels + r * width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

enum class ReadStatus { ok, failed, not_indexed };

ReadStatus png_read_indexed(std::FILE* f, std::vector<png_byte>* pixels, png_uint_32* width,
                            png_uint_32* height) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return ReadStatus::failed;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return ReadStatus::failed;
  }
  png_init_io(png, f);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_PALETTE ||
      png_get_bit_depth(png, info) != 8 || png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    png_destroy_read_struct(&png, &info, nullptr);
    return ReadStatus::not_indexed;
  }
  *width = png_get_image_width(png, info);
  *height = png_get_image_height(png, info);
  pixels->resize(static_cast<std::size_t>(*width) * *height);
  for (png_uint_32 r = 0; r < *height; ++r) {
    png_read_row(png, pixels->data() + static_cast<std::size_t>(r) * *width, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return ReadStatus::ok;
}

}  // namespace

void write_label_png(const std::filesystem::path& path, const LabelMap& labels) {
  if (labels.rows == 0 || labels.cols == 0) throw Error("write_label_png: empty label map");
  int max_label = 0;
  std::vector<png_byte> pixels(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto v = labels[i];
    if (v < 0 || v > 255) {
      throw Error("write_label_png: label " + std::to_string(v) + " outside palette range [0,255]");
    }
    max_label = std::max(max_label, static_cast<int>(v));
    pixels[i] = static_cast<png_byte>(v);
  }
  std::vector<png_color> palette(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < palette.size(); ++i) {
    const auto c = palette_colour(static_cast<int>(i));
    palette[i] = {c[0], c[1], c[2]};
  }
  File f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw Error("write_label_png: cannot open '" + path.string() + "' for writing");
  if (!png_write_indexed(f.get(), static_cast<png_uint_32>(labels.cols),
                         static_cast<png_uint_32>(labels.rows), palette.data(),
                         static_cast<int>(palette.size()), pixels.data())) {
    throw Error("write_label_png: libpng failed writing '" + path.string() + "'");
  }
}

LabelMap read_label_png(const std::filesystem::path& path) {
  File f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw Error("read_label_png: cannot open '" + path.string() + "'");
  std::vector<png_byte> pixels;
  png_uint_32 width = 0, height = 0;
  switch (png_read_indexed(f.get(), &pixels, &width, &height)) {
    case ReadStatus::failed:
      throw Error("read_label_png: libpng failed reading '" + path.string() + "'");
    case ReadStatus::not_indexed:
      throw Error("read_label_png: '" + path.string() + "' is not an 8-bit indexed PNG");
    case ReadStatus::ok:
      break;
  }
  LabelMap labels(height, width);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = pixels[i];
  return labels;
}

}  // namespace sgscn
