#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sgscn {

/// Rank-2 row-major array used for per-pixel integer data.
template <typename T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), values(r * c, fill) {}

  std::size_t size() const noexcept { return values.size(); }
  T& operator()(std::size_t r, std::size_t c) noexcept { return values[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
  T& operator[](std::size_t i) noexcept { return values[i]; }
  const T& operator[](std::size_t i) const noexcept { return values[i]; }

  bool same_shape(const auto& other) const noexcept {
    return rows == other.rows && cols == other.cols;
  }
  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Per-pixel cluster index.
using LabelMap = Grid<std::int32_t>;
/// Per-pixel membership; stored as bytes (0 or 1).
using BinaryMask = Grid<std::uint8_t>;

std::size_t count_distinct(const LabelMap& labels);
/// Number of 4-neighbour pixel pairs carrying different labels.
std::size_t boundary_length(const LabelMap& labels);

}  // namespace sgscn
