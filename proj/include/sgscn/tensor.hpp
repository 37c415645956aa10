#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgscn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when operand shapes disagree. The message names the offending
/// dimension, e.g. "conv2d: weight dim 1 (input channels) is 2, expected 3".
class ShapeError : public Error {
 public:
  using Error::Error;
};

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t numel(const Shape& shape);

/// Dense row-major array. Owns its storage; copies are deep.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), data_(sgscn::numel(shape_), fill) {}
  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != sgscn::numel(shape_)) {
      throw ShapeError("tensor: " + std::to_string(data_.size()) + " values do not fill shape " +
                       to_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* raw() noexcept { return data_.data(); }
  const T* raw() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  // rank-3 accessors, (channel, row, col)
  T& at(std::size_t c, std::size_t r, std::size_t k) noexcept {
    return data_[(c * shape_[1] + r) * shape_[2] + k];
  }
  const T& at(std::size_t c, std::size_t r, std::size_t k) const noexcept {
    return data_[(c * shape_[1] + r) * shape_[2] + k];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// Throws ShapeError unless `t` has rank 3.
template <typename T>
void require_rank3(const Tensor<T>& t, const char* what) {
  if (t.rank() != 3) {
    throw ShapeError(std::string(what) + ": expected rank-3 [C,H,W] tensor, got shape " +
                     to_string(t.shape()));
  }
}

}  // namespace sgscn
