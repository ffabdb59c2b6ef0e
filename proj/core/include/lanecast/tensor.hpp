#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lanecast {

/// Precision used for training and inference. Gradient checks instantiate
/// the same templates with double.
using Real = float;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Shape3 {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  [[nodiscard]] std::size_t size() const noexcept { return channels * rows * cols; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

std::string to_string(const Shape3& s);

/// Dense channels x rows x cols tensor, row-major (cols fastest).
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Shape3 shape, T fill = T{0}) : shape_(shape), data_(shape.size(), fill) {}
  Tensor3(std::size_t channels, std::size_t rows, std::size_t cols, T fill = T{0})
      : Tensor3(Shape3{channels, rows, cols}, fill) {}
  Tensor3(Shape3 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  [[nodiscard]] const Shape3& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t channels() const noexcept { return shape_.channels; }
  [[nodiscard]] std::size_t rows() const noexcept { return shape_.rows; }
  [[nodiscard]] std::size_t cols() const noexcept { return shape_.cols; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] std::size_t index(std::size_t c, std::size_t r, std::size_t k) const noexcept {
    return (c * shape_.rows + r) * shape_.cols + k;
  }
  T& operator()(std::size_t c, std::size_t r, std::size_t k) noexcept { return data_[index(c, r, k)]; }
  const T& operator()(std::size_t c, std::size_t r, std::size_t k) const noexcept {
    return data_[index(c, r, k)];
  }

  [[nodiscard]] std::span<T> values() noexcept { return data_; }
  [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
  [[nodiscard]] T* data() noexcept { return data_.data(); }
  [[nodiscard]] const T* data() const noexcept { return data_.data(); }

  template <typename U>
  [[nodiscard]] Tensor3<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor3<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Shape3 shape_{};
  std::vector<T> data_;
};

inline std::string to_string(const Shape3& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

}  // namespace lanecast
