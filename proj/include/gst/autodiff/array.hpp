#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gst/error.hpp"

namespace gst {

struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;

  std::size_t Size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string ToString() const {
    return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
  }
};

// Dense row-major matrix. Vectors are 1 x n rows.
template <typename T>
class Array {
 public:
  using value_type = T;

  Array() = default;
  explicit Array(Shape shape, T fill = T(0))
      : shape_(shape), data_(shape.Size(), fill) {
    if (shape.rows == 0 || shape.cols == 0) {
      throw DimensionError("array dimensions must be positive, got " +
                           shape.ToString());
    }
  }
  Array(std::size_t rows, std::size_t cols, T fill = T(0))
      : Array(Shape{rows, cols}, fill) {}
  Array(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (shape.rows == 0 || shape.cols == 0 || data_.size() != shape.Size()) {
      throw DimensionError("data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape.ToString());
    }
  }

  static Array Row(std::initializer_list<T> values) {
    return Array(Shape{1, values.size()}, std::vector<T>(values));
  }
  static Array Row(std::span<const T> values) {
    return Array(Shape{1, values.size()},
                 std::vector<T>(values.begin(), values.end()));
  }
  static Array FromRows(std::initializer_list<std::initializer_list<T>> rows) {
    std::vector<T> data;
    std::size_t cols = rows.begin()->size();
    for (const auto& r : rows) {
      if (r.size() != cols) throw DimensionError("ragged rows");
      data.insert(data.end(), r.begin(), r.end());
    }
    return Array(Shape{rows.size(), cols}, std::move(data));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }
  std::span<T> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  void Fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  // Index of the first non-finite entry, or size() if all finite.
  std::size_t FirstNonFinite() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) return i;
    }
    return data_.size();
  }

  bool operator==(const Array&) const = default;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

// out += a * b (shapes m x k, k x n).
template <typename T>
void GemmAccumulate(const Array<T>& a, const Array<T>& b, Array<T>& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    T* orow = out.data() + i * n;
    const T* arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

// out += a^T * b (a: k x m, b: k x n, out: m x n).
template <typename T>
void GemmTransAAccumulate(const Array<T>& a, const Array<T>& b, Array<T>& out) {
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a.data() + p * m;
    const T* brow = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = arow[i];
      if (av == T(0)) continue;
      T* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

// out += a * b^T (a: m x k, b: n x k, out: m x n).
template <typename T>
void GemmTransBAccumulate(const Array<T>& a, const Array<T>& b, Array<T>& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a.data() + i * k;
    T* orow = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = b.data() + j * k;
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] += acc;
    }
  }
}

}  // namespace gst
