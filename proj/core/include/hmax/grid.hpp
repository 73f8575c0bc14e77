#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace hmax {

/// Dense row-major 2-D array. An empty grid (0x0) is a valid value and is
/// what undersized inputs produce throughout the feature hierarchy.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
    assert(rows >= 0 && cols >= 0);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  size_t size() const { return v_.size(); }

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return v_[static_cast<size_t>(r) * cols_ + c];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return v_[static_cast<size_t>(r) * cols_ + c];
  }

  std::span<T> row(int r) { return {v_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)}; }
  std::span<const T> row(int r) const {
    return {v_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }

  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.v_ == b.v_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> v_;
};

/// One response grid per orientation, in the order 0, 45, 90, 135 degrees.
/// `index` is the scale index for S1 output and the band index after pooling.
template <typename T>
struct OrientedMaps {
  int index = 0;
  std::array<Grid<T>, 4> planes;

  int rows() const { return planes[0].rows(); }
  int cols() const { return planes[0].cols(); }
  bool empty() const { return planes[0].empty(); }

  friend bool operator==(const OrientedMaps& a, const OrientedMaps& b) {
    return a.index == b.index && a.planes == b.planes;
  }
};

inline constexpr int kOrientations = 4;
inline constexpr std::array<int, 4> kOrientationDegrees = {0, 45, 90, 135};

}  // namespace hmax

