#pragma once

#include <algorithm>
#include <array>
#include <string>

#include "hmax/errors.hpp"
#include "hmax/gabor.hpp"
#include "hmax/grid.hpp"

namespace hmax {

template <typename T>
using C1Maps = OrientedMaps<T>;

// One image's worth of pooled maps, indexed by band - 1.
template <typename T>
using C1Stack = std::array<C1Maps<T>, kBandCount>;

// Elementwise max of a fine and a coarse response grid from the same band.
// The fine grid is larger by exactly two in each dimension (its kernel
// support is two pixels smaller); a one pixel border is cropped so the
// windows align on the shared center.
template <typename T>
Grid<T> cross_scale_max(const Grid<T>& fine, const Grid<T>& coarse) {
  if (fine.rows() != coarse.rows() + 2 || fine.cols() != coarse.cols() + 2) {
    throw InvalidArgument("cross_scale_max: fine grid must exceed coarse by 2, got " +
                          std::to_string(fine.rows()) + "x" + std::to_string(fine.cols()) +
                          " vs " + std::to_string(coarse.rows()) + "x" +
                          std::to_string(coarse.cols()));
  }
  Grid<T> out(coarse.rows(), coarse.cols());
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < out.cols(); ++c) {
      out(r, c) = std::max(fine(r + 1, c + 1), coarse(r, c));
    }
  }
  return out;
}

// Spatial max pooling over 2delta x 2delta windows with stride delta,
// realized as a two stage hierarchy: non-overlapping delta x delta cell
// maxima anchored at the origin (a trailing partial cell is dropped),
// then a 2x2 stride-1 max over the cell grid. Output side is
// floor(side / delta) - 1; inputs narrower than 2*delta in either
// dimension give an empty grid.
template <typename T>
Grid<T> c1_pool(const Grid<T>& in, int delta) {
  if (delta < 1) {
    throw InvalidArgument("c1_pool: delta must be positive");
  }
  const int cell_rows = in.rows() / delta;
  const int cell_cols = in.cols() / delta;
  if (cell_rows < 2 || cell_cols < 2) {
    return Grid<T>();
  }
  Grid<T> cells(cell_rows, cell_cols);
  for (int cr = 0; cr < cell_rows; ++cr) {
    for (int cc = 0; cc < cell_cols; ++cc) {
      T best = in(cr * delta, cc * delta);
      for (int r = cr * delta; r < (cr + 1) * delta; ++r) {
        for (int c = cc * delta; c < (cc + 1) * delta; ++c) {
          best = std::max(best, in(r, c));
        }
      }
      cells(cr, cc) = best;
    }
  }
  Grid<T> out(cell_rows - 1, cell_cols - 1);
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < out.cols(); ++c) {
      out(r, c) = std::max(std::max(cells(r, c), cells(r, c + 1)),
                           std::max(cells(r + 1, c), cells(r + 1, c + 1)));
    }
  }
  return out;
}

// Full band stage: per orientation, max across the band's two scales
// followed by pooling. The band index is carried through.
template <typename T>
C1Maps<T> c1_band(const OrientedMaps<T>& fine, const OrientedMaps<T>& coarse, int band,
                  int delta) {
  C1Maps<T> out;
  out.index = band;
  for (int t = 0; t < kOrientations; ++t) {
    out.planes[t] = c1_pool(cross_scale_max(fine.planes[t], coarse.planes[t]), delta);
  }
  return out;
}

}  // namespace hmax
