#include <cstdint>
#include <vector>

#include "doctest.h"
#include "hmax/c1.hpp"
#include "hmax/errors.hpp"
#include "hmax/perf.hpp"
#include "hmax/rng.hpp"
#include "support/oracles.hpp"

using namespace hmax;

namespace {

Grid<uint16_t> random_grid(int rows, int cols, std::mt19937_64& g) {
  Grid<uint16_t> out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out(r, c) = static_cast<uint16_t>(bounded_draw(g, 65536));
    }
  }
  return out;
}

Grid<double> random_real_grid(int rows, int cols, std::mt19937_64& g) {
  Grid<double> out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out(r, c) = unit_real(g);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("c1");

TEST_CASE("cross-scale max keeps the larger response on aligned centers") {
  SUBCASE("constants") {
    Grid<uint16_t> fine(7, 7);
    Grid<uint16_t> coarse(5, 5);
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 7; ++c) fine(r, c) = 5;
    }
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) coarse(r, c) = 3;
    }
    const Grid<uint16_t> out = cross_scale_max(fine, coarse);
    REQUIRE(out.rows() == 5);
    REQUIRE(out.cols() == 5);
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) CHECK(out(r, c) == 5);
    }
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) coarse(r, c) = 9;
    }
    CHECK(cross_scale_max(fine, coarse)(2, 2) == 9);
  }

  SUBCASE("random grids against crop plus max") {
    std::mt19937_64 g(7);
    const Grid<uint16_t> fine = random_grid(14, 12, g);
    const Grid<uint16_t> coarse = random_grid(12, 10, g);
    const Grid<uint16_t> out = cross_scale_max(fine, coarse);
    for (int r = 0; r < out.rows(); ++r) {
      for (int c = 0; c < out.cols(); ++c) {
        CHECK(out(r, c) == std::max(fine(r + 1, c + 1), coarse(r, c)));
      }
    }
  }

  SUBCASE("misaligned sizes are rejected") {
    Grid<uint16_t> a(7, 7), b(6, 5), c(5, 5);
    CHECK_THROWS_AS(cross_scale_max(a, b), InvalidArgument);
    CHECK_THROWS_AS(cross_scale_max(c, a), InvalidArgument);
    CHECK_THROWS_AS(cross_scale_max(a, a), InvalidArgument);
  }
}

TEST_CASE("pooling an 8x8 ramp with period 4 selects the global max") {
  Grid<uint16_t> in(8, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) in(r, c) = static_cast<uint16_t>(8 * r + c);
  }
  const Grid<uint16_t> out = c1_pool(in, 4);
  REQUIRE(out.rows() == 1);
  REQUIRE(out.cols() == 1);
  CHECK(out(0, 0) == 63);
}

TEST_CASE("pooling a constant surface keeps the constant at the pooled size") {
  Grid<double> in(29, 29);
  for (int r = 0; r < 29; ++r) {
    for (int c = 0; c < 29; ++c) in(r, c) = 0.25;
  }
  const Grid<double> out = c1_pool(in, 4);
  REQUIRE(out.rows() == 6);
  REQUIRE(out.cols() == 6);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) CHECK(out(r, c) == 0.25);
  }
}

TEST_CASE("two-stage pooling equals one-shot window maxima for every period") {
  std::mt19937_64 g(19);
  for (int delta = 4; delta <= 11; ++delta) {
    const Grid<uint16_t> in = random_grid(45, 38, g);
    CHECK(c1_pool(in, delta) == hmaxtest::pool_direct_oracle(in, delta));

    const Grid<double> rin = random_real_grid(41, 47, g);
    CHECK(c1_pool(rin, delta) == hmaxtest::pool_direct_oracle(rin, delta));
  }
}

TEST_CASE("pooled values come from the pooled window") {
  // max-selection: each output must equal some input inside its window and
  // dominate everything else in it
  std::mt19937_64 g(23);
  const Grid<uint16_t> in = random_grid(29, 29, g);
  const int delta = 4;
  const Grid<uint16_t> out = c1_pool(in, delta);
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      bool found = false;
      for (int r = i * delta; r < (i + 2) * delta; ++r) {
        for (int c = j * delta; c < (j + 2) * delta; ++c) {
          CHECK(in(r, c) <= out(i, j));
          found = found || in(r, c) == out(i, j);
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("inputs narrower than one pooling window produce an empty grid") {
  std::mt19937_64 g(29);
  CHECK(c1_pool(random_grid(7, 10, g), 4).empty());
  CHECK(c1_pool(random_grid(10, 7, g), 4).empty());
  CHECK_FALSE(c1_pool(random_grid(8, 8, g), 4).empty());
  CHECK_THROWS_AS(c1_pool(random_grid(8, 8, g), 0), InvalidArgument);
}

TEST_CASE("full band stage reproduces the expected pooled sides at 128") {
  constexpr int expected[kBandCount] = {29, 22, 17, 14, 12, 10, 8, 7};
  std::mt19937_64 g(37);
  for (int b = 1; b <= kBandCount; ++b) {
    const BandParams bp = band_params(b);
    const int fine_side = 128 - bp.fine.diameter + 1;
    const int coarse_side = 128 - bp.coarse.diameter + 1;
    OrientedMaps<uint16_t> fine, coarse;
    fine.index = bp.fine.scale_index;
    coarse.index = bp.coarse.scale_index;
    for (int t = 0; t < kOrientations; ++t) {
      fine.planes[t] = random_grid(fine_side, fine_side, g);
      coarse.planes[t] = random_grid(coarse_side, coarse_side, g);
    }
    const C1Maps<uint16_t> pooled = c1_band(fine, coarse, b, bp.delta);
    CHECK(pooled.index == b);
    for (int t = 0; t < kOrientations; ++t) {
      CHECK(pooled.planes[t].rows() == expected[b - 1]);
      CHECK(pooled.planes[t].cols() == expected[b - 1]);
      CHECK(pooled.planes[t] ==
            hmaxtest::pool_direct_oracle(cross_scale_max(fine.planes[t], coarse.planes[t]),
                                         bp.delta));
    }
    CHECK(c1_exact_side(128, b) == expected[b - 1]);
  }
}

TEST_SUITE_END();
