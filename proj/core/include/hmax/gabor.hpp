#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hmax/grid.hpp"
#include "hmax/image.hpp"

namespace hmax {

inline constexpr int kScaleCount = 16;
inline constexpr int kBandCount = 8;

/// Arithmetic flavor of the feature path: double throughout, or the
/// integer datapath with 16-bit kernels and 16-bit normalized responses.
enum class Mode { kFloat, kFixed };

/// Filter geometry for one scale. diameter = 5 + 2*j, j in 1..16;
/// sigma/lambda follow the fixed parameter table; gamma is 1 so the
/// Gaussian envelope is isotropic and the diagonal filters decompose.
struct S1Params {
  int scale_index = 0;  // j, 1..16
  int diameter = 0;     // odd, 7..37
  double sigma = 0.0;
  double lambda = 0.0;
  double gamma = 1.0;
};

/// Scale pair and subsample period for one size band (b in 1..8):
/// delta = 3 + b, scales (2b-1, 2b).
struct BandParams {
  int band = 0;
  int delta = 0;
  S1Params fine;    // scale 2b-1, the smaller filter
  S1Params coarse;  // scale 2b, the larger filter
};

S1Params scale_params(int scale_index);
BandParams band_params(int band);

/// The three 1-D components of one scale's filter bank plus the
/// per-orientation constants that make the composed 2-D kernels zero-mean
/// with a fixed l2 norm (1 in float form, 65535 in quantized form).
///
/// Composition, with r the row offset and c the column offset:
///   F0(r,c)   = even(c) * gauss(r)
///   F90(r,c)  = even(r) * gauss(c)
///   F45(r,c)  = even(r)*even(c) + odd(r)*odd(c)
///   F135(r,c) = even(r)*even(c) - odd(r)*odd(c)
/// The effective kernel applied to an image patch p is
///   scale_factor * (F - mean_correction), normalized by ||p||.
struct SeparableKernelSet {
  int scale_index = 0;
  int diameter = 0;
  double sigma = 0.0;
  double lambda = 0.0;
  bool quantized = false;

  // Length-diameter samples at integer offsets. In quantized form the
  // entries are signed-16-bit integers stored exactly in double.
  std::vector<double> even;   // exp(-x^2/2s^2) cos(2 pi x / lambda)
  std::vector<double> gauss;  // exp(-x^2/2s^2)
  std::vector<double> odd;    // exp(-x^2/2s^2) sin(2 pi x / lambda)

  std::array<double, 4> mean_correction{};  // mean of composed kernel, per orientation
  std::array<double, 4> scale_factor{};     // maps zero-mean kernel to target norm

  int half() const { return (diameter - 1) / 2; }
};

/// Builds the kernel set for one scale. With quantize set, the 1-D
/// components are rounded to signed 16-bit at full amplitude and the
/// per-orientation constants are refit so the effective composed kernels
/// are exactly zero-mean with l2 norm 65535.
SeparableKernelSet make_kernels(const S1Params& p, bool quantize);

/// Effective composed 2-D kernel for one orientation (0..3), zero-mean and
/// scaled: scale_factor * (F_theta - mean_correction).
Grid<double> composed_kernel(const SeparableKernelSet& k, int orientation);

/// Window statistics over every valid diameter x diameter support:
/// l2 norm (sqrt of the sum of squared pixels) and plain pixel sum.
/// Computed by separable accumulation; exact integers under the sqrt.
/// An image smaller than the window yields empty grids.
struct SupportSums {
  Grid<double> norm;
  Grid<int64_t> sum;
};
SupportSums support_sums(const GrayImage& img, int diameter);

template <typename T>
using S1Maps = OrientedMaps<T>;

/// Normalized magnitude responses for all four orientations of one scale,
/// over valid supports only (grid side = image side - diameter + 1).
/// Float path: responses in [0, 1]. Requires an unquantized kernel set.
S1Maps<double> s1_apply_float(const GrayImage& img, const SeparableKernelSet& k);

/// Integer datapath: 16-bit kernels, exact integer accumulation, final
/// division rounded half away from zero and saturated at 65535.
/// Requires a quantized kernel set.
S1Maps<uint16_t> s1_apply_fixed(const GrayImage& img, const SeparableKernelSet& k);

/// Text dump of one kernel set, one block per orientation, used by the
/// golden tests and the `kernels` CLI subcommand. parse_kernel_dump reads
/// back what dump_kernels wrote (all orientations of all listed scales).
void dump_kernels(std::ostream& out, const SeparableKernelSet& k);
std::vector<SeparableKernelSet> parse_kernel_dump(std::istream& in);

}  // namespace hmax

