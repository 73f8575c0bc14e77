#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hmax/c1.hpp"

namespace hmax {

constexpr int kSizeClasses = 4;         // patch sides 4, 8, 12, 16
constexpr int kDefaultPerSize = 320;    // 1280 patches total

// A template lifted from a pooled map stack during imprinting. Coefficients
// are stored in the pooled-response scale (16-bit), orientation-major then
// row-major, 4 * side^2 values.
struct Patch {
  int size_class = 1;       // k in 1..4; the patch covers 4k x 4k cells
  uint16_t image_id = 0;    // index of the source image in the imprint corpus
  uint8_t band = 1;         // source band, 1..8
  uint16_t row = 0;         // anchor within the band's pooled grid
  uint16_t col = 0;
  std::vector<uint16_t> coeffs;

  int side() const { return 4 * size_class; }
  int coeff_count() const { return kOrientations * side() * side(); }
};

struct PatchDictionary {
  uint64_t seed = 0;
  std::vector<Patch> patches;
};

// Draws per_size patches of each size class (smallest first) uniformly over
// all admissible (image, band, anchor) positions in the corpus. Every
// random draw comes from a pinned generator so the result is reproducible
// from the seed alone. Throws ImprintError when some size class has no
// admissible position anywhere in the corpus.
PatchDictionary imprint(const std::vector<C1Stack<uint16_t>>& corpus, int per_size,
                        uint64_t seed);

// Squared Euclidean distance between the patch and every fully contained
// window of one band's pooled maps, summed over the four orientations.
// Bands too small for the patch give an empty grid. The float overload
// compares against coefficients mapped to [0, 1] (value / 65535).
Grid<uint64_t> s2_distance_map(const C1Maps<uint16_t>& band, const Patch& patch);
Grid<double> s2_distance_map(const C1Maps<double>& band, const Patch& patch);

// Largest value a distance against this patch can take; used as the feature
// for patches with no valid window in an image (and makes the scaled
// feature exactly 1).
uint64_t saturated_distance_fixed(const Patch& p);
double saturated_distance_float(const Patch& p);

// Running per-patch minimum over bands. absorb() may be called once per
// band, in any order; disjoint patch ranges may be absorbed from different
// threads. finish() fills patches that never saw a valid window with the
// saturated distance and optionally reports which ones those were.
template <typename CellT, typename DistT>
class BasicC2Accumulator {
 public:
  explicit BasicC2Accumulator(const PatchDictionary& dict);

  void absorb(const C1Maps<CellT>& band);
  void absorb(const C1Maps<CellT>& band, size_t patch_begin, size_t patch_end);
  std::vector<DistT> finish(std::vector<uint8_t>* saturated = nullptr) const;

 private:
  const PatchDictionary* dict_;
  std::vector<DistT> best_;
  std::vector<uint8_t> seen_;
};

using C2AccumulatorFixed = BasicC2Accumulator<uint16_t, uint64_t>;
using C2AccumulatorFloat = BasicC2Accumulator<double, double>;

// Single-call form: minimum distance per patch over all bands and positions.
std::vector<uint64_t> c2_features(const C1Stack<uint16_t>& stack, const PatchDictionary& dict,
                                  std::vector<uint8_t>* saturated = nullptr);
std::vector<double> c2_features(const C1Stack<double>& stack, const PatchDictionary& dict,
                                std::vector<uint8_t>* saturated = nullptr);

// Maps raw distances to [0, 1] by dividing by the per-patch saturated value.
std::vector<double> scale_features(const std::vector<uint64_t>& raw,
                                   const PatchDictionary& dict);
std::vector<double> scale_features(const std::vector<double>& raw,
                                   const PatchDictionary& dict);

void save_dictionary(std::ostream& out, const PatchDictionary& dict);
void save_dictionary(const std::string& path, const PatchDictionary& dict);
PatchDictionary load_dictionary(std::istream& in);
PatchDictionary load_dictionary(const std::string& path);

}  // namespace hmax
