#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hmax {

// Analytic model of the streaming hardware design: multiply-accumulate
// counts, per-stage on-chip memory, and per-stage cycle counts as closed
// formulas of the pixel count N (images are square, side sqrt(N)).

struct MacCounts {
  uint64_t dense;            // 2-D filtering, all 16 scales x 4 orientations
  uint64_t separable;        // same work as two 1-D passes
  uint64_t s2_per_location;  // all 1280 patches against one anchor
};

MacCounts mac_counts();

// Multiplications per location once mirrored taps are pre-summed: half of
// the separable MAC count.
uint64_t folded_multiplications();

struct ResourceReport {
  uint64_t pixels = 0;
  uint64_t s1_input_bits = 0;
  uint64_t s1_intermediate_bits = 0;
  uint64_t s1_filter_bits = 0;
  double c1_bits = 0;  // real-valued size formula, kept unfloored
  uint64_t s2_bits = 0;
  uint64_t c2_bits = 0;
  uint64_t classifier_bits = 0;  // host-side score layer, reported separately
  double total_bits = 0;         // on-chip stages only (classifier excluded)
  int counter_bits = 0;          // address counter width, ceil(log2 sqrt(N))
};

ResourceReport memory_report(uint64_t pixels);

// On-chip block RAM available on the reference device, in bits (14976 kb).
constexpr uint64_t kRamAvailableBits = 14976ull * 1024ull;

// How the S2 stage's valid-location count is derived from band geometry:
// kFormula takes sqrt of the aggregate (all-orientation) map-size formula,
// kExact uses the per-orientation pooled grid side the software computes.
enum class C1Convention { kFormula, kExact };

// Pooled grid side for one band of a square image, both ways.
int c1_exact_side(int image_side, int band);
double c1_formula_side(int image_side, int band);

struct TimingReport {
  uint64_t pixels = 0;
  double clock_hz = 0;
  uint64_t input_cycles = 0;  // one pixel per cycle
  uint64_t s1_cycles = 0;
  double s2_cycles = 0;  // fractional under kFormula
  uint64_t classifier_cycles = 0;
  uint64_t input_rate = 0;  // images per second, floored
  uint64_t s1_rate = 0;
  uint64_t s2_rate = 0;
  uint64_t classifier_rate = 0;
  std::string bottleneck;         // stage with the most cycles
  uint64_t pipeline_rate = 0;     // min over stage rates
};

TimingReport timing_report(uint64_t pixels, double clock_hz,
                           C1Convention convention = C1Convention::kExact);

// One CSV row per pixel count with every report field plus the constant
// RAM availability, for plotting memory and throughput against image size.
void scalability_csv(std::ostream& out, const std::vector<uint64_t>& pixel_counts,
                     double clock_hz, C1Convention convention = C1Convention::kExact);

}  // namespace hmax
