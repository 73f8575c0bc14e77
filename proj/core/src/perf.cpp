#include "hmax/perf.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "hmax/errors.hpp"
#include "hmax/gabor.hpp"
#include "hmax/s2.hpp"

namespace hmax {
namespace {

int checked_side(uint64_t pixels) {
  if (pixels == 0) {
    throw InvalidArgument("pixel count must be positive");
  }
  const auto side = static_cast<uint64_t>(std::llround(std::sqrt(double(pixels))));
  if (side * side != pixels) {
    throw InvalidArgument("pixel count " + std::to_string(pixels) +
                          " is not a perfect square");
  }
  return static_cast<int>(side);
}

int diameter(int scale) { return 5 + 2 * scale; }
int patch_side(int k) { return 4 * k; }

uint64_t floor_rate(double clock_hz, double cycles) {
  if (cycles <= 0.0) return 0;
  return static_cast<uint64_t>(clock_hz / cycles);
}

}  // namespace

MacCounts mac_counts() {
  MacCounts m{0, 0, 0};
  for (int j = 1; j <= kScaleCount; ++j) {
    const uint64_t d = diameter(j);
    m.dense += 4 * d * d;
    m.separable += 4 * 2 * d;
  }
  uint64_t area = 0;
  for (int k = 1; k <= kSizeClasses; ++k) {
    area += static_cast<uint64_t>(patch_side(k)) * patch_side(k);
  }
  m.s2_per_location = 250 * 4 * area;
  return m;
}

uint64_t folded_multiplications() { return mac_counts().separable / 2; }

int c1_exact_side(int image_side, int band) {
  const BandParams bp = band_params(band);
  const int s1_side = image_side - bp.coarse.diameter + 1;
  if (s1_side < 1) return 0;
  const int side = s1_side / bp.delta - 1;
  return side > 0 ? side : 0;
}

double c1_formula_side(int image_side, int band) {
  const BandParams bp = band_params(band);
  const double s1_side = image_side - bp.coarse.diameter + 1;
  if (s1_side < 1) return 0.0;
  // sqrt of the aggregate map size 4*s1_side^2 / delta^2
  return 2.0 * s1_side / bp.delta;
}

ResourceReport memory_report(uint64_t pixels) {
  const int side = checked_side(pixels);
  ResourceReport r;
  r.pixels = pixels;
  r.s1_input_bits = 4 * pixels * 8;
  r.s1_intermediate_bits = 5 * pixels * 23;
  r.s1_filter_bits = 0;
  for (int j = 1; j <= kScaleCount; ++j) {
    // two 1-D components per scale, folded to (diameter+1)/2 taps, 16 bits
    r.s1_filter_bits += 2ull * ((diameter(j) + 1) / 2) * 16;
  }
  r.c1_bits = 0.0;
  for (int b = 1; b <= kBandCount; ++b) {
    const BandParams bp = band_params(b);
    const double s1_side = side - bp.coarse.diameter + 1;
    if (s1_side < 1) continue;
    const double map_size = 4.0 * s1_side * s1_side / double(bp.delta * bp.delta);
    r.c1_bits += map_size * 16.0;
  }
  r.s2_bits = 0;
  for (int k = 1; k <= kSizeClasses; ++k) {
    r.s2_bits += 320ull * 4 * patch_side(k) * patch_side(k) * 16;
  }
  r.c2_bits = 1280 * 42;
  r.classifier_bits = 102ull * 1280 * 32 + 84;
  r.total_bits = double(r.s1_input_bits) + double(r.s1_intermediate_bits) +
                 double(r.s1_filter_bits) + r.c1_bits + double(r.s2_bits) +
                 double(r.c2_bits);
  r.counter_bits = static_cast<int>(std::ceil(std::log2(double(side))));
  return r;
}

TimingReport timing_report(uint64_t pixels, double clock_hz, C1Convention convention) {
  const int side = checked_side(pixels);
  if (clock_hz <= 0.0) {
    throw InvalidArgument("clock rate must be positive");
  }
  TimingReport t;
  t.pixels = pixels;
  t.clock_hz = clock_hz;
  t.input_cycles = pixels;
  t.s1_cycles = 2 * pixels * kScaleCount;
  t.classifier_cycles = 1280ull * 102;

  t.s2_cycles = 0.0;
  for (int b = 1; b <= kBandCount; ++b) {
    const double c1_side = convention == C1Convention::kExact
                               ? double(c1_exact_side(side, b))
                               : c1_formula_side(side, b);
    for (int k = 1; k <= kSizeClasses; ++k) {
      const int ps = patch_side(k);
      const double span = c1_side - ps + 1;
      if (span < 1.0) continue;  // band too small for this patch size
      t.s2_cycles += span * span * double(ps * ps) * 2.0;
    }
  }

  t.input_rate = floor_rate(clock_hz, double(t.input_cycles));
  t.s1_rate = floor_rate(clock_hz, double(t.s1_cycles));
  t.s2_rate = floor_rate(clock_hz, t.s2_cycles);
  t.classifier_rate = floor_rate(clock_hz, double(t.classifier_cycles));

  struct Stage {
    const char* name;
    double cycles;
    uint64_t rate;
  };
  const Stage stages[4] = {{"input", double(t.input_cycles), t.input_rate},
                           {"S1", double(t.s1_cycles), t.s1_rate},
                           {"S2", t.s2_cycles, t.s2_rate},
                           {"classifier", double(t.classifier_cycles), t.classifier_rate}};
  const Stage* worst = &stages[0];
  for (const Stage& s : stages) {
    if (s.cycles > worst->cycles) worst = &s;
  }
  t.bottleneck = worst->name;
  t.pipeline_rate = worst->rate;
  for (const Stage& s : stages) {
    if (s.rate < t.pipeline_rate) t.pipeline_rate = s.rate;
  }
  return t;
}

void scalability_csv(std::ostream& out, const std::vector<uint64_t>& pixel_counts,
                     double clock_hz, C1Convention convention) {
  out << "pixels,image_side,s1_input_bits,s1_intermediate_bits,s1_filter_bits,c1_bits,"
         "s2_bits,c2_bits,classifier_bits,total_bits,ram_available_bits,counter_bits,"
         "input_cycles,s1_cycles,s2_cycles,classifier_cycles,input_rate,s1_rate,s2_rate,"
         "classifier_rate,bottleneck,pipeline_rate\n";
  char buf[64];
  auto real = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (uint64_t n : pixel_counts) {
    const ResourceReport m = memory_report(n);
    const TimingReport t = timing_report(n, clock_hz, convention);
    out << n << ',' << checked_side(n) << ',' << m.s1_input_bits << ','
        << m.s1_intermediate_bits << ',' << m.s1_filter_bits << ',' << real(m.c1_bits) << ','
        << m.s2_bits << ',' << m.c2_bits << ',' << m.classifier_bits << ','
        << real(m.total_bits) << ',' << kRamAvailableBits << ',' << m.counter_bits << ','
        << t.input_cycles << ',' << t.s1_cycles << ',' << real(t.s2_cycles) << ','
        << t.classifier_cycles << ',' << t.input_rate << ',' << t.s1_rate << ','
        << t.s2_rate << ',' << t.classifier_rate << ',' << t.bottleneck << ','
        << t.pipeline_rate << '\n';
  }
  if (!out) throw IoError("failed writing scalability table");
}

}  // namespace hmax
