#include "hmax/gabor.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hmax/errors.hpp"

namespace hmax {
namespace {

// sigma/lambda per scale index 1..16. Adjacent pairs form the 8 size bands.
constexpr struct {
  double sigma, lambda;
} kScaleTable[kScaleCount] = {
    {1.3, 3.9},  {1.7, 5.0},  {2.1, 6.2},  {2.5, 7.4},  {2.9, 8.7},  {3.3, 10.0},
    {3.8, 11.3}, {4.2, 12.7}, {4.7, 14.1}, {5.2, 15.5}, {5.7, 17.0}, {6.2, 18.5},
    {6.7, 20.1}, {7.2, 21.7}, {7.8, 23.3}, {8.3, 25.0}};

constexpr double kQuantAmplitude = 32767.0;  // peak 1-D component value is 1
constexpr double kFixedNormTarget = 65535.0;

// Reductions over one component pair (u along rows, v along columns) of a
// composed kernel, done with the center+mirror structure so that odd
// symmetry cancels exactly in floating point.
struct ComponentSums {
  double sum = 0.0;     // sum of samples
  double sum_sq = 0.0;  // sum of squared samples
};

ComponentSums reduce(const std::vector<double>& c) {
  const int h = (static_cast<int>(c.size()) - 1) / 2;
  ComponentSums s;
  s.sum = c[h];
  s.sum_sq = c[h] * c[h];
  for (int d = 1; d <= h; ++d) {
    s.sum += c[h + d] + c[h - d];
    s.sum_sq += c[h + d] * c[h + d] + c[h - d] * c[h - d];
  }
  return s;
}

// Fills mean_correction and scale_factor for every orientation from the
// 1-D sums. For a rank-1 kernel u x v: sum(K) = sum(u)sum(v) and
// sum(K^2) = sumsq(u)sumsq(v). The even/odd cross term sum(e*o) is zero
// by symmetry, so the diagonal kernels reduce the same way.
void fit_orientation_constants(SeparableKernelSet& k, double norm_target) {
  const double n = static_cast<double>(k.diameter) * k.diameter;
  const ComponentSums e = reduce(k.even);
  const ComponentSums g = reduce(k.gauss);
  const ComponentSums o = reduce(k.odd);

  const double sum0 = e.sum * g.sum;
  const double sq0 = e.sum_sq * g.sum_sq;
  const double sum45 = e.sum * e.sum + o.sum * o.sum;
  const double sq45 = e.sum_sq * e.sum_sq + o.sum_sq * o.sum_sq;

  const double sums[4] = {sum0, sum45, sum0, sum45};
  const double sqs[4] = {sq0, sq45, sq0, sq45};
  for (int t = 0; t < kOrientations; ++t) {
    k.mean_correction[t] = sums[t] / n;
    const double centered_sq = sqs[t] - sums[t] * sums[t] / n;
    k.scale_factor[t] = norm_target / std::sqrt(centered_sq);
  }
}

// Folded 1-D passes. taps has odd length; for even symmetry the mirrored
// taps are equal, for odd symmetry they differ in sign, so each pair is
// applied with one multiply. The pairwise grouping also makes the mirror
// image of a response grid bit-exact.

template <typename K, typename A, typename Src>
void hpass(const Src& src, int rows, int cols, const std::vector<K>& taps, bool odd_sym,
           Grid<A>& out) {
  const int dia = static_cast<int>(taps.size());
  const int h = (dia - 1) / 2;
  const int out_cols = cols - dia + 1;
  out = Grid<A>(rows, out_cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      A acc = taps[h] * static_cast<A>(src(r, c + h));
      if (odd_sym) {
        for (int d = 1; d <= h; ++d) {
          acc += taps[h + d] *
                 (static_cast<A>(src(r, c + h + d)) - static_cast<A>(src(r, c + h - d)));
        }
      } else {
        for (int d = 1; d <= h; ++d) {
          acc += taps[h + d] *
                 (static_cast<A>(src(r, c + h + d)) + static_cast<A>(src(r, c + h - d)));
        }
      }
      out(r, c) = acc;
    }
  }
}

template <typename K, typename A>
void vpass(const Grid<A>& src, const std::vector<K>& taps, bool odd_sym, Grid<A>& out) {
  const int dia = static_cast<int>(taps.size());
  const int h = (dia - 1) / 2;
  const int out_rows = src.rows() - dia + 1;
  out = Grid<A>(out_rows, src.cols());
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < src.cols(); ++c) {
      A acc = taps[h] * src(r + h, c);
      if (odd_sym) {
        for (int d = 1; d <= h; ++d) {
          acc += taps[h + d] * (src(r + h + d, c) - src(r + h - d, c));
        }
      } else {
        for (int d = 1; d <= h; ++d) {
          acc += taps[h + d] * (src(r + h + d, c) + src(r + h - d, c));
        }
      }
      out(r, c) = acc;
    }
  }
}

struct PixelView {
  const GrayImage& img;
  int operator()(int r, int c) const { return img.at(r, c); }
};

void check_support(const GrayImage& img, const SeparableKernelSet& k) {
  if (img.width < k.diameter || img.height < k.diameter) {
    throw InvalidArgument("image smaller than kernel support (diameter " +
                          std::to_string(k.diameter) + ")");
  }
}

}  // namespace

S1Params scale_params(int scale_index) {
  if (scale_index < 1 || scale_index > kScaleCount) {
    throw InvalidArgument("scale index must be in 1..16, got " + std::to_string(scale_index));
  }
  S1Params p;
  p.scale_index = scale_index;
  p.diameter = 5 + 2 * scale_index;
  p.sigma = kScaleTable[scale_index - 1].sigma;
  p.lambda = kScaleTable[scale_index - 1].lambda;
  p.gamma = 1.0;
  return p;
}

BandParams band_params(int band) {
  if (band < 1 || band > kBandCount) {
    throw InvalidArgument("band index must be in 1..8, got " + std::to_string(band));
  }
  BandParams b;
  b.band = band;
  b.delta = 3 + band;
  b.fine = scale_params(2 * band - 1);
  b.coarse = scale_params(2 * band);
  return b;
}

SeparableKernelSet make_kernels(const S1Params& p, bool quantize) {
  if (p.diameter != 5 + 2 * p.scale_index || p.diameter % 2 == 0) {
    throw InvalidArgument("inconsistent S1Params diameter");
  }
  SeparableKernelSet k;
  k.scale_index = p.scale_index;
  k.diameter = p.diameter;
  k.sigma = p.sigma;
  k.lambda = p.lambda;
  k.quantized = quantize;
  k.even.resize(p.diameter);
  k.gauss.resize(p.diameter);
  k.odd.resize(p.diameter);

  const int h = (p.diameter - 1) / 2;
  const double two_sigma_sq = 2.0 * p.sigma * p.sigma;
  const double omega = 2.0 * std::numbers::pi / p.lambda;
  // Sample nonnegative offsets and mirror, so the even/odd symmetry is
  // exact at the bit level (quantization preserves it: llround is odd).
  for (int d = 0; d <= h; ++d) {
    const double x = static_cast<double>(d);
    double env = std::exp(-x * x / two_sigma_sq);
    double e = env * std::cos(omega * x);
    double g = env;  // gamma = 1
    double o = env * std::sin(omega * x);
    if (quantize) {
      e = static_cast<double>(std::llround(kQuantAmplitude * e));
      g = static_cast<double>(std::llround(kQuantAmplitude * g));
      o = static_cast<double>(std::llround(kQuantAmplitude * o));
    }
    k.even[h + d] = e;
    k.even[h - d] = e;
    k.gauss[h + d] = g;
    k.gauss[h - d] = g;
    k.odd[h + d] = o;
    k.odd[h - d] = -o;
  }
  k.odd[h] = 0.0;

  fit_orientation_constants(k, quantize ? kFixedNormTarget : 1.0);
  return k;
}

Grid<double> composed_kernel(const SeparableKernelSet& k, int orientation) {
  if (orientation < 0 || orientation >= kOrientations) {
    throw InvalidArgument("orientation index must be in 0..3");
  }
  const int n = k.diameter;
  Grid<double> out(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double v = 0.0;
      switch (orientation) {
        case 0: v = k.even[c] * k.gauss[r]; break;
        case 1: v = k.even[r] * k.even[c] + k.odd[r] * k.odd[c]; break;
        case 2: v = k.even[r] * k.gauss[c]; break;
        case 3: v = k.even[r] * k.even[c] - k.odd[r] * k.odd[c]; break;
      }
      out(r, c) = k.scale_factor[orientation] * (v - k.mean_correction[orientation]);
    }
  }
  return out;
}

SupportSums support_sums(const GrayImage& img, int diameter) {
  SupportSums out;
  if (img.width < diameter || img.height < diameter) {
    return out;  // no valid support
  }
  const int rows = img.height;
  const int out_cols = img.width - diameter + 1;
  const int out_rows = img.height - diameter + 1;

  // Horizontal sliding sums of p and p^2 per row, then vertical sliding.
  Grid<int64_t> row_s(rows, out_cols);
  Grid<int64_t> row_q(rows, out_cols);
  for (int r = 0; r < rows; ++r) {
    int64_t s = 0, q = 0;
    for (int c = 0; c < diameter; ++c) {
      const int64_t p = img.at(r, c);
      s += p;
      q += p * p;
    }
    row_s(r, 0) = s;
    row_q(r, 0) = q;
    for (int c = 1; c < out_cols; ++c) {
      const int64_t in = img.at(r, c + diameter - 1);
      const int64_t ex = img.at(r, c - 1);
      s += in - ex;
      q += in * in - ex * ex;
      row_s(r, c) = s;
      row_q(r, c) = q;
    }
  }

  out.sum = Grid<int64_t>(out_rows, out_cols);
  out.norm = Grid<double>(out_rows, out_cols);
  std::vector<int64_t> acc_s(out_cols, 0), acc_q(out_cols, 0);
  for (int r = 0; r < diameter; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      acc_s[c] += row_s(r, c);
      acc_q[c] += row_q(r, c);
    }
  }
  for (int r = 0;; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      out.sum(r, c) = acc_s[c];
      out.norm(r, c) = std::sqrt(static_cast<double>(acc_q[c]));
    }
    if (r + 1 >= out_rows) break;
    for (int c = 0; c < out_cols; ++c) {
      acc_s[c] += row_s(r + diameter, c) - row_s(r, c);
      acc_q[c] += row_q(r + diameter, c) - row_q(r, c);
    }
  }
  return out;
}

S1Maps<double> s1_apply_float(const GrayImage& img, const SeparableKernelSet& k) {
  check_support(img, k);
  if (k.quantized) {
    throw InvalidArgument("s1_apply_float requires an unquantized kernel set");
  }
  const SupportSums ss = support_sums(img, k.diameter);
  const PixelView px{img};

  Grid<double> row_e, row_g, row_o;
  hpass<double, double>(px, img.height, img.width, k.even, false, row_e);
  hpass<double, double>(px, img.height, img.width, k.gauss, false, row_g);
  hpass<double, double>(px, img.height, img.width, k.odd, true, row_o);

  Grid<double> raw0, raw90, raw_ee, raw_oo;
  vpass(row_e, k.gauss, false, raw0);
  vpass(row_g, k.even, false, raw90);
  vpass(row_e, k.even, false, raw_ee);
  vpass(row_o, k.odd, true, raw_oo);

  S1Maps<double> maps;
  maps.index = k.scale_index;
  const int rows = raw0.rows(), cols = raw0.cols();
  for (int t = 0; t < kOrientations; ++t) {
    maps.planes[t] = Grid<double>(rows, cols);
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double nrm = ss.norm(r, c);
      if (nrm == 0.0) {
        for (int t = 0; t < kOrientations; ++t) maps.planes[t](r, c) = 0.0;
        continue;
      }
      const double s = static_cast<double>(ss.sum(r, c));
      const double raws[4] = {raw0(r, c), raw_ee(r, c) + raw_oo(r, c), raw90(r, c),
                              raw_ee(r, c) - raw_oo(r, c)};
      for (int t = 0; t < kOrientations; ++t) {
        const double num = raws[t] - k.mean_correction[t] * s;
        maps.planes[t](r, c) = k.scale_factor[t] * std::abs(num) / nrm;
      }
    }
  }
  return maps;
}

S1Maps<uint16_t> s1_apply_fixed(const GrayImage& img, const SeparableKernelSet& k) {
  check_support(img, k);
  if (!k.quantized) {
    throw InvalidArgument("s1_apply_fixed requires a quantized kernel set");
  }
  const SupportSums ss = support_sums(img, k.diameter);
  const PixelView px{img};
  const int dia = k.diameter;
  const int64_t n_taps = static_cast<int64_t>(dia) * dia;

  std::vector<int64_t> even(dia), gauss(dia), odd(dia);
  int64_t sum_e = 0, sum_g = 0;
  for (int i = 0; i < dia; ++i) {
    even[i] = static_cast<int64_t>(k.even[i]);
    gauss[i] = static_cast<int64_t>(k.gauss[i]);
    odd[i] = static_cast<int64_t>(k.odd[i]);
    sum_e += even[i];
    sum_g += gauss[i];
  }
  // Integer kernel sums per orientation; sum(odd) is 0 by symmetry.
  const int64_t ksum[4] = {sum_e * sum_g, sum_e * sum_e, sum_e * sum_g, sum_e * sum_e};

  Grid<int64_t> row_e, row_g, row_o;
  hpass<int64_t, int64_t>(px, img.height, img.width, even, false, row_e);
  hpass<int64_t, int64_t>(px, img.height, img.width, gauss, false, row_g);
  hpass<int64_t, int64_t>(px, img.height, img.width, odd, true, row_o);

  Grid<int64_t> raw0, raw90, raw_ee, raw_oo;
  vpass(row_e, gauss, false, raw0);
  vpass(row_g, even, false, raw90);
  vpass(row_e, even, false, raw_ee);
  vpass(row_o, odd, true, raw_oo);

  S1Maps<uint16_t> maps;
  maps.index = k.scale_index;
  const int rows = raw0.rows(), cols = raw0.cols();
  for (int t = 0; t < kOrientations; ++t) {
    maps.planes[t] = Grid<uint16_t>(rows, cols);
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double nrm = ss.norm(r, c);
      if (nrm == 0.0) {
        for (int t = 0; t < kOrientations; ++t) maps.planes[t](r, c) = 0;
        continue;
      }
      const int64_t s = ss.sum(r, c);
      const int64_t raws[4] = {raw0(r, c), raw_ee(r, c) + raw_oo(r, c), raw90(r, c),
                               raw_ee(r, c) - raw_oo(r, c)};
      for (int t = 0; t < kOrientations; ++t) {
        // Zero-mean correction kept in exact integers: diameter^2 * raw
        // minus kernel-sum * patch-sum, then one double divide at the end.
        int64_t num = n_taps * raws[t] - ksum[t] * s;
        if (num < 0) num = -num;
        const double resp =
            k.scale_factor[t] * static_cast<double>(num) / (static_cast<double>(n_taps) * nrm);
        long long q = std::llround(resp);  // rounds half away from zero
        if (q > 65535) q = 65535;
        maps.planes[t](r, c) = static_cast<uint16_t>(q);
      }
    }
  }
  return maps;
}

void dump_kernels(std::ostream& out, const SeparableKernelSet& k) {
  std::ostringstream os;
  os.precision(17);
  for (int t = 0; t < kOrientations; ++t) {
    os << "kernel scale=" << k.scale_index << " orient=" << kOrientationDegrees[t]
       << " diameter=" << k.diameter << " sigma=" << k.sigma << " lambda=" << k.lambda
       << " quantized=" << (k.quantized ? 1 : 0) << "\n";
    os << "scale_factor " << k.scale_factor[t] << "\n";
    os << "mu " << k.mean_correction[t] << "\n";
    const char* names[3] = {"e", "g", "o"};
    const std::vector<double>* comps[3] = {&k.even, &k.gauss, &k.odd};
    for (int i = 0; i < 3; ++i) {
      os << names[i];
      for (double v : *comps[i]) os << ' ' << v;
      os << "\n";
    }
    os << "end\n";
  }
  out << os.str();
}

std::vector<SeparableKernelSet> parse_kernel_dump(std::istream& in) {
  std::vector<SeparableKernelSet> sets;
  std::string line;
  auto find_set = [&sets](int scale) -> SeparableKernelSet* {
    for (auto& s : sets) {
      if (s.scale_index == scale) return &s;
    }
    return nullptr;
  };
  while (std::getline(in, line)) {
    if (line.rfind("kernel ", 0) != 0) continue;
    int scale = 0, orient_deg = -1, diameter = 0, quant = 0;
    double sigma = 0, lambda = 0;
    {
      std::istringstream hs(line.substr(7));
      std::string field;
      while (hs >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw FormatError("kernel dump: bad header field " + field);
        const std::string key = field.substr(0, eq);
        const std::string val = field.substr(eq + 1);
        if (key == "scale") scale = std::stoi(val);
        else if (key == "orient") orient_deg = std::stoi(val);
        else if (key == "diameter") diameter = std::stoi(val);
        else if (key == "sigma") sigma = std::stod(val);
        else if (key == "lambda") lambda = std::stod(val);
        else if (key == "quantized") quant = std::stoi(val);
      }
    }
    int orient = -1;
    for (int t = 0; t < kOrientations; ++t) {
      if (kOrientationDegrees[t] == orient_deg) orient = t;
    }
    if (orient < 0 || diameter < 7 || diameter % 2 == 0) {
      throw FormatError("kernel dump: bad block header: " + line);
    }
    SeparableKernelSet* set = find_set(scale);
    if (set == nullptr) {
      sets.emplace_back();
      set = &sets.back();
      set->scale_index = scale;
      set->diameter = diameter;
      set->sigma = sigma;
      set->lambda = lambda;
      set->quantized = quant != 0;
      set->even.resize(diameter);
      set->gauss.resize(diameter);
      set->odd.resize(diameter);
    }
    double sf = 0.0, mu = 0.0;
    bool have_sf = false, have_mu = false, have_end = false;
    while (std::getline(in, line)) {
      if (line == "end") {
        have_end = true;
        break;
      }
      std::istringstream ls(line);
      std::string tag;
      ls >> tag;
      if (tag == "scale_factor") {
        ls >> sf;
        have_sf = true;
      } else if (tag == "mu") {
        ls >> mu;
        have_mu = true;
      } else if (tag == "e" || tag == "g" || tag == "o") {
        std::vector<double>& dst =
            tag == "e" ? set->even : (tag == "g" ? set->gauss : set->odd);
        for (int i = 0; i < diameter; ++i) {
          if (!(ls >> dst[i])) throw FormatError("kernel dump: short component line");
        }
      } else {
        throw FormatError("kernel dump: unexpected line: " + line);
      }
    }
    if (!have_end || !have_sf || !have_mu) {
      throw FormatError("kernel dump: truncated block");
    }
    set->scale_factor[orient] = sf;
    set->mean_correction[orient] = mu;
  }
  return sets;
}

}  // namespace hmax
