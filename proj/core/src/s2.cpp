#include "hmax/s2.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "hmax/errors.hpp"
#include "hmax/rng.hpp"
#include "wire.hpp"

namespace hmax {
namespace {

constexpr char kDictMagic[4] = {'H', 'M', 'X', 'P'};
constexpr uint32_t kDictVersion = 1;

void check_patch(const Patch& p) {
  if (p.size_class < 1 || p.size_class > kSizeClasses) {
    throw InvalidArgument("patch size class must be in 1..4");
  }
  if (static_cast<int>(p.coeffs.size()) != p.coeff_count()) {
    throw InvalidArgument("patch has " + std::to_string(p.coeffs.size()) +
                          " coefficients, expected " + std::to_string(p.coeff_count()));
  }
}

// Distance between the patch and the window anchored at (r0, c0). The
// inner loops run over contiguous rows of both operands.
uint64_t window_distance(const C1Maps<uint16_t>& band, const Patch& p, int r0, int c0) {
  const int side = p.side();
  uint64_t acc = 0;
  const uint16_t* coeff = p.coeffs.data();
  for (int t = 0; t < kOrientations; ++t) {
    const Grid<uint16_t>& plane = band.planes[t];
    for (int r = 0; r < side; ++r) {
      const uint16_t* cell = &plane(r0 + r, c0);
      for (int c = 0; c < side; ++c) {
        const int64_t d = static_cast<int64_t>(cell[c]) - static_cast<int64_t>(coeff[c]);
        acc += static_cast<uint64_t>(d * d);
      }
      coeff += side;
    }
  }
  return acc;
}

double window_distance(const C1Maps<double>& band, const std::vector<double>& coeffs, int side,
                       int r0, int c0) {
  double acc = 0.0;
  const double* coeff = coeffs.data();
  for (int t = 0; t < kOrientations; ++t) {
    const Grid<double>& plane = band.planes[t];
    for (int r = 0; r < side; ++r) {
      const double* cell = &plane(r0 + r, c0);
      for (int c = 0; c < side; ++c) {
        const double d = cell[c] - coeff[c];
        acc += d * d;
      }
      coeff += side;
    }
  }
  return acc;
}

std::vector<double> unit_coeffs(const Patch& p) {
  std::vector<double> out(p.coeffs.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(p.coeffs[i]) / 65535.0;
  }
  return out;
}

}  // namespace

PatchDictionary imprint(const std::vector<C1Stack<uint16_t>>& corpus, int per_size,
                        uint64_t seed) {
  if (corpus.empty()) {
    throw ImprintError("imprint requires a non-empty corpus");
  }
  if (corpus.size() > 65536) {
    throw InvalidArgument("imprint corpus exceeds 16-bit image ids");
  }
  if (per_size < 1) {
    throw InvalidArgument("per_size must be positive");
  }

  PatchDictionary dict;
  dict.seed = seed;
  dict.patches.reserve(static_cast<size_t>(per_size) * kSizeClasses);
  std::mt19937_64 rng(seed);

  struct Site {
    uint32_t image;
    uint8_t band;     // 0-based here
    uint32_t rows, cols;  // admissible anchor counts
  };

  for (int k = 1; k <= kSizeClasses; ++k) {
    const int side = 4 * k;
    std::vector<Site> sites;
    uint64_t total = 0;
    for (size_t i = 0; i < corpus.size(); ++i) {
      for (int b = 0; b < kBandCount; ++b) {
        const Grid<uint16_t>& plane = corpus[i][b].planes[0];
        const int ar = plane.rows() - side + 1;
        const int ac = plane.cols() - side + 1;
        if (ar >= 1 && ac >= 1) {
          sites.push_back({static_cast<uint32_t>(i), static_cast<uint8_t>(b),
                           static_cast<uint32_t>(ar), static_cast<uint32_t>(ac)});
          total += static_cast<uint64_t>(ar) * ac;
        }
      }
    }
    if (total == 0) {
      throw ImprintError("no admissible anchor in the corpus for patch side " +
                         std::to_string(side));
    }
    for (int n = 0; n < per_size; ++n) {
      uint64_t u = bounded_draw(rng, total);
      const Site* site = nullptr;
      for (const Site& s : sites) {
        const uint64_t count = static_cast<uint64_t>(s.rows) * s.cols;
        if (u < count) {
          site = &s;
          break;
        }
        u -= count;
      }
      const int r0 = static_cast<int>(u / site->cols);
      const int c0 = static_cast<int>(u % site->cols);

      Patch p;
      p.size_class = k;
      p.image_id = static_cast<uint16_t>(site->image);
      p.band = static_cast<uint8_t>(site->band + 1);
      p.row = static_cast<uint16_t>(r0);
      p.col = static_cast<uint16_t>(c0);
      p.coeffs.reserve(p.coeff_count());
      const C1Stack<uint16_t>& stack = corpus[site->image];
      for (int t = 0; t < kOrientations; ++t) {
        const Grid<uint16_t>& plane = stack[site->band].planes[t];
        for (int r = 0; r < side; ++r) {
          const uint16_t* cell = &plane(r0 + r, c0);
          p.coeffs.insert(p.coeffs.end(), cell, cell + side);
        }
      }
      dict.patches.push_back(std::move(p));
    }
  }
  return dict;
}

Grid<uint64_t> s2_distance_map(const C1Maps<uint16_t>& band, const Patch& patch) {
  check_patch(patch);
  const int side = patch.side();
  const int rows = band.planes[0].rows() - side + 1;
  const int cols = band.planes[0].cols() - side + 1;
  if (rows < 1 || cols < 1) return Grid<uint64_t>();
  Grid<uint64_t> out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out(r, c) = window_distance(band, patch, r, c);
    }
  }
  return out;
}

Grid<double> s2_distance_map(const C1Maps<double>& band, const Patch& patch) {
  check_patch(patch);
  const int side = patch.side();
  const int rows = band.planes[0].rows() - side + 1;
  const int cols = band.planes[0].cols() - side + 1;
  if (rows < 1 || cols < 1) return Grid<double>();
  const std::vector<double> coeffs = unit_coeffs(patch);
  Grid<double> out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out(r, c) = window_distance(band, coeffs, side, r, c);
    }
  }
  return out;
}

uint64_t saturated_distance_fixed(const Patch& p) {
  const uint64_t elems = static_cast<uint64_t>(p.coeff_count());
  return elems * 65535ull * 65535ull;
}

double saturated_distance_float(const Patch& p) {
  return static_cast<double>(p.coeff_count());
}

template <typename CellT, typename DistT>
BasicC2Accumulator<CellT, DistT>::BasicC2Accumulator(const PatchDictionary& dict)
    : dict_(&dict),
      best_(dict.patches.size(), std::numeric_limits<DistT>::max()),
      seen_(dict.patches.size(), 0) {
  for (const Patch& p : dict.patches) check_patch(p);
}

template <typename CellT, typename DistT>
void BasicC2Accumulator<CellT, DistT>::absorb(const C1Maps<CellT>& band) {
  absorb(band, 0, dict_->patches.size());
}

template <typename CellT, typename DistT>
void BasicC2Accumulator<CellT, DistT>::absorb(const C1Maps<CellT>& band, size_t patch_begin,
                                              size_t patch_end) {
  for (size_t i = patch_begin; i < patch_end && i < dict_->patches.size(); ++i) {
    const Patch& p = dict_->patches[i];
    const int side = p.side();
    const int rows = band.planes[0].rows() - side + 1;
    const int cols = band.planes[0].cols() - side + 1;
    if (rows < 1 || cols < 1) continue;
    DistT best = best_[i];
    if constexpr (std::is_same_v<CellT, uint16_t>) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          best = std::min(best, window_distance(band, p, r, c));
        }
      }
    } else {
      const std::vector<double> coeffs = unit_coeffs(p);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          best = std::min(best, window_distance(band, coeffs, side, r, c));
        }
      }
    }
    best_[i] = best;
    seen_[i] = 1;
  }
}

template <typename CellT, typename DistT>
std::vector<DistT> BasicC2Accumulator<CellT, DistT>::finish(
    std::vector<uint8_t>* saturated) const {
  std::vector<DistT> out(best_.size());
  if (saturated != nullptr) saturated->assign(best_.size(), 0);
  for (size_t i = 0; i < best_.size(); ++i) {
    if (seen_[i]) {
      out[i] = best_[i];
    } else {
      const Patch& p = dict_->patches[i];
      if constexpr (std::is_same_v<DistT, uint64_t>) {
        out[i] = saturated_distance_fixed(p);
      } else {
        out[i] = saturated_distance_float(p);
      }
      if (saturated != nullptr) (*saturated)[i] = 1;
    }
  }
  return out;
}

template class BasicC2Accumulator<uint16_t, uint64_t>;
template class BasicC2Accumulator<double, double>;

std::vector<uint64_t> c2_features(const C1Stack<uint16_t>& stack, const PatchDictionary& dict,
                                  std::vector<uint8_t>* saturated) {
  C2AccumulatorFixed acc(dict);
  for (const auto& band : stack) acc.absorb(band);
  return acc.finish(saturated);
}

std::vector<double> c2_features(const C1Stack<double>& stack, const PatchDictionary& dict,
                                std::vector<uint8_t>* saturated) {
  C2AccumulatorFloat acc(dict);
  for (const auto& band : stack) acc.absorb(band);
  return acc.finish(saturated);
}

std::vector<double> scale_features(const std::vector<uint64_t>& raw,
                                   const PatchDictionary& dict) {
  if (raw.size() != dict.patches.size()) {
    throw InvalidArgument("feature vector length does not match the dictionary");
  }
  std::vector<double> out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    out[i] = static_cast<double>(raw[i]) /
             static_cast<double>(saturated_distance_fixed(dict.patches[i]));
  }
  return out;
}

std::vector<double> scale_features(const std::vector<double>& raw,
                                   const PatchDictionary& dict) {
  if (raw.size() != dict.patches.size()) {
    throw InvalidArgument("feature vector length does not match the dictionary");
  }
  std::vector<double> out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    out[i] = raw[i] / saturated_distance_float(dict.patches[i]);
  }
  return out;
}

void save_dictionary(std::ostream& out, const PatchDictionary& dict) {
  wire::put_magic(out, kDictMagic);
  wire::put_u32(out, kDictVersion);
  wire::put_u64(out, dict.seed);
  wire::put_u32(out, static_cast<uint32_t>(dict.patches.size()));
  for (const Patch& p : dict.patches) {
    check_patch(p);
    wire::put_u8(out, static_cast<uint8_t>(p.size_class));
    wire::put_u16(out, p.image_id);
    wire::put_u8(out, p.band);
    wire::put_u16(out, p.row);
    wire::put_u16(out, p.col);
    for (uint16_t v : p.coeffs) wire::put_u16(out, v);
  }
  if (!out) throw IoError("failed writing patch dictionary");
}

void save_dictionary(const std::string& path, const PatchDictionary& dict) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  save_dictionary(out, dict);
  if (!out.flush()) throw IoError("failed writing " + path);
}

PatchDictionary load_dictionary(std::istream& in) {
  wire::check_magic(in, kDictMagic, "patch dictionary");
  wire::check_version(in, kDictVersion, "patch dictionary");
  PatchDictionary dict;
  dict.seed = wire::get_u64(in, "dictionary seed");
  const uint32_t total = wire::get_u32(in, "patch count");
  dict.patches.reserve(total);
  for (uint32_t i = 0; i < total; ++i) {
    Patch p;
    p.size_class = wire::get_u8(in, "patch size class");
    p.image_id = wire::get_u16(in, "patch image id");
    p.band = wire::get_u8(in, "patch band");
    p.row = wire::get_u16(in, "patch row");
    p.col = wire::get_u16(in, "patch col");
    if (p.size_class < 1 || p.size_class > kSizeClasses) {
      throw FormatError("patch dictionary: bad size class " + std::to_string(p.size_class));
    }
    if (p.band < 1 || p.band > kBandCount) {
      throw FormatError("patch dictionary: bad band " + std::to_string(int(p.band)));
    }
    p.coeffs.resize(p.coeff_count());
    for (auto& v : p.coeffs) v = wire::get_u16(in, "patch coefficient");
    dict.patches.push_back(std::move(p));
  }
  return dict;
}

PatchDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return load_dictionary(in);
}

}  // namespace hmax
