#include "hmax/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hmax/errors.hpp"

namespace hmax {
namespace {

// Reads one PGM header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) continue;
    tok.push_back(static_cast<char>(ch));
    while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#') {
      tok.push_back(static_cast<char>(in.get()));
    }
    return tok;
  }
  return tok;
}

int parse_dim(const std::string& tok, const std::string& origin, const char* what) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError(origin + ": malformed PGM header (" + what + ")");
  }
  long v = std::stol(tok);
  if (v < 1 || v > 1 << 20) {
    throw FormatError(origin + ": out-of-range PGM " + what);
  }
  return static_cast<int>(v);
}

}  // namespace

GrayImage make_image(int width, int height, std::vector<uint8_t> pixels) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("image dimensions must be >= 1");
  }
  if (pixels.size() != static_cast<size_t>(width) * height) {
    throw InvalidArgument("pixel count does not match width*height");
  }
  return GrayImage{width, height, std::move(pixels)};
}

GrayImage load_pgm(std::istream& in, const std::string& origin) {
  std::string magic = next_token(in);
  if (magic != "P5") {
    throw FormatError(origin + ": not a binary PGM (P5) file");
  }
  const int w = parse_dim(next_token(in), origin, "width");
  const int h = parse_dim(next_token(in), origin, "height");
  const std::string maxval_tok = next_token(in);
  if (maxval_tok.empty() || maxval_tok.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError(origin + ": malformed PGM header (maxval)");
  }
  if (maxval_tok != "255") {
    throw UnsupportedDepthError(origin + ": unsupported PGM maxval " + maxval_tok +
                                " (only 255 is handled)");
  }
  // Exactly one whitespace byte separates the header from the payload.
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) {
    throw FormatError(origin + ": missing separator after PGM header");
  }
  std::vector<uint8_t> pixels(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (static_cast<size_t>(in.gcount()) != pixels.size()) {
    throw IoError(origin + ": truncated PGM payload");
  }
  return GrayImage{w, h, std::move(pixels)};
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open " + path.string());
  }
  return load_pgm(f, path.string());
}

void save_pgm(const GrayImage& img, std::ostream& out) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  save_pgm(img, f);
  if (!f) {
    throw IoError("short write to " + path.string());
  }
}

GrayImage resize_to(const GrayImage& img, int side) {
  if (side < 8) {
    throw InvalidArgument("resize target side must be >= 8");
  }
  if (img.width < 2 || img.height < 2) {
    throw InvalidArgument("cannot resize a degenerate image (dims < 2)");
  }
  if (img.width == side && img.height == side) {
    return img;
  }
  GrayImage out;
  out.width = side;
  out.height = side;
  out.pixels.resize(static_cast<size_t>(side) * side);
  const double sx = static_cast<double>(img.width - 1) / (side - 1);
  const double sy = static_cast<double>(img.height - 1) / (side - 1);
  for (int r = 0; r < side; ++r) {
    const double fy = r * sy;
    int y0 = static_cast<int>(fy);
    if (y0 > img.height - 2) y0 = img.height - 2;
    const double wy = fy - y0;
    for (int c = 0; c < side; ++c) {
      const double fx = c * sx;
      int x0 = static_cast<int>(fx);
      if (x0 > img.width - 2) x0 = img.width - 2;
      const double wx = fx - x0;
      const double top = (1.0 - wx) * img.at(y0, x0) + wx * img.at(y0, x0 + 1);
      const double bot = (1.0 - wx) * img.at(y0 + 1, x0) + wx * img.at(y0 + 1, x0 + 1);
      double v = (1.0 - wy) * top + wy * bot;
      long iv = std::lround(v);
      if (iv < 0) iv = 0;
      if (iv > 255) iv = 255;
      out.at(r, c) = static_cast<uint8_t>(iv);
    }
  }
  return out;
}

}  // namespace hmax
