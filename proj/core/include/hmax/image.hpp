#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace hmax {

/// 8-bit grayscale raster, row-major. The pipeline's nominal input is
/// 128x128 but any size within each operation's support limits is accepted.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  uint8_t at(int r, int c) const { return pixels[static_cast<size_t>(r) * width + c]; }
  uint8_t& at(int r, int c) { return pixels[static_cast<size_t>(r) * width + c]; }
  long long pixel_count() const { return static_cast<long long>(width) * height; }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
  }
};

/// Validating constructor; throws InvalidArgument on dimension/count mismatch.
GrayImage make_image(int width, int height, std::vector<uint8_t> pixels);

/// Binary PGM (P5) reader, maxval 255 only. Header comments are accepted.
GrayImage load_pgm(const std::filesystem::path& path);
GrayImage load_pgm(std::istream& in, const std::string& origin = "<stream>");

/// Writes canonical P5: "P5\n<w> <h>\n255\n" followed by raw pixel bytes.
void save_pgm(const GrayImage& img, const std::filesystem::path& path);
void save_pgm(const GrayImage& img, std::ostream& out);

/// Bilinear square resize with corner-aligned sampling. Resizing a
/// side x side image to the same side is an exact copy. Non-square inputs
/// are stretched anisotropically. Requires side >= 8 and input dims >= 2.
GrayImage resize_to(const GrayImage& img, int side);

}  // namespace hmax

