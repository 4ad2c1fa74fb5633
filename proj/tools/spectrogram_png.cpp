#include "spectrogram_png.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "wbsig/error.hpp"
#include "wbsig/targets.hpp"

namespace wbsig::tools {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr std::array<Rgb, kNumFamilies> kFamilyColours{{
    {230, 159, 0}, {86, 180, 233}, {0, 158, 115}, {240, 228, 66}, {0, 114, 178}, {213, 94, 0}}};

struct Image {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> rgb;

  void set(std::size_t row, std::size_t col, Rgb c) {
    std::copy(c.begin(), c.end(), rgb.begin() + static_cast<std::ptrdiff_t>(3 * (row * width + col)));
  }
};

// Image rows run top-down while spectrogram rows run up in frequency.
Image render(const WidebandExample& x) {
  const auto s = dsp::spectrogram(x.iq);
  const std::size_t R = s.rows(), C = s.cols();
  std::vector<double> db(R * C);
  double peak = -INFINITY;
  for (std::size_t i = 0; i < db.size(); ++i) {
    db[i] = 10.0 * std::log10(std::norm(s.values()[i]) + 1e-30);
    peak = std::max(peak, db[i]);
  }
  Image img{C, R, std::vector<std::uint8_t>(3 * R * C)};
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      const double level = std::clamp((db[r * C + c] - peak + 60.0) / 60.0, 0.0, 1.0);
      const auto g = static_cast<std::uint8_t>(std::lround(255.0 * level));
      img.set(R - 1 - r, c, {g, g, g});
    }
  }
  for (const auto& a : x.annotations) {
    const auto p = targets::box_pixels(targets::to_box(a, targets::LabelGranularity::Detection1), R, C);
    if (p.area() == 0) continue;
    const Rgb colour = kFamilyColours[static_cast<std::size_t>(a.family)];
    for (std::size_t c = p.col0; c < p.col1; ++c) {
      img.set(R - 1 - p.row0, c, colour);
      img.set(R - p.row1, c, colour);
    }
    for (std::size_t r = p.row0; r < p.row1; ++r) {
      img.set(R - 1 - r, p.col0, colour);
      img.set(R - 1 - r, p.col1 - 1, colour);
    }
  }
  return img;
}

}  // namespace

void write_spectrogram_png(const WidebandExample& x, const std::filesystem::path& path) {
  const Image img = render(x);
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw StorageError("cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw StorageError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw StorageError("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < img.height; ++r) {
    png_write_row(png, const_cast<png_bytep>(img.rgb.data() + 3 * r * img.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace wbsig::tools
