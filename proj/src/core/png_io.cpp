#include "filmrec/core/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace filmrec {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

unsigned char quantize(float v) {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<unsigned char>(std::floor(clamped * 255.0 + 0.5));
}

}  // namespace

void image_write_png(const Raster& r, const std::filesystem::path& path) {
  if (r.channels() != 1 && r.channels() != 3)
    raise(Errc::unsupported_channels, "PNG output supports 1 or 3 channels");

  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) raise(Errc::io, "cannot open for writing: " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    raise(Errc::io, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(Errc::io, "libpng write error: " + path.string());
  }

  png_init_io(png, fp.get());
  const int color_type =
      r.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, r.width(), r.height(), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<size_t>(r.width()) * r.channels());
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x)
      for (int c = 0; c < r.channels(); ++c)
        row[static_cast<size_t>(x) * r.channels() + c] = quantize(r.at(x, y, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raster image_read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) raise(Errc::io, "cannot open for reading: " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(Errc::io, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(Errc::io, "libpng read error: " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  // Normalize every input variant to 8-bit gray or RGB.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int chans = static_cast<int>(png_get_channels(png, info));
  if (chans != 1 && chans != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(Errc::unsupported_channels,
          "PNG with " + std::to_string(chans) + " channels: " + path.string());
  }

  Raster r(w, h, chans);
  std::vector<unsigned char> row(static_cast<size_t>(w) * chans);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < chans; ++c)
        r.at(x, y, c) =
            static_cast<float>(row[static_cast<size_t>(x) * chans + c]) / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return r;
}

}  // namespace filmrec
