#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "filmrec/core/error.hpp"

namespace filmrec {

// W x H x C array of 32-bit samples, row-major, channel-interleaved.
// The universal carrier for images and all annotation maps.
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> samples() { return data_; }
  std::span<const float> samples() const { return data_; }

  bool same_shape(const Raster& o) const {
    return width_ == o.width_ && height_ == o.height_ &&
           channels_ == o.channels_;
  }

  // Throws shape-mismatch naming `what` when shapes differ.
  static void require_same_shape(const Raster& a, const Raster& b,
                                 const char* what);

  bool all_finite() const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Affine per-sample remap from `from` to `to`. Samples slightly outside
// `from` (within 1e-6) are clamped before mapping.
Raster rescale_linear(const Raster& r, ValueRange from, ValueRange to);

// Rec.601 luma for 3-channel rasters; a copy for 1-channel ones.
Raster luminance(const Raster& r);

// Pixel-center normalized coordinate: integer x has center (x+0.5)/extent.
inline double norm_coord(double x, int extent) { return (x + 0.5) / extent; }
inline double denorm_coord(double u, int extent) { return u * extent - 0.5; }

// Bilinear read of channel c at real pixel coordinates, clamped to the edge.
float bilinear_at(const Raster& r, double x, double y, int c);

}  // namespace filmrec
