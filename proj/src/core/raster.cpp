#include "filmrec/core/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace filmrec {

Raster::Raster(int width, int height, int channels, float fill) {
  if (width < 1 || height < 1)
    raise(Errc::invalid_dimension, "raster dimensions must be >= 1, got " +
                                       std::to_string(width) + "x" +
                                       std::to_string(height));
  if (channels < 1 || channels > 3)
    raise(Errc::invalid_dimension,
          "channel count must be 1, 2 or 3, got " + std::to_string(channels));
  if (!std::isfinite(fill))
    raise(Errc::invalid_dimension, "fill value must be finite");
  width_ = width;
  height_ = height;
  channels_ = channels;
  data_.assign(static_cast<size_t>(width) * height * channels, fill);
}

void Raster::require_same_shape(const Raster& a, const Raster& b,
                                const char* what) {
  if (!a.same_shape(b))
    raise(Errc::shape_mismatch,
          std::string(what) + ": " + std::to_string(a.width()) + "x" +
              std::to_string(a.height()) + "x" + std::to_string(a.channels()) +
              " vs " + std::to_string(b.width()) + "x" +
              std::to_string(b.height()) + "x" + std::to_string(b.channels()));
}

bool Raster::all_finite() const {
  for (float v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Raster rescale_linear(const Raster& r, ValueRange from, ValueRange to) {
  if (from.lo == from.hi)
    raise(Errc::degenerate_range, "source range is a single point");
  Raster out(r.width(), r.height(), r.channels());
  const double scale = (to.hi - to.lo) / (from.hi - from.lo);
  auto src = r.samples();
  auto dst = out.samples();
  for (size_t i = 0; i < src.size(); ++i) {
    double v = std::clamp(static_cast<double>(src[i]), from.lo, from.hi);
    dst[i] = static_cast<float>(to.lo + (v - from.lo) * scale);
  }
  return out;
}

Raster luminance(const Raster& r) {
  if (r.channels() == 1) return r;
  if (r.channels() != 3)
    raise(Errc::unsupported_channels, "luminance expects 1 or 3 channels");
  Raster out(r.width(), r.height(), 1);
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x)
      out.at(x, y) = 0.299f * r.at(x, y, 0) + 0.587f * r.at(x, y, 1) +
                     0.114f * r.at(x, y, 2);
  return out;
}

float bilinear_at(const Raster& r, double x, double y, int c) {
  const double cx = std::clamp(x, 0.0, static_cast<double>(r.width() - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(r.height() - 1));
  const int x0 = std::min(static_cast<int>(cx), r.width() - 1);
  const int y0 = std::min(static_cast<int>(cy), r.height() - 1);
  const int x1 = std::min(x0 + 1, r.width() - 1);
  const int y1 = std::min(y0 + 1, r.height() - 1);
  const double fx = cx - x0;
  const double fy = cy - y0;
  const double top = (1.0 - fx) * r.at(x0, y0, c) + fx * r.at(x1, y0, c);
  const double bot = (1.0 - fx) * r.at(x0, y1, c) + fx * r.at(x1, y1, c);
  return static_cast<float>((1.0 - fy) * top + fy * bot);
}

}  // namespace filmrec
