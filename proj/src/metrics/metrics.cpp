#include "filmrec/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "json.hpp"

#include "filmrec/core/error.hpp"
#include "filmrec/core/parallel.hpp"
#include "filmrec/maptrans/backward.hpp"

namespace filmrec::metrics {

namespace {

constexpr double kPsnrCap = 99.0;

void check_params(const MetricParams& p) {
  if (p.window < 3 || p.window % 2 == 0)
    raise(Errc::invalid_config, "ssim window must be odd and >= 3");
  if (p.window_sigma <= 0 || p.dynamic_range <= 0)
    raise(Errc::invalid_config, "ssim sigma and dynamic range must be > 0");
  double sum = 0;
  for (const double w : p.msssim_weights) {
    if (w < 0) raise(Errc::invalid_config, "msssim weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-4)
    raise(Errc::invalid_config, "msssim weights must sum to 1");
}

std::vector<double> gauss_kernel(int window, double sigma) {
  std::vector<double> k(window);
  const double c = (window - 1) / 2.0;
  double sum = 0;
  for (int i = 0; i < window; ++i) {
    k[i] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Double-precision single-channel plane; all SSIM math happens here.
struct Field {
  int w = 0, h = 0;
  std::vector<double> v;

  Field() = default;
  Field(int w_, int h_) : w(w_), h(h_), v(static_cast<size_t>(w_) * h_) {}
  double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
  double& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
};

Field channel_field(const Raster& r, int c) {
  Field f(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) f.at(x, y) = r.at(x, y, c);
  return f;
}

// Valid-region separable convolution; output shrinks by window-1 per axis.
Field blur_valid(const Field& f, const std::vector<double>& k) {
  const int win = static_cast<int>(k.size());
  Field hx(f.w - win + 1, f.h);
  parallel::for_n(f.h, [&](int y) {
    for (int x = 0; x < hx.w; ++x) {
      double acc = 0;
      for (int i = 0; i < win; ++i) acc += k[i] * f.at(x + i, y);
      hx.at(x, y) = acc;
    }
  });
  Field out(hx.w, f.h - win + 1);
  parallel::for_n(out.h, [&](int y) {
    for (int x = 0; x < out.w; ++x) {
      double acc = 0;
      for (int i = 0; i < win; ++i) acc += k[i] * hx.at(x, y + i);
      out.at(x, y) = acc;
    }
  });
  return out;
}

struct SsimTerms {
  double ssim = 0;
  double cs = 0;
};

// Position-wise SSIM and contrast-structure terms of one channel, averaged
// over the valid region.
SsimTerms ssim_channel(const Field& fa, const Field& fb,
                       const MetricParams& p) {
  const auto k = gauss_kernel(p.window, p.window_sigma);
  Field a2(fa.w, fa.h), b2(fa.w, fa.h), ab(fa.w, fa.h);
  for (size_t i = 0; i < fa.v.size(); ++i) {
    a2.v[i] = fa.v[i] * fa.v[i];
    b2.v[i] = fb.v[i] * fb.v[i];
    ab.v[i] = fa.v[i] * fb.v[i];
  }
  const Field mu_a = blur_valid(fa, k);
  const Field mu_b = blur_valid(fb, k);
  const Field m_a2 = blur_valid(a2, k);
  const Field m_b2 = blur_valid(b2, k);
  const Field m_ab = blur_valid(ab, k);

  const double c1 = p.k1 * p.dynamic_range * p.k1 * p.dynamic_range;
  const double c2 = p.k2 * p.dynamic_range * p.k2 * p.dynamic_range;
  const size_t n = mu_a.v.size();

  SsimTerms t;
  t.cs = parallel::sum_chunked(n, [&](size_t i) {
           const double va = m_a2.v[i] - mu_a.v[i] * mu_a.v[i];
           const double vb = m_b2.v[i] - mu_b.v[i] * mu_b.v[i];
           const double cov = m_ab.v[i] - mu_a.v[i] * mu_b.v[i];
           return (2 * cov + c2) / (va + vb + c2);
         }) /
         static_cast<double>(n);
  t.ssim = parallel::sum_chunked(n, [&](size_t i) {
             const double va = m_a2.v[i] - mu_a.v[i] * mu_a.v[i];
             const double vb = m_b2.v[i] - mu_b.v[i] * mu_b.v[i];
             const double cov = m_ab.v[i] - mu_a.v[i] * mu_b.v[i];
             const double lum = (2 * mu_a.v[i] * mu_b.v[i] + c1) /
                                (mu_a.v[i] * mu_a.v[i] +
                                 mu_b.v[i] * mu_b.v[i] + c1);
             return lum * (2 * cov + c2) / (va + vb + c2);
           }) /
           static_cast<double>(n);
  return t;
}

SsimTerms ssim_terms(const Raster& a, const Raster& b,
                     const MetricParams& p) {
  SsimTerms acc;
  for (int c = 0; c < a.channels(); ++c) {
    const SsimTerms t = ssim_channel(channel_field(a, c),
                                     channel_field(b, c), p);
    acc.ssim += t.ssim;
    acc.cs += t.cs;
  }
  acc.ssim /= a.channels();
  acc.cs /= a.channels();
  return acc;
}

void check_ssim_inputs(const Raster& a, const Raster& b,
                       const MetricParams& p, const char* what) {
  check_params(p);
  Raster::require_same_shape(a, b, what);
  if (std::min(a.width(), a.height()) < p.window)
    raise(Errc::image_too_small,
          std::string(what) + ": image smaller than the ssim window");
}

Raster downsample2(const Raster& r) {
  Raster out(r.width() / 2, r.height() / 2, r.channels());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int c = 0; c < r.channels(); ++c)
        out.at(x, y, c) =
            (r.at(2 * x, 2 * y, c) + r.at(2 * x + 1, 2 * y, c) +
             r.at(2 * x, 2 * y + 1, c) + r.at(2 * x + 1, 2 * y + 1, c)) /
            4.0f;
  return out;
}

double psnr_impl(const Raster& a, const Raster& b, double range,
                 bool* capped) {
  Raster::require_same_shape(a, b, "psnr");
  if (a.size() == 0) raise(Errc::invalid_dimension, "psnr on empty raster");
  const double mse = parallel::sum_chunked(a.size(), [&](size_t i) {
                       const double d = static_cast<double>(a.samples()[i]) -
                                        static_cast<double>(b.samples()[i]);
                       return d * d;
                     }) /
                     static_cast<double>(a.size());
  if (capped != nullptr) *capped = false;
  if (mse <= 0) {
    if (capped != nullptr) *capped = true;
    return kPsnrCap;
  }
  const double value = 10.0 * std::log10(range * range / mse);
  if (value > kPsnrCap) {
    if (capped != nullptr) *capped = true;
    return kPsnrCap;
  }
  return value;
}

}  // namespace

double psnr(const Raster& a, const Raster& b, double dynamic_range) {
  return psnr_impl(a, b, dynamic_range, nullptr);
}

double ssim(const Raster& a, const Raster& b, const MetricParams& p) {
  check_ssim_inputs(a, b, p, "ssim");
  return ssim_terms(a, b, p).ssim;
}

double ms_ssim(const Raster& a, const Raster& b, const MetricParams& p) {
  check_ssim_inputs(a, b, p, "ms_ssim");

  int scales = 0;
  for (int s = 0, w = a.width(), h = a.height();
       s < 5 && std::min(w, h) >= p.window; ++s, w /= 2, h /= 2)
    ++scales;

  double weight_sum = 0;
  for (int s = 0; s < scales; ++s) weight_sum += p.msssim_weights[s];
  if (weight_sum <= 0)
    raise(Errc::invalid_config, "msssim weights for usable scales are zero");

  Raster cur_a = a, cur_b = b;
  double product = 1.0;
  for (int s = 0; s < scales; ++s) {
    const SsimTerms t = ssim_terms(cur_a, cur_b, p);
    const double term = s + 1 == scales ? std::max(t.ssim, 0.0)
                                        : std::max(t.cs, 0.0);
    product *= std::pow(term, p.msssim_weights[s] / weight_sum);
    if (s + 1 < scales) {
      cur_a = downsample2(cur_a);
      cur_b = downsample2(cur_b);
    }
  }
  return product;
}

EvalReport evaluate_sample(const Raster& pred_b, const sim::Sample& sample,
                           const MetricParams& p) {
  if (pred_b.channels() != 2)
    raise(Errc::shape_mismatch, "backward map must have 2 channels");
  Raster::require_same_shape(pred_b, sample.backward_gt, "evaluate_sample");

  const Raster reference =
      maptrans::apply_backward(sample.backward_gt, sample.albedo);
  const Raster dewarped = maptrans::apply_backward(pred_b, sample.albedo);
  const Raster full(pred_b.width(), pred_b.height(), 1, 1.0f);
  const Raster ds_b = maptrans::deshift(pred_b, sample.backward_gt, full);
  const Raster dewarped_ds = maptrans::apply_backward(ds_b, sample.albedo);

  EvalReport r;
  r.params = p;
  r.sample_id = std::to_string(sample.meta.seed);
  r.psnr = psnr_impl(dewarped, reference, p.dynamic_range, &r.psnr_capped);
  r.ssim = ssim(dewarped, reference, p);
  r.msssim = ms_ssim(dewarped, reference, p);
  r.psnr_ds =
      psnr_impl(dewarped_ds, reference, p.dynamic_range, &r.psnr_ds_capped);
  r.ssim_ds = ssim(dewarped_ds, reference, p);
  r.msssim_ds = ms_ssim(dewarped_ds, reference, p);
  return r;
}

std::string eval_report_json(const EvalReport& r) {
  const nlohmann::json j{
      {"psnr", r.psnr},
      {"ssim", r.ssim},
      {"msssim", r.msssim},
      {"psnr_ds", r.psnr_ds},
      {"ssim_ds", r.ssim_ds},
      {"msssim_ds", r.msssim_ds},
      {"meta",
       {{"sample_id", r.sample_id},
        {"map_source", r.map_source},
        {"psnr_capped", r.psnr_capped},
        {"psnr_ds_capped", r.psnr_ds_capped},
        {"params",
         {{"window", r.params.window},
          {"window_sigma", r.params.window_sigma},
          {"k1", r.params.k1},
          {"k2", r.params.k2},
          {"dynamic_range", r.params.dynamic_range},
          {"msssim_weights", r.params.msssim_weights}}}}}};
  return j.dump(2);
}

std::string aggregate_json(const std::vector<EvalReport>& reports) {
  const struct {
    const char* name;
    double EvalReport::*field;
  } metrics[] = {
      {"psnr", &EvalReport::psnr},       {"ssim", &EvalReport::ssim},
      {"msssim", &EvalReport::msssim},   {"psnr_ds", &EvalReport::psnr_ds},
      {"ssim_ds", &EvalReport::ssim_ds}, {"msssim_ds", &EvalReport::msssim_ds},
  };
  nlohmann::json j{{"n", reports.size()}};
  for (const auto& m : metrics) {
    double mean = 0, var = 0;
    if (!reports.empty()) {
      for (const auto& r : reports) mean += r.*(m.field);
      mean /= static_cast<double>(reports.size());
      for (const auto& r : reports) {
        const double d = r.*(m.field) - mean;
        var += d * d;
      }
      var /= static_cast<double>(reports.size());
    }
    j[m.name] = {{"mean", mean}, {"std", std::sqrt(var)}};
  }
  return j.dump(2);
}

namespace ref {

// Direct O(window^2) evaluation with the explicit 2D kernel; independent
// of the separable fast path.
double ssim(const Raster& a, const Raster& b, const MetricParams& p) {
  check_ssim_inputs(a, b, p, "ssim");
  const auto k = gauss_kernel(p.window, p.window_sigma);
  const double c1 = p.k1 * p.dynamic_range * p.k1 * p.dynamic_range;
  const double c2 = p.k2 * p.dynamic_range * p.k2 * p.dynamic_range;
  const int win = p.window;

  double total = 0;
  for (int c = 0; c < a.channels(); ++c) {
    double acc = 0;
    size_t n = 0;
    for (int y = 0; y + win <= a.height(); ++y)
      for (int x = 0; x + win <= a.width(); ++x) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int j = 0; j < win; ++j)
          for (int i = 0; i < win; ++i) {
            const double wgt = k[i] * k[j];
            const double va = a.at(x + i, y + j, c);
            const double vb = b.at(x + i, y + j, c);
            ma += wgt * va;
            mb += wgt * vb;
            maa += wgt * va * va;
            mbb += wgt * vb * vb;
            mab += wgt * va * vb;
          }
        const double var_a = maa - ma * ma;
        const double var_b = mbb - mb * mb;
        const double cov = mab - ma * mb;
        acc += (2 * ma * mb + c1) * (2 * cov + c2) /
               ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        ++n;
      }
    total += acc / static_cast<double>(n);
  }
  return total / a.channels();
}

}  // namespace ref

}  // namespace filmrec::metrics
