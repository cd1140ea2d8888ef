#include "filmrec/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "json.hpp"

#include "filmrec/core/error.hpp"
#include "filmrec/core/parallel.hpp"

namespace filmrec::losses {

namespace {

constexpr float kMaskOn = 0.5f;

void check_inputs(const Raster& pred, const Raster& gt, const Raster& mask,
                  const char* what) {
  Raster::require_same_shape(pred, gt, what);
  if (mask.channels() != 1 || mask.width() != pred.width() ||
      mask.height() != pred.height())
    raise(Errc::shape_mismatch,
          std::string(what) + ": mask must be 1-channel at the map size");
}

size_t masked_count(const Raster& mask, const char* what) {
  size_t n = 0;
  for (const float v : mask.samples())
    if (v >= kMaskOn) ++n;
  if (n == 0) raise(Errc::empty_mask, std::string(what) + ": mask is empty");
  return n;
}

void check_weights(const LossWeights& w) {
  if (w.alpha < 0 || w.beta < 0)
    raise(Errc::invalid_config, "loss weights must be non-negative");
}

void check_two_channels(const Raster& pred, const char* what) {
  if (pred.channels() != 2)
    raise(Errc::shape_mismatch,
          std::string(what) + ": deformation decomposition needs 2 channels");
}

double diff_at(const Raster& pred, const Raster& gt, size_t idx) {
  return static_cast<double>(pred.samples()[idx]) -
         static_cast<double>(gt.samples()[idx]);
}

// Penalty of one element given its channel mean: the smaller of the raw and
// de-shifted magnitudes when both errors point the same way, else nothing.
double deshifted_term(double d, double mu) {
  const double t = d - mu;
  if (d * t > 0) return std::min(std::abs(d), std::abs(t));
  return 0.0;
}

DeformationLosses assemble_losses(const DeformationStats& s, double diff_sum,
                                  size_t count) {
  DeformationLosses out;
  out.lshift = std::abs(s.mu.x) + std::abs(s.mu.y);
  out.ldisturb = s.sigma.x + s.sigma.y;
  out.ldiff = diff_sum / static_cast<double>(count);
  return out;
}

}  // namespace

double masked_l1(const Raster& pred, const Raster& gt, const Raster& mask) {
  check_inputs(pred, gt, mask, "masked_l1");
  const size_t count = masked_count(mask, "masked_l1");
  const size_t npix = static_cast<size_t>(pred.width()) * pred.height();
  const int ch = pred.channels();
  const double sum = parallel::sum_chunked(npix, [&](size_t p) {
    if (mask.samples()[p] < kMaskOn) return 0.0;
    double acc = 0;
    for (int c = 0; c < ch; ++c) acc += std::abs(diff_at(pred, gt, p * ch + c));
    return acc;
  });
  return sum / (static_cast<double>(count) * ch);
}

DeformationStats deformation_stats(const Raster& pred, const Raster& gt,
                                   const Raster& mask) {
  check_inputs(pred, gt, mask, "deformation_stats");
  check_two_channels(pred, "deformation_stats");
  const size_t count = masked_count(mask, "deformation_stats");
  const size_t npix = static_cast<size_t>(pred.width()) * pred.height();
  const double n = static_cast<double>(count);

  DeformationStats s;
  double* mu[2] = {&s.mu.x, &s.mu.y};
  double* sigma[2] = {&s.sigma.x, &s.sigma.y};
  for (int c = 0; c < 2; ++c) {
    const double mean =
        parallel::sum_chunked(npix, [&](size_t p) {
          return mask.samples()[p] < kMaskOn ? 0.0
                                             : diff_at(pred, gt, p * 2 + c);
        }) /
        n;
    const double var =
        parallel::sum_chunked(npix, [&](size_t p) {
          if (mask.samples()[p] < kMaskOn) return 0.0;
          const double d = diff_at(pred, gt, p * 2 + c) - mean;
          return d * d;
        }) /
        n;
    *mu[c] = mean;
    *sigma[c] = std::sqrt(std::max(var, 0.0));
  }
  return s;
}

DeformationLosses deformation_losses(const Raster& pred, const Raster& gt,
                                     const Raster& mask) {
  const DeformationStats s = deformation_stats(pred, gt, mask);
  const size_t count = masked_count(mask, "deformation_losses");
  const size_t npix = static_cast<size_t>(pred.width()) * pred.height();
  const double mu[2] = {s.mu.x, s.mu.y};
  const double diff_sum = parallel::sum_chunked(npix, [&](size_t p) {
    if (mask.samples()[p] < kMaskOn) return 0.0;
    return deshifted_term(diff_at(pred, gt, p * 2 + 0), mu[0]) +
           deshifted_term(diff_at(pred, gt, p * 2 + 1), mu[1]);
  });
  return assemble_losses(s, diff_sum, count);
}

double df_loss(const Raster& pred, const Raster& gt, const Raster& mask,
               const LossWeights& w) {
  check_weights(w);
  const DeformationLosses d = deformation_losses(pred, gt, mask);
  return d.lshift + w.alpha * d.ldisturb + w.beta * d.ldiff;
}

LossReport composite_losses(const LossBundle& bundle, const Raster& mask,
                            const LossWeights& w) {
  check_weights(w);
  const struct {
    const char* name;
    const Raster* pred;
    const Raster* gt;
  } pairs[] = {
      {"m3d", bundle.m3d_pred, bundle.m3d_gt},
      {"normal", bundle.normal_pred, bundle.normal_gt},
      {"depth", bundle.depth_pred, bundle.depth_gt},
      {"bgmask", bundle.bgmask_pred, bundle.bgmask_gt},
      {"albedo", bundle.albedo_pred, bundle.albedo_gt},
      {"uv", bundle.uv_pred, bundle.uv_gt},
      {"df", bundle.df_pred, bundle.df_gt},
  };
  for (const auto& p : pairs)
    if (p.pred == nullptr || p.gt == nullptr)
      raise(Errc::missing_map, p.name);

  LossReport r;
  r.l3d = masked_l1(*bundle.m3d_pred, *bundle.m3d_gt, mask);
  r.lnor = masked_l1(*bundle.normal_pred, *bundle.normal_gt, mask);
  r.ldp = masked_l1(*bundle.depth_pred, *bundle.depth_gt, mask);
  const Raster all(bundle.bgmask_gt->width(), bundle.bgmask_gt->height(), 1,
                   1.0f);
  r.lbg = masked_l1(*bundle.bgmask_pred, *bundle.bgmask_gt, all);
  r.lab = masked_l1(*bundle.albedo_pred, *bundle.albedo_gt, mask);

  const DeformationLosses df =
      deformation_losses(*bundle.df_pred, *bundle.df_gt, mask);
  r.lshift = df.lshift;
  r.ldisturb = df.ldisturb;
  r.ldiff = df.ldiff;
  r.ldf = df.lshift + w.alpha * df.ldisturb + w.beta * df.ldiff;
  const DeformationLosses uv =
      deformation_losses(*bundle.uv_pred, *bundle.uv_gt, mask);
  r.luv = uv.lshift + w.alpha * uv.ldisturb + w.beta * uv.ldiff;

  r.lshape = r.l3d + r.lnor + r.ldp + r.lbg;
  r.ltrans = r.ldf + r.luv + r.lab;
  r.ltotal = r.lshape + r.ltrans;
  return r;
}

std::string loss_report_json(const LossReport& r) {
  const nlohmann::json j{
      {"l3d", r.l3d},         {"lnor", r.lnor},
      {"ldp", r.ldp},         {"lbg", r.lbg},
      {"lab", r.lab},         {"luv", r.luv},
      {"ldf", r.ldf},         {"lshift", r.lshift},
      {"ldisturb", r.ldisturb}, {"ldiff", r.ldiff},
      {"lshape", r.lshape},   {"ltrans", r.ltrans},
      {"ltotal", r.ltotal}};
  return j.dump(2);
}

namespace ref {

double masked_l1(const Raster& pred, const Raster& gt, const Raster& mask) {
  check_inputs(pred, gt, mask, "masked_l1");
  const size_t count = masked_count(mask, "masked_l1");
  const size_t npix = static_cast<size_t>(pred.width()) * pred.height();
  const int ch = pred.channels();
  double sum = 0;
  for (size_t p = 0; p < npix; ++p) {
    if (mask.samples()[p] < kMaskOn) continue;
    for (int c = 0; c < ch; ++c) sum += std::abs(diff_at(pred, gt, p * ch + c));
  }
  return sum / (static_cast<double>(count) * ch);
}

DeformationStats deformation_stats(const Raster& pred, const Raster& gt,
                                   const Raster& mask) {
  check_inputs(pred, gt, mask, "deformation_stats");
  check_two_channels(pred, "deformation_stats");
  const size_t count = masked_count(mask, "deformation_stats");
  const size_t npix = static_cast<size_t>(pred.width()) * pred.height();
  const double n = static_cast<double>(count);

  DeformationStats s;
  double* mu[2] = {&s.mu.x, &s.mu.y};
  double* sigma[2] = {&s.sigma.x, &s.sigma.y};
  for (int c = 0; c < 2; ++c) {
    double acc = 0;
    for (size_t p = 0; p < npix; ++p)
      if (mask.samples()[p] >= kMaskOn) acc += diff_at(pred, gt, p * 2 + c);
    const double mean = acc / n;
    double var_acc = 0;
    for (size_t p = 0; p < npix; ++p) {
      if (mask.samples()[p] < kMaskOn) continue;
      const double d = diff_at(pred, gt, p * 2 + c) - mean;
      var_acc += d * d;
    }
    *mu[c] = mean;
    *sigma[c] = std::sqrt(std::max(var_acc / n, 0.0));
  }
  return s;
}

DeformationLosses deformation_losses(const Raster& pred, const Raster& gt,
                                     const Raster& mask) {
  const DeformationStats s = ref::deformation_stats(pred, gt, mask);
  const size_t count = masked_count(mask, "deformation_losses");
  const size_t npix = static_cast<size_t>(pred.width()) * pred.height();
  const double mu[2] = {s.mu.x, s.mu.y};
  double diff_sum = 0;
  for (size_t p = 0; p < npix; ++p) {
    if (mask.samples()[p] < kMaskOn) continue;
    diff_sum += deshifted_term(diff_at(pred, gt, p * 2 + 0), mu[0]) +
                deshifted_term(diff_at(pred, gt, p * 2 + 1), mu[1]);
  }
  return assemble_losses(s, diff_sum, count);
}

}  // namespace ref

}  // namespace filmrec::losses
