#pragma once

#include <array>
#include <string>
#include <vector>

#include "filmrec/core/raster.hpp"
#include "filmrec/sim/render.hpp"

namespace filmrec::metrics {

// Canonical SSIM family constants; recorded in every report so results are
// reproducible without out-of-band context.
struct MetricParams {
  int window = 11;
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
  std::array<double, 5> msssim_weights{0.0448, 0.2856, 0.3001, 0.2363,
                                       0.1333};
};

struct EvalReport {
  double psnr = 0, ssim = 0, msssim = 0;
  double psnr_ds = 0, ssim_ds = 0, msssim_ds = 0;
  std::string sample_id;
  std::string map_source;
  bool psnr_capped = false;
  bool psnr_ds_capped = false;
  MetricParams params;
};

// 10*log10(R^2 / MSE) over all samples, capped at 99 dB (zero or tiny MSE).
double psnr(const Raster& a, const Raster& b, double dynamic_range = 1.0);

// Gaussian-windowed SSIM averaged over every fully valid window position,
// channel-averaged for multi-channel rasters.
double ssim(const Raster& a, const Raster& b, const MetricParams& p = {});

// Multi-scale SSIM: contrast-structure terms at the finer scales, full SSIM
// at the coarsest, each raised to its weight. Scales that no longer fit the
// window are dropped and the remaining weights renormalized; downsampling
// is 2x2 mean. Terms are clamped at 0 before exponentiation.
double ms_ssim(const Raster& a, const Raster& b, const MetricParams& p = {});

// Dewarps sample.albedo with pred_b raw and de-shifted against
// backward_gt, compares both against the gt-dewarped albedo, and fills the
// two metric triples. sample_id defaults to the sample's seed.
EvalReport evaluate_sample(const Raster& pred_b, const sim::Sample& sample,
                           const MetricParams& p = {});

std::string eval_report_json(const EvalReport& r);

// Mean and population std of each metric over a batch, as JSON.
std::string aggregate_json(const std::vector<EvalReport>& reports);

// Serial twin of the windowed kernel, kept as the benchmark baseline.
namespace ref {
double ssim(const Raster& a, const Raster& b, const MetricParams& p = {});
}

}  // namespace filmrec::metrics
