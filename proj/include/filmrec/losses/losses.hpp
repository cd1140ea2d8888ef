#pragma once

#include <string>

#include "filmrec/core/raster.hpp"
#include "filmrec/core/vec.hpp"

namespace filmrec::losses {

// A pixel participates in a masked loss iff mask >= 0.5. The mask raster is
// always 1-channel at the map resolution.

struct LossWeights {
  double alpha = 2.0;
  double beta = 2.0;
};

// Per-channel statistics of the masked difference pred - gt. sigma is the
// population standard deviation.
struct DeformationStats {
  Vec2 mu{};
  Vec2 sigma{};
};

struct DeformationLosses {
  double lshift = 0;
  double ldisturb = 0;
  double ldiff = 0;
};

struct LossReport {
  double l3d = 0, lnor = 0, ldp = 0, lbg = 0;
  double lab = 0, luv = 0, ldf = 0;
  double lshift = 0, ldisturb = 0, ldiff = 0;
  double lshape = 0, ltrans = 0, ltotal = 0;
};

// Predicted and ground-truth map pairs for the composite loss. Every pair
// is required; a null entry raises missing-map naming the absent map.
struct LossBundle {
  const Raster* m3d_pred = nullptr;
  const Raster* m3d_gt = nullptr;
  const Raster* normal_pred = nullptr;
  const Raster* normal_gt = nullptr;
  const Raster* depth_pred = nullptr;
  const Raster* depth_gt = nullptr;
  const Raster* bgmask_pred = nullptr;
  const Raster* bgmask_gt = nullptr;
  const Raster* albedo_pred = nullptr;
  const Raster* albedo_gt = nullptr;
  const Raster* uv_pred = nullptr;
  const Raster* uv_gt = nullptr;
  const Raster* df_pred = nullptr;
  const Raster* df_gt = nullptr;
};

// Mean of |pred - gt| over masked pixels and all channels.
double masked_l1(const Raster& pred, const Raster& gt, const Raster& mask);

// Stats and the shift / disturbance / de-shifted-difference split of a
// 2-channel difference map. The de-shifted term penalizes an element only
// when its raw and de-shifted errors share a sign, by the smaller of the
// two magnitudes, averaged over masked elements and summed over channels.
DeformationStats deformation_stats(const Raster& pred, const Raster& gt,
                                   const Raster& mask);
DeformationLosses deformation_losses(const Raster& pred, const Raster& gt,
                                     const Raster& mask);

// lshift + alpha * ldisturb + beta * ldiff.
double df_loss(const Raster& pred, const Raster& gt, const Raster& mask,
               const LossWeights& w);

// Full report: lshape = l3d + lnor + ldp + lbg with lbg taken over all
// pixels; ltrans = ldf + luv + lab where both df and uv use the
// deformation decomposition; ltotal = lshape + ltrans.
LossReport composite_losses(const LossBundle& bundle, const Raster& mask,
                            const LossWeights& w);

// JSON object keyed by the LossReport field names.
std::string loss_report_json(const LossReport& r);

// Flat serial 64-bit accumulation, the reference the parallel reductions
// are tested against.
namespace ref {
double masked_l1(const Raster& pred, const Raster& gt, const Raster& mask);
DeformationStats deformation_stats(const Raster& pred, const Raster& gt,
                                   const Raster& mask);
DeformationLosses deformation_losses(const Raster& pred, const Raster& gt,
                                     const Raster& mask);
}  // namespace ref

}  // namespace filmrec::losses
