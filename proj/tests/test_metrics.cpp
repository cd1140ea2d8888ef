#include <cmath>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "filmrec/core/error.hpp"
#include "filmrec/core/rng.hpp"
#include "filmrec/maptrans/backward.hpp"
#include "filmrec/metrics/metrics.hpp"
#include "filmrec/sim/mesh.hpp"
#include "filmrec/sim/render.hpp"
#include "filmrec/sim/texture.hpp"
#include "testutil.hpp"

using filmrec::Errc;
using filmrec::Error;
using filmrec::Raster;
using filmrec::Rng;
using namespace filmrec::metrics;

TEST_CASE("psnr closed forms") {
  Rng rng(1);
  const Raster a = testutil::random_raster(rng, 32, 24, 1, 0.0f, 1.0f);
  CHECK(psnr(a, a) == 99.0);

  Raster b = a;
  for (float& v : b.samples()) v += 0.1f;
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-7));

  Raster c = a;
  for (float& v : c.samples()) v += 16.0f / 255.0f;
  CHECK(psnr(a, c) ==
        doctest::Approx(20.0 * std::log10(255.0 / 16.0)).epsilon(1e-6));

  // Doubling the dynamic range adds 10*log10(4) dB.
  CHECK(psnr(a, b, 2.0) ==
        doctest::Approx(psnr(a, b) + 10.0 * std::log10(4.0)).epsilon(1e-9));

  CHECK_THROWS_AS(psnr(a, Raster(32, 23, 1)), Error);
}

TEST_CASE("psnr decreases with error magnitude") {
  Rng rng(2);
  const Raster a = testutil::random_raster(rng, 20, 20, 1, 0.0f, 1.0f);
  double prev = 1e9;
  for (const float err : {0.05f, 0.1f, 0.2f, 0.4f}) {
    Raster b = a;
    for (float& v : b.samples()) v += err;
    const double p = psnr(a, b);
    CHECK(p < prev);
    CHECK(p >= 0.0);
    prev = p;
  }
}

TEST_CASE("ssim identity and symmetry") {
  Rng rng(3);
  const Raster a = testutil::random_raster(rng, 40, 30, 1, 0.0f, 1.0f);
  const Raster b = testutil::random_raster(rng, 40, 30, 1, 0.0f, 1.0f);
  CHECK(ssim(a, a) == 1.0);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  CHECK(ssim(a, b) < 1.0);
  CHECK(std::abs(ssim(a, b)) <= 1.0);
}

TEST_CASE("ssim constant images follow the luminance closed form") {
  const Raster a(24, 24, 1, 0.3f), b(24, 24, 1, 0.7f);
  const double x = 0.3f, y = 0.7f, c1 = 0.01 * 0.01;
  const double expect = (2 * x * y + c1) / (x * x + y * y + c1);
  CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ssim separable path matches the direct reference") {
  Rng rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const Raster a = testutil::random_raster(rng, 48, 37, 1, 0.0f, 1.0f);
    Raster b = a;
    for (float& v : b.samples()) v += rng.uniform(-0.2, 0.2);
    CHECK(ssim(a, b) == doctest::Approx(ref::ssim(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("ssim validation") {
  const Raster small(8, 8, 1, 0.5f);
  try {
    ssim(small, small);
    FAIL("expected image-too-small");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::image_too_small);
  }
  MetricParams p;
  p.window = 10;
  const Raster a(32, 32, 1, 0.5f);
  CHECK_THROWS_AS(ssim(a, a, p), Error);
  p = MetricParams();
  p.msssim_weights = {0.5, 0.5, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(ms_ssim(a, a, p), Error);
}

TEST_CASE("ms_ssim identity and single-scale degeneration") {
  Rng rng(5);
  const Raster a = testutil::random_raster(rng, 16, 16, 1, 0.0f, 1.0f);
  Raster b = a;
  for (float& v : b.samples()) v += rng.uniform(-0.1, 0.1);
  CHECK(ms_ssim(a, a) == 1.0);

  // 16x16 admits only one scale, so the product degenerates to plain ssim
  // whatever the weights.
  CHECK(ms_ssim(a, b) == doctest::Approx(ssim(a, b)).epsilon(1e-6));
  MetricParams p;
  p.msssim_weights = {1.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(ms_ssim(a, b, p) == doctest::Approx(ssim(a, b, p)).epsilon(1e-6));
}

TEST_CASE("ms_ssim truncation and renormalization closed form") {
  // Constant images keep cs = 1 at every scale, so only the coarsest-scale
  // luminance term survives, raised to its renormalized weight. 32x32
  // yields exactly two usable scales.
  const Raster a(32, 32, 1, 0.3f), b(32, 32, 1, 0.7f);
  const double x = 0.3f, y = 0.7f, c1 = 0.01 * 0.01;
  const double lum = (2 * x * y + c1) / (x * x + y * y + c1);
  const MetricParams p;
  const double w = p.msssim_weights[1] /
                   (p.msssim_weights[0] + p.msssim_weights[1]);
  CHECK(ms_ssim(a, b) == doctest::Approx(std::pow(lum, w)).epsilon(1e-9));
}

TEST_CASE("ms_ssim drops under increasing noise") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Raster base = testutil::random_raster(rng, 64, 64, 1, 0.2f, 0.8f);
    Raster small_noise = base, big_noise = base;
    for (float& v : small_noise.samples()) v += rng.uniform(-0.05, 0.05);
    for (float& v : big_noise.samples()) v += rng.uniform(-0.25, 0.25);
    const double s = ms_ssim(base, small_noise);
    const double g = ms_ssim(base, big_noise);
    CHECK(s < 1.0);
    CHECK(g < s);
    CHECK(g > 0.0);
  }
}

namespace {

filmrec::sim::Sample warped_sample(uint64_t seed) {
  filmrec::sim::SceneConfig scene;
  scene.out_w = scene.out_h = 128;
  scene.deform_amp = 0.06;
  scene.tilt_deg_max = 8;
  const Raster tex = filmrec::sim::gen_texture({4, 4, 28, 8, seed});
  filmrec::sim::Sample s = filmrec::sim::render_sample(
      tex, filmrec::sim::gen_mesh(scene, seed), scene);
  s.meta.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("evaluate_sample with the oracle map caps out") {
  const filmrec::sim::Sample s = warped_sample(7);
  const EvalReport r = evaluate_sample(s.backward_gt, s);
  CHECK(r.psnr == 99.0);
  CHECK(r.psnr_capped);
  CHECK(r.ssim == 1.0);
  CHECK(r.msssim == 1.0);
  CHECK(r.psnr_ds == 99.0);
  CHECK(r.ssim_ds == 1.0);
  CHECK(r.msssim_ds == 1.0);
  CHECK(r.sample_id == "7");
}

TEST_CASE("de-shifting recovers a constant backward shift") {
  const filmrec::sim::Sample s = warped_sample(8);
  Raster shifted = s.backward_gt;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) shifted.at(x, y, 0) += 0.02f;
  const EvalReport r = evaluate_sample(shifted, s);
  CHECK(r.psnr_ds >= r.psnr);
  CHECK(r.psnr < 99.0);
  CHECK(r.psnr_ds == doctest::Approx(99.0).epsilon(1e-6));
  CHECK(r.ssim_ds >= 1.0 - 1e-6);
  CHECK(r.msssim_ds >= 1.0 - 1e-6);
  CHECK(r.ssim < r.ssim_ds);
}

TEST_CASE("deshift never increases the squared residual") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Raster gt = testutil::random_raster(rng, 24, 24, 2, 0.0f, 1.0f);
    const Raster pred = testutil::random_raster(rng, 24, 24, 2, 0.0f, 1.0f);
    const Raster full(24, 24, 1, 1.0f);
    const Raster ds = filmrec::maptrans::deshift(pred, gt, full);
    auto mse = [&](const Raster& m) {
      double acc = 0;
      for (size_t i = 0; i < m.size(); ++i) {
        const double d =
            double(m.samples()[i]) - double(gt.samples()[i]);
        acc += d * d;
      }
      return acc / double(m.size());
    };
    CHECK(mse(ds) <= mse(pred) + 1e-12);
  }
}

TEST_CASE("eval report json carries all fields") {
  EvalReport r;
  r.psnr = 31.5;
  r.ssim = 0.93;
  r.msssim = 0.97;
  r.psnr_ds = 33.25;
  r.ssim_ds = 0.95;
  r.msssim_ds = 0.985;
  r.sample_id = "42";
  r.map_source = "oracle";
  r.psnr_capped = false;
  const nlohmann::json j = nlohmann::json::parse(eval_report_json(r));
  CHECK(j.at("psnr").get<double>() == 31.5);
  CHECK(j.at("msssim_ds").get<double>() == 0.985);
  CHECK(j.at("meta").at("sample_id").get<std::string>() == "42");
  CHECK(j.at("meta").at("map_source").get<std::string>() == "oracle");
  CHECK(j.at("meta").at("params").at("window").get<int>() == 11);
  CHECK(j.at("meta").at("params").at("msssim_weights").size() == 5);
}

TEST_CASE("aggregate json reports mean and std") {
  std::vector<EvalReport> reports(2);
  reports[0].psnr = 30.0;
  reports[1].psnr = 34.0;
  reports[0].ssim = 0.9;
  reports[1].ssim = 0.9;
  const nlohmann::json j = nlohmann::json::parse(aggregate_json(reports));
  CHECK(j.at("n").get<int>() == 2);
  CHECK(j.at("psnr").at("mean").get<double>() == doctest::Approx(32.0));
  CHECK(j.at("psnr").at("std").get<double>() == doctest::Approx(2.0));
  CHECK(j.at("ssim").at("std").get<double>() == doctest::Approx(0.0));
}
