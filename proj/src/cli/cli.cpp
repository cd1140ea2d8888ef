#include "filmrec/cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "filmrec/core/error.hpp"
#include "filmrec/core/fmap.hpp"
#include "filmrec/core/log.hpp"
#include "filmrec/core/png_io.hpp"
#include "filmrec/core/raster.hpp"
#include "filmrec/core/rng.hpp"
#include "filmrec/estimator/estimator.hpp"
#include "filmrec/losses/losses.hpp"
#include "filmrec/maptrans/backward.hpp"
#include "filmrec/metrics/metrics.hpp"
#include "filmrec/sim/mesh.hpp"
#include "filmrec/sim/render.hpp"
#include "filmrec/sim/sample_io.hpp"
#include "filmrec/sim/texture.hpp"

namespace filmrec::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sample_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", i);
  return buf;
}

struct GridSpec {
  sim::TextureConfig texture;
  double film_aspect = 1.0;
};

// The grid flag fixes both the printed pattern and the film shape so that
// texture pixels stay square: 6x4 uses a 240x168 texture and the matching
// 0.7 aspect film.
GridSpec grid_spec(const std::string& grid, std::uint64_t seed) {
  GridSpec g;
  if (grid == "4x4") {
    g.texture = {4, 4, 48, 16, seed};
    g.film_aspect = 1.0;
  } else if (grid == "6x4") {
    g.texture = {6, 4, 36, 12, seed};
    g.film_aspect = 168.0 / 240.0;
  } else {
    raise(Errc::invalid_config, "unknown grid spec " + grid);
  }
  return g;
}

// Runs fn(i) for i in [0, n), serially for jobs <= 1 and on a worker pool
// otherwise. Returns one error string per index, empty on success. Callers
// assemble outputs by index so report bytes do not depend on the job count.
std::vector<std::string> run_samples(int n, int jobs,
                                     const std::function<void(int)>& fn) {
  std::vector<std::string> errors(static_cast<size_t>(std::max(n, 0)));
  auto work = [&](int i) {
    try {
      fn(i);
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(i)] = e.what();
    }
  };
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) work(i);
    return errors;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, n);
  pool.reserve(static_cast<size_t>(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work(i);
    });
  for (auto& t : pool) t.join();
  return errors;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot open " + path.generic_string());
  out << text;
  if (!out.flush()) raise(Errc::io, "cannot write " + path.generic_string());
}

json read_manifest(const fs::path& corpus) {
  const fs::path mpath = corpus / "manifest.json";
  std::ifstream in(mpath, std::ios::binary);
  if (!in) raise(Errc::io, "cannot read " + mpath.generic_string());
  json m = json::parse(in, nullptr, false);
  if (m.is_discarded() || !m.is_object() || !m.contains("samples") ||
      !m["samples"].is_array())
    raise(Errc::invalid_config, "malformed manifest " + mpath.generic_string());
  return m;
}

struct ManifestEntry {
  std::string id;
  fs::path dir;
};

std::vector<ManifestEntry> corpus_entries(const fs::path& corpus,
                                          const json& m) {
  std::vector<ManifestEntry> out;
  for (const auto& e : m["samples"]) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string())
      raise(Errc::invalid_config, "manifest entry without id");
    ManifestEntry me;
    me.id = e["id"].get<std::string>();
    me.dir = corpus / e.value("dir", "samples/" + me.id);
    out.push_back(std::move(me));
  }
  return out;
}

// df = uv minus normalized pixel coordinates on the mask, 0 elsewhere.
// The corpus stores uv only; every consumer needing the deformation field
// reconstructs it with this rule.
Raster derive_df(const Raster& uv, const Raster& mask) {
  Raster df(uv.width(), uv.height(), 2);
  for (int y = 0; y < uv.height(); ++y)
    for (int x = 0; x < uv.width(); ++x) {
      if (mask.at(x, y, 0) < 0.5f) continue;
      df.at(x, y, 0) =
          static_cast<float>(uv.at(x, y, 0) - norm_coord(x, uv.width()));
      df.at(x, y, 1) =
          static_cast<float>(uv.at(x, y, 1) - norm_coord(y, uv.height()));
    }
  return df;
}

int finish(const char* command, const std::vector<std::string>& ids,
           const std::vector<std::string>& errors) {
  int failed = 0;
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      ++failed;
      log::error(std::string(command) + ": sample " + ids[i] + ": " +
                 errors[i]);
    }
  log::info(std::string(command) + ": " +
            std::to_string(errors.size() - static_cast<size_t>(failed)) + "/" +
            std::to_string(errors.size()) + " samples succeeded");
  return failed == 0 ? 0 : 1;
}

}  // namespace

int cmd_gen(const RunConfig& cfg) {
  if (cfg.out.empty()) raise(Errc::invalid_config, "--out is required");
  if (cfg.n < 0) raise(Errc::invalid_config, "--n must be non-negative");
  if (cfg.res < 32 || cfg.res > 4096)
    raise(Errc::invalid_config, "--res out of range [32, 4096]");
  grid_spec(cfg.grid, 0);
  fs::create_directories(cfg.out / "samples");

  std::vector<std::uint64_t> seeds(static_cast<size_t>(cfg.n));
  std::vector<std::string> ids(static_cast<size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    seeds[static_cast<size_t>(i)] =
        Rng::mix(cfg.seed, static_cast<std::uint64_t>(i));
    ids[static_cast<size_t>(i)] = sample_id(i);
  }

  auto errors = run_samples(cfg.n, 1, [&](int i) {
    const std::uint64_t seed = seeds[static_cast<size_t>(i)];
    const GridSpec g = grid_spec(cfg.grid, seed);
    sim::SceneConfig scene;
    scene.out_w = cfg.res;
    scene.out_h = cfg.res;
    scene.film_aspect = g.film_aspect;
    scene.background_seed = seed;
    const Raster tex = sim::gen_texture(g.texture);
    const sim::ControlMesh mesh = sim::gen_mesh(scene, seed);
    sim::Sample s = sim::render_sample(tex, mesh, scene);
    s.meta.seed = seed;
    s.meta.texture = g.texture;
    sim::write_sample(cfg.out / "samples" / ids[static_cast<size_t>(i)], s);
  });

  json manifest;
  manifest["command"] = "gen";
  manifest["grid"] = cfg.grid;
  manifest["res"] = cfg.res;
  manifest["seed"] = cfg.seed;
  json samples = json::array();
  json failures = json::array();
  for (int i = 0; i < cfg.n; ++i) {
    const auto ui = static_cast<size_t>(i);
    json e;
    e["id"] = ids[ui];
    e["seed"] = seeds[ui];
    e["dir"] = "samples/" + ids[ui];
    e["status"] = errors[ui].empty() ? "ok" : "failed";
    if (!errors[ui].empty()) {
      e["error"] = errors[ui];
      failures.push_back(json{{"id", ids[ui]}, {"error", errors[ui]}});
    }
    samples.push_back(std::move(e));
  }
  manifest["samples"] = std::move(samples);
  manifest["failures"] = std::move(failures);
  write_text(cfg.out / "manifest.json", manifest.dump(2) + "\n");
  return finish("gen", ids, errors);
}

int cmd_recover(const RunConfig& cfg) {
  if (cfg.out.empty()) raise(Errc::invalid_config, "--out is required");
  if (cfg.input.empty()) raise(Errc::invalid_config, "--input is required");
  if (cfg.map_source == "files" && cfg.maps.empty())
    raise(Errc::invalid_config, "--map-source files requires --maps");
  const json m = read_manifest(cfg.input);
  const auto entries = corpus_entries(cfg.input, m);
  fs::create_directories(cfg.out);

  const int n = static_cast<int>(entries.size());
  std::vector<std::string> ids(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) ids[i] = entries[i].id;

  auto errors = run_samples(n, cfg.jobs, [&](int i) {
    const auto& ent = entries[static_cast<size_t>(i)];
    const sim::Sample s = sim::read_sample(ent.dir);

    Raster backward;
    Raster albedo_src;
    if (cfg.map_source == "estimated") {
      estimator::EstimatedMaps maps = estimator::estimate_pipeline(s.image);
      backward = std::move(maps.backward);
      albedo_src = std::move(maps.albedo);
    } else {
      Raster uv, mask, df;
      if (cfg.map_source == "files") {
        const fs::path mdir = cfg.maps / ent.id;
        const fs::path uvp = mdir / "uv.fmap";
        if (!fs::exists(uvp))
          raise(Errc::missing_map,
                "uv map not found at " + uvp.generic_string());
        uv = fmap_read(uvp);
        mask = fs::exists(mdir / "bgmask.fmap")
                   ? fmap_read(mdir / "bgmask.fmap")
                   : s.bgmask;
        df = fs::exists(mdir / "df.fmap") ? fmap_read(mdir / "df.fmap")
                                          : derive_df(uv, mask);
        albedo_src = fs::exists(mdir / "albedo.fmap")
                         ? fmap_read(mdir / "albedo.fmap")
                         : s.albedo;
      } else {
        uv = s.uv;
        mask = s.bgmask;
        df = derive_df(uv, mask);
        albedo_src = s.albedo;
      }
      backward = maptrans::merge_and_convert(uv, df, mask, s.image.width(),
                                             s.image.height());
    }

    const fs::path odir = cfg.out / ent.id;
    fs::create_directories(odir);
    fmap_write(backward, odir / "backward.fmap");
    image_write_png(maptrans::apply_backward(backward, s.image),
                    odir / "dewarped.png");
    image_write_png(maptrans::apply_backward(backward, albedo_src),
                    odir / "dewarped_albedo.png");
  });

  json manifest;
  manifest["command"] = "recover";
  manifest["map_source"] = cfg.map_source;
  json samples = json::array();
  json failures = json::array();
  for (size_t i = 0; i < ids.size(); ++i) {
    json e;
    e["id"] = ids[i];
    e["status"] = errors[i].empty() ? "ok" : "failed";
    if (!errors[i].empty()) {
      e["error"] = errors[i];
      failures.push_back(json{{"id", ids[i]}, {"error", errors[i]}});
    }
    samples.push_back(std::move(e));
  }
  manifest["samples"] = std::move(samples);
  manifest["failures"] = std::move(failures);
  write_text(cfg.out / "manifest.json", manifest.dump(2) + "\n");
  return finish("recover", ids, errors);
}

int cmd_eval(const RunConfig& cfg) {
  if (cfg.out.empty()) raise(Errc::invalid_config, "--out is required");
  if (cfg.gt.empty()) raise(Errc::invalid_config, "--gt is required");
  const json gtm = read_manifest(cfg.gt);
  const auto gts = corpus_entries(cfg.gt, gtm);

  std::vector<std::string> ids;
  std::vector<fs::path> gt_dirs;
  std::vector<fs::path> pred_files;
  if (cfg.map_source == "oracle") {
    for (const auto& e : gts) {
      ids.push_back(e.id);
      gt_dirs.push_back(e.dir);
      pred_files.emplace_back();
    }
  } else {
    if (cfg.input.empty())
      raise(Errc::invalid_config,
            "--input is required unless map-source is oracle");
    std::map<std::string, fs::path> by_id;
    for (const auto& e : gts) by_id[e.id] = e.dir;
    const json im = read_manifest(cfg.input);
    for (const auto& e : corpus_entries(cfg.input, im)) {
      auto it = by_id.find(e.id);
      if (it == by_id.end())
        raise(Errc::invalid_config, "input sample " + e.id +
                                        " not present in ground-truth corpus");
      ids.push_back(e.id);
      gt_dirs.push_back(it->second);
      pred_files.push_back(cfg.input / e.id / "backward.fmap");
    }
  }

  const int n = static_cast<int>(ids.size());
  std::vector<metrics::EvalReport> reports(ids.size());
  auto errors = run_samples(n, cfg.jobs, [&](int i) {
    const auto ui = static_cast<size_t>(i);
    const sim::Sample s = sim::read_sample(gt_dirs[ui]);
    const Raster pred =
        pred_files[ui].empty() ? s.backward_gt : fmap_read(pred_files[ui]);
    metrics::EvalReport r = metrics::evaluate_sample(pred, s);
    r.sample_id = ids[ui];
    r.map_source = cfg.map_source;
    reports[ui] = std::move(r);
  });

  json rep;
  rep["command"] = "eval";
  rep["map_source"] = cfg.map_source;
  json jsamples = json::array();
  json jfail = json::array();
  std::vector<metrics::EvalReport> ok;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (!errors[i].empty()) {
      jfail.push_back(json{{"id", ids[i]}, {"error", errors[i]}});
      continue;
    }
    json e = json::parse(metrics::eval_report_json(reports[i]));
    e["id"] = ids[i];
    jsamples.push_back(std::move(e));
    ok.push_back(reports[i]);
  }
  rep["samples"] = std::move(jsamples);
  rep["aggregate"] = json::parse(metrics::aggregate_json(ok));
  rep["failures"] = std::move(jfail);
  write_text(cfg.out, rep.dump(2) + "\n");
  return finish("eval", ids, errors);
}

int cmd_losses(const RunConfig& cfg) {
  if (cfg.out.empty()) raise(Errc::invalid_config, "--out is required");
  if (cfg.gt.empty()) raise(Errc::invalid_config, "--gt is required");
  if (cfg.input.empty()) raise(Errc::invalid_config, "--input is required");
  const json gtm = read_manifest(cfg.gt);
  const auto gts = corpus_entries(cfg.gt, gtm);

  const int n = static_cast<int>(gts.size());
  std::vector<std::string> ids(gts.size());
  for (size_t i = 0; i < gts.size(); ++i) ids[i] = gts[i].id;

  std::vector<losses::LossReport> reports(gts.size());
  auto errors = run_samples(n, cfg.jobs, [&](int i) {
    const auto& ent = gts[static_cast<size_t>(i)];
    const sim::Sample s = sim::read_sample(ent.dir);
    const fs::path pdir = cfg.input / ent.id;
    auto need = [&](const char* name) {
      const fs::path p = pdir / (std::string(name) + ".fmap");
      if (!fs::exists(p))
        raise(Errc::missing_map,
              std::string(name) + " map not found at " + p.generic_string());
      return fmap_read(p);
    };
    // Both sides of every pair move through the same [0,1] -> [-1,1]
    // rescale, the loss input range; the validity mask stays {0,1}.
    const ValueRange unit{0.0, 1.0};
    const ValueRange sym{-1.0, 1.0};
    auto rs = [&](const Raster& r) { return rescale_linear(r, unit, sym); };

    const Raster m3d_p = rs(need("m3d")), m3d_g = rs(s.m3d);
    const Raster nor_p = rs(need("normal")), nor_g = rs(s.normal);
    const Raster dep_p = rs(need("depth")), dep_g = rs(s.depth);
    const Raster bg_p = rs(need("bgmask")), bg_g = rs(s.bgmask);
    const Raster alb_p = rs(need("albedo")), alb_g = rs(s.albedo);
    const Raster uv_p = rs(need("uv")), uv_g = rs(s.uv);
    const Raster df_p = rs(need("df")), df_g = rs(derive_df(s.uv, s.bgmask));

    losses::LossBundle b;
    b.m3d_pred = &m3d_p;
    b.m3d_gt = &m3d_g;
    b.normal_pred = &nor_p;
    b.normal_gt = &nor_g;
    b.depth_pred = &dep_p;
    b.depth_gt = &dep_g;
    b.bgmask_pred = &bg_p;
    b.bgmask_gt = &bg_g;
    b.albedo_pred = &alb_p;
    b.albedo_gt = &alb_g;
    b.uv_pred = &uv_p;
    b.uv_gt = &uv_g;
    b.df_pred = &df_p;
    b.df_gt = &df_g;
    reports[static_cast<size_t>(i)] = losses::composite_losses(
        b, s.bgmask, losses::LossWeights{cfg.alpha, cfg.beta});
  });

  json rep;
  rep["command"] = "losses";
  rep["alpha"] = cfg.alpha;
  rep["beta"] = cfg.beta;
  json jsamples = json::array();
  json jfail = json::array();
  for (size_t i = 0; i < ids.size(); ++i) {
    if (!errors[i].empty()) {
      jfail.push_back(json{{"id", ids[i]}, {"error", errors[i]}});
      continue;
    }
    json e = json::parse(losses::loss_report_json(reports[i]));
    e["id"] = ids[i];
    jsamples.push_back(std::move(e));
  }
  rep["samples"] = std::move(jsamples);
  rep["failures"] = std::move(jfail);
  write_text(cfg.out, rep.dump(2) + "\n");
  return finish("losses", ids, errors);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"grid-film sample synthesis, recovery and evaluation"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out, input, gt, maps;
  const std::vector<std::string> sources{"oracle", "estimated", "files"};

  CLI::App* gen = app.add_subcommand("gen", "synthesize a seeded corpus");
  gen->add_option("--out", out, "corpus output directory")->required();
  gen->add_option("--n", cfg.n, "number of samples");
  gen->add_option("--seed", cfg.seed, "master seed");
  gen->add_option("--grid", cfg.grid, "grid pattern")
      ->check(CLI::IsMember({"4x4", "6x4"}));
  gen->add_option("--res", cfg.res, "render resolution in pixels");

  CLI::App* recover =
      app.add_subcommand("recover", "recover flat film content");
  recover->add_option("--input", input, "corpus directory")->required();
  recover->add_option("--out", out, "recovery output directory")->required();
  recover->add_option("--map-source", cfg.map_source, "map source")
      ->check(CLI::IsMember(sources));
  recover->add_option("--maps", maps, "map directory for map-source files");
  recover->add_option("--jobs", cfg.jobs, "worker threads over samples");

  CLI::App* eval = app.add_subcommand("eval", "evaluate recovered content");
  eval->add_option("--gt", gt, "ground-truth corpus directory")->required();
  eval->add_option("--input", input, "recovery output directory");
  eval->add_option("--out", out, "report file")->required();
  eval->add_option("--map-source", cfg.map_source, "map source")
      ->check(CLI::IsMember(sources));
  eval->add_option("--jobs", cfg.jobs, "worker threads over samples");

  CLI::App* losses = app.add_subcommand("losses", "composite map losses");
  losses->add_option("--gt", gt, "ground-truth corpus directory")->required();
  losses->add_option("--input", input, "predicted map directory")->required();
  losses->add_option("--out", out, "report file")->required();
  losses->add_option("--alpha", cfg.alpha, "shape loss weight");
  losses->add_option("--beta", cfg.beta, "translation loss weight");
  losses->add_option("--jobs", cfg.jobs, "worker threads over samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  cfg.out = out;
  cfg.input = input;
  cfg.gt = gt;
  cfg.maps = maps;
  try {
    if (gen->parsed()) return cmd_gen(cfg);
    if (recover->parsed()) return cmd_recover(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    return cmd_losses(cfg);
  } catch (const std::exception& e) {
    log::error(e.what());
    return 2;
  }
}

}  // namespace filmrec::cli
