// Command-line front end: simulate | reconstruct | render | bench-solvers.
// Exit codes: 0 success, 2 configuration error, 3 solver failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "dynpat/diffops.hpp"
#include "dynpat/energy.hpp"
#include "dynpat/flow_render.hpp"
#include "dynpat/io.hpp"
#include "dynpat/linsolve.hpp"
#include "dynpat/phantom.hpp"
#include "dynpat/png_io.hpp"
#include "dynpat/recon.hpp"
#include "dynpat/threading.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_json(const std::string& path) {
  try {
    return json::parse(dynpat::read_text_file(path));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config ") + path + ": " +
                      e.what());
  }
}

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing config field: " + key);
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError("bad value for config field: " + key);
  }
}

dynpat::Grid2D parse_grid(const json& j) {
  try {
    return dynpat::Grid2D(
        require<int>(j, "nx"), require<int>(j, "ny"), require<double>(j, "dx"),
        require<double>(j, "c"), require<int>(j, "n_tau"),
        require<double>(j, "d_tau"), j.value("damping_width", 20),
        j.value("damping_coeff", 0.5));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
}

std::string sibling(const std::string& config_path, const std::string& name) {
  return (fs::path(config_path).parent_path() / name).string();
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& config, const json& extra) {
  json m;
  m["command"] = command;
  m["config"] = config;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = *it;
  dynpat::write_text_file((fs::path(out_dir) / "manifest.json").string(),
                          m.dump(2));
}

void snapshot_frames(const dynpat::ImageSeq& p, const std::string& dir,
                     const std::string& prefix, double vmax) {
  fs::create_directories(dir);
  for (int t = 0; t < p.frames(); ++t) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_t%03d.png", prefix.c_str(), t);
    dynpat::write_png_gray((fs::path(dir) / name).string(), p.frame(t).data(),
                           p.nx(), p.ny(), 0.0, vmax);
  }
}

void render_motion_frames(const dynpat::MotionSeq& v, const std::string& dir,
                          int border) {
  fs::create_directories(dir);
  for (int t = 0; t + 1 < v.frames(); ++t) {
    char name[64];
    std::snprintf(name, sizeof(name), "v_t%03d.png", t);
    const auto rgb =
        dynpat::render_flow_colorwheel(v.component(t, 0).data(),
                                       v.component(t, 1).data(), v.nx(),
                                       v.ny(), border);
    dynpat::write_png_rgb((fs::path(dir) / name).string(), rgb.data(),
                          v.nx() + 2 * border, v.ny() + 2 * border);
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, int threads) {
  const json cfg = load_json(config_path);
  const auto grid = parse_grid(require<json>(cfg, "grid"));
  const int frames = require<int>(cfg, "frames");
  const double sigma = require<double>(cfg, "noise_sigma");
  const int m_sub = require<int>(cfg, "sub_sampling");
  const std::uint64_t schedule_seed =
      require<std::uint64_t>(cfg, "schedule_seed");
  const std::uint64_t noise_seed =
      seed_override.value_or(require<std::uint64_t>(cfg, "noise_seed"));

  std::vector<dynpat::EllipseTrack> tracks;
  if (cfg.contains("tracks_file")) {
    tracks = dynpat::tracks_from_json(dynpat::read_text_file(
        sibling(config_path, require<std::string>(cfg, "tracks_file"))));
  } else if (cfg.contains("tracks")) {
    tracks = dynpat::tracks_from_json(cfg.at("tracks").dump());
  } else {
    tracks = dynpat::default_phantom_tracks(frames);
  }

  fs::create_directories(out_dir);
  dynpat::WaveOperator fwd(grid, dynpat::two_edge_sensors(grid));
  const auto sched =
      dynpat::make_rsp_schedule(fwd.sensor_count(), m_sub, schedule_seed);
  const auto phantom = dynpat::make_dynamic_phantom(grid, tracks, frames);
  const auto sim =
      dynpat::simulate_data(phantom, fwd, sched, sigma, noise_seed, threads);

  const fs::path out(out_dir);
  dynpat::write_image_seq((out / "phantom.f64").string(), phantom);
  dynpat::write_data_seq((out / "data_full.f64").string(), sim.full);
  dynpat::write_data_seq((out / "data_sub.f64").string(), sim.sub);
  dynpat::write_text_file((out / "schedule.json").string(),
                          dynpat::schedule_to_json(sched));
  dynpat::write_text_file((out / "tracks.json").string(),
                          dynpat::tracks_to_json(tracks));
  write_manifest(out_dir, "simulate", cfg,
                 {{"mean_snr_db", sim.mean_snr_db},
                  {"noise_seed", noise_seed},
                  {"files",
                   {{"phantom", "phantom.f64"},
                    {"data_full", "data_full.f64"},
                    {"data_sub", "data_sub.f64"},
                    {"schedule", "schedule.json"},
                    {"tracks", "tracks.json"}}}});
  std::printf("simulate: %d frames, %d sensors, m_sub=%d, mean SNR %.2f dB\n",
              frames, fwd.sensor_count(), m_sub, sim.mean_snr_db);
  return 0;
}

int cmd_reconstruct(const std::string& config_path, const std::string& in_dir,
                    const std::string& out_dir,
                    std::optional<std::uint64_t> seed_override, int threads,
                    const std::string& backend_p, const std::string& backend_v,
                    const std::string& precond, const std::string& solver) {
  const json cfg = load_json(config_path);
  const json sim_manifest =
      load_json((fs::path(in_dir) / "manifest.json").string());
  const auto grid = parse_grid(sim_manifest.at("config").at("grid"));

  const auto sched = dynpat::schedule_from_json(
      dynpat::read_text_file((fs::path(in_dir) / "schedule.json").string()));
  const std::string use = cfg.value("use", "sub");
  if (use != "sub" && use != "full")
    throw ConfigError("config field 'use' must be 'sub' or 'full'");
  const auto data = dynpat::read_data_seq(
      (fs::path(in_dir) / (use == "sub" ? "data_sub.f64" : "data_full.f64"))
          .string());
  const auto full_sched = dynpat::make_full_schedule(sched.total_sensors);

  dynpat::WaveOperator fwd(grid, dynpat::two_edge_sensors(grid));
  const auto recipe =
      dynpat::recipe_from_string(require<std::string>(cfg, "recipe"));

  dynpat::RegParams params(cfg.value("alpha", 0.0), cfg.value("beta", 0.0),
                           cfg.value("gamma", 0.0));
  dynpat::OuterConfig ocfg;
  ocfg.iterations = require<int>(cfg, "iterations");
  ocfg.lipschitz_iters = cfg.value("lipschitz_iters", 20);
  ocfg.seed = seed_override.value_or(cfg.value("seed", std::uint64_t{7}));
  ocfg.threads = threads;
  if (cfg.contains("acs"))
    ocfg.acs.alternations = cfg.at("acs").value("alternations", 4);
  auto fill_pdhg = [&](dynpat::PdhgConfig& pc, const json& sj) {
    pc.max_iters = sj.value("max_iters", pc.max_iters);
    pc.energy_stride = sj.value("energy_stride", pc.energy_stride);
  };
  auto fill_admm = [&](dynpat::AdmmConfig& ac, const json& sj) {
    ac.max_iters = sj.value("max_iters", ac.max_iters);
    ac.energy_stride = sj.value("energy_stride", ac.energy_stride);
    ac.rho = sj.value("rho", ac.rho);
    ac.rho_v = sj.value("rho_v", ac.rho_v);
    if (sj.contains("solver"))
      ac.solver =
          dynpat::krylov_from_string(sj.at("solver").get<std::string>());
    if (sj.contains("precond"))
      ac.precond =
          dynpat::precond_from_string(sj.at("precond").get<std::string>());
  };
  if (cfg.contains("solver_p")) {
    const auto& sj = cfg.at("solver_p");
    ocfg.acs.backend_p =
        dynpat::backend_from_string(sj.value("backend", "admm"));
    fill_pdhg(ocfg.acs.pdhg_p, sj);
    fill_admm(ocfg.acs.admm_p, sj);
  }
  if (cfg.contains("solver_v")) {
    const auto& sj = cfg.at("solver_v");
    ocfg.acs.backend_v =
        dynpat::backend_from_string(sj.value("backend", "admm"));
    fill_pdhg(ocfg.acs.pdhg_v, sj);
    fill_admm(ocfg.acs.admm_v, sj);
  }
  if (!backend_p.empty())
    ocfg.acs.backend_p = dynpat::backend_from_string(backend_p);
  if (!backend_v.empty())
    ocfg.acs.backend_v = dynpat::backend_from_string(backend_v);
  if (!precond.empty()) {
    ocfg.acs.admm_p.precond = dynpat::precond_from_string(precond);
    ocfg.acs.admm_v.precond = ocfg.acs.admm_p.precond;
  }
  if (!solver.empty()) {
    ocfg.acs.admm_p.solver = dynpat::krylov_from_string(solver);
    ocfg.acs.admm_v.solver = ocfg.acs.admm_p.solver;
  }

  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = dynpat::run_recipe(
      recipe, data, use == "sub" ? sched : full_sched, fwd, params, ocfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const fs::path out(out_dir);
  dynpat::write_image_seq((out / "p.f64").string(), res.p);
  if (recipe == dynpat::Recipe::Tvtvl2)
    dynpat::write_motion_seq((out / "v.f64").string(), res.v);
  dynpat::write_trace_csv((out / "energy_trace.csv").string(), res.trace);
  dynpat::write_trace_csv((out / "acs_trace.csv").string(), res.acs_trace);

  json extra = {{"wall_seconds", wall},
                {"eta", res.eta},
                {"lipschitz", res.lipschitz},
                {"input", in_dir}};

  const auto truth_path = fs::path(in_dir) / "phantom.f64";
  double vmax = 0.0;
  if (fs::exists(truth_path)) {
    const auto truth = dynpat::read_image_seq(truth_path.string());
    for (double x : truth.values()) vmax = std::max(vmax, x);
    const auto m = dynpat::image_metrics(res.p, truth);
    json mj;
    mj["rel_l2"] = m.rel_l2;
    mj["psnr"] = m.psnr;
    mj["mean_rel_l2"] = m.mean_rel_l2;
    mj["mean_psnr"] = m.mean_psnr;
    dynpat::write_text_file((out / "metrics.json").string(), mj.dump(2));
    extra["mean_rel_l2"] = m.mean_rel_l2;
  } else {
    for (double x : res.p.values()) vmax = std::max(vmax, x);
  }

  if (cfg.value("snapshots", true)) {
    snapshot_frames(res.p, (out / "snapshots").string(), "p",
                    vmax > 0 ? vmax : 1.0);
    if (recipe == dynpat::Recipe::Tvtvl2)
      render_motion_frames(res.v, (out / "flow").string(), 4);
  }
  write_manifest(out_dir, "reconstruct", cfg, extra);
  if (extra.contains("mean_rel_l2"))
    std::printf("reconstruct: %s done in %.1f s, mean rel l2 %.4f\n",
                require<std::string>(cfg, "recipe").c_str(), wall,
                extra["mean_rel_l2"].get<double>());
  else
    std::printf("reconstruct: %s done in %.1f s\n",
                require<std::string>(cfg, "recipe").c_str(), wall);
  return 0;
}

int cmd_render(const std::string& in_path, const std::string& out_dir,
               int border, bool translation_correct,
               const std::string& corrected_out) {
  const auto vol = dynpat::read_volume(in_path);
  fs::create_directories(out_dir);
  if (vol.shape.size() == 4 && vol.shape[1] == 2) {
    auto v = dynpat::read_motion_seq(in_path);
    if (translation_correct) dynpat::remove_mean_flow(v);
    if (!corrected_out.empty()) dynpat::write_motion_seq(corrected_out, v);
    render_motion_frames(v, out_dir, border);
    std::printf("render: %d motion frames -> %s\n", v.frames() - 1,
                out_dir.c_str());
    return 0;
  }
  if (vol.shape.size() == 3) {
    const auto p = dynpat::read_image_seq(in_path);
    double vmax = 0.0;
    for (double x : p.values()) vmax = std::max(vmax, x);
    snapshot_frames(p, out_dir, "p", vmax > 0 ? vmax : 1.0);
    std::printf("render: %d image frames -> %s\n", p.frames(),
                out_dir.c_str());
    return 0;
  }
  throw ConfigError("render: unsupported volume shape in " + in_path);
}

int cmd_bench_solvers(const std::string& config_path,
                      const std::string& out_dir) {
  const json cfg = load_json(config_path);
  std::string p_path = require<std::string>(cfg, "p_volume");
  if (!fs::path(p_path).is_absolute() && !fs::exists(p_path))
    p_path = sibling(config_path, p_path);
  const auto p = dynpat::read_image_seq(p_path);
  const int frame = cfg.value("frame", p.frames() / 2);
  if (frame < 0 || frame >= p.frames())
    throw ConfigError("bench-solvers: frame out of range");
  const double gamma = cfg.value("gamma", 1.0);
  const double rho = cfg.value("rho", 0.1);
  const double tol = cfg.value("tol", 1e-6);
  const int max_iters = cfg.value("max_iters", 4000);

  const auto sys = dynpat::assemble_flow_system(p.frame(frame).data(), p.nx(),
                                                p.ny(), gamma, rho);
  // right-hand side of the motion update from the actual temporal difference
  const int n = p.pixels();
  std::vector<double> rhs(2 * n, 0.0);
  if (frame + 1 < p.frames()) {
    dynpat::PointwiseFlowOp e(p.frame(frame).data(), p.nx(), p.ny());
    std::vector<double> rho_t(n);
    for (int i = 0; i < n; ++i)
      rho_t[i] = -gamma * (p.frame(frame + 1)[i] - p.frame(frame)[i]);
    e.adjoint(rho_t.data(), rhs.data(), rhs.data() + n);
  }

  fs::create_directories(out_dir);
  std::string csv = "solver,precond,iteration,rel_residual,seconds\n";
  std::printf("%-8s %-8s %10s %14s %10s\n", "solver", "precond", "iters",
              "rel_resid", "seconds");
  for (const auto& sname :
       cfg.value("solvers", std::vector<std::string>{"cg", "minres"}))
    for (const auto& pname : cfg.value(
             "preconds", std::vector<std::string>{"none", "jacobi", "ic0"})) {
      const auto method = dynpat::krylov_from_string(sname);
      const auto pc =
          dynpat::Preconditioner::make(sys, dynpat::precond_from_string(pname));
      std::vector<double> x(2 * n, 0.0);
      std::vector<dynpat::ResidualSample> log;
      const auto res =
          dynpat::solve_spd(sys, rhs, x, method, pc, tol, 3, max_iters, &log);
      for (const auto& s : log)
        csv += sname + "," + pname + "," + std::to_string(s.iteration) + "," +
               std::to_string(s.rel_residual) + "," +
               std::to_string(s.seconds) + "\n";
      std::printf("%-8s %-8s %10d %14.3e %10.3f\n", sname.c_str(),
                  pname.c_str(), res.iterations, res.rel_residual,
                  log.empty() ? 0.0 : log.back().seconds);
    }
  dynpat::write_text_file((fs::path(out_dir) / "bench.csv").string(), csv);
  write_manifest(out_dir, "bench-solvers", cfg,
                 {{"matrix_n", sys.n}, {"frame", frame}});
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Dynamic photoacoustic reconstruction with joint motion estimation"};
  app.require_subcommand(1);

  std::string config, in_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string backend_p, backend_v, precond, solver;
  int border = 4;
  bool translation_correct = false;
  std::string corrected_out;

  auto* sim = app.add_subcommand("simulate", "generate phantom + data");
  sim->add_option("--config", config, "config file")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "noise seed override");
  sim->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* rec = app.add_subcommand("reconstruct", "run a reconstruction recipe");
  rec->add_option("--config", config, "config file")->required();
  rec->add_option("--in", in_path, "simulate output directory")->required();
  rec->add_option("--out", out_dir, "output directory");
  rec->add_option("--seed", seed, "power-iteration seed override");
  rec->add_option("--threads", threads, "worker threads (0 = all cores)");
  rec->add_option("--backend-p", backend_p, "image-update backend")
      ->check(CLI::IsMember({"pdhg", "admm"}));
  rec->add_option("--backend-v", backend_v, "motion-update backend")
      ->check(CLI::IsMember({"pdhg", "admm"}));
  rec->add_option("--precond", precond, "motion least-squares preconditioner")
      ->check(CLI::IsMember({"none", "jacobi", "ic0"}));
  rec->add_option("--solver", solver, "motion least-squares solver")
      ->check(CLI::IsMember({"cg", "minres"}));

  auto* ren = app.add_subcommand("render", "render volumes to PNG frames");
  ren->add_option("--in", in_path, "volume file (.f64)")->required();
  ren->add_option("--out", out_dir, "output directory");
  ren->add_option("--border", border, "legend border width [px]");
  ren->add_flag("--translation-correct", translation_correct,
                "subtract the per-frame mean motion before rendering");
  ren->add_option("--out-volume", corrected_out,
                  "write the corrected motion volume here");

  auto* bench =
      app.add_subcommand("bench-solvers", "benchmark the motion-update solvers");
  bench->add_option("--config", config, "config file")->required();
  bench->add_option("--out", out_dir, "output directory");
  bench->add_option("--threads", threads, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) dynpat::set_default_threads(threads);

  try {
    if (*sim) return cmd_simulate(config, out_dir, seed, threads);
    if (*rec)
      return cmd_reconstruct(config, in_path, out_dir, seed, threads,
                             backend_p, backend_v, precond, solver);
    if (*ren)
      return cmd_render(in_path, out_dir, border, translation_correct,
                        corrected_out);
    if (*bench) return cmd_bench_solvers(config, out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dynpat::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
