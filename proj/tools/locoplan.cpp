// locoplan command-line driver.
//
// Exit codes: 0 ok, 1 malformed input or other error, 2 no path,
// 3 training diverged, 4 waypoint mismatch, 5 tracker diverged.
// Data goes to files or stdout; diagnostics go to stderr.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "locoplan/checkpoint.hpp"
#include "locoplan/dataset.hpp"
#include "locoplan/diffusion.hpp"
#include "locoplan/io.hpp"
#include "locoplan/pipeline.hpp"
#include "locoplan/tracking.hpp"

namespace fs = std::filesystem;
using namespace locoplan;

namespace {

enum Exit { kOk = 0, kMalformed = 1, kNoPath = 2, kTrainDiverged = 3, kMismatch = 4, kTrackDiverged = 5 };

int log_level() {
  static const int level = [] {
    const char* v = std::getenv("LOCOPLAN_LOG");
    if (!v) return 1;
    const std::string s(v);
    if (s == "error") return 0;
    if (s == "debug") return 3;
    if (s == "info") return 2;
    return 1;
  }();
  return level;
}

template <class... A>
void log(int level, const char* fmt, A... args) {
  if (level > log_level()) return;
  std::fprintf(stderr, "[locoplan] ");
  if constexpr (sizeof...(A) == 0) std::fputs(fmt, stderr);
  else std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// --------------------------------------------------------------------------

struct PlanArgs {
  std::string scene, moves, out = "plan";
};

int cmd_plan(const PlanArgs& a) {
  const Scene scene = load_scene(a.scene);
  const TaskPlan plan = plan_task(scene, load_moves(a.moves));
  for (const auto& f : write_plan(plan, a.out)) std::cout << f << "\n";
  log(2, "planned %zu primitives, cost %.3f s", plan.primitives.size(), plan.total_cost_seconds());
  return kOk;
}

struct TrainArgs {
  std::string config, out = "model.ckpt";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int steps = 0;
};

int cmd_train(const TrainArgs& a) {
  DatasetConfig dc;
  TrainConfig tc;
  DenoiserConfig nc;
  if (!a.config.empty()) {
    const auto j = read_json(a.config);
    try {
      if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        dc.windows = d.value("windows", dc.windows);
        dc.seed = d.value("seed", dc.seed);
        dc.max_speed = d.value("max_speed", dc.max_speed);
        dc.max_curvature = d.value("max_curvature", dc.max_curvature);
        dc.stop_probability = d.value("stop_probability", dc.stop_probability);
        dc.straight_probability = d.value("straight_probability", dc.straight_probability);
      }
      if (j.contains("train")) tc = train_config_from_json(j.at("train"), tc);
      if (j.contains("denoiser")) nc = denoiser_config_from_json(j.at("denoiser"), nc);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("train config: ") + e.what());
    }
  }
  if (a.seed_given) tc.seed = a.seed;
  if (a.steps > 0) tc.steps = a.steps;
  const Dataset data = synthesize_dataset(dc);
  if (nc.data_dim == 0 || nc.data_dim != data.layout.window_dim()) {
    const DenoiserConfig base = default_denoiser_config(data.layout);
    nc.data_dim = base.data_dim;
    nc.cond_dim = base.cond_dim;
  }
  log(2, "training %d steps on %d windows", tc.steps, dc.windows);
  const auto t0 = std::chrono::steady_clock::now();
  CheckpointHook hook;
  if (tc.checkpoint_every > 0)
    hook = [&](const DiffusionModel& m, int step) {
      save_checkpoint(m, a.out + ".step" + std::to_string(step));
      log(2, "step %d loss %.4g", step, m.loss_curve.back());
    };
  const DiffusionModel model = train(data, tc, nc, hook);
  save_checkpoint(model, a.out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log(2, "done in %.1f s, loss %.4g -> %.4g", secs, model.loss_curve.front(), model.loss_curve.back());
  std::cout << a.out << "\n" << a.out << ".loss.csv\n";
  return kOk;
}

struct GenerateArgs {
  std::string waypoints, checkpoint, out = "generate";
  std::uint64_t seed = 0;
  bool egocentric = false;
};

int cmd_generate(const GenerateArgs& a) {
  const auto rows = waypoints_from_csv(read_file(a.waypoints));
  if (rows.size() < 2) throw ParseError(a.waypoints + ": need a start pose and at least one waypoint");
  std::vector<Frame2D> wps;
  for (const auto& w : rows) wps.push_back(w.frame());
  const DiffusionModel model = load_checkpoint(a.checkpoint);
  const auto plans = plan_windows(wps);
  const StitchResult r =
      generate_long(model, wps, a.seed, a.egocentric ? RootDecode::Egocentric : RootDecode::Bidirectional);
  const WaypointErrors e = waypoint_errors(r, plans, model.layout.half);
  const fs::path out(a.out);
  write_file_atomic(out / "trajectory.csv", trajectory_to_csv(r.trajectory));
  write_file_atomic(out / "trajectory.svg", trajectory_svg(wps, r.trajectory));
  const nlohmann::json summary = {{"frames", r.trajectory.size()},
                                  {"windows", plans.size()},
                                  {"mode", a.egocentric ? "egocentric" : "bidirectional"},
                                  {"seed", a.seed},
                                  {"waypoint_rms_m", e.rms_position()},
                                  {"waypoint_errors_m", e.position}};
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

struct TrackArgs {
  std::string trajectory, config, out = "track";
  std::uint64_t seed = 0;
  double noise = 0.0;
  bool no_smoothing = false;
};

int cmd_track(const TrackArgs& a) {
  const GlobalTrajectory ref = trajectory_from_csv(read_file(a.trajectory));
  if (std::abs(ref.frame_rate - kFrameRate) > 1e-6)
    throw ParseError(a.trajectory + ": expected a 30 Hz trajectory");
  TrackConfig cfg;
  if (!a.config.empty()) cfg.gains = gains_from_json(read_json(a.config));
  cfg.smooth_actions = !a.no_smoothing;
  const CorrectionSource src = a.noise > 0.0 ? noise_correction(a.seed, a.noise) : zero_correction();
  const TrackResult r = track(ref, cfg, {}, src);
  const fs::path out(a.out);
  write_file_atomic(out / "executed.csv", trajectory_to_csv(r.executed));
  write_file_atomic(out / "rewards.csv", reward_trace_csv(r.trace));
  double max_err = 0.0;
  for (double e : r.root_error) max_err = std::max(max_err, e);
  nlohmann::json summary = detail::reward_means(r);
  summary["frames"] = r.trace.size();
  summary["max_root_error_m"] = max_err;
  summary["final_root_error_m"] = r.root_error.back();
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

struct AblateArgs {
  std::string checkpoint, out = "ablation.json";
  std::uint64_t seed = 0;
  int trials = 50;
};

int cmd_ablate(const AblateArgs& a) {
  const DiffusionModel model = load_checkpoint(a.checkpoint);
  AblationConfig cfg;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  const AblationReport rep = run_ablation(model, cfg);
  const auto j = rep.to_json();
  write_file_atomic(a.out, j.dump(2) + "\n");
  std::printf("trials %d  bidirectional mean %.4f m  egocentric mean %.4f m  reduction %.1f%%\n", a.trials,
              AblationReport::mean(rep.bidirectional), AblationReport::mean(rep.egocentric), rep.reduction_percent());
  return kOk;
}

struct PipelineArgs {
  std::string config, scene, moves, checkpoint, out;
  std::uint64_t seed = 0;
  bool egocentric = false;
};

int cmd_pipeline(const PipelineArgs& a, const CLI::App& sub) {
  PipelineConfig cfg;
  if (!a.config.empty()) cfg = pipeline_config_from_json(read_json(a.config));
  if (sub.count("--scene")) cfg.scene = a.scene;
  if (sub.count("--moves")) cfg.moves = a.moves;
  if (sub.count("--checkpoint")) cfg.checkpoint = a.checkpoint;
  if (sub.count("--seed")) cfg.seed = a.seed;
  if (sub.count("--out")) cfg.out = a.out;
  if (sub.count("--egocentric")) cfg.bidirectional = !a.egocentric;
  for (const auto* p : {&cfg.scene, &cfg.moves, &cfg.checkpoint})
    if (p->empty() || !fs::exists(*p)) throw ParseError("missing input file '" + *p + "'");
  const DiffusionModel model = load_checkpoint(cfg.checkpoint);
  const PipelineResult r = run_pipeline(cfg, model);
  for (const auto& f : r.files) std::cout << f << "\n";
  log(2, "waypoint rms %.4f m", r.metrics.at("waypoint_rms_m").get<double>());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical box loco-manipulation: planning, motion diffusion and tracking"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "plan waypoints and the primitive path for a scene");
  p->add_option("--scene", plan.scene, "scene JSON")->required();
  p->add_option("--moves", plan.moves, "moves JSON")->required();
  p->add_option("--out", plan.out, "output directory");

  TrainArgs train_args;
  auto* t = app.add_subcommand("train", "train the motion diffusion model on synthetic data");
  t->add_option("--config", train_args.config, "JSON with dataset/train/denoiser sections");
  t->add_option("--seed", train_args.seed, "training seed");
  t->add_option("--steps", train_args.steps, "optimizer steps");
  t->add_option("--out", train_args.out, "checkpoint path");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "generate a long trajectory through waypoints");
  g->add_option("--waypoints", gen.waypoints, "waypoint CSV, start pose first")->required();
  g->add_option("--checkpoint", gen.checkpoint, "model checkpoint")->required();
  g->add_option("--seed", gen.seed, "sampling seed");
  g->add_flag("--egocentric", gen.egocentric, "decode the root egocentrically");
  g->add_option("--out", gen.out, "output directory");

  TrackArgs tr;
  auto* k = app.add_subcommand("track", "track a reference trajectory in the toy simulator");
  k->add_option("--trajectory", tr.trajectory, "30 Hz trajectory CSV")->required();
  k->add_option("--config", tr.config, "gains JSON");
  k->add_option("--seed", tr.seed, "seed for the noise correction");
  k->add_option("--noise", tr.noise, "std of a random correction torque");
  k->add_flag("--no-smoothing", tr.no_smoothing, "disable the action filter");
  k->add_option("--out", tr.out, "output directory");

  AblateArgs ab;
  auto* b = app.add_subcommand("ablate", "bidirectional versus egocentric root decoding");
  b->add_option("--checkpoint", ab.checkpoint, "model checkpoint")->required();
  b->add_option("--trials", ab.trials, "paired trials");
  b->add_option("--seed", ab.seed, "seed");
  b->add_option("--out", ab.out, "report JSON");

  PipelineArgs pl;
  auto* q = app.add_subcommand("pipeline", "plan, generate, track and evaluate");
  q->add_option("--config", pl.config, "pipeline JSON");
  q->add_option("--scene", pl.scene, "scene JSON");
  q->add_option("--moves", pl.moves, "moves JSON");
  q->add_option("--checkpoint", pl.checkpoint, "model checkpoint");
  q->add_option("--seed", pl.seed, "seed");
  q->add_flag("--egocentric", pl.egocentric, "decode the root egocentrically");
  q->add_option("--out", pl.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kMalformed;
  }
  train_args.seed_given = t->count("--seed") > 0;

  const bool training = t->parsed();
  try {
    if (p->parsed()) return cmd_plan(plan);
    if (training) return cmd_train(train_args);
    if (g->parsed()) return cmd_generate(gen);
    if (k->parsed()) return cmd_track(tr);
    if (b->parsed()) return cmd_ablate(ab);
    if (q->parsed()) return cmd_pipeline(pl, *q);
  } catch (const NoPath& e) {
    std::cerr << "no path: " << e.what() << "\n";
    return kNoPath;
  } catch (const WaypointMismatch& e) {
    std::cerr << "waypoint mismatch: " << e.what() << "\n";
    return kMismatch;
  } catch (const Diverged& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return training ? kTrainDiverged : kTrackDiverged;
  } catch (const ParseError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kMalformed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  }
  return kMalformed;
}
