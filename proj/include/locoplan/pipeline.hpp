#pragma once

// End-to-end runs: plan -> generate -> track -> evaluate, plus the
// bidirectional-versus-egocentric ablation harness. Both are pure functions
// of their inputs and seed; timings live only in the manifest.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "locoplan/dataset.hpp"
#include "locoplan/diffusion.hpp"
#include "locoplan/io.hpp"
#include "locoplan/rewards.hpp"
#include "locoplan/scene.hpp"
#include "locoplan/svg.hpp"
#include "locoplan/task_planner.hpp"
#include "locoplan/tracking.hpp"

namespace locoplan {

// Mean error reduction of bidirectional control reported for the full-scale
// system. Documentation only.
inline constexpr double kReferenceAblationReduction = 70.0;

/// Reads [{"box": id, "target": {"x","y","z","yaw"}}, ...].
inline std::vector<BoxMove> moves_from_json(const nlohmann::json& j) {
  std::vector<BoxMove> out;
  try {
    for (const auto& m : j) {
      BoxMove mv;
      mv.box_id = m.at("box").get<std::size_t>();
      const auto& t = m.at("target");
      mv.target = Vec3(t.at("x").get<double>(), t.at("y").get<double>(), t.value("z", 0.0));
      mv.target_yaw = t.value("yaw", 0.0);
      out.push_back(mv);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("moves: ") + e.what());
  }
  return out;
}

inline std::vector<BoxMove> load_moves(const std::string& path) {
  try {
    return moves_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// World waypoints for a locomotion segment: the start pose, then the samples.
inline std::vector<Frame2D> segment_waypoints(const Segment& seg) {
  std::vector<Frame2D> out{seg.start};
  for (const auto& w : seg.waypoints) out.push_back(w.frame());
  return out;
}

struct WaypointErrors {
  std::vector<double> position;  // one per conditioning waypoint, window order
  std::vector<double> heading;

  double mean_position() const {
    double s = 0.0;
    for (double e : position) s += e;
    return position.empty() ? 0.0 : s / position.size();
  }
  double rms_position() const {
    double s = 0.0;
    for (double e : position) s += e * e;
    return position.empty() ? 0.0 : std::sqrt(s / position.size());
  }
};

/// Generated ground pose at frames N-1 and 2N-1 of each window against the
/// world waypoints the window was conditioned on.
inline WaypointErrors waypoint_errors(const StitchResult& r, const std::vector<WindowPlan>& plans,
                                      int half = kHalfWindow) {
  WaypointErrors e;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const std::size_t o = r.window_offsets.at(k);
    const Frame2D want[2] = {plans[k].start.compose(plans[k].condition.c1_frame()),
                             plans[k].start.compose(plans[k].condition.c2_frame())};
    const std::size_t idx[2] = {o + half - 1, o + 2 * half - 1};
    for (int i = 0; i < 2; ++i) {
      const Frame2D got = r.trajectory.frames.at(idx[i]).ground();
      e.position.push_back((got.position - want[i].position).head<2>().norm());
      e.heading.push_back(std::abs(wrap_angle(got.heading - want[i].heading)));
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Ablation

struct AblationReport {
  std::vector<double> bidirectional;  // mean waypoint position error per trial
  std::vector<double> egocentric;

  static double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  }
  /// Linear-interpolated quantile, q in [0, 1].
  static double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  }
  static double tail_ratio(const std::vector<double>& v) {
    const double med = quantile(v, 0.5);
    return med > 0.0 ? quantile(v, 0.95) / med : 0.0;
  }
  double reduction_percent() const {
    const double ego = mean(egocentric);
    return ego > 0.0 ? 100.0 * (1.0 - mean(bidirectional) / ego) : 0.0;
  }

  nlohmann::json to_json() const {
    return {{"trials", bidirectional.size()},
            {"bidirectional", {{"mean", mean(bidirectional)}, {"median", quantile(bidirectional, 0.5)},
                               {"p95", quantile(bidirectional, 0.95)}, {"p95_over_median", tail_ratio(bidirectional)},
                               {"per_trial", bidirectional}}},
            {"egocentric", {{"mean", mean(egocentric)}, {"median", quantile(egocentric, 0.5)},
                            {"p95", quantile(egocentric, 0.95)}, {"p95_over_median", tail_ratio(egocentric)},
                            {"per_trial", egocentric}}},
            {"mean_reduction_percent", reduction_percent()},
            {"reference_reduction_percent", kReferenceAblationReduction}};
  }
};

struct AblationConfig {
  int trials = 50;
  int windows = 4;  // windows per random waypoint sequence
  std::uint64_t seed = 0;
};

/// Random waypoint sequence: ground poses every N frames along a procedural walk.
inline std::vector<Frame2D> random_waypoint_sequence(std::mt19937_64& rng, int windows, int half = kHalfWindow) {
  const WalkProfile p = random_profile(rng, DatasetConfig{});
  const GlobalTrajectory walk = walk_trajectory(p, 2 * half * windows);
  std::vector<Frame2D> wps{Frame2D{}};
  for (int k = 1; k <= 2 * windows; ++k) wps.push_back(walk.frames[k * half - 1].ground());
  return wps;
}

/// Paired trials: the same sampled windows decoded both ways.
inline AblationReport run_ablation(const DiffusionModel& model, const AblationConfig& cfg) {
  if (cfg.trials < 1 || cfg.windows < 1) throw Error("ablation: trials and windows must be positive");
  std::mt19937_64 rng(cfg.seed);
  AblationReport rep;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto plans = plan_windows(random_waypoint_sequence(rng, cfg.windows, model.layout.half));
    std::vector<WaypointCondition> conds;
    for (const auto& p : plans) conds.push_back(p.condition);
    const auto windows = sample_batch(model, conds, rng);
    for (auto mode : {RootDecode::Bidirectional, RootDecode::Egocentric}) {
      const StitchResult r = stitch_windows(windows, plans, mode);
      const double e = waypoint_errors(r, plans, model.layout.half).mean_position();
      (mode == RootDecode::Bidirectional ? rep.bidirectional : rep.egocentric).push_back(e);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineConfig {
  std::string scene;
  std::string moves;
  std::string checkpoint;
  std::uint64_t seed = 0;
  bool bidirectional = true;
  std::string out = "run";
  TaskPlannerConfig planner;
  TrackConfig tracker;
  int manipulation_frames = 60;
};

inline nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  return {{"scene", c.scene},
          {"moves", c.moves},
          {"checkpoint", c.checkpoint},
          {"seed", c.seed},
          {"bidirectional", c.bidirectional},
          {"out", c.out},
          {"planner",
           {{"v_max", c.planner.v_max},
            {"a_max", c.planner.a_max},
            {"waypoint_spacing", c.planner.waypoint_spacing},
            {"reach_clearance", c.planner.reach_clearance},
            {"inflation_radius", c.planner.lattice.inflation_radius}}},
          {"gains", gains_to_json(c.tracker.gains)},
          {"smooth_actions", c.tracker.smooth_actions},
          {"manipulation_frames", c.manipulation_frames}};
}

/// Applies every key present in `j` on top of `c`.
inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig c = {}) {
  try {
    c.scene = j.value("scene", c.scene);
    c.moves = j.value("moves", c.moves);
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    c.seed = j.value("seed", c.seed);
    c.bidirectional = j.value("bidirectional", c.bidirectional);
    c.out = j.value("out", c.out);
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      c.planner.v_max = p.value("v_max", c.planner.v_max);
      c.planner.a_max = p.value("a_max", c.planner.a_max);
      c.planner.waypoint_spacing = p.value("waypoint_spacing", c.planner.waypoint_spacing);
      c.planner.reach_clearance = p.value("reach_clearance", c.planner.reach_clearance);
      c.planner.lattice.inflation_radius = p.value("inflation_radius", c.planner.lattice.inflation_radius);
    }
    if (j.contains("gains")) c.tracker.gains = gains_from_json(j.at("gains"));
    c.tracker.smooth_actions = j.value("smooth_actions", c.tracker.smooth_actions);
    c.manipulation_frames = j.value("manipulation_frames", c.manipulation_frames);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

inline nlohmann::json primitive_path_json(const TaskPlan& plan, const PrimitiveGraph& g = PrimitiveGraph::default_graph()) {
  nlohmann::json prims = nlohmann::json::array();
  for (auto p : plan.primitives) prims.push_back(std::string(to_string(p)));
  return {{"primitives", prims}, {"valid", validate_primitive_path(g, plan.primitives)},
          {"total_cost_seconds", plan.total_cost_seconds()}};
}

inline std::string segment_name(std::size_t k, Primitive p) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "segment_%02zu_", k);
  return buf + std::string(to_string(p));
}

/// Writes waypoint CSVs (start pose first) and the primitive path; returns written paths.
inline std::vector<std::string> write_plan(const TaskPlan& plan, const std::filesystem::path& dir) {
  std::vector<std::string> files;
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const Segment& s = plan.segments[k];
    if (!is_locomotion(s.primitive)) continue;
    std::vector<Waypoint> rows{{0.0, s.start.position, Rotation6D::from_yaw(s.start.heading)}};
    rows.insert(rows.end(), s.waypoints.begin(), s.waypoints.end());
    const auto p = dir / (segment_name(k, s.primitive) + "_waypoints.csv");
    write_file_atomic(p, waypoints_to_csv(rows));
    files.push_back(p.string());
  }
  const auto p = dir / "primitive_path.json";
  write_file_atomic(p, primitive_path_json(plan).dump(2) + "\n");
  files.push_back(p.string());
  return files;
}

inline std::string trajectory_svg(const std::vector<Frame2D>& waypoints, const GlobalTrajectory& traj,
                                  const SmoothedPath* planned = nullptr, const OccupancyGrid* grid = nullptr) {
  SvgPlot plot;
  if (grid) plot.grid(*grid);
  if (planned && !planned->knots().empty()) {
    std::vector<Vec2> pts;
    const double dt = 1.0 / 30.0;
    for (double t = planned->start_time(); t < planned->end_time(); t += dt) pts.push_back(planned->position(t));
    pts.push_back(planned->position(planned->end_time()));
    plot.polyline(pts, "#1f77b4", 2.0, "planned path");
  }
  std::vector<Vec2> root;
  for (const auto& f : traj.frames) root.push_back(f.root_pos.head<2>());
  plot.polyline(root, "#d62728", 1.5, "generated root");
  std::vector<Vec2> wp;
  for (const auto& w : waypoints) wp.push_back(w.position.head<2>());
  plot.markers(wp, "#2ca02c", 4.0, "waypoints");
  return plot.str();
}

struct PipelineResult {
  nlohmann::json metrics;   // deterministic for identical config and seed
  nlohmann::json manifest;  // metrics plus config echo, timings and file list
  std::vector<std::string> files;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline nlohmann::json reward_means(const TrackResult& r) {
  double j = 0, t = 0, o = 0, total = 0;
  for (const auto& x : r.trace) {
    j += x.r_joint;
    t += x.r_translation;
    o += x.r_orientation;
    total += x.total;
  }
  const double n = std::max<std::size_t>(r.trace.size(), 1);
  return {{"r_joint", j / n}, {"r_translation", t / n}, {"r_orientation", o / n}, {"total", total / n},
          {"r_smooth", r.mean_r_smooth}, {"mean_dtau_sq", r.mean_dtau_sq}};
}

}  // namespace detail

/// Tracker failures surface as Diverged; generation failures as WaypointMismatch.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const DiffusionModel& model) {
  using clock = std::chrono::steady_clock;
  const std::filesystem::path out(cfg.out);
  PipelineResult res;
  nlohmann::json timings;
  auto t0 = clock::now();

  const Scene scene = load_scene(cfg.scene);
  const std::vector<BoxMove> moves = load_moves(cfg.moves);
  const TaskPlan plan = plan_task(scene, moves, cfg.planner);
  for (const auto& f : write_plan(plan, out / "plan")) res.files.push_back(f);
  auto t1 = clock::now();
  timings["plan_s"] = std::chrono::duration<double>(t1 - t0).count();

  // Generation and tracking, segment by segment.
  Scene world = scene;
  nlohmann::json segs = nlohmann::json::array();
  WaypointErrors all_errors;
  double gen_s = 0.0, track_s = 0.0;
  std::vector<double> totals;
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const Segment& s = plan.segments[k];
    const std::string name = segment_name(k, s.primitive);
    const BoxSpec& box = world.boxes.at(s.box_id);
    nlohmann::json sm = {{"primitive", std::string(to_string(s.primitive))}, {"box", s.box_id}};
    GlobalTrajectory reference;
    TrackTask task;
    const auto g0 = clock::now();
    if (is_locomotion(s.primitive)) {
      const auto wps = segment_waypoints(s);
      const auto plans = plan_windows(wps);
      const StitchResult gen = generate_long(model, wps, detail::mix_seed(cfg.seed, k),
                                             cfg.bidirectional ? RootDecode::Bidirectional : RootDecode::Egocentric);
      const WaypointErrors e = waypoint_errors(gen, plans, model.layout.half);
      all_errors.position.insert(all_errors.position.end(), e.position.begin(), e.position.end());
      double max_gap = 0.0;
      for (double g : gen.boundary_gaps) max_gap = std::max(max_gap, g);
      sm["path_cost_s"] = s.lattice_path.cost_seconds();
      sm["waypoints"] = s.waypoints.size();
      sm["waypoint_rms_m"] = e.rms_position();
      sm["max_boundary_gap_m"] = max_gap;
      reference = gen.trajectory;
      if (s.primitive == Primitive::WalkAndCarry) {
        reference = with_held_box(reference, box.width);
        const auto& f0 = reference.frames.front();
        task.mode = TrackMode::Carry;
        task.boxes = {held_box(f0.root_pos, heading_of(f0.root_rot.toRotationMatrix()), kTorsoHeight, box.width,
                               box.weight)};
      }
      const auto gp = out / "generate" / (name + ".csv");
      write_file_atomic(gp, trajectory_to_csv(gen.trajectory));
      const auto sp = out / "generate" / (name + ".svg");
      const OccupancyGrid grid = world.occupancy();
      write_file_atomic(sp, trajectory_svg(wps, gen.trajectory, &s.path, &grid));
      res.files.push_back(gp.string());
      res.files.push_back(sp.string());
    } else {
      const auto task_kind = s.primitive == Primitive::PickUp ? ManipulationTask::PickUp : ManipulationTask::PutDown;
      reference = manipulation_reference(s.start, task_kind, s.platform_height, box.width, cfg.manipulation_frames);
      task.mode = s.primitive == Primitive::PickUp ? TrackMode::PickUp : TrackMode::PutDown;
      task.platform_height = s.platform_height;
      const auto& f0 = reference.frames.front();
      const double base = task_kind == ManipulationTask::PickUp ? s.platform_height : kTorsoHeight;
      task.boxes = {held_box(f0.root_pos, s.start.heading, base, box.width, box.weight)};
      if (s.primitive == Primitive::PutDown) world.boxes[s.box_id].position = Vec3(s.platform_position.x(), s.platform_position.y(), s.platform_height);
    }
    const auto g1 = clock::now();
    gen_s += std::chrono::duration<double>(g1 - g0).count();

    const TrackResult tr = track(reference, cfg.tracker, task);
    const auto ep = out / "track" / (name + "_executed.csv");
    const auto rp = out / "track" / (name + "_rewards.csv");
    write_file_atomic(ep, trajectory_to_csv(tr.executed));
    write_file_atomic(rp, reward_trace_csv(tr.trace));
    res.files.push_back(ep.string());
    res.files.push_back(rp.string());
    sm["frames"] = reference.size();
    sm["rewards"] = detail::reward_means(tr);
    sm["composition"] = std::string(to_string(tr.trace.back().composition));
    totals.push_back(tr.mean_total());
    segs.push_back(sm);
    track_s += std::chrono::duration<double>(clock::now() - g1).count();
  }

  res.metrics = {{"seed", cfg.seed},
                 {"bidirectional", cfg.bidirectional},
                 {"primitives", primitive_path_json(plan)},
                 {"path_cost_s", plan.total_cost_seconds()},
                 {"waypoint_rms_m", all_errors.rms_position()},
                 {"segments", segs}};
  timings["generate_s"] = gen_s;
  timings["track_s"] = track_s;

  const auto mp = out / "metrics.json";
  write_file_atomic(mp, res.metrics.dump(2) + "\n");
  res.files.push_back(mp.string());
  const auto manifest_path = out / "manifest.json";
  res.files.push_back(manifest_path.string());
  res.manifest = {{"config", pipeline_config_to_json(cfg)},
                  {"timings", timings},
                  {"files", res.files},
                  {"metrics", res.metrics}};
  write_file_atomic(manifest_path, res.manifest.dump(2) + "\n");
  return res;
}

}  // namespace locoplan
