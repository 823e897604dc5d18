#pragma once

// File formats: trajectory CSV, waypoint CSV, motion-window binary, and
// atomic file writes. CSV numbers use %.17g so every value re-parses exactly.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "locoplan/checkpoint.hpp"
#include "locoplan/error.hpp"
#include "locoplan/motion.hpp"
#include "locoplan/skeleton.hpp"
#include "locoplan/spline.hpp"

namespace locoplan {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes `content` to a sibling temporary file, then renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && (s[used] == ' ' || s[used] == '\r')) ++used;
    if (used != s.size()) throw ParseError("trailing characters in '" + s + "'", line);
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError("not a number: '" + s + "'", line);
  } catch (const std::out_of_range&) {
    throw ParseError("number out of range: '" + s + "'", line);
  }
}

/// Rows of numbers following a header that must match `expected` exactly.
inline std::vector<std::vector<double>> parse_numeric_csv(const std::string& text,
                                                          const std::vector<std::string>& expected) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv_line(line) != expected) throw ParseError("unexpected header", line_no);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected.size())
      throw ParseError("expected " + std::to_string(expected.size()) + " columns, got " +
                           std::to_string(cells.size()), line_no);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s;
}

}  // namespace detail

inline std::vector<std::string> trajectory_csv_header(int joints) {
  std::vector<std::string> h = {"frame", "t", "root_x", "root_y", "root_z", "root_qw", "root_qx", "root_qy", "root_qz"};
  for (int j = 0; j < joints; ++j) {
    const std::string name = j < skeleton::kCount ? std::string(skeleton::kNames[j]) : "joint" + std::to_string(j);
    for (const char* c : {"_qw", "_qx", "_qy", "_qz"}) h.push_back(name + c);
  }
  return h;
}

inline std::string trajectory_to_csv(const GlobalTrajectory& traj) {
  const int joints = traj.empty() ? 0 : static_cast<int>(traj.frames.front().joints.size());
  std::string out = detail::join(trajectory_csv_header(joints)) + "\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& f = traj.frames[i];
    out += std::to_string(i) + "," + fmt_double(i / traj.frame_rate);
    for (int k = 0; k < 3; ++k) out += "," + fmt_double(f.root_pos[k]);
    for (double v : {f.root_rot.w(), f.root_rot.x(), f.root_rot.y(), f.root_rot.z()}) out += "," + fmt_double(v);
    for (const auto& q : f.joints)
      for (double v : {q.w(), q.x(), q.y(), q.z()}) out += "," + fmt_double(v);
    out += "\n";
  }
  return out;
}

/// Parses a trajectory CSV; the frame rate is recovered from the t column.
inline GlobalTrajectory trajectory_from_csv(const std::string& text) {
  // Joint count follows from the header width.
  const auto first_nl = text.find('\n');
  const auto header = detail::split_csv_line(text.substr(0, first_nl == std::string::npos ? text.size() : first_nl));
  if (header.size() < 9 || (header.size() - 9) % 4 != 0) throw ParseError("unexpected header", 1);
  const int joints = static_cast<int>(header.size() - 9) / 4;
  const auto rows = detail::parse_numeric_csv(text, trajectory_csv_header(joints));
  GlobalTrajectory traj;
  if (rows.size() >= 2 && rows[1][1] > rows[0][1]) traj.frame_rate = 1.0 / (rows[1][1] - rows[0][1]);
  traj.frame_rate = std::round(traj.frame_rate * 1e6) / 1e6;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& v = rows[r];
    if (static_cast<std::size_t>(v[0]) != r) throw ParseError("frame index out of sequence", r + 2);
    TrajectoryFrame f;
    f.root_pos = Vec3(v[2], v[3], v[4]);
    f.root_rot = Quat(v[5], v[6], v[7], v[8]);
    if (std::abs(f.root_rot.norm() - 1.0) > 1e-6) throw ParseError("root quaternion not unit", r + 2);
    for (int j = 0; j < joints; ++j) {
      const std::size_t o = 9 + 4 * j;
      f.joints.emplace_back(v[o], v[o + 1], v[o + 2], v[o + 3]);
      if (std::abs(f.joints.back().norm() - 1.0) > 1e-6) throw ParseError("joint quaternion not unit", r + 2);
    }
    traj.frames.push_back(std::move(f));
  }
  if (traj.empty()) throw ParseError("trajectory has no frames", 2);
  return traj;
}

inline const std::vector<std::string>& waypoint_csv_header() {
  static const std::vector<std::string> h = {"t", "x", "y", "heading"};
  return h;
}

inline std::string waypoints_to_csv(const std::vector<Waypoint>& wps) {
  std::string out = detail::join(waypoint_csv_header()) + "\n";
  for (const auto& w : wps)
    out += fmt_double(w.time) + "," + fmt_double(w.position.x()) + "," + fmt_double(w.position.y()) + "," +
           fmt_double(w.heading()) + "\n";
  return out;
}

inline std::vector<Waypoint> waypoints_from_csv(const std::string& text) {
  std::vector<Waypoint> out;
  for (const auto& r : detail::parse_numeric_csv(text, waypoint_csv_header()))
    out.push_back({r[0], Vec3(r[1], r[2], 0.0), Rotation6D::from_yaw(r[3])});
  return out;
}

/// Window binary: "LMWN", u32 version, u32 frames, u32 frame_dim, then
/// frames * frame_dim little-endian f32 values, one frame after another.
inline std::string window_to_binary(const MotionWindow& w) {
  std::ostringstream out(std::ios::binary);
  out.write("LMWN", 4);
  const MotionLayout l = w.layout();
  detail::write_u32(out, 1);
  detail::write_u32(out, static_cast<std::uint32_t>(l.frames()));
  detail::write_u32(out, static_cast<std::uint32_t>(l.frame_dim()));
  const Eigen::VectorXd v = w.flatten();
  for (Eigen::Index i = 0; i < v.size(); ++i) detail::write_f32(out, static_cast<float>(v[i]));
  return out.str();
}

inline MotionWindow window_from_binary(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "LMWN") throw ParseError("not a motion window file");
  try {
    if (detail::read_u32(in) != 1) throw ParseError("unsupported motion window version");
    const auto frames = detail::read_u32(in);
    const auto dim = detail::read_u32(in);
    if (frames % 2 != 0 || dim < 18 || (dim - 18) % 6 != 0) throw ParseError("bad motion window shape");
    const MotionLayout l{static_cast<int>(frames / 2), static_cast<int>((dim - 18) / 6)};
    Eigen::VectorXd v(l.window_dim());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = detail::read_f32(in);
    return MotionWindow::unflatten(v, l);
  } catch (const CheckpointError&) {
    throw ParseError("motion window file truncated");
  }
}

}  // namespace locoplan
