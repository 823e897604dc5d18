#include <gtest/gtest.h>

#include "locoplan/dataset.hpp"
#include "locoplan/io.hpp"

using namespace locoplan;

namespace {

std::size_t line_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Io, TrajectoryCsvRoundTripIsExact) {
  const GlobalTrajectory t = walk_trajectory({0.4, 1.3, -0.7, 0.2}, 45, {Vec3(1, 2, 0), 0.3});
  const std::string csv = trajectory_to_csv(t);
  const GlobalTrajectory back = trajectory_from_csv(csv);
  ASSERT_EQ(back.size(), t.size());
  EXPECT_DOUBLE_EQ(back.frame_rate, 30.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.frames[i].root_pos, t.frames[i].root_pos);
    EXPECT_EQ(back.frames[i].root_rot.coeffs(), t.frames[i].root_rot.coeffs());
    for (std::size_t j = 0; j < t.frames[i].joints.size(); ++j)
      EXPECT_EQ(back.frames[i].joints[j].coeffs(), t.frames[i].joints[j].coeffs());
  }
  EXPECT_EQ(trajectory_to_csv(back), csv);
  EXPECT_EQ(csv.substr(0, csv.find(',', 20)), "frame,t,root_x,root_y");
}

TEST(Io, WaypointCsvRoundTrip) {
  const std::vector<Waypoint> w = {{0.0, Vec3(0.75, 0.75, 0), Rotation6D::from_yaw(0.0)},
                                   {0.5, Vec3(1.1, 0.9, 0), Rotation6D::from_yaw(0.1 + 1e-13)}};
  const auto back = waypoints_from_csv(waypoints_to_csv(w));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].time, 0.5);
  EXPECT_EQ(back[1].position, w[1].position);
  EXPECT_NEAR(back[1].heading(), w[1].heading(), 1e-15);
}

TEST(Io, MalformedCsvReportsLine) {
  const std::string hdr = "t,x,y,heading\n";
  EXPECT_EQ(line_of([&] { waypoints_from_csv(hdr + "0,1,2,0\n0.5,1,2\n"); }), 3u);
  EXPECT_EQ(line_of([&] { waypoints_from_csv(hdr + "0,1,2,0\n0.5,abc,2,0\n"); }), 3u);
  EXPECT_EQ(line_of([&] { waypoints_from_csv(hdr + "0,1,2,0x\n"); }), 2u);
  EXPECT_EQ(line_of([&] { waypoints_from_csv("t,x,y\n"); }), 1u);
  EXPECT_EQ(line_of([&] { waypoints_from_csv(""); }), 1u);
  // CRLF and blank lines are tolerated.
  EXPECT_EQ(waypoints_from_csv("t,x,y,heading\r\n0,1,2,0\r\n\r\n").size(), 1u);

  const GlobalTrajectory t = walk_trajectory({0.8, 0.8, 0.0, 0.0}, 3);
  std::string csv = trajectory_to_csv(t);
  const auto second = csv.find('\n', csv.find('\n') + 1);
  std::string bad = csv;
  bad.replace(csv.find('\n') + 1, 1, "5");  // frame index out of sequence
  EXPECT_EQ(line_of([&] { trajectory_from_csv(bad); }), 2u);
  std::string notunit = csv.substr(0, second + 1);
  {
    auto cells = detail::split_csv_line(csv.substr(second + 1, csv.find('\n', second + 1) - second - 1));
    cells[5] = "2";
    notunit += detail::join(cells) + "\n";
  }
  EXPECT_EQ(line_of([&] { trajectory_from_csv(notunit); }), 3u);
  EXPECT_EQ(line_of([&] { trajectory_from_csv("frame,t\n"); }), 1u);
  EXPECT_THROW(trajectory_from_csv(csv.substr(0, csv.find('\n') + 1)), ParseError);
}

TEST(Io, WindowBinaryRoundTrip) {
  const GlobalTrajectory t = walk_trajectory({1.0, 0.5, 0.3, 0.0}, 30);
  const MotionWindow w = encode_window(t, {}, condition_from_trajectory(t, {}));
  const std::string bytes = window_to_binary(w);
  EXPECT_EQ(bytes.size(), 16u + 4u * static_cast<std::size_t>(MotionLayout{}.window_dim()));
  const MotionWindow back = window_from_binary(bytes);
  EXPECT_EQ(back.layout(), w.layout());
  EXPECT_EQ(back.flatten(), w.flatten().cast<float>().cast<double>());
  EXPECT_THROW(window_from_binary(bytes.substr(0, 100)), ParseError);
  EXPECT_THROW(window_from_binary("XXXX" + bytes.substr(4)), ParseError);
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
  const auto dir = std::filesystem::temp_directory_path() / "locoplan_io_test";
  std::filesystem::remove_all(dir);
  write_file_atomic(dir / "a" / "b.txt", "hello");
  EXPECT_EQ(read_file(dir / "a" / "b.txt"), "hello");
  EXPECT_FALSE(std::filesystem::exists(dir / "a" / "b.txt.tmp"));
  EXPECT_THROW(read_file(dir / "nope"), ParseError);
  std::filesystem::remove_all(dir);
}
