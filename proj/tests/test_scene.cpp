#include <gtest/gtest.h>

#include <random>

#include "locoplan/scene.hpp"

using namespace locoplan;

namespace {

nlohmann::json small_scene() {
  return nlohmann::json::parse(R"({
    "grid": {"cell_size": 0.5, "width": 8, "height": 6, "occupied": [[3, 0], [3, 1], [3, 2]]},
    "boxes": [{"position": [3.25, 2.25, 0.5], "yaw": 0.3, "width": 0.4, "weight": 4.0}],
    "platforms": [{"position": [3.25, 2.25], "height": 0.5, "footprint": [0.6, 0.6]}],
    "start": {"x": 0.25, "y": 0.75, "heading": 1.0}
  })");
}

}  // namespace

TEST(Scene, JsonRoundTrip) {
  const Scene s = scene_from_json(small_scene());
  EXPECT_EQ(s.grid.width(), 8);
  EXPECT_EQ(s.grid.occupied_count(), 3);
  ASSERT_EQ(s.boxes.size(), 1u);
  EXPECT_DOUBLE_EQ(s.boxes[0].weight, 4.0);
  EXPECT_DOUBLE_EQ(s.start.heading, 1.0);
  const Scene t = scene_from_json(scene_to_json(s));
  EXPECT_EQ(scene_to_json(t), scene_to_json(s));
}

TEST(Scene, DefaultStartIsFirstCellCenter) {
  auto j = small_scene();
  j.erase("start");
  const Scene s = scene_from_json(j);
  EXPECT_DOUBLE_EQ(s.start.position.x(), 0.25);
  EXPECT_DOUBLE_EQ(s.start.position.y(), 0.25);
}

TEST(Scene, RejectsInvalidInput) {
  auto j = small_scene();
  j["grid"]["occupied"].push_back({8, 0});
  EXPECT_THROW(scene_from_json(j), InvalidScene);
  j = small_scene();
  j["boxes"][0]["position"] = {10.0, 1.0, 0.0};
  EXPECT_THROW(scene_from_json(j), InvalidScene);
  j = small_scene();
  j["boxes"][0]["width"] = -1.0;
  EXPECT_THROW(scene_from_json(j), InvalidScene);
  j = small_scene();
  j["grid"]["cell_size"] = 0.0;
  EXPECT_THROW(scene_from_json(j), InvalidScene);
  j = small_scene();
  j.erase("grid");
  EXPECT_THROW(scene_from_json(j), InvalidScene);
}

TEST(Scene, OccupancyIncludesPlatformsAndBoxes) {
  const Scene s = scene_from_json(small_scene());
  const OccupancyGrid all = s.occupancy();
  EXPECT_TRUE(all.occupied(all.cell_at(Vec2(3.25, 2.25))));
  EXPECT_FALSE(s.grid.occupied(s.grid.cell_at(Vec2(3.25, 2.25))));
  auto j = small_scene();
  j["platforms"] = nlohmann::json::array();
  j["boxes"][0]["position"] = {1.25, 2.25, 0.0};
  const Scene floor = scene_from_json(j);
  EXPECT_TRUE(floor.occupancy().occupied(floor.grid.cell_at(Vec2(1.25, 2.25))));
  EXPECT_FALSE(floor.occupancy(0).occupied(floor.grid.cell_at(Vec2(1.25, 2.25))));
}

TEST(Scene, InflationMatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution occ(0.15);
  OccupancyGrid g(15, 12, 0.4);
  for (int j = 0; j < 12; ++j)
    for (int i = 0; i < 15; ++i)
      if (occ(rng)) g.set({i, j});
  for (double radius : {0.0, 0.3, 0.5, 0.9}) {
    const OccupancyGrid inf = g.inflated(radius);
    for (int j = 0; j < 12; ++j) {
      for (int i = 0; i < 15; ++i) {
        // Blocked iff occupied, or some occupied square lies closer than radius to the center.
        bool want = false;
        const Vec2 c = g.center({i, j});
        for (int b = 0; b < 12 && !want; ++b)
          for (int a = 0; a < 15 && !want; ++a) {
            if (!g.occupied({a, b})) continue;
            const double dx = std::max({a * 0.4 - c.x(), 0.0, c.x() - (a + 1) * 0.4});
            const double dy = std::max({b * 0.4 - c.y(), 0.0, c.y() - (b + 1) * 0.4});
            want = (a == i && b == j) || std::hypot(dx, dy) < radius;
          }
        EXPECT_EQ(inf.occupied({i, j}), want) << i << "," << j << " r=" << radius;
      }
    }
  }
}

TEST(Scene, CellLookup) {
  const OccupancyGrid g(4, 3, 0.5);
  EXPECT_EQ(g.cell_at(Vec2(0.74, 1.2)), (Cell{1, 2}));
  EXPECT_TRUE(g.contains(Vec2(1.99, 1.49)));
  EXPECT_TRUE(g.contains(Vec2(2.0, 1.5)));
  EXPECT_FALSE(g.contains(Vec2(2.01, 0.2)));
  EXPECT_FALSE(g.in_bounds({-1, 0}));
}
