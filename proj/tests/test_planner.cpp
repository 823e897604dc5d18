#include <gtest/gtest.h>

#include <random>

#include "locoplan/planner.hpp"
#include "planner_oracle.hpp"

using namespace locoplan;
using oracle::Oracle;

namespace {

OccupancyGrid random_grid(std::mt19937_64& rng, int w, int h, double density, double cs) {
  OccupancyGrid g(w, h, cs);
  std::bernoulli_distribution occ(density);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (occ(rng)) g.set({i, j});
  return g;
}

Cell random_free(std::mt19937_64& rng, const OccupancyGrid& g) {
  std::uniform_int_distribution<int> ui(0, g.width() - 1), uj(0, g.height() - 1);
  for (;;) {
    const Cell c{ui(rng), uj(rng)};
    if (!g.occupied(c)) return c;
  }
}

}  // namespace

TEST(Planner, AStarCostEqualsDijkstraOracle) {
  std::mt19937_64 rng(11);
  int solved = 0, unsolved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const OccupancyGrid g = random_grid(rng, 12, 12, 0.3, 0.5);
    const Cell a = random_free(rng, g), b = random_free(rng, g);
    const int h0 = std::uniform_int_distribution<int>(0, 7)(rng);
    const int hg = std::uniform_int_distribution<int>(0, 7)(rng);
    const Lattice lat(g, {});
    const auto want = Oracle{g, 0.5}.dijkstra({a.i, a.j, h0, 0}, b.i, b.j, hg);
    if (want) {
      const PlanResult r = plan_astar(lat, {a, h0, 0}, {b, hg});
      EXPECT_EQ(r.cost, *want) << "trial " << trial;
      ++solved;
    } else {
      EXPECT_THROW(plan_astar(lat, {a, h0, 0}, {b, hg}), NoPath);
      ++unsolved;
    }
  }
  EXPECT_GT(solved, 10);
}

TEST(Planner, PathIsAChainOfLegalTransitions) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const OccupancyGrid g = random_grid(rng, 15, 15, 0.2, 0.4);
    const Cell a = random_free(rng, g), b = random_free(rng, g);
    const Lattice lat(g, {});
    PlanResult r;
    try {
      r = plan_astar(lat, {a, 0, 0}, {b, 2});
    } catch (const NoPath&) {
      continue;
    }
    ASSERT_FALSE(r.states.empty());
    EXPECT_EQ(r.states.front(), (PlannerState{a, 0, 0}));
    EXPECT_EQ(r.states.back().cell, b);
    EXPECT_EQ(r.states.back().heading_bin, 2);
    CostTicks sum = 0;
    const Oracle o{g, 0.4};
    for (std::size_t k = 0; k + 1 < r.states.size(); ++k) {
      const auto& s = r.states[k];
      const auto& n = r.states[k + 1];
      bool found = false;
      for (auto [succ, c] : o.successors({s.cell.i, s.cell.j, s.heading_bin, s.speed_bin})) {
        if (succ == Oracle::S{n.cell.i, n.cell.j, n.heading_bin, n.speed_bin}) {
          sum += c;
          found = true;
          break;
        }
      }
      EXPECT_TRUE(found) << "step " << k;
    }
    EXPECT_EQ(sum, r.cost);
  }
}

TEST(Planner, HeuristicIsConsistent) {
  std::mt19937_64 rng(13);
  const OccupancyGrid g = random_grid(rng, 10, 10, 0.0, 0.5);
  const Lattice lat(g, {});
  const Cell goal{7, 3};
  for (std::size_t idx = 0; idx < lat.state_count(); ++idx) {
    const PlannerState s = lat.state_at(idx);
    EXPECT_EQ(lat.index(s), idx);
    lat.for_each_successor(s, [&](const Transition& t) {
      EXPECT_LE(lat.heuristic(s.cell, goal), t.cost + lat.heuristic(t.next.cell, goal));
    });
  }
  EXPECT_EQ(lat.heuristic(goal, goal), 0);
}

TEST(Planner, BlockedStartOrGoalHasNoPath) {
  OccupancyGrid g(5, 5, 0.5);
  g.set({2, 2});
  const Lattice lat(g, {});
  EXPECT_THROW(plan_astar(lat, {{2, 2}, 0, 0}, {{0, 0}, 0}), NoPath);
  EXPECT_THROW(plan_astar(lat, {{0, 0}, 0, 0}, {{2, 2}, 0}), NoPath);
}

TEST(Planner, WalledGoalHasNoPath) {
  OccupancyGrid g(7, 7, 0.5);
  for (int k = 0; k < 7; ++k) g.set({3, k});
  const Lattice lat(g, {});
  EXPECT_THROW(plan_astar(lat, {{0, 0}, 0, 0}, {{6, 6}, 0}), NoPath);
}

TEST(Planner, TrivialGoalCostsNothing) {
  const Lattice lat(OccupancyGrid(4, 4, 0.5), {});
  const PlanResult r = plan_astar(lat, {{1, 1}, 3, 0}, {{1, 1}, 3});
  EXPECT_EQ(r.cost, 0);
  EXPECT_EQ(r.states.size(), 1u);
}

TEST(Planner, StraightCorridorCost) {
  // Accelerate to 0.8 then 1.4 while moving east, five cells, stop heading east.
  const Lattice lat(OccupancyGrid(8, 1, 0.5), {});
  const PlanResult r = plan_astar(lat, {{0, 0}, 0, 0}, {{5, 0}, 0});
  const auto t = [](double s) { return static_cast<CostTicks>(std::ceil(s * 1e6 - 1e-6)); };
  EXPECT_EQ(r.cost, t(0.5 / 0.8) + 4 * t(0.5 / 1.4));
}

TEST(Planner, NearestHeadingBin) {
  EXPECT_EQ(nearest_heading_bin(0.0), 0);
  EXPECT_EQ(nearest_heading_bin(kPi / 2), 2);
  EXPECT_EQ(nearest_heading_bin(-kPi / 4), 7);
  EXPECT_EQ(nearest_heading_bin(kPi), 4);
  EXPECT_NEAR(heading_bin_angle(6), -kPi / 2, 1e-12);
}
