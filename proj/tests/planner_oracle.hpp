#pragma once

// Dijkstra over an independently written lattice, shared by the planner tests.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "locoplan/planner.hpp"

namespace oracle {

using locoplan::OccupancyGrid;

// Independent re-statement of the lattice: 8 headings, speeds {0, 0.8, 1.4},
// actions change heading by one bin or speed by one bin (or keep both), then
// a moving character advances one cell; no cutting blocked corners.
struct Oracle {
  const OccupancyGrid& g;
  double cs;

  static std::int64_t ticks(double s) { return static_cast<std::int64_t>(std::ceil(s * 1e6 - 1e-6)); }

  bool free(int i, int j) const { return i >= 0 && j >= 0 && i < g.width() && j < g.height() && !g.occupied({i, j}); }

  using S = std::tuple<int, int, int, int>;  // i, j, heading, speed

  std::vector<std::pair<S, std::int64_t>> successors(const S& s) const {
    static const int di[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static const int dj[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    const double speeds[3] = {0.0, 0.8, 1.4};
    auto [i, j, h, v] = s;
    std::vector<std::pair<S, std::int64_t>> out;
    for (int dh = -1; dh <= 1; ++dh) {
      for (int dv = -1; dv <= 1; ++dv) {
        if (dh != 0 && dv != 0) continue;
        const int nv = v + dv;
        if (nv < 0 || nv > 2) continue;
        const int nh = (h + dh + 8) % 8;
        if (nv == 0) {
          if (dh == 0 && dv == 0) continue;
          out.push_back({{i, j, nh, 0}, ticks(cs / 0.8)});
          continue;
        }
        const int ni = i + di[nh], nj = j + dj[nh];
        if (!free(ni, nj)) continue;
        const bool diag = di[nh] != 0 && dj[nh] != 0;
        if (diag && (!free(i + di[nh], j) || !free(i, j + dj[nh]))) continue;
        out.push_back({{ni, nj, nh, nv}, ticks((diag ? std::sqrt(2.0) : 1.0) * cs / speeds[nv])});
      }
    }
    return out;
  }

  std::optional<std::int64_t> dijkstra(const S& start, int gi, int gj, int gh) const {
    std::map<S, std::int64_t> dist;
    using E = std::pair<std::int64_t, S>;
    std::priority_queue<E, std::vector<E>, std::greater<>> q;
    dist[start] = 0;
    q.push({0, start});
    while (!q.empty()) {
      auto [d, s] = q.top();
      q.pop();
      if (d != dist[s]) continue;
      if (std::get<0>(s) == gi && std::get<1>(s) == gj && std::get<2>(s) == gh) return d;
      for (auto [n, c] : successors(s)) {
        auto it = dist.find(n);
        if (it == dist.end() || d + c < it->second) {
          dist[n] = d + c;
          q.push({d + c, n});
        }
      }
    }
    return std::nullopt;
  }
};

}  // namespace oracle
