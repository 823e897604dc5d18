#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace locoplan {

enum class Primitive { WalkOnly, PickUp, WalkAndCarry, PutDown };

inline constexpr std::array<Primitive, 4> kAllPrimitives = {
    Primitive::WalkOnly, Primitive::PickUp, Primitive::WalkAndCarry, Primitive::PutDown};

inline std::string_view to_string(Primitive p) {
  switch (p) {
    case Primitive::WalkOnly: return "walk_only";
    case Primitive::PickUp: return "pick_up";
    case Primitive::WalkAndCarry: return "walk_and_carry";
    case Primitive::PutDown: return "put_down";
  }
  return "unknown";
}

inline std::optional<Primitive> primitive_from_string(std::string_view s) {
  for (auto p : kAllPrimitives)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline bool is_locomotion(Primitive p) {
  return p == Primitive::WalkOnly || p == Primitive::WalkAndCarry;
}

/// Directed graph of legal primitive orderings: an edge A -> B means B may run after A.
class PrimitiveGraph {
 public:
  using Edge = std::pair<Primitive, Primitive>;

  PrimitiveGraph() = default;
  explicit PrimitiveGraph(std::set<Edge> edges) : edges_(std::move(edges)) {}

  /// The pick/carry/place cycle plus self-loops on the two walking primitives.
  static PrimitiveGraph default_graph() {
    return PrimitiveGraph({{Primitive::WalkOnly, Primitive::PickUp},
                           {Primitive::PickUp, Primitive::WalkAndCarry},
                           {Primitive::WalkAndCarry, Primitive::PutDown},
                           {Primitive::PutDown, Primitive::WalkOnly},
                           {Primitive::WalkOnly, Primitive::WalkOnly},
                           {Primitive::WalkAndCarry, Primitive::WalkAndCarry}});
  }

  bool has_edge(Primitive from, Primitive to) const { return edges_.contains({from, to}); }
  void add_edge(Primitive from, Primitive to) { edges_.insert({from, to}); }
  void remove_edge(Primitive from, Primitive to) { edges_.erase({from, to}); }
  const std::set<Edge>& edges() const { return edges_; }

 private:
  std::set<Edge> edges_;
};

/// True iff every consecutive pair of `seq` is an edge. Empty input is invalid.
inline bool validate_primitive_path(const PrimitiveGraph& graph, std::span<const Primitive> seq) {
  if (seq.empty()) return false;
  for (std::size_t k = 1; k < seq.size(); ++k)
    if (!graph.has_edge(seq[k - 1], seq[k])) return false;
  return true;
}

}  // namespace locoplan
