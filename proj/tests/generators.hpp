#pragma once

// Random inputs for property tests and the acceptance suite.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "brickdemo/feasibility.hpp"
#include "brickdemo/manipulation.hpp"
#include "brickdemo/taskgraph.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo::testgen {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Rotation random_rotation(Rng& rng) {
  static constexpr Rotation kAll[] = {Rotation::r0, Rotation::r90, Rotation::r180, Rotation::r270};
  return kAll[uniform(rng, 0, 3)];
}

inline const BrickType& random_type(Rng& rng, const Catalog& catalog, const std::vector<std::string>& allowed = {}) {
  if (!allowed.empty()) return catalog.at(allowed[uniform(rng, 0, static_cast<int>(allowed.size()) - 1)]);
  return catalog.types()[uniform(rng, 0, static_cast<int>(catalog.size()) - 1)];
}

/// Highest occupied layer over the footprint of p (ignoring p.z).
inline int top_over(const WorkspaceState& state, const BrickPlacement& p) {
  int top = 0;
  for (const auto& c : footprint_cells(p, state.catalog())) top = std::max(top, state.top_height(c.x, c.y));
  return top;
}

struct BuildOptions {
  /// New bricks rest on the visible top surface (z = highest layer under the
  /// footprint + 1), so every brick is observable when placed.
  bool top_surface = false;
  /// Only 0/90 rotations, and 0 for square bricks.
  bool canonical = false;
  /// Also require assembly_operable with this tool.
  bool operable = false;
  manipulation::ToolProfile tool;
  std::vector<std::string> types;  ///< empty = whole catalog
  int attempts_per_brick = 60;
};

/// A random sequence of placements, each approved by check_step (and by
/// assembly_operable when requested) on the state built so far. May return
/// fewer than n bricks on crowded plates.
inline std::vector<BrickPlacement> random_build(Rng& rng, std::shared_ptr<const Catalog> catalog, Dims dims,
                                                std::size_t n, const BuildOptions& options = {}) {
  WorkspaceState state(WorkspaceId::assembly, dims, catalog);
  std::vector<BrickPlacement> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (int attempt = 0; attempt < options.attempts_per_brick; ++attempt) {
      const auto& type = random_type(rng, *catalog, options.types);
      BrickPlacement p;
      p.instance_id = static_cast<InstanceId>(out.size()) + 1;
      p.type_id = type.type_id;
      p.rot = random_rotation(rng);
      if (options.canonical) p.rot = canonical_rotation(type, p.rot);
      const auto fp = effective_footprint(type, p.rot);
      if (fp.fx > dims.width || fp.fy > dims.length) continue;
      p.x = uniform(rng, 0, dims.width - fp.fx);
      p.y = uniform(rng, 0, dims.length - fp.fy);
      const int top = top_over(state, p);
      p.z = options.top_surface || uniform(rng, 0, 3) > 0 ? top + 1 : uniform(rng, 1, top + 1);
      if (p.z > dims.height) continue;
      if (!feasibility::check_step(state, p).ok()) continue;
      if (options.operable && !manipulation::assembly_operable(state, p, options.tool).ok()) continue;
      state = place(state, p);
      out.push_back(p);
      break;
    }
  }
  return out;
}

inline WorkspaceState state_of(WorkspaceId ws, Dims dims, std::shared_ptr<const Catalog> catalog,
                               const std::vector<BrickPlacement>& placements) {
  WorkspaceState state(ws, dims, std::move(catalog));
  for (const auto& p : placements) state = place(state, p);
  return state;
}

/// A scripted assembly demonstration: storage packed with one brick per
/// node (node i takes storage instance i + 1), empty assembly plate.
struct Script {
  TaskGraph graph;
  WorkspaceState storage;
  WorkspaceState assembly;
  std::vector<BrickPlacement> build;
};

inline Script script_from_build(const std::vector<BrickPlacement>& build, std::shared_ptr<const Catalog> catalog,
                                Dims storage_dims, Dims assembly_dims) {
  std::vector<std::string> types;
  for (const auto& p : build) types.push_back(p.type_id);
  auto storage = pack_storage(types, storage_dims, catalog);
  TaskGraph graph;
  for (std::size_t i = 0; i < build.size(); ++i) {
    const auto& source = storage.placement(static_cast<InstanceId>(i) + 1);
    graph.nodes.push_back({i, build[i].type_id, pose_of(source), pose_of(build[i])});
  }
  return {std::move(graph), std::move(storage), WorkspaceState(WorkspaceId::assembly, assembly_dims, catalog), build};
}

/// Random demonstration whose every step is observable (top-surface
/// placements, canonical rotations). Redraws when the storage packing does
/// not fit.
inline Script random_script(Rng& rng, std::shared_ptr<const Catalog> catalog, Dims dims, std::size_t max_bricks,
                            bool operable = false) {
  BuildOptions options;
  options.top_surface = true;
  options.canonical = true;
  options.operable = operable;
  for (;;) {
    const auto n = static_cast<std::size_t>(uniform(rng, 1, static_cast<int>(max_bricks)));
    auto build = random_build(rng, catalog, dims, n, options);
    if (build.empty()) continue;
    try {
      return script_from_build(build, catalog, dims, dims);
    } catch (const Error&) {
      // storage packing did not fit; draw again
    }
  }
}

/// Arbitrary field values, not necessarily executable.
inline TaskGraph random_graph(Rng& rng, const Catalog& catalog, std::size_t max_nodes) {
  TaskGraph g;
  g.direction = uniform(rng, 0, 1) ? Direction::assembly : Direction::disassembly;
  const int n = uniform(rng, 0, static_cast<int>(max_nodes));
  for (int i = 0; i < n; ++i) {
    auto pose = [&rng] {
      return Pose{uniform(rng, 0, 47), uniform(rng, 0, 47), uniform(rng, 1, 16), random_rotation(rng)};
    };
    g.nodes.push_back({static_cast<std::size_t>(i), random_type(rng, catalog).type_id, pose(), pose()});
  }
  return g;
}

}  // namespace brickdemo::testgen
