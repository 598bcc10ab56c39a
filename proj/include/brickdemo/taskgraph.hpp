#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brickdemo/verdict.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo {

struct Pose {
  int x = 0;
  int y = 0;
  int z = 1;
  Rotation rot = Rotation::r0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// One brick move. For assembly graphs the brick travels from storage_pose to
/// assembly_pose; disassembly graphs reuse the same fields and move it back.
struct TaskNode {
  std::size_t index = 0;
  std::string brick_type;
  Pose storage_pose;
  Pose assembly_pose;

  friend bool operator==(const TaskNode&, const TaskNode&) = default;
};

enum class Direction { assembly, disassembly };

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);

struct TaskGraph {
  Direction direction = Direction::assembly;
  std::vector<TaskNode> nodes;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }

  friend bool operator==(const TaskGraph&, const TaskGraph&) = default;
};

inline BrickPlacement placement_at(const std::string& type_id, const Pose& pose, InstanceId id) {
  return {id, type_id, pose.x, pose.y, pose.z, pose.rot};
}

inline Pose pose_of(const BrickPlacement& p) { return {p.x, p.y, p.z, p.rot}; }

namespace taskgraph {

/// Nodes in reverse order (renumbered 0..T-1), direction flipped.
TaskGraph reverse(const TaskGraph& g);

/// Structural replay of the graph.
///
/// The initial layout of the source workspace is derived from the graph
/// itself (storage poses for assembly graphs, assembly poses for disassembly
/// graphs) and must be collision-free and supported. Assembly nodes are then
/// checked with check_step on the assembly plate; disassembly nodes with the
/// structural removability criteria on the assembly plate and check_step on
/// the storage plate. Failed nodes are not applied; later nodes are still
/// evaluated. Every violation carries its node index.
FeasibilityVerdict validate(const TaskGraph& g, std::shared_ptr<const Catalog> catalog, Dims dims);

/// `taskgraph v1 <direction> <T>` then
/// `<i> <type_id> <xs> <ys> <zs> <rots> <xa> <ya> <za> <rota>` per node.
std::string serialize(const TaskGraph& g);
/// Throws ParseError naming the line.
TaskGraph parse(std::string_view text);

/// Short stable identifier: FNV-1a 64 of the serialized graph, hex.
std::string graph_id(const TaskGraph& g);

/// Instance of `type_id` resting at `pose` (rotation compared up to footprint
/// equivalence), if any.
std::optional<InstanceId> find_brick(const WorkspaceState& state, std::string_view type_id,
                                     const Pose& pose);

/// Bricks at the graph's storage poses, instance ids 1..T by node index.
/// Throws OutOfBounds / CellOccupied / UnknownType.
WorkspaceState storage_layout(const TaskGraph& g, std::shared_ptr<const Catalog> catalog, Dims dims);

/// Bricks at the graph's assembly poses, instance ids first_id + node index.
WorkspaceState assembly_layout(const TaskGraph& g, std::shared_ptr<const Catalog> catalog, Dims dims,
                               InstanceId first_id = 1);

}  // namespace taskgraph
}  // namespace brickdemo
