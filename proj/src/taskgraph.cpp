#include "brickdemo/taskgraph.hpp"

#include <algorithm>
#include <cstdio>

#include "brickdemo/feasibility.hpp"
#include "brickdemo/manipulation.hpp"
#include "text_util.hpp"

namespace brickdemo {

std::string_view to_string(Direction d) {
  return d == Direction::assembly ? "assembly" : "disassembly";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "assembly") return Direction::assembly;
  if (text == "disassembly") return Direction::disassembly;
  return std::nullopt;
}

namespace taskgraph {

TaskGraph reverse(const TaskGraph& g) {
  TaskGraph out;
  out.direction = g.direction == Direction::assembly ? Direction::disassembly : Direction::assembly;
  out.nodes.assign(g.nodes.rbegin(), g.nodes.rend());
  for (std::size_t i = 0; i < out.nodes.size(); ++i) out.nodes[i].index = i;
  return out;
}

namespace {

/// Lays out one brick per node at the selected pose. Bricks that cannot be
/// placed are reported and left out.
WorkspaceState derive_layout(const TaskGraph& g, WorkspaceState state, bool storage_side,
                             InstanceId first_id, FeasibilityVerdict& verdict) {
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& node = g.nodes[i];
    const auto& pose = storage_side ? node.storage_pose : node.assembly_pose;
    auto p = placement_at(node.brick_type, pose, first_id + static_cast<InstanceId>(i));
    try {
      state = place(state, p);
    } catch (const Error& e) {
      std::vector<Cell> cells;
      if (e.cell()) cells.push_back(*e.cell());
      verdict.add({e.code() == ErrorCode::OutOfBounds ? ViolationCode::out_of_bounds
                                                      : ViolationCode::collision,
                   p.instance_id, i, std::move(cells),
                   std::string(storage_side ? "storage: " : "assembly: ") + e.what()});
    }
  }
  auto structure = feasibility::check_structure(state);
  for (auto v : structure.violations) {
    v.step = static_cast<std::size_t>(v.instance_id - first_id);
    v.detail = std::string(storage_side ? "storage: " : "assembly: ") + v.detail;
    verdict.add(std::move(v));
  }
  return state;
}

}  // namespace

FeasibilityVerdict validate(const TaskGraph& g, std::shared_ptr<const Catalog> catalog, Dims dims) {
  FeasibilityVerdict verdict;
  // Node position is authoritative; the stored index is not consulted.
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (!catalog->contains(g.nodes[i].brick_type)) {
      verdict.add({ViolationCode::unknown_type, kNoInstance, i, {},
                   "unknown brick type " + g.nodes[i].brick_type});
    }
  }
  if (!verdict.ok()) return verdict;

  WorkspaceState storage(WorkspaceId::storage, dims, catalog);
  WorkspaceState assembly(WorkspaceId::assembly, dims, catalog);
  const bool assembling = g.direction == Direction::assembly;
  if (assembling) {
    storage = derive_layout(g, storage, true, 1, verdict);
  } else {
    assembly = derive_layout(g, assembly, false, 1, verdict);
  }

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& node = g.nodes[i];
    const auto id = static_cast<InstanceId>(i) + 1;
    auto& source = assembling ? storage : assembly;
    auto& target = assembling ? assembly : storage;
    if (!source.contains(id)) continue;  // already reported by the layout
    const auto& dest_pose = assembling ? node.assembly_pose : node.storage_pose;
    const auto moved = placement_at(node.brick_type, dest_pose, id);

    FeasibilityVerdict step;
    if (assembling) {
      std::vector<Cell> above;
      for (const auto& c : footprint_cells(source.placement(id), *catalog)) above.push_back({c.x, c.y, c.z + 1});
      if (auto covered = manipulation::blocking_cells(source, above); !covered.empty()) {
        step.add({ViolationCode::brick_on_top, id, std::nullopt, std::move(covered),
                  "storage brick is covered"});
      }
    } else {
      step.append(manipulation::structurally_removable(source, id));
    }
    step.append(feasibility::check_step(target, moved));
    if (step.ok()) {
      source = remove(source, id);
      target = place(target, moved);
    }
    verdict.append(step, i);
  }
  return verdict;
}

std::string serialize(const TaskGraph& g) {
  std::string out = "taskgraph v1 " + std::string(to_string(g.direction)) + " " +
                    std::to_string(g.nodes.size()) + "\n";
  auto pose = [&out](const Pose& p) {
    out += " " + std::to_string(p.x) + " " + std::to_string(p.y) + " " + std::to_string(p.z) + " " +
           std::to_string(degrees(p.rot));
  };
  for (const auto& n : g.nodes) {
    out += std::to_string(n.index) + " " + n.brick_type;
    pose(n.storage_pose);
    pose(n.assembly_pose);
    out += "\n";
  }
  return out;
}

TaskGraph parse(std::string_view text) {
  auto lines = detail::tokenize_lines(text);
  if (lines.empty()) detail::parse_fail(1, "missing 'taskgraph v1' header");
  const auto& h = lines.front();
  if (h.tokens.size() != 4 || h.tokens[0] != "taskgraph" || h.tokens[1] != "v1") {
    detail::parse_fail(h.number, "expected header 'taskgraph v1 <direction> <T>'");
  }
  TaskGraph g;
  auto dir = parse_direction(h.tokens[2]);
  if (!dir) detail::parse_fail(h.number, "unknown direction '" + std::string(h.tokens[2]) + "'");
  g.direction = *dir;
  const auto count = detail::parse_int<std::size_t>(h.tokens[3], h.number, "T");
  if (lines.size() - 1 != count) {
    detail::parse_fail(h.number, "header declares " + std::to_string(count) + " nodes, found " +
                                     std::to_string(lines.size() - 1));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto& t = line.tokens;
    if (t.size() != 10) detail::parse_fail(line.number, "expected 10 fields per node");
    TaskNode n;
    n.index = detail::parse_int<std::size_t>(t[0], line.number, "index");
    if (n.index != i - 1) detail::parse_fail(line.number, "node index out of sequence");
    n.brick_type = std::string(t[1]);
    auto pose = [&](std::size_t k) {
      return Pose{detail::parse_int<int>(t[k], line.number, "x"),
                  detail::parse_int<int>(t[k + 1], line.number, "y"),
                  detail::parse_int<int>(t[k + 2], line.number, "z"),
                  detail::parse_rotation(t[k + 3], line.number)};
    };
    n.storage_pose = pose(2);
    n.assembly_pose = pose(6);
    g.nodes.push_back(std::move(n));
  }
  return g;
}

std::string graph_id(const TaskGraph& g) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : serialize(g)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<InstanceId> find_brick(const WorkspaceState& state, std::string_view type_id,
                                     const Pose& pose) {
  const auto id = state.at({pose.x, pose.y, pose.z});
  if (id == kNoInstance) return std::nullopt;
  const auto& p = state.placement(id);
  if (p.type_id != type_id || p.x != pose.x || p.y != pose.y || p.z != pose.z) return std::nullopt;
  if (!footprint_equivalent(state.type_of(id), p.rot, pose.rot)) return std::nullopt;
  return id;
}

WorkspaceState storage_layout(const TaskGraph& g, std::shared_ptr<const Catalog> catalog, Dims dims) {
  WorkspaceState state(WorkspaceId::storage, dims, std::move(catalog));
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    state = place(state, placement_at(n.brick_type, n.storage_pose, static_cast<InstanceId>(i) + 1));
  }
  return state;
}

WorkspaceState assembly_layout(const TaskGraph& g, std::shared_ptr<const Catalog> catalog, Dims dims,
                               InstanceId first_id) {
  WorkspaceState state(WorkspaceId::assembly, dims, std::move(catalog));
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    state = place(state, placement_at(n.brick_type, n.assembly_pose, first_id + static_cast<InstanceId>(i)));
  }
  return state;
}

}  // namespace taskgraph
}  // namespace brickdemo
