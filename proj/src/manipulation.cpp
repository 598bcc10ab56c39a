#include "brickdemo/manipulation.hpp"

#include <algorithm>

#include "brickdemo/feasibility.hpp"

namespace brickdemo::manipulation {

namespace {

std::vector<Cell> box(int x0, int x1, int y0, int y1, int z0, int z1) {
  std::vector<Cell> cells;
  for (int x = x0; x <= x1; ++x) {
    for (int y = y0; y <= y1; ++y) {
      for (int z = z0; z <= z1; ++z) cells.push_back({x, y, z});
    }
  }
  return cells;
}

}  // namespace

void ToolProfile::validate() const {
  if (margin < 0 || body_height < 1 || length < 0) {
    throw Error(ErrorCode::InvalidArgument,
                "tool profile requires margin >= 0, body_height >= 1, length >= 0");
  }
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::pos_x: return "+x";
    case Side::neg_x: return "-x";
    case Side::pos_y: return "+y";
    case Side::neg_y: return "-y";
  }
  return "?";
}

Side parse_side(std::string_view text) {
  for (auto side : kSides) {
    if (to_string(side) == text) return side;
  }
  throw Error(ErrorCode::InvalidSide, "invalid side '" + std::string(text) + "'");
}

std::vector<Cell> top_volume(const BrickPlacement& p, const Catalog& catalog, const ToolProfile& tool) {
  const auto fp = effective_footprint(catalog.at(p.type_id), p.rot);
  const int m = tool.margin;
  return box(p.x - m, p.x + fp.fx - 1 + m, p.y - m, p.y + fp.fy - 1 + m, p.z + 1, p.z + tool.body_height);
}

std::vector<Cell> side_strip(const BrickPlacement& p, const Catalog& catalog, Side side,
                             const ToolProfile& tool) {
  const auto fp = effective_footprint(catalog.at(p.type_id), p.rot);
  const int m = tool.margin;
  const int z0 = p.z;
  const int z1 = p.z + tool.body_height;
  switch (side) {
    case Side::pos_x: return box(p.x + fp.fx, p.x + fp.fx + m - 1, p.y, p.y + fp.fy - 1, z0, z1);
    case Side::neg_x: return box(p.x - m, p.x - 1, p.y, p.y + fp.fy - 1, z0, z1);
    case Side::pos_y: return box(p.x, p.x + fp.fx - 1, p.y + fp.fy, p.y + fp.fy + m - 1, z0, z1);
    case Side::neg_y: return box(p.x, p.x + fp.fx - 1, p.y - m, p.y - 1, z0, z1);
  }
  throw Error(ErrorCode::InvalidSide, "invalid side value");
}

std::vector<Cell> blocking_cells(const WorkspaceState& state, const std::vector<Cell>& cells) {
  std::vector<Cell> out;
  for (const auto& c : cells) {
    if (state.occupied(c)) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

OperabilityVerdict assembly_operable(const WorkspaceState& state, const BrickPlacement& p,
                                     const ToolProfile& tool) {
  OperabilityVerdict verdict;
  auto target = blocking_cells(state, footprint_cells(p, state.catalog()));
  auto body = blocking_cells(state, top_volume(p, state.catalog(), tool));
  target.insert(target.end(), body.begin(), body.end());
  if (!target.empty()) {
    std::sort(target.begin(), target.end());
    verdict.add({ViolationCode::no_top_clearance, p.instance_id, std::nullopt, std::move(target),
                 "tool body blocked above " + p.type_id});
  }
  return verdict;
}

OperabilityVerdict structurally_removable(const WorkspaceState& state, InstanceId id) {
  OperabilityVerdict verdict;
  const auto& p = state.placement(id);
  std::vector<Cell> above;
  for (const auto& c : footprint_cells(p, state.catalog())) above.push_back({c.x, c.y, c.z + 1});
  if (auto on_top = blocking_cells(state, above); !on_top.empty()) {
    verdict.add({ViolationCode::brick_on_top, id, std::nullopt, std::move(on_top),
                 "bricks rest on instance " + std::to_string(id)});
  }
  const auto after = remove(state, id);
  const auto grounded = feasibility::connection_graph(after).grounded();
  std::vector<Cell> stranded;
  std::string names;
  for (const auto& [other, q] : after.placements()) {
    if (grounded.contains(other)) continue;
    auto cells = footprint_cells(q, after.catalog());
    stranded.insert(stranded.end(), cells.begin(), cells.end());
    names += (names.empty() ? "" : ",") + std::to_string(other);
  }
  if (!stranded.empty()) {
    std::sort(stranded.begin(), stranded.end());
    verdict.add({ViolationCode::breaks_structure, id, std::nullopt, std::move(stranded),
                 "removal strands instances " + names});
  }
  return verdict;
}

std::vector<Side> free_sides(const WorkspaceState& state, InstanceId id, const ToolProfile& tool) {
  const auto& p = state.placement(id);
  std::vector<Side> sides;
  for (auto side : kSides) {
    if (blocking_cells(state, side_strip(p, state.catalog(), side, tool)).empty()) sides.push_back(side);
  }
  return sides;
}

OperabilityVerdict removable(const WorkspaceState& state, InstanceId id, const ToolProfile& tool) {
  OperabilityVerdict verdict = structurally_removable(state, id);
  const auto& p = state.placement(id);
  if (auto body = blocking_cells(state, top_volume(p, state.catalog(), tool)); !body.empty()) {
    verdict.add({ViolationCode::no_top_clearance, id, std::nullopt, std::move(body),
                 "tool body blocked above instance " + std::to_string(id)});
  }
  if (free_sides(state, id, tool).empty()) {
    std::vector<Cell> flanks;
    for (auto side : kSides) {
      auto b = blocking_cells(state, side_strip(p, state.catalog(), side, tool));
      flanks.insert(flanks.end(), b.begin(), b.end());
    }
    std::sort(flanks.begin(), flanks.end());
    flanks.erase(std::unique(flanks.begin(), flanks.end()), flanks.end());
    verdict.add({ViolationCode::no_side_access, id, std::nullopt, std::move(flanks),
                 "no free flank to twist instance " + std::to_string(id)});
  }
  return verdict;
}

std::vector<ClearanceVolume> disassembly_motion(const Catalog& catalog, const BrickPlacement& p,
                                                Side side, const ToolProfile& tool) {
  if (std::find(kSides.begin(), kSides.end(), side) == kSides.end()) {
    throw Error(ErrorCode::InvalidSide, "invalid side value");
  }
  auto strip = side_strip(p, catalog, side, tool);
  auto sweep = strip;
  auto top = top_volume(p, catalog, tool);
  sweep.insert(sweep.end(), top.begin(), top.end());
  std::sort(strip.begin(), strip.end());
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
  return {{"attach", std::move(strip)}, {"twist", std::move(sweep)}};
}

}  // namespace brickdemo::manipulation
