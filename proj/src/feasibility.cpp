#include "brickdemo/feasibility.hpp"

#include <algorithm>
#include <deque>

namespace brickdemo::feasibility {

namespace {

int supporting_studs(const WorkspaceState& state, const std::vector<Cell>& cells) {
  int n = 0;
  for (const auto& c : cells) {
    if (state.occupied({c.x, c.y, c.z - 1})) ++n;
  }
  return n;
}

bool supported_cells(const WorkspaceState& state, const std::vector<Cell>& cells, int z,
                     SupportRule rule) {
  if (z == 1) return true;
  const int needed = std::clamp(rule.min_overlap, 1, static_cast<int>(cells.size()));
  return supporting_studs(state, cells) >= needed;
}

std::string at_text(const BrickPlacement& p) {
  return p.type_id + "@(" + std::to_string(p.x) + "," + std::to_string(p.y) + "," +
         std::to_string(p.z) + ")";
}

}  // namespace

bool is_supported(const WorkspaceState& state, InstanceId id, SupportRule rule) {
  const auto& p = state.placement(id);
  return supported_cells(state, footprint_cells(p, state.catalog()), p.z, rule);
}

bool ConnectionGraph::connected(InstanceId a, InstanceId b) const {
  auto it = adjacency.find(a);
  return it != adjacency.end() && it->second.contains(b);
}

std::set<InstanceId> ConnectionGraph::grounded() const {
  std::set<InstanceId> seen{kPlate};
  std::deque<InstanceId> queue{kPlate};
  while (!queue.empty()) {
    auto node = queue.front();
    queue.pop_front();
    auto it = adjacency.find(node);
    if (it == adjacency.end()) continue;
    for (auto next : it->second) {
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  seen.erase(kPlate);
  return seen;
}

ConnectionGraph connection_graph(const WorkspaceState& state) {
  ConnectionGraph g;
  g.adjacency[ConnectionGraph::kPlate];
  for (const auto& [id, p] : state.placements()) {
    auto& mine = g.adjacency[id];
    if (p.z == 1) {
      mine.insert(ConnectionGraph::kPlate);
      g.adjacency[ConnectionGraph::kPlate].insert(id);
    }
    // Scanning the layer above is enough; the layer below is covered by the
    // lower brick's own scan.
    for (const auto& c : footprint_cells(p, state.catalog())) {
      auto above = state.at({c.x, c.y, c.z + 1});
      if (above != kNoInstance) {
        mine.insert(above);
        g.adjacency[above].insert(id);
      }
    }
  }
  return g;
}

FeasibilityVerdict check_structure(const WorkspaceState& state, SupportRule rule) {
  FeasibilityVerdict verdict;
  for (const auto& problem : audit(state)) {
    verdict.add({problem.find("out of bounds") != std::string::npos ? ViolationCode::out_of_bounds
                                                                    : ViolationCode::collision,
                 kNoInstance, std::nullopt, {}, problem});
  }
  const auto grounded = connection_graph(state).grounded();
  for (const auto& [id, p] : state.placements()) {
    if (!is_supported(state, id, rule)) {
      verdict.add({ViolationCode::unsupported, id, std::nullopt, {}, "no support under " + at_text(p)});
    }
    if (!grounded.contains(id)) {
      verdict.add(
          {ViolationCode::disconnected, id, std::nullopt, {}, at_text(p) + " does not reach the plate"});
    }
  }
  return verdict;
}

FeasibilityVerdict check_step(const WorkspaceState& state, const BrickPlacement& p, SupportRule rule) {
  FeasibilityVerdict verdict;
  const BrickType* type = state.catalog().find(p.type_id);
  if (!type) {
    verdict.add({ViolationCode::unknown_type, p.instance_id, std::nullopt, {},
                 "unknown brick type " + p.type_id});
    return verdict;
  }
  const auto cells = footprint_cells(p, state.catalog());
  std::vector<Cell> outside;
  std::vector<Cell> blocked;
  InstanceId blocker = kNoInstance;
  for (const auto& c : cells) {
    if (!state.in_bounds(c)) {
      outside.push_back(c);
    } else if (auto other = state.at(c); other != kNoInstance) {
      blocked.push_back(c);
      if (blocker == kNoInstance) blocker = other;
    }
  }
  if (!outside.empty()) {
    verdict.add({ViolationCode::out_of_bounds, p.instance_id, std::nullopt, std::move(outside),
                 at_text(p) + " leaves the plate"});
    return verdict;
  }
  if (!blocked.empty()) {
    verdict.add({ViolationCode::collision, p.instance_id, std::nullopt, std::move(blocked),
                 at_text(p) + " collides with instance " + std::to_string(blocker)});
  }
  // Support only depends on the layer below, which p does not touch.
  if (!supported_cells(state, cells, p.z, rule)) {
    verdict.add({ViolationCode::unsupported, p.instance_id, std::nullopt, {},
                 "no support under " + at_text(p)});
  }
  return verdict;
}

FeasibilityVerdict check_placements(Dims dims, std::shared_ptr<const Catalog> catalog,
                                    std::span<const BrickPlacement> placements, SupportRule rule) {
  FeasibilityVerdict verdict;
  WorkspaceState state(WorkspaceId::assembly, dims, std::move(catalog));
  for (const auto& p : placements) {
    if (!state.catalog().contains(p.type_id)) {
      verdict.add({ViolationCode::unknown_type, p.instance_id, std::nullopt, {},
                   "unknown brick type " + p.type_id});
      continue;
    }
    if (state.contains(p.instance_id)) {
      verdict.add({ViolationCode::collision, p.instance_id, std::nullopt, {},
                   "duplicate instance id " + std::to_string(p.instance_id)});
      continue;
    }
    try {
      state = place(state, p);
    } catch (const Error& e) {
      std::vector<Cell> cells;
      if (e.cell()) cells.push_back(*e.cell());
      verdict.add({e.code() == ErrorCode::OutOfBounds ? ViolationCode::out_of_bounds
                                                      : ViolationCode::collision,
                   p.instance_id, std::nullopt, std::move(cells), e.what()});
    }
  }
  verdict.append(check_structure(state, rule));
  return verdict;
}

}  // namespace brickdemo::feasibility
