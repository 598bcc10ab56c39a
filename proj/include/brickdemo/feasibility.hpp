#pragma once

#include <map>
#include <set>
#include <span>

#include "brickdemo/verdict.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo::feasibility {

/// Support rule knobs. A brick above the plate needs at least
/// `min_overlap` footprint studs resting on something directly below.
struct SupportRule {
  int min_overlap = 1;
};

/// Throws UnknownInstance.
bool is_supported(const WorkspaceState& state, InstanceId id, SupportRule rule = {});

/// Undirected stud-connection graph over the plate node (kNoInstance) and
/// all instances. a and b are adjacent iff their footprints overlap in (x, y)
/// and their layers differ by one; every z = 1 instance touches the plate.
struct ConnectionGraph {
  static constexpr InstanceId kPlate = kNoInstance;

  std::map<InstanceId, std::set<InstanceId>> adjacency;

  bool connected(InstanceId a, InstanceId b) const;
  /// Instances that can reach the plate node.
  std::set<InstanceId> grounded() const;

  friend bool operator==(const ConnectionGraph&, const ConnectionGraph&) = default;
};

ConnectionGraph connection_graph(const WorkspaceState& state);

/// Every brick supported and connected to the plate; also re-audits the
/// cell grid for collisions and bounds.
FeasibilityVerdict check_structure(const WorkspaceState& state, SupportRule rule = {});

/// Whether p can be added: in bounds, collision-free, supported in state + p.
FeasibilityVerdict check_step(const WorkspaceState& state, const BrickPlacement& p,
                              SupportRule rule = {});

/// Builds a state from raw placements, reporting out-of-bounds, unknown-type and
/// colliding bricks as violations (those bricks are skipped), then checks the
/// rest with check_structure. Used for structure files that may be invalid.
FeasibilityVerdict check_placements(Dims dims, std::shared_ptr<const Catalog> catalog,
                                    std::span<const BrickPlacement> placements,
                                    SupportRule rule = {});

}  // namespace brickdemo::feasibility
