#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "brickdemo/verdict.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo::manipulation {

/// Clearance model of the attach-and-twist end-effector.
///
/// The tool body occupies the brick footprint dilated by `margin` studs in x
/// and y, over the `body_height` layers directly above the brick. Detaching
/// additionally needs one free flank: a strip `margin` studs deep along one
/// side of the brick, from the brick's own layer up to `body_height` above it.
/// `length` only matters for reach-height checks.
struct ToolProfile {
  int margin = 1;
  int body_height = 4;
  int length = 8;

  /// Throws InvalidArgument unless margin >= 0, body_height >= 1, length >= 0.
  void validate() const;

  friend bool operator==(const ToolProfile&, const ToolProfile&) = default;
};

enum class Side { pos_x, neg_x, pos_y, neg_y };

inline constexpr std::array<Side, 4> kSides{Side::pos_x, Side::neg_x, Side::pos_y, Side::neg_y};

std::string_view to_string(Side side);
/// Accepts "+x", "-x", "+y", "-y". Throws InvalidSide.
Side parse_side(std::string_view text);

/// Cells the tool body sweeps above a brick (layers z+1 .. z+body_height).
/// Not clipped to the plate.
std::vector<Cell> top_volume(const BrickPlacement& p, const Catalog& catalog, const ToolProfile& tool);

/// Flank strip on `side` (layers z .. z+body_height). Not clipped to the plate.
std::vector<Cell> side_strip(const BrickPlacement& p, const Catalog& catalog, Side side,
                             const ToolProfile& tool);

/// Pressing p into place: its footprint must be free and the tool body
/// volume above it clear. Cells off the plate count as free.
OperabilityVerdict assembly_operable(const WorkspaceState& state, const BrickPlacement& p,
                                     const ToolProfile& tool);

/// The structural half of removability: nothing resting on the brick
/// (BRICK_ON_TOP) and every other brick still grounded afterwards
/// (BREAKS_STRUCTURE). Throws UnknownInstance.
OperabilityVerdict structurally_removable(const WorkspaceState& state, InstanceId id);

/// Full removability: structural criteria plus top clearance and at least
/// one free flank for the twist. Throws UnknownInstance.
OperabilityVerdict removable(const WorkspaceState& state, InstanceId id, const ToolProfile& tool);

/// Flanks whose strip is empty, in kSides order. Throws UnknownInstance.
std::vector<Side> free_sides(const WorkspaceState& state, InstanceId id, const ToolProfile& tool);

struct ClearanceVolume {
  std::string phase;  ///< "attach" or "twist"
  std::vector<Cell> cells;

  friend bool operator==(const ClearanceVolume&, const ClearanceVolume&) = default;
};

/// Attach volume (the flank strip) followed by the twist sweep (flank strip
/// plus top volume). Throws InvalidSide for an out-of-range side value.
std::vector<ClearanceVolume> disassembly_motion(const Catalog& catalog, const BrickPlacement& p,
                                                Side side, const ToolProfile& tool);

/// Occupied cells among `cells`, sorted; cells off the plate are ignored.
std::vector<Cell> blocking_cells(const WorkspaceState& state, const std::vector<Cell>& cells);

}  // namespace brickdemo::manipulation
