#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace brickdemo {

/// Identity of a brick instance within a workspace. Always positive; 0 is
/// reserved for "empty cell" and for the plate node of connection graphs.
using InstanceId = std::int32_t;

inline constexpr InstanceId kNoInstance = 0;

/// One stud cell. x, y are stud coordinates, z is the layer (1 rests on the plate).
struct Cell {
  int x = 0;
  int y = 0;
  int z = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Plate extent: width (x) and length (y) in studs, height in layers.
struct Dims {
  int width = 48;
  int length = 48;
  int height = 16;

  friend bool operator==(const Dims&, const Dims&) = default;
};

enum class WorkspaceId : std::uint8_t { storage, assembly };

std::string_view to_string(WorkspaceId id);
std::optional<WorkspaceId> parse_workspace_id(std::string_view text);

/// Orientation quantized to right angles.
enum class Rotation : std::uint16_t { r0 = 0, r90 = 90, r180 = 180, r270 = 270 };

constexpr int degrees(Rotation r) { return static_cast<int>(r); }
std::optional<Rotation> rotation_from_degrees(int deg);

/// True for 90 and 270, where a footprint's extents are swapped.
constexpr bool swaps_extents(Rotation r) {
  return r == Rotation::r90 || r == Rotation::r270;
}

enum class ErrorCode {
  OutOfBounds,
  CellOccupied,
  UnknownInstance,
  UnknownType,
  DuplicateType,
  InvalidArgument,
  ParseError,
  IoError,
  DimensionMismatch,
  EmptyStream,
  MalformedStream,
  NoChange,
  MultiBrickChange,
  UnknownFootprint,
  InconsistentColor,
  InitialAssemblyNotEmpty,
  InvalidSide,
  StorageMismatch,
  EndOfGraph,
  InvalidIndex,
  InfeasibleTarget,
  BudgetExceeded,
  TooLarge,
  UnknownSession,
  InvalidLayout,
  EmptyGraph,
  ModeConflict,
};

std::string_view to_string(ErrorCode code);

/// Engine error. Carries a machine-readable code plus optional location
/// information (line, node, keyframe or frame index; offending cell).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  const std::optional<std::size_t>& index() const noexcept { return index_; }
  const std::optional<Cell>& cell() const noexcept { return cell_; }
  InstanceId blocking_instance() const noexcept { return blocking_; }

  Error& with_index(std::size_t index) {
    index_ = index;
    return *this;
  }
  Error& with_cell(Cell cell, InstanceId blocking = kNoInstance) {
    cell_ = cell;
    blocking_ = blocking;
    return *this;
  }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
  std::optional<Cell> cell_;
  InstanceId blocking_ = kNoInstance;
};

}  // namespace brickdemo
