#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "brickdemo/core.hpp"

namespace brickdemo {

// ---------------------------------------------------------------------------
// Palette
// ---------------------------------------------------------------------------

enum class Color : std::uint8_t { red, blue, yellow, green, white, black, orange, gray };

struct PaletteEntry {
  Color color;
  std::string_view name;
  std::uint32_t rgb;  ///< 0xRRGGBB reference value used for rendering and classification
};

inline constexpr std::array<PaletteEntry, 8> kPalette{{
    {Color::red, "red", 0xC91A09},
    {Color::blue, "blue", 0x0055BF},
    {Color::yellow, "yellow", 0xF2CD37},
    {Color::green, "green", 0x237841},
    {Color::white, "white", 0xFFFFFF},
    {Color::black, "black", 0x05131D},
    {Color::orange, "orange", 0xFE8A18},
    {Color::gray, "gray", 0xA0A5A9},
}};

/// Bare plate seen from above.
inline constexpr std::uint32_t kBackgroundRgb = 0x3A5F3A;

constexpr std::size_t palette_index(Color c) { return static_cast<std::size_t>(c); }
constexpr std::uint32_t color_rgb(Color c) { return kPalette[palette_index(c)].rgb; }
constexpr std::string_view color_name(Color c) { return kPalette[palette_index(c)].name; }
std::optional<Color> color_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// A brick type. Footprint is stored canonically with width <= length.
struct BrickType {
  std::string type_id;
  int width = 1;
  int length = 1;
  Color color = Color::red;

  bool square() const { return width == length; }
  friend bool operator==(const BrickType&, const BrickType&) = default;
};

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<BrickType> types);

  /// Throws DuplicateType for a repeated id, InvalidArgument for a bad footprint.
  void add(BrickType type);

  const BrickType* find(std::string_view type_id) const;
  /// Throws UnknownType.
  const BrickType& at(std::string_view type_id) const;
  bool contains(std::string_view type_id) const { return find(type_id) != nullptr; }

  std::span<const BrickType> types() const { return types_; }
  std::size_t size() const { return types_.size(); }

  /// Types with the given canonical footprint and color, in catalog order.
  std::vector<const BrickType*> matching(int width, int length, Color color) const;

  friend bool operator==(const Catalog& a, const Catalog& b) { return a.types_ == b.types_; }

 private:
  std::vector<BrickType> types_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// 1x1, 1x2, 1x4, 1x6, 2x2, 2x4, 2x6 in every palette color; ids like "2x4_red".
Catalog default_catalog();
std::shared_ptr<const Catalog> default_catalog_ptr();

/// `type <type_id> <width> <length> <color_name>` lines, `#` comments.
Catalog parse_catalog(std::string_view text);
std::string serialize_catalog(const Catalog& catalog);

// ---------------------------------------------------------------------------
// Placements
// ---------------------------------------------------------------------------

struct BrickPlacement {
  InstanceId instance_id = kNoInstance;
  std::string type_id;
  int x = 0;
  int y = 0;
  int z = 1;
  Rotation rot = Rotation::r0;

  friend bool operator==(const BrickPlacement&, const BrickPlacement&) = default;
};

/// Extents along x and y after rotation.
struct Footprint {
  int fx = 1;
  int fy = 1;
};

Footprint effective_footprint(const BrickType& type, Rotation rot);

/// Orientation recorded for an observed or demonstrated pose: 180/270 fold onto
/// 0/90 and square footprints always record 0.
Rotation canonical_rotation(const BrickType& type, Rotation rot);

/// Whether two rotations cover the same cells for this type.
bool footprint_equivalent(const BrickType& type, Rotation a, Rotation b);

/// Cells covered by p at layer p.z, ordered by (x, y). Throws UnknownType.
std::vector<Cell> footprint_cells(const BrickPlacement& p, const Catalog& catalog);

// ---------------------------------------------------------------------------
// Workspace state
// ---------------------------------------------------------------------------

/// Occupancy of one plate. Immutable once built: place() and remove() return
/// new states. Cells are derived from placements and kept in sync.
class WorkspaceState {
 public:
  WorkspaceState(WorkspaceId workspace, Dims dims, std::shared_ptr<const Catalog> catalog);

  WorkspaceId workspace() const { return workspace_; }
  const Dims& dims() const { return dims_; }
  const Catalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const Catalog>& catalog_ptr() const { return catalog_; }

  bool in_bounds(const Cell& c) const {
    return c.x >= 0 && c.y >= 0 && c.z >= 1 && c.x < dims_.width && c.y < dims_.length &&
           c.z <= dims_.height;
  }
  /// Instance occupying c, or kNoInstance (also for out-of-bounds cells).
  InstanceId at(const Cell& c) const {
    return in_bounds(c) ? cells_[offset(c)] : kNoInstance;
  }
  bool occupied(const Cell& c) const { return at(c) != kNoInstance; }

  /// Highest occupied layer in column (x, y); 0 when the column is empty.
  int top_height(int x, int y) const;

  const std::map<InstanceId, BrickPlacement>& placements() const { return placements_; }
  bool contains(InstanceId id) const { return placements_.contains(id); }
  /// Throws UnknownInstance.
  const BrickPlacement& placement(InstanceId id) const;
  const BrickType& type_of(InstanceId id) const { return catalog_->at(placement(id).type_id); }

  bool empty() const { return placements_.empty(); }
  std::size_t size() const { return placements_.size(); }
  InstanceId next_instance_id() const;

  /// Equal workspace, dims and placements (cells follow from placements).
  friend bool operator==(const WorkspaceState& a, const WorkspaceState& b);

  friend WorkspaceState place(const WorkspaceState& state, const BrickPlacement& p);
  friend WorkspaceState remove(const WorkspaceState& state, InstanceId id);
  friend std::vector<std::string> audit(const WorkspaceState& state);

 private:
  std::size_t offset(const Cell& c) const {
    return (static_cast<std::size_t>(c.z - 1) * dims_.length + c.y) * dims_.width + c.x;
  }

  WorkspaceId workspace_;
  Dims dims_;
  std::shared_ptr<const Catalog> catalog_;
  std::vector<InstanceId> cells_;
  std::map<InstanceId, BrickPlacement> placements_;
};

/// Errors: OutOfBounds; CellOccupied (first conflicting cell and its
/// instance); UnknownType; InvalidArgument for a non-positive or duplicate id.
WorkspaceState place(const WorkspaceState& state, const BrickPlacement& p);

/// Errors: UnknownInstance.
WorkspaceState remove(const WorkspaceState& state, InstanceId id);

/// Full-scan consistency check of cells against placements. Returns one
/// message per problem; empty when consistent.
std::vector<std::string> audit(const WorkspaceState& state);

/// Multiset of type ids present, sorted.
std::vector<std::string> brick_multiset(const WorkspaceState& state);

// ---------------------------------------------------------------------------
// Structure files
// ---------------------------------------------------------------------------

/// Raw contents of a structure file: `bricks v1 <W> <L> <H>` followed by
/// `<type_id> <x> <y> <z> <rot> [instance_id]` lines. Instance ids default to
/// 1, 2, ... in file order.
struct StructureFile {
  Dims dims;
  std::vector<BrickPlacement> placements;
};

StructureFile parse_structure(std::string_view text);
std::string serialize_structure(const WorkspaceState& state);

/// Places every brick in order. Throws on the first invalid placement.
WorkspaceState build_state(const StructureFile& file, std::shared_ptr<const Catalog> catalog,
                           WorkspaceId workspace);

/// Packs one brick per requested type onto an empty plate in rows with a one
/// stud gap, rot 0, z = 1. Throws OutOfBounds when the plate is too small.
WorkspaceState pack_storage(std::span<const std::string> type_ids, Dims dims,
                            std::shared_ptr<const Catalog> catalog, InstanceId first_id = 1);

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

/// Throws IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace brickdemo
