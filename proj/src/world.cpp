#include "brickdemo/world.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace brickdemo {

std::optional<Color> color_from_name(std::string_view name) {
  for (const auto& entry : kPalette) {
    if (entry.name == name) return entry.color;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Catalog

Catalog::Catalog(std::vector<BrickType> types) {
  for (auto& t : types) add(std::move(t));
}

void Catalog::add(BrickType type) {
  if (type.type_id.empty() || type.type_id.find_first_of(" \t\r\n#") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "invalid type id '" + type.type_id + "'");
  }
  if (type.width < 1 || type.length < 1 || type.width > type.length) {
    throw Error(ErrorCode::InvalidArgument,
                "type " + type.type_id + ": footprint must satisfy 1 <= width <= length");
  }
  if (index_.contains(type.type_id)) {
    throw Error(ErrorCode::DuplicateType, "duplicate type id '" + type.type_id + "'");
  }
  index_.emplace(type.type_id, types_.size());
  types_.push_back(std::move(type));
}

const BrickType* Catalog::find(std::string_view type_id) const {
  auto it = index_.find(std::string(type_id));
  return it == index_.end() ? nullptr : &types_[it->second];
}

const BrickType& Catalog::at(std::string_view type_id) const {
  if (const auto* t = find(type_id)) return *t;
  throw Error(ErrorCode::UnknownType, "unknown brick type '" + std::string(type_id) + "'");
}

std::vector<const BrickType*> Catalog::matching(int width, int length, Color color) const {
  std::vector<const BrickType*> out;
  for (const auto& t : types_) {
    if (t.width == width && t.length == length && t.color == color) out.push_back(&t);
  }
  return out;
}

Catalog default_catalog() {
  static constexpr std::array<std::pair<int, int>, 7> kShapes{
      {{1, 1}, {1, 2}, {1, 4}, {1, 6}, {2, 2}, {2, 4}, {2, 6}}};
  Catalog catalog;
  for (auto [w, l] : kShapes) {
    for (const auto& entry : kPalette) {
      catalog.add({std::to_string(w) + "x" + std::to_string(l) + "_" + std::string(entry.name), w, l,
                   entry.color});
    }
  }
  return catalog;
}

std::shared_ptr<const Catalog> default_catalog_ptr() {
  static const auto shared = std::make_shared<const Catalog>(default_catalog());
  return shared;
}

Catalog parse_catalog(std::string_view text) {
  Catalog catalog;
  for (const auto& line : detail::tokenize_lines(text)) {
    const auto& t = line.tokens;
    if (t[0] != "type" || t.size() != 5) {
      detail::parse_fail(line.number, "expected 'type <type_id> <width> <length> <color>'");
    }
    auto color = color_from_name(t[4]);
    if (!color) detail::parse_fail(line.number, "unknown color '" + std::string(t[4]) + "'");
    BrickType type{std::string(t[1]), detail::parse_int<int>(t[2], line.number, "width"),
                   detail::parse_int<int>(t[3], line.number, "length"), *color};
    try {
      catalog.add(std::move(type));
    } catch (const Error& e) {
      detail::parse_fail(line.number, e.what());
    }
  }
  return catalog;
}

std::string serialize_catalog(const Catalog& catalog) {
  std::string out;
  for (const auto& t : catalog.types()) {
    out += "type " + t.type_id + " " + std::to_string(t.width) + " " + std::to_string(t.length) +
           " " + std::string(color_name(t.color)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Footprints

Footprint effective_footprint(const BrickType& type, Rotation rot) {
  return swaps_extents(rot) ? Footprint{type.length, type.width} : Footprint{type.width, type.length};
}

Rotation canonical_rotation(const BrickType& type, Rotation rot) {
  if (type.square()) return Rotation::r0;
  return swaps_extents(rot) ? Rotation::r90 : Rotation::r0;
}

bool footprint_equivalent(const BrickType& type, Rotation a, Rotation b) {
  return canonical_rotation(type, a) == canonical_rotation(type, b);
}

std::vector<Cell> footprint_cells(const BrickPlacement& p, const Catalog& catalog) {
  const auto fp = effective_footprint(catalog.at(p.type_id), p.rot);
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(fp.fx * fp.fy));
  for (int dx = 0; dx < fp.fx; ++dx) {
    for (int dy = 0; dy < fp.fy; ++dy) cells.push_back({p.x + dx, p.y + dy, p.z});
  }
  return cells;
}

// ---------------------------------------------------------------------------
// WorkspaceState

WorkspaceState::WorkspaceState(WorkspaceId workspace, Dims dims, std::shared_ptr<const Catalog> catalog)
    : workspace_(workspace), dims_(dims), catalog_(std::move(catalog)) {
  if (dims.width < 1 || dims.length < 1 || dims.height < 1) {
    throw Error(ErrorCode::InvalidArgument, "plate dimensions must be positive");
  }
  if (!catalog_) throw Error(ErrorCode::InvalidArgument, "workspace requires a catalog");
  cells_.assign(static_cast<std::size_t>(dims.width) * dims.length * dims.height, kNoInstance);
}

int WorkspaceState::top_height(int x, int y) const {
  for (int z = dims_.height; z >= 1; --z) {
    if (occupied({x, y, z})) return z;
  }
  return 0;
}

const BrickPlacement& WorkspaceState::placement(InstanceId id) const {
  auto it = placements_.find(id);
  if (it == placements_.end()) {
    throw Error(ErrorCode::UnknownInstance, "unknown instance " + std::to_string(id));
  }
  return it->second;
}

InstanceId WorkspaceState::next_instance_id() const {
  return placements_.empty() ? 1 : placements_.rbegin()->first + 1;
}

bool operator==(const WorkspaceState& a, const WorkspaceState& b) {
  return a.workspace_ == b.workspace_ && a.dims_ == b.dims_ && a.placements_ == b.placements_;
}

WorkspaceState place(const WorkspaceState& state, const BrickPlacement& p) {
  if (p.instance_id <= kNoInstance) {
    throw Error(ErrorCode::InvalidArgument, "instance ids must be positive");
  }
  if (state.contains(p.instance_id)) {
    throw Error(ErrorCode::InvalidArgument,
                "instance " + std::to_string(p.instance_id) + " already placed");
  }
  const auto cells = footprint_cells(p, state.catalog());
  for (const auto& c : cells) {
    if (!state.in_bounds(c)) {
      throw Error(ErrorCode::OutOfBounds, "placement of " + p.type_id + " at (" + std::to_string(p.x) +
                                              "," + std::to_string(p.y) + "," + std::to_string(p.z) +
                                              ") leaves the plate")
          .with_cell(c);
    }
  }
  for (const auto& c : cells) {
    if (auto other = state.at(c); other != kNoInstance) {
      throw Error(ErrorCode::CellOccupied, "cell (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                                               "," + std::to_string(c.z) + ") held by instance " +
                                               std::to_string(other))
          .with_cell(c, other);
    }
  }
  WorkspaceState next = state;
  for (const auto& c : cells) next.cells_[next.offset(c)] = p.instance_id;
  next.placements_.emplace(p.instance_id, p);
  return next;
}

WorkspaceState remove(const WorkspaceState& state, InstanceId id) {
  const auto& p = state.placement(id);
  WorkspaceState next = state;
  for (const auto& c : footprint_cells(p, state.catalog())) next.cells_[next.offset(c)] = kNoInstance;
  next.placements_.erase(id);
  return next;
}

std::vector<std::string> audit(const WorkspaceState& state) {
  std::vector<std::string> problems;
  std::vector<InstanceId> expected(state.cells_.size(), kNoInstance);
  for (const auto& [id, p] : state.placements_) {
    if (id != p.instance_id) problems.push_back("placement key " + std::to_string(id) + " mismatches id");
    const BrickType* type = state.catalog_->find(p.type_id);
    if (!type) {
      problems.push_back("instance " + std::to_string(id) + " has unknown type " + p.type_id);
      continue;
    }
    for (const auto& c : footprint_cells(p, *state.catalog_)) {
      if (!state.in_bounds(c)) {
        problems.push_back("instance " + std::to_string(id) + " out of bounds");
        break;
      }
      auto& slot = expected[state.offset(c)];
      if (slot != kNoInstance) {
        problems.push_back("instances " + std::to_string(slot) + " and " + std::to_string(id) +
                           " overlap");
      }
      slot = id;
    }
  }
  if (expected != state.cells_) problems.push_back("cell grid disagrees with placements");
  return problems;
}

std::vector<std::string> brick_multiset(const WorkspaceState& state) {
  std::vector<std::string> out;
  out.reserve(state.size());
  for (const auto& [id, p] : state.placements()) out.push_back(p.type_id);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Structure files

StructureFile parse_structure(std::string_view text) {
  auto lines = detail::tokenize_lines(text);
  if (lines.empty()) detail::parse_fail(1, "missing 'bricks v1' header");
  const auto& h = lines.front();
  if (h.tokens.size() != 5 || h.tokens[0] != "bricks" || h.tokens[1] != "v1") {
    detail::parse_fail(h.number, "expected header 'bricks v1 <W> <L> <H>'");
  }
  StructureFile file;
  file.dims = {detail::parse_int<int>(h.tokens[2], h.number, "W"),
               detail::parse_int<int>(h.tokens[3], h.number, "L"),
               detail::parse_int<int>(h.tokens[4], h.number, "H")};
  if (file.dims.width < 1 || file.dims.length < 1 || file.dims.height < 1) {
    detail::parse_fail(h.number, "plate dimensions must be positive");
  }
  InstanceId next_id = 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto& t = line.tokens;
    if (t.size() != 5 && t.size() != 6) {
      detail::parse_fail(line.number, "expected '<type_id> <x> <y> <z> <rot> [instance_id]'");
    }
    BrickPlacement p;
    p.type_id = std::string(t[0]);
    p.x = detail::parse_int<int>(t[1], line.number, "x");
    p.y = detail::parse_int<int>(t[2], line.number, "y");
    p.z = detail::parse_int<int>(t[3], line.number, "z");
    p.rot = detail::parse_rotation(t[4], line.number);
    p.instance_id = t.size() == 6 ? detail::parse_int<InstanceId>(t[5], line.number, "instance id")
                                  : next_id;
    if (p.instance_id <= kNoInstance) detail::parse_fail(line.number, "instance ids must be positive");
    next_id = p.instance_id + 1;
    file.placements.push_back(std::move(p));
  }
  return file;
}

std::string serialize_structure(const WorkspaceState& state) {
  const auto& d = state.dims();
  std::string out = "bricks v1 " + std::to_string(d.width) + " " + std::to_string(d.length) + " " +
                    std::to_string(d.height) + "\n";
  // Ids are written only when they differ from the implicit 1..n numbering.
  bool sequential = true;
  InstanceId expect = 1;
  for (const auto& [id, p] : state.placements()) sequential = sequential && id == expect++;
  for (const auto& [id, p] : state.placements()) {
    out += p.type_id + " " + std::to_string(p.x) + " " + std::to_string(p.y) + " " +
           std::to_string(p.z) + " " + std::to_string(degrees(p.rot));
    if (!sequential) out += " " + std::to_string(id);
    out += "\n";
  }
  return out;
}

WorkspaceState build_state(const StructureFile& file, std::shared_ptr<const Catalog> catalog,
                           WorkspaceId workspace) {
  WorkspaceState state(workspace, file.dims, std::move(catalog));
  for (const auto& p : file.placements) state = place(state, p);
  return state;
}

WorkspaceState pack_storage(std::span<const std::string> type_ids, Dims dims,
                            std::shared_ptr<const Catalog> catalog, InstanceId first_id) {
  WorkspaceState state(WorkspaceId::storage, dims, catalog);
  int x = 0;
  int y = 0;
  int row_depth = 0;
  InstanceId id = first_id;
  for (const auto& type_id : type_ids) {
    const auto& type = catalog->at(type_id);
    if (x + type.width > dims.width) {
      x = 0;
      y += row_depth + 1;
      row_depth = 0;
    }
    if (x + type.width > dims.width || y + type.length > dims.length) {
      throw Error(ErrorCode::OutOfBounds, "storage plate too small for requested bricks");
    }
    state = place(state, {id++, type_id, x, y, 1, Rotation::r0});
    x += type.width + 1;
    row_depth = std::max(row_depth, type.length);
  }
  return state;
}

// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace brickdemo
