#include "brickdemo/learner.hpp"

#include <algorithm>

namespace brickdemo::learner {

namespace {

struct Region {
  std::vector<Cell> cells;
  std::vector<Color> colors;
};

struct Rect {
  int x = 0;
  int y = 0;
  int fx = 0;
  int fy = 0;
  int z = 0;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

Rect solid_rectangle(const Region& region, std::string_view where) {
  int x0 = region.cells.front().x, x1 = x0, y0 = region.cells.front().y, y1 = y0;
  for (const auto& c : region.cells) {
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  const int fx = x1 - x0 + 1;
  const int fy = y1 - y0 + 1;
  if (static_cast<std::size_t>(fx) * fy != region.cells.size()) {
    fail(ErrorCode::MultiBrickChange,
         std::string(where) + " change is not a single rectangle (" + std::to_string(region.cells.size()) +
             " cells in a " + std::to_string(fx) + "x" + std::to_string(fy) + " box)");
  }
  const int z = region.cells.front().z;
  for (const auto& c : region.cells) {
    if (c.z != z) fail(ErrorCode::MultiBrickChange, std::string(where) + " change spans several layers");
  }
  for (auto color : region.colors) {
    if (color != region.colors.front()) {
      fail(ErrorCode::InconsistentColor, std::string(where) + " change is not a single color");
    }
  }
  return {x0, y0, fx, fy, z};
}

Rotation rotation_for(const BrickType& type, const Rect& rect) {
  if (type.square() || rect.fx == type.width) return Rotation::r0;
  return Rotation::r90;
}

void require_same_shape(const GridObservation& a, const GridObservation& b) {
  if (a.width != b.width || a.length != b.length || a.workspace != b.workspace) {
    fail(ErrorCode::DimensionMismatch, "keyframe observations differ in size or workspace");
  }
}

}  // namespace

StepDiff diff_keyframes(const GridObservation& prev_storage, const GridObservation& prev_assembly,
                        const GridObservation& next_storage, const GridObservation& next_assembly,
                        const Catalog& catalog) {
  require_same_shape(prev_storage, next_storage);
  require_same_shape(prev_assembly, next_assembly);

  Region removed;
  for (int y = 0; y < prev_storage.length; ++y) {
    for (int x = 0; x < prev_storage.width; ++x) {
      const auto& before = prev_storage.at(x, y);
      const auto& after = next_storage.at(x, y);
      if (after.top_height < before.top_height) {
        removed.cells.push_back({x, y, before.top_height});
        removed.colors.push_back(*before.top_color);
      } else if (after.top_height > before.top_height || after.top_color != before.top_color) {
        fail(ErrorCode::MultiBrickChange, "storage gained or swapped a brick at (" + std::to_string(x) +
                                              "," + std::to_string(y) + ")");
      }
    }
  }
  Region added;
  for (int y = 0; y < prev_assembly.length; ++y) {
    for (int x = 0; x < prev_assembly.width; ++x) {
      const auto& before = prev_assembly.at(x, y);
      const auto& after = next_assembly.at(x, y);
      if (after.top_height > before.top_height) {
        added.cells.push_back({x, y, after.top_height});
        added.colors.push_back(*after.top_color);
      } else if (after.top_height < before.top_height || after.top_color != before.top_color) {
        fail(ErrorCode::MultiBrickChange, "assembly lost or swapped a brick at (" + std::to_string(x) +
                                              "," + std::to_string(y) + ")");
      }
    }
  }
  if (removed.cells.empty() && added.cells.empty()) fail(ErrorCode::NoChange, "keyframes are identical");
  if (removed.cells.empty() || added.cells.empty()) {
    fail(ErrorCode::MultiBrickChange, removed.cells.empty() ? "a brick appeared in assembly without leaving storage"
                                                            : "a brick left storage without appearing in assembly");
  }

  const Rect src = solid_rectangle(removed, "storage");
  const Rect dst = solid_rectangle(added, "assembly");
  if (std::minmax(src.fx, src.fy) != std::minmax(dst.fx, dst.fy)) {
    fail(ErrorCode::MultiBrickChange, "storage and assembly footprints differ");
  }
  if (removed.colors.front() != added.colors.front()) {
    fail(ErrorCode::InconsistentColor, "brick changed color between storage and assembly");
  }
  int below = 0;
  for (const auto& c : added.cells) below = std::max(below, prev_assembly.at(c.x, c.y).top_height);
  if (dst.z != below + 1) {
    fail(ErrorCode::MultiBrickChange, "added brick at layer " + std::to_string(dst.z) +
                                          " does not rest on the surface below (top " +
                                          std::to_string(below) + ")");
  }

  const auto [w, l] = std::minmax(dst.fx, dst.fy);
  const Color color = added.colors.front();
  const auto candidates = catalog.matching(w, l, color);
  if (candidates.empty()) {
    fail(ErrorCode::UnknownFootprint, "no catalog type is " + std::to_string(w) + "x" + std::to_string(l) +
                                          " " + std::string(color_name(color)));
  }
  if (candidates.size() > 1) {
    fail(ErrorCode::UnknownFootprint, std::to_string(candidates.size()) + " catalog types match " +
                                          std::to_string(w) + "x" + std::to_string(l) + " " +
                                          std::string(color_name(color)));
  }
  const BrickType& type = *candidates.front();

  StepDiff diff;
  diff.removed_region = std::move(removed.cells);
  diff.added_region = std::move(added.cells);
  std::sort(diff.removed_region.begin(), diff.removed_region.end());
  std::sort(diff.added_region.begin(), diff.added_region.end());
  diff.inferred_type = type.type_id;
  diff.storage_pose = {src.x, src.y, src.z, rotation_for(type, src)};
  diff.assembly_pose = {dst.x, dst.y, dst.z, rotation_for(type, dst)};
  return diff;
}

Learner::Learner(std::shared_ptr<const Catalog> catalog, int max_height)
    : catalog_(std::move(catalog)), max_height_(max_height) {}

std::optional<TaskNode> Learner::push(const perception::Keyframe& keyframe) {
  const std::size_t index = seen_++;
  if (!last_) {
    for (const auto& cell : keyframe.assembly.cells) {
      if (cell.top_height != 0) {
        throw Error(ErrorCode::InitialAssemblyNotEmpty, "first keyframe shows bricks on the assembly plate")
            .with_index(index);
      }
    }
    assembly_.emplace(WorkspaceId::assembly, Dims{keyframe.assembly.width, keyframe.assembly.length, max_height_},
                      catalog_);
    last_ = keyframe;
    return std::nullopt;
  }
  if (last_->storage == keyframe.storage && last_->assembly == keyframe.assembly) return std::nullopt;

  StepDiff diff;
  try {
    diff = diff_keyframes(last_->storage, last_->assembly, keyframe.storage, keyframe.assembly, *catalog_);
    TaskNode node{graph_.nodes.size(), diff.inferred_type, diff.storage_pose, diff.assembly_pose};
    assembly_ = place(*assembly_, placement_at(node.brick_type, node.assembly_pose,
                                               static_cast<InstanceId>(node.index) + 1));
    graph_.nodes.push_back(node);
    last_ = keyframe;
    return node;
  } catch (Error& e) {
    e.with_index(index);
    throw;
  }
}

TaskGraph learn(std::span<const perception::Keyframe> keyframes, std::shared_ptr<const Catalog> catalog,
                int max_height) {
  if (keyframes.empty()) throw Error(ErrorCode::InvalidArgument, "at least one keyframe is required");
  Learner learner(std::move(catalog), max_height);
  for (const auto& kf : keyframes) learner.push(kf);
  return learner.graph();
}

}  // namespace brickdemo::learner
