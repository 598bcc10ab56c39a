#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brickdemo/perception.hpp"
#include "brickdemo/taskgraph.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo::learner {

/// The single brick move explaining the change between two keyframes.
struct StepDiff {
  std::vector<Cell> removed_region;  ///< storage cells that lost their top brick (z = old top)
  std::vector<Cell> added_region;    ///< assembly cells that gained a brick (z = new top)
  std::string inferred_type;
  Pose storage_pose;
  Pose assembly_pose;

  friend bool operator==(const StepDiff&, const StepDiff&) = default;
};

/// Explains prev -> next as one brick leaving storage and landing in assembly.
///
/// Both changed regions must be solid rectangles of one color at one layer,
/// with matching footprints; the landed brick must rest on the previous
/// surface (its layer is one above the highest cell below it). Orientation
/// comes from the rectangle extents; square footprints record 0.
///
/// Errors: NoChange; MultiBrickChange when the change is not one brick move;
/// UnknownFootprint when no (or more than one) catalog type matches;
/// InconsistentColor; DimensionMismatch for mismatched observations.
StepDiff diff_keyframes(const GridObservation& prev_storage, const GridObservation& prev_assembly,
                        const GridObservation& next_storage, const GridObservation& next_assembly,
                        const Catalog& catalog);

/// Folds keyframes into an assembly task graph, one node per changed
/// keyframe pair, while reconstructing the full assembly state (bricks hidden
/// under later bricks stay known).
class Learner {
 public:
  explicit Learner(std::shared_ptr<const Catalog> catalog, int max_height = 16);

  /// Returns the node appended by this keyframe, if any. The first keyframe
  /// only sets the baseline and must show an empty assembly plate
  /// (InitialAssemblyNotEmpty). Diff errors carry the keyframe index.
  /// Keyframes identical to the previous one are ignored.
  std::optional<TaskNode> push(const perception::Keyframe& keyframe);

  const TaskGraph& graph() const { return graph_; }
  /// Reconstructed assembly plate; nullopt before the first keyframe.
  const std::optional<WorkspaceState>& assembly_state() const { return assembly_; }
  std::size_t keyframes_seen() const { return seen_; }

 private:
  std::shared_ptr<const Catalog> catalog_;
  int max_height_;
  std::size_t seen_ = 0;
  std::optional<perception::Keyframe> last_;
  std::optional<WorkspaceState> assembly_;
  TaskGraph graph_;
};

/// Errors: InvalidArgument for no keyframes, plus everything Learner::push raises.
TaskGraph learn(std::span<const perception::Keyframe> keyframes, std::shared_ptr<const Catalog> catalog,
                int max_height = 16);

}  // namespace brickdemo::learner
