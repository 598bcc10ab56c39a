#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brickdemo/manipulation.hpp"
#include "brickdemo/taskgraph.hpp"
#include "brickdemo/verdict.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo::twin {

/// Axis-aligned stud rectangle [x, x+width) x [y, y+length).
struct StudRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int length = 0;

  bool contains(int cx, int cy) const {
    return cx >= x && cy >= y && cx < x + width && cy < y + length;
  }
  friend bool operator==(const StudRect&, const StudRect&) = default;
};

/// Where the simulated robot can work. A footprint is reachable when each of
/// its studs lies in some rectangle of that workspace and the tool tip at the
/// brick's layer stays within max_reach_height (z + tool length).
struct ReachEnvelope {
  std::vector<StudRect> storage;
  std::vector<StudRect> assembly;
  int max_reach_height = 64;

  /// Both plates fully reachable.
  static ReachEnvelope full(Dims storage_dims, Dims assembly_dims);

  const std::vector<StudRect>& rects(WorkspaceId ws) const {
    return ws == WorkspaceId::storage ? storage : assembly;
  }
  /// Throws InvalidArgument for empty or out-of-plate rectangles.
  void validate(Dims storage_dims, Dims assembly_dims) const;

  friend bool operator==(const ReachEnvelope&, const ReachEnvelope&) = default;
};

/// Parses `storage:x,y,w,l;assembly:x,y,w,l;height:N`. Every part is
/// optional and rectangles may repeat; a workspace without rectangles is
/// fully reachable. Throws ParseError.
ReachEnvelope parse_reach(std::string_view text, Dims storage_dims, Dims assembly_dims);
std::string format_reach(const ReachEnvelope& reach);

/// UNREACHABLE violations for p in `state` (empty verdict when reachable).
Verdict check_reach(const WorkspaceState& state, const BrickPlacement& p, const ReachEnvelope& reach,
                    const manipulation::ToolProfile& tool);

struct StepRecord {
  std::size_t index = 0;
  FeasibilityVerdict feasibility;
  OperabilityVerdict operability;
  Verdict reachability;
  bool applied = false;

  bool ok() const { return feasibility.ok() && operability.ok() && reachability.ok(); }
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct VerificationReport {
  std::string graph_id;
  Direction direction = Direction::assembly;
  std::vector<StepRecord> steps;

  bool operable() const;
  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

/// `report v1 <graph_id> <direction> <operable|inoperable> <T>` then one
/// `step <i> <feas> <oper> <reach> [codes...]` line per step, where feas and
/// oper are ok|fail, reach is ok|UNREACHABLE, and codes lists the distinct
/// violation codes followed by NOT_APPLIED when the step was skipped.
std::string serialize_report(const VerificationReport& report);

/// Per-step evaluation of one move from a source plate to a target plate.
/// Assembly nodes take a brick from storage (full removability and reach)
/// and press it into the assembly (check_step, tool clearance, reach);
/// disassembly nodes do the reverse. Throws StorageMismatch when the source
/// pose does not hold the node's brick.
class TwinSession {
 public:
  TwinSession(TaskGraph graph, WorkspaceState storage, WorkspaceState assembly,
              manipulation::ToolProfile tool, ReachEnvelope reach);

  /// When set, a node whose brick is absent from its source pose yields a
  /// not-applied record with MISSING_BRICK instead of StorageMismatch. Used
  /// for the return leg of a round trip after a failed assembly leg.
  void set_audit_missing(bool enabled) { audit_missing_ = enabled; }

  /// Evaluates the node at the cursor, applies it when every check passes,
  /// and advances. Throws EndOfGraph at the end, StorageMismatch as above
  /// (the session is left unchanged).
  const StepRecord& step();

  /// Restores the state just after node to_index - 1. Throws InvalidIndex
  /// when to_index > cursor.
  void rewind(std::size_t to_index);

  std::size_t cursor() const { return records_.size(); }
  std::size_t size() const { return graph_.size(); }
  bool finished() const { return cursor() == size(); }

  const TaskGraph& graph() const { return graph_; }
  const WorkspaceState& storage() const { return storage_; }
  const WorkspaceState& assembly() const { return assembly_; }
  const WorkspaceState& initial_storage() const { return initial_storage_; }
  const WorkspaceState& initial_assembly() const { return initial_assembly_; }
  const std::vector<StepRecord>& records() const { return records_; }
  const manipulation::ToolProfile& tool() const { return tool_; }
  const ReachEnvelope& reach() const { return reach_; }

  /// Report over the steps evaluated so far.
  VerificationReport report() const;

  /// States rebuilt by replaying the applied history onto the initial states.
  std::pair<WorkspaceState, WorkspaceState> replay_history() const;

 private:
  struct Move {
    bool applied = false;
    InstanceId source_id = kNoInstance;
    BrickPlacement destination;
  };

  void apply(const Move& move, WorkspaceState& storage, WorkspaceState& assembly) const;

  TaskGraph graph_;
  std::string graph_id_;
  WorkspaceState initial_storage_;
  WorkspaceState initial_assembly_;
  WorkspaceState storage_;
  WorkspaceState assembly_;
  manipulation::ToolProfile tool_;
  ReachEnvelope reach_;
  std::vector<StepRecord> records_;
  std::vector<Move> history_;
  bool audit_missing_ = false;
};

/// Runs every node of g in order.
VerificationReport execute(const TaskGraph& g, const WorkspaceState& storage, const WorkspaceState& assembly,
                           const manipulation::ToolProfile& tool, const ReachEnvelope& reach);

/// Convenience form: assembly graphs start from an empty assembly plate;
/// disassembly graphs start from the structure described by their assembly
/// poses (instance ids numbered after the storage ids).
VerificationReport execute(const TaskGraph& g, const WorkspaceState& storage, Dims assembly_dims,
                           const manipulation::ToolProfile& tool, const ReachEnvelope& reach);

struct RoundTrip {
  VerificationReport assembly;
  VerificationReport disassembly;
  WorkspaceState final_storage;
  WorkspaceState final_assembly;
};

/// Executes an assembly graph, then its reverse from the resulting states.
/// Bricks that never reached the assembly plate show up as MISSING_BRICK on
/// the return leg. Throws InvalidArgument for disassembly graphs and
/// StorageMismatch when the assembly leg's storage does not match.
RoundTrip verify_roundtrip(const TaskGraph& g, const WorkspaceState& storage, const WorkspaceState& assembly,
                           const manipulation::ToolProfile& tool, const ReachEnvelope& reach);

}  // namespace brickdemo::twin
