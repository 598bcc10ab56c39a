#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "brickdemo/learner.hpp"
#include "brickdemo/manipulation.hpp"
#include "brickdemo/perception.hpp"
#include "brickdemo/taskgraph.hpp"
#include "brickdemo/twin.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo::service {

enum class SessionStatus { demonstrating, verifying, done };
/// How the demonstration is being recorded. Fixed by the first submission.
enum class InputMode { none, steps, frames };

std::string_view to_string(SessionStatus s);
std::string_view to_string(InputMode m);

struct SessionConfig {
  WorkspaceState storage;  ///< initial storage layout; its catalog is the session catalog
  Dims assembly_dims;
  manipulation::ToolProfile tool;
  twin::ReachEnvelope reach;
  int stability_window = 3;
};

/// One brick taken from the storage plate and pressed onto the assembly plate.
struct StepRequest {
  InstanceId storage_instance = kNoInstance;
  Pose assembly_pose;
};

struct StepFeedback {
  bool accepted = false;
  FeasibilityVerdict feasibility;
  OperabilityVerdict operability;
  std::optional<TaskNode> node;  ///< set when accepted
};

struct FramesResult {
  std::vector<TaskNode> appended;
  std::size_t keyframes = 0;  ///< keyframes detected in this batch
};

struct SessionView {
  std::string session_id;
  SessionStatus status = SessionStatus::demonstrating;
  InputMode mode = InputMode::none;
  WorkspaceState storage;
  WorkspaceState assembly;
  TaskGraph graph;
};

/// Replay position of one leg of the verified round trip.
struct ReplayView {
  Direction leg = Direction::assembly;
  std::size_t cursor = 0;
  std::size_t size = 0;
  WorkspaceState storage;
  WorkspaceState assembly;
  std::vector<twin::StepRecord> records;
};

/// Default demonstration storage: one brick of every catalog type packed on
/// the plate.
WorkspaceState default_storage_layout(std::shared_ptr<const Catalog> catalog, Dims dims = {});

/// Demonstration sessions shared by the HTTP front end and tests.
///
/// Operations on one session are serialized; reads of one session may run
/// concurrently; distinct sessions are independent. With a data directory
/// set, every session is written to `<data_dir>/<session_id>/` after each
/// change.
class SessionManager {
 public:
  explicit SessionManager(std::shared_ptr<const Catalog> catalog = default_catalog_ptr(),
                          std::filesystem::path data_dir = {});
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  const Catalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const Catalog>& catalog_ptr() const { return catalog_; }

  /// Errors: InvalidLayout when the storage layout fails check_structure.
  std::string create_session(SessionConfig config);

  /// Runs check_step and tool clearance; applies the move only when both
  /// pass. Rejections leave the session untouched. Errors: UnknownSession,
  /// UnknownInstance, ModeConflict.
  StepFeedback submit_step(const std::string& session_id, const StepRequest& request);

  /// Feeds snapshots through keyframe detection and the learner. Errors
  /// carry the absolute frame index; nodes learned before the error stay.
  FramesResult submit_frames(const std::string& session_id, std::span<const Snapshot> snapshots);

  /// Round trip of the learned graph from the initial storage. Errors:
  /// EmptyGraph.
  twin::RoundTrip verify(const std::string& session_id);

  SessionView get_state(const std::string& session_id) const;
  TaskGraph get_graph(const std::string& session_id) const;
  std::optional<twin::RoundTrip> get_report(const std::string& session_id) const;

  /// Replay of a verified session. Errors: EmptyGraph before verify,
  /// EndOfGraph, InvalidIndex.
  ReplayView replay_view(const std::string& session_id, Direction leg) const;
  ReplayView replay_step(const std::string& session_id, Direction leg);
  ReplayView replay_rewind(const std::string& session_id, Direction leg, std::size_t to_index);

  std::vector<std::string> session_ids() const;

  /// Writes the session directory: manifest, catalog, structure files,
  /// task graph, demo log (frame sessions) and reports (verified sessions).
  void save(const std::string& session_id, const std::filesystem::path& dir) const;
  /// Restores a saved session under its original id. Returns the id.
  std::string load(const std::filesystem::path& dir);

  struct Session;

 private:
  std::shared_ptr<Session> find(const std::string& session_id) const;
  void persist(const Session& session) const;
  static void write_session(const Session& session, const std::filesystem::path& dir);

  std::shared_ptr<const Catalog> catalog_;
  std::filesystem::path data_dir_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace brickdemo::service
