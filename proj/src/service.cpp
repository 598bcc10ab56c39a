#include "brickdemo/service.hpp"

#include <cstdio>
#include <random>

#include "brickdemo/feasibility.hpp"
#include "text_util.hpp"

namespace brickdemo::service {

namespace fs = std::filesystem;

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::demonstrating: return "demonstrating";
    case SessionStatus::verifying: return "verifying";
    case SessionStatus::done: return "done";
  }
  return "demonstrating";
}

std::string_view to_string(InputMode m) {
  switch (m) {
    case InputMode::none: return "none";
    case InputMode::steps: return "steps";
    case InputMode::frames: return "frames";
  }
  return "none";
}

namespace {

std::optional<SessionStatus> parse_status(std::string_view s) {
  for (auto v : {SessionStatus::demonstrating, SessionStatus::verifying, SessionStatus::done}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<InputMode> parse_mode(std::string_view s) {
  for (auto v : {InputMode::none, InputMode::steps, InputMode::frames}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

BrickPlacement canonical(const Catalog& catalog, BrickPlacement p) {
  p.rot = canonical_rotation(catalog.at(p.type_id), p.rot);
  return p;
}

}  // namespace

WorkspaceState default_storage_layout(std::shared_ptr<const Catalog> catalog, Dims dims) {
  std::vector<std::string> ids;
  for (const auto& t : catalog->types()) ids.push_back(t.type_id);
  return pack_storage(ids, dims, std::move(catalog));
}

struct SessionManager::Session {
  Session(std::string id_, SessionConfig config_)
      : id(std::move(id_)),
        config(std::move(config_)),
        storage(config.storage),
        assembly(WorkspaceId::assembly, config.assembly_dims, config.storage.catalog_ptr()) {}

  const Catalog& catalog() const { return config.storage.catalog(); }

  std::string id;
  mutable std::shared_mutex mutex;
  SessionConfig config;
  WorkspaceState storage;
  WorkspaceState assembly;
  SessionStatus status = SessionStatus::demonstrating;
  InputMode mode = InputMode::none;
  TaskGraph graph;

  std::optional<perception::KeyframeDetector> detector;
  std::optional<learner::Learner> learner;
  std::vector<Snapshot> frames;  ///< every snapshot consumed so far
  std::size_t joint_frames = 0;

  std::optional<twin::RoundTrip> report;
  std::optional<twin::TwinSession> replay_assembly;
  std::optional<twin::TwinSession> replay_disassembly;
};

namespace {

using Session = SessionManager::Session;

void require_demonstrating(const Session& s) {
  if (s.status != SessionStatus::demonstrating) {
    throw Error(ErrorCode::ModeConflict, "session " + s.id + " is " + std::string(to_string(s.status)));
  }
}

void claim_mode(Session& s, InputMode mode) {
  if (s.mode != InputMode::none && s.mode != mode) {
    throw Error(ErrorCode::ModeConflict, "session " + s.id + " already records " +
                                             std::string(to_string(s.mode)) + ", not " +
                                             std::string(to_string(mode)));
  }
}

void check_snapshot(const Session& s, const Snapshot& snap) {
  const auto& dims = snap.workspace == WorkspaceId::storage ? s.storage.dims() : s.assembly.dims();
  if (snap.width != dims.width || snap.length != dims.length) {
    throw Error(ErrorCode::DimensionMismatch, std::string(to_string(snap.workspace)) + " snapshot is " +
                                                  std::to_string(snap.width) + "x" + std::to_string(snap.length) +
                                                  ", plate is " + std::to_string(dims.width) + "x" +
                                                  std::to_string(dims.length));
  }
  if (!s.frames.empty() && snap.resolution != s.frames.front().resolution) {
    throw Error(ErrorCode::DimensionMismatch, "snapshot resolution differs from earlier frames");
  }
}

/// Consumes one joint frame. Learner and live states only change when the
/// whole keyframe is accepted.
std::optional<TaskNode> consume(Session& s, const perception::JointFrame& frame, bool& keyframe) {
  const std::size_t frame_index = s.joint_frames++;
  s.frames.push_back(frame.storage);
  s.frames.push_back(frame.assembly);
  auto kf = s.detector->push(frame);
  keyframe = kf.has_value();
  if (!kf) return std::nullopt;
  try {
    learner::Learner trial = *s.learner;
    auto node = trial.push(*kf);
    if (!node) {
      *s.learner = std::move(trial);
      return std::nullopt;
    }
    auto id = taskgraph::find_brick(s.storage, node->brick_type, node->storage_pose);
    if (!id) {
      throw Error(ErrorCode::StorageMismatch,
                  "no " + node->brick_type + " on the storage plate at the observed pickup pose");
    }
    auto moved = placement_at(node->brick_type, node->assembly_pose, *id);
    auto assembly = place(s.assembly, moved);
    s.storage = remove(s.storage, *id);
    s.assembly = std::move(assembly);
    *s.learner = std::move(trial);
    s.graph = s.learner->graph();
    return node;
  } catch (Error& e) {
    e.with_index(frame_index);
    throw;
  }
}

std::string manifest_text(const Session& s) {
  const auto& t = s.config.tool;
  const auto& d = s.config.assembly_dims;
  return "session v1 " + s.id + "\n" + "status " + std::string(to_string(s.status)) + "\n" + "mode " +
         std::string(to_string(s.mode)) + "\n" + "stability_window " + std::to_string(s.config.stability_window) +
         "\n" + "tool " + std::to_string(t.margin) + " " + std::to_string(t.body_height) + " " +
         std::to_string(t.length) + "\n" + "reach " + twin::format_reach(s.config.reach) + "\n" +
         "assembly_dims " + std::to_string(d.width) + " " + std::to_string(d.length) + " " +
         std::to_string(d.height) + "\n";
}

void start_replay(Session& s) {
  s.replay_assembly.emplace(s.graph, s.config.storage,
                            WorkspaceState(WorkspaceId::assembly, s.config.assembly_dims, s.config.storage.catalog_ptr()),
                            s.config.tool, s.config.reach);
  twin::TwinSession forward = *s.replay_assembly;
  while (!forward.finished()) forward.step();
  s.replay_disassembly.emplace(taskgraph::reverse(s.graph), forward.storage(), forward.assembly(), s.config.tool,
                               s.config.reach);
  s.replay_disassembly->set_audit_missing(true);
}

twin::TwinSession& replay_of(Session& s, Direction leg) {
  if (!s.replay_assembly) throw Error(ErrorCode::EmptyGraph, "session " + s.id + " has not been verified");
  return leg == Direction::assembly ? *s.replay_assembly : *s.replay_disassembly;
}

ReplayView view_of(const twin::TwinSession& t, Direction leg) {
  return {leg, t.cursor(), t.size(), t.storage(), t.assembly(), t.records()};
}

}  // namespace

SessionManager::SessionManager(std::shared_ptr<const Catalog> catalog, fs::path data_dir)
    : catalog_(std::move(catalog)), data_dir_(std::move(data_dir)) {
  if (!data_dir_.empty()) fs::create_directories(data_dir_);
}

SessionManager::~SessionManager() = default;

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + session_id + "'");
  return it->second;
}

void SessionManager::persist(const Session& session) const {
  if (!data_dir_.empty()) write_session(session, data_dir_ / session.id);
}

std::string SessionManager::create_session(SessionConfig config) {
  if (config.storage.workspace() != WorkspaceId::storage) {
    throw Error(ErrorCode::InvalidLayout, "storage layout must describe the storage workspace");
  }
  if (auto problems = audit(config.storage); !problems.empty()) {
    throw Error(ErrorCode::InvalidLayout, "storage layout is inconsistent: " + problems.front());
  }
  if (auto verdict = feasibility::check_structure(config.storage); !verdict.ok()) {
    const auto& v = verdict.violations.front();
    throw Error(ErrorCode::InvalidLayout,
                "storage layout fails feasibility: " + std::string(code_name(v.code)) + " " + v.detail);
  }
  config.tool.validate();
  config.reach.validate(config.storage.dims(), config.assembly_dims);
  if (config.stability_window < 2) throw Error(ErrorCode::InvalidArgument, "stability window must be at least 2");
  if (config.assembly_dims.width < 1 || config.assembly_dims.length < 1 || config.assembly_dims.height < 1) {
    throw Error(ErrorCode::InvalidArgument, "assembly dimensions must be positive");
  }

  std::string id;
  {
    std::unique_lock lock(sessions_mutex_);
    std::random_device rd;
    std::mt19937_64 rng((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ ++counter_);
    do {
      char buf[17];
      std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng()));
      id = buf;
    } while (sessions_.contains(id));
    sessions_.emplace(id, std::make_shared<Session>(id, std::move(config)));
  }
  auto session = find(id);
  std::shared_lock lock(session->mutex);
  persist(*session);
  return id;
}

StepFeedback SessionManager::submit_step(const std::string& session_id, const StepRequest& request) {
  auto session = find(session_id);
  std::unique_lock lock(session->mutex);
  auto& s = *session;
  require_demonstrating(s);
  claim_mode(s, InputMode::steps);
  const auto& source = s.storage.placement(request.storage_instance);

  StepFeedback feedback;
  BrickPlacement moved = placement_at(source.type_id, request.assembly_pose, source.instance_id);
  feedback.feasibility = feasibility::check_step(s.assembly, moved);
  feedback.operability = manipulation::removable(s.storage, source.instance_id, s.config.tool);
  if (feedback.feasibility.ok()) {
    feedback.operability.append(manipulation::assembly_operable(s.assembly, moved, s.config.tool));
  }
  const std::size_t index = s.graph.size();
  for (auto* verdict : {&feedback.feasibility, &feedback.operability}) {
    for (auto& v : verdict->violations) v.step = index;
  }
  if (!feedback.feasibility.ok() || !feedback.operability.ok()) return feedback;

  TaskNode node{index, source.type_id, pose_of(canonical(s.catalog(), source)),
                pose_of(canonical(s.catalog(), moved))};
  s.assembly = place(s.assembly, moved);
  s.storage = remove(s.storage, source.instance_id);
  s.graph.nodes.push_back(node);
  s.mode = InputMode::steps;
  feedback.accepted = true;
  feedback.node = node;
  persist(s);
  return feedback;
}

FramesResult SessionManager::submit_frames(const std::string& session_id, std::span<const Snapshot> snapshots) {
  auto session = find(session_id);
  std::unique_lock lock(session->mutex);
  auto& s = *session;
  require_demonstrating(s);
  claim_mode(s, InputMode::frames);
  if (s.storage.dims().width != s.assembly.dims().width || s.storage.dims().length != s.assembly.dims().length) {
    throw Error(ErrorCode::DimensionMismatch, "frame demonstrations need equally sized plates");
  }
  for (const auto& snap : snapshots) check_snapshot(s, snap);
  auto joint = perception::group_frames(snapshots);

  if (!s.detector) {
    s.detector.emplace(s.config.stability_window, s.config.assembly_dims.height);
    s.learner.emplace(s.config.storage.catalog_ptr(), s.config.assembly_dims.height);
  }
  s.mode = InputMode::frames;
  FramesResult result;
  try {
    for (const auto& frame : joint) {
      bool keyframe = false;
      if (auto node = consume(s, frame, keyframe)) result.appended.push_back(*node);
      if (keyframe) ++result.keyframes;
    }
  } catch (...) {
    persist(s);
    throw;
  }
  persist(s);
  return result;
}

twin::RoundTrip SessionManager::verify(const std::string& session_id) {
  auto session = find(session_id);
  std::unique_lock lock(session->mutex);
  auto& s = *session;
  if (s.graph.empty()) throw Error(ErrorCode::EmptyGraph, "session " + s.id + " has no demonstrated steps");
  s.status = SessionStatus::verifying;
  try {
    s.report = twin::verify_roundtrip(
        s.graph, s.config.storage,
        WorkspaceState(WorkspaceId::assembly, s.config.assembly_dims, s.config.storage.catalog_ptr()), s.config.tool,
        s.config.reach);
    start_replay(s);
  } catch (...) {
    s.status = SessionStatus::demonstrating;
    throw;
  }
  s.status = SessionStatus::done;
  persist(s);
  return *s.report;
}

SessionView SessionManager::get_state(const std::string& session_id) const {
  auto session = find(session_id);
  std::shared_lock lock(session->mutex);
  return {session->id, session->status, session->mode, session->storage, session->assembly, session->graph};
}

TaskGraph SessionManager::get_graph(const std::string& session_id) const {
  auto session = find(session_id);
  std::shared_lock lock(session->mutex);
  return session->graph;
}

std::optional<twin::RoundTrip> SessionManager::get_report(const std::string& session_id) const {
  auto session = find(session_id);
  std::shared_lock lock(session->mutex);
  return session->report;
}

ReplayView SessionManager::replay_view(const std::string& session_id, Direction leg) const {
  auto session = find(session_id);
  std::shared_lock lock(session->mutex);
  return view_of(replay_of(*session, leg), leg);
}

ReplayView SessionManager::replay_step(const std::string& session_id, Direction leg) {
  auto session = find(session_id);
  std::unique_lock lock(session->mutex);
  auto& t = replay_of(*session, leg);
  t.step();
  return view_of(t, leg);
}

ReplayView SessionManager::replay_rewind(const std::string& session_id, Direction leg, std::size_t to_index) {
  auto session = find(session_id);
  std::unique_lock lock(session->mutex);
  auto& t = replay_of(*session, leg);
  t.rewind(to_index);
  return view_of(t, leg);
}

std::vector<std::string> SessionManager::session_ids() const {
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

void SessionManager::write_session(const Session& s, const fs::path& dir) {
  fs::create_directories(dir);
  auto put = [&dir](const char* name, std::string_view content) { write_file((dir / name).string(), content); };
  put("manifest.txt", manifest_text(s));
  put("catalog.txt", serialize_catalog(s.catalog()));
  put("storage_initial.bricks", serialize_structure(s.config.storage));
  put("storage.bricks", serialize_structure(s.storage));
  put("assembly.bricks", serialize_structure(s.assembly));
  put("graph.task", taskgraph::serialize(s.graph));
  if (s.mode == InputMode::frames) {
    perception::DemoLog log;
    log.resolution = s.frames.empty() ? 1 : s.frames.front().resolution;
    log.width = s.storage.dims().width;
    log.length = s.storage.dims().length;
    log.frames = s.frames;
    put("demo.log", perception::serialize_demo(log));
  }
  if (s.report) {
    put("report_assembly.txt", twin::serialize_report(s.report->assembly));
    put("report_disassembly.txt", twin::serialize_report(s.report->disassembly));
  }
}

void SessionManager::save(const std::string& session_id, const fs::path& dir) const {
  auto session = find(session_id);
  std::shared_lock lock(session->mutex);
  write_session(*session, dir);
}

std::string SessionManager::load(const fs::path& dir) {
  auto get = [&dir](const char* name) { return read_file((dir / name).string()); };
  const auto manifest = get("manifest.txt");
  std::string id;
  SessionStatus status = SessionStatus::demonstrating;
  InputMode mode = InputMode::none;
  int window = 3;
  manipulation::ToolProfile tool;
  std::string reach_text;
  std::optional<Dims> assembly_dims;
  for (const auto& line : detail::tokenize_lines(manifest)) {
    const auto& t = line.tokens;
    auto need = [&](std::size_t n) {
      if (t.size() != n) detail::parse_fail(line.number, "malformed '" + std::string(t[0]) + "' entry");
    };
    if (t[0] == "session") {
      need(3);
      if (t[1] != "v1") detail::parse_fail(line.number, "unsupported manifest version");
      id = std::string(t[2]);
    } else if (t[0] == "status") {
      need(2);
      auto v = parse_status(t[1]);
      if (!v) detail::parse_fail(line.number, "unknown status");
      status = *v;
    } else if (t[0] == "mode") {
      need(2);
      auto v = parse_mode(t[1]);
      if (!v) detail::parse_fail(line.number, "unknown mode");
      mode = *v;
    } else if (t[0] == "stability_window") {
      need(2);
      window = detail::parse_int<int>(t[1], line.number, "stability window");
    } else if (t[0] == "tool") {
      need(4);
      tool.margin = detail::parse_int<int>(t[1], line.number, "margin");
      tool.body_height = detail::parse_int<int>(t[2], line.number, "body height");
      tool.length = detail::parse_int<int>(t[3], line.number, "length");
    } else if (t[0] == "reach") {
      need(2);
      reach_text = std::string(t[1]);
    } else if (t[0] == "assembly_dims") {
      need(4);
      assembly_dims = Dims{detail::parse_int<int>(t[1], line.number, "W"),
                           detail::parse_int<int>(t[2], line.number, "L"),
                           detail::parse_int<int>(t[3], line.number, "H")};
    } else {
      detail::parse_fail(line.number, "unknown manifest key '" + std::string(t[0]) + "'");
    }
  }
  if (id.empty() || !assembly_dims) throw Error(ErrorCode::ParseError, "manifest lacks session id or dimensions");

  auto catalog = std::make_shared<const Catalog>(parse_catalog(get("catalog.txt")));
  auto initial = build_state(parse_structure(get("storage_initial.bricks")), catalog, WorkspaceId::storage);
  SessionConfig config{initial, *assembly_dims, tool, twin::parse_reach(reach_text, initial.dims(), *assembly_dims),
                       window};
  auto session = std::make_shared<Session>(id, std::move(config));
  auto& s = *session;
  s.mode = mode;
  s.storage = build_state(parse_structure(get("storage.bricks")), catalog, WorkspaceId::storage);
  s.assembly = build_state(parse_structure(get("assembly.bricks")), catalog, WorkspaceId::assembly);
  s.graph = taskgraph::parse(get("graph.task"));

  if (mode == InputMode::frames) {
    // Rebuild detector and learner by replaying the recorded frames from the
    // initial storage; the result must agree with the saved files.
    const auto log = perception::parse_demo(get("demo.log"));
    Session replay(id, s.config);
    replay.detector.emplace(window, assembly_dims->height);
    replay.learner.emplace(catalog, assembly_dims->height);
    for (const auto& frame : perception::group_frames(log.frames)) {
      bool keyframe = false;
      try {
        consume(replay, frame, keyframe);
      } catch (const Error&) {
      }
    }
    if (replay.graph != s.graph || !(replay.storage == s.storage) || !(replay.assembly == s.assembly)) {
      throw Error(ErrorCode::IoError, "saved frames do not reproduce the saved session in " + dir.string());
    }
    s.detector = std::move(replay.detector);
    s.learner = std::move(replay.learner);
    s.frames = std::move(replay.frames);
    s.joint_frames = replay.joint_frames;
  }
  if (status == SessionStatus::done) {
    s.report = twin::verify_roundtrip(s.graph, s.config.storage,
                                      WorkspaceState(WorkspaceId::assembly, *assembly_dims, catalog), tool,
                                      s.config.reach);
    if (twin::serialize_report(s.report->assembly) != get("report_assembly.txt") ||
        twin::serialize_report(s.report->disassembly) != get("report_disassembly.txt")) {
      throw Error(ErrorCode::IoError, "saved report does not match the replayed graph in " + dir.string());
    }
    start_replay(s);
  }
  s.status = status == SessionStatus::verifying ? SessionStatus::demonstrating : status;

  std::unique_lock lock(sessions_mutex_);
  sessions_[id] = session;
  return id;
}

}  // namespace brickdemo::service
