#include "brickdemo/twin.hpp"

#include <algorithm>

#include "brickdemo/feasibility.hpp"
#include "text_util.hpp"

namespace brickdemo::twin {

ReachEnvelope ReachEnvelope::full(Dims storage_dims, Dims assembly_dims) {
  ReachEnvelope reach;
  reach.storage.push_back({0, 0, storage_dims.width, storage_dims.length});
  reach.assembly.push_back({0, 0, assembly_dims.width, assembly_dims.length});
  return reach;
}

void ReachEnvelope::validate(Dims storage_dims, Dims assembly_dims) const {
  auto check = [](const std::vector<StudRect>& rects, Dims dims, std::string_view ws) {
    if (rects.empty()) throw Error(ErrorCode::InvalidArgument, std::string(ws) + " reach is empty");
    for (const auto& r : rects) {
      if (r.width < 1 || r.length < 1 || r.x < 0 || r.y < 0 || r.x + r.width > dims.width ||
          r.y + r.length > dims.length) {
        throw Error(ErrorCode::InvalidArgument, std::string(ws) + " reach rectangle leaves the plate");
      }
    }
  };
  check(storage, storage_dims, "storage");
  check(assembly, assembly_dims, "assembly");
  if (max_reach_height < 1) throw Error(ErrorCode::InvalidArgument, "reach height must be positive");
}

ReachEnvelope parse_reach(std::string_view text, Dims storage_dims, Dims assembly_dims) {
  ReachEnvelope reach;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(';', pos);
    if (end == std::string_view::npos) end = text.size();
    auto part = text.substr(pos, end - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    pos = end + 1;
    if (part.empty()) continue;
    auto colon = part.find(':');
    if (colon == std::string_view::npos) detail::parse_fail(1, "reach part '" + std::string(part) + "' lacks ':'");
    auto key = part.substr(0, colon);
    auto value = part.substr(colon + 1);
    if (key == "height") {
      reach.max_reach_height = detail::parse_int<int>(value, 1, "reach height");
      continue;
    }
    auto ws = parse_workspace_id(key);
    if (!ws) detail::parse_fail(1, "unknown reach workspace '" + std::string(key) + "'");
    int numbers[4];
    std::size_t start = 0;
    for (int i = 0; i < 4; ++i) {
      auto comma = i < 3 ? value.find(',', start) : value.size();
      if (comma == std::string_view::npos) detail::parse_fail(1, "reach rectangle needs x,y,w,l");
      numbers[i] = detail::parse_int<int>(value.substr(start, comma - start), 1, "reach rectangle");
      start = comma + 1;
    }
    (*ws == WorkspaceId::storage ? reach.storage : reach.assembly)
        .push_back({numbers[0], numbers[1], numbers[2], numbers[3]});
  }
  if (reach.storage.empty()) reach.storage.push_back({0, 0, storage_dims.width, storage_dims.length});
  if (reach.assembly.empty()) reach.assembly.push_back({0, 0, assembly_dims.width, assembly_dims.length});
  try {
    reach.validate(storage_dims, assembly_dims);
  } catch (const Error& e) {
    detail::parse_fail(1, e.what());
  }
  return reach;
}

std::string format_reach(const ReachEnvelope& reach) {
  std::string out;
  auto rects = [&out](std::string_view ws, const std::vector<StudRect>& rs) {
    for (const auto& r : rs) {
      out += std::string(ws) + ":" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
             std::to_string(r.width) + "," + std::to_string(r.length) + ";";
    }
  };
  rects("storage", reach.storage);
  rects("assembly", reach.assembly);
  out += "height:" + std::to_string(reach.max_reach_height);
  return out;
}

Verdict check_reach(const WorkspaceState& state, const BrickPlacement& p, const ReachEnvelope& reach,
                    const manipulation::ToolProfile& tool) {
  Verdict verdict;
  const auto& rects = reach.rects(state.workspace());
  std::vector<Cell> outside;
  for (const auto& c : footprint_cells(p, state.catalog())) {
    bool inside = std::any_of(rects.begin(), rects.end(), [&](const StudRect& r) { return r.contains(c.x, c.y); });
    if (!inside) outside.push_back(c);
  }
  if (!outside.empty()) {
    verdict.add({ViolationCode::unreachable, p.instance_id, std::nullopt, std::move(outside),
                 std::string(to_string(state.workspace())) + " pose outside the reach envelope"});
  } else if (p.z + tool.length > reach.max_reach_height) {
    verdict.add({ViolationCode::unreachable, p.instance_id, std::nullopt, {},
                 "layer " + std::to_string(p.z) + " plus tool length exceeds reach height"});
  }
  return verdict;
}

bool VerificationReport::operable() const {
  return std::all_of(steps.begin(), steps.end(), [](const StepRecord& s) { return s.ok(); });
}

std::string serialize_report(const VerificationReport& report) {
  std::string out = "report v1 " + report.graph_id + " " + std::string(to_string(report.direction)) + " " +
                    (report.operable() ? "operable" : "inoperable") + " " +
                    std::to_string(report.steps.size()) + "\n";
  for (const auto& s : report.steps) {
    out += "step " + std::to_string(s.index) + (s.feasibility.ok() ? " ok" : " fail") +
           (s.operability.ok() ? " ok" : " fail") + (s.reachability.ok() ? " ok" : " UNREACHABLE");
    std::vector<ViolationCode> codes;
    for (const auto* verdict : {&s.feasibility, &s.operability, &s.reachability}) {
      for (const auto& v : verdict->violations) {
        if (std::find(codes.begin(), codes.end(), v.code) == codes.end()) codes.push_back(v.code);
      }
    }
    for (auto c : codes) out += " " + std::string(code_name(c));
    if (!s.applied) out += " NOT_APPLIED";
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// TwinSession

TwinSession::TwinSession(TaskGraph graph, WorkspaceState storage, WorkspaceState assembly,
                         manipulation::ToolProfile tool, ReachEnvelope reach)
    : graph_(std::move(graph)),
      graph_id_(taskgraph::graph_id(graph_)),
      initial_storage_(storage),
      initial_assembly_(assembly),
      storage_(std::move(storage)),
      assembly_(std::move(assembly)),
      tool_(tool),
      reach_(std::move(reach)) {
  tool_.validate();
  if (initial_storage_.workspace() != WorkspaceId::storage ||
      initial_assembly_.workspace() != WorkspaceId::assembly) {
    throw Error(ErrorCode::InvalidArgument, "twin needs a storage and an assembly workspace");
  }
}

void TwinSession::apply(const Move& move, WorkspaceState& storage, WorkspaceState& assembly) const {
  if (!move.applied) return;
  auto& source = graph_.direction == Direction::assembly ? storage : assembly;
  auto& target = graph_.direction == Direction::assembly ? assembly : storage;
  source = remove(source, move.source_id);
  target = place(target, move.destination);
}

const StepRecord& TwinSession::step() {
  if (finished()) throw Error(ErrorCode::EndOfGraph, "no nodes left to execute");
  const std::size_t index = cursor();
  const auto& node = graph_.nodes[index];
  const bool assembling = graph_.direction == Direction::assembly;
  const WorkspaceState& source = assembling ? storage_ : assembly_;
  const WorkspaceState& target = assembling ? assembly_ : storage_;
  const Pose& from = assembling ? node.storage_pose : node.assembly_pose;
  const Pose& to = assembling ? node.assembly_pose : node.storage_pose;

  StepRecord record;
  record.index = index;
  Move move;
  const auto found = taskgraph::find_brick(source, node.brick_type, from);
  if (!found) {
    if (!audit_missing_) {
      throw Error(ErrorCode::StorageMismatch, "node " + std::to_string(index) + ": no " + node.brick_type +
                                                  " at its " + std::string(to_string(source.workspace())) +
                                                  " pose")
          .with_index(index);
    }
    record.feasibility.add({ViolationCode::missing_brick, kNoInstance, index, {},
                            node.brick_type + " is not at its " + std::string(to_string(source.workspace())) +
                                " pose"});
  } else {
    const InstanceId id = *found;
    // Keep the brick's identity unless the target already uses that id.
    const InstanceId target_id = target.contains(id) ? std::max(target.next_instance_id(), id + 1) : id;
    move.source_id = id;
    move.destination = placement_at(node.brick_type, to, target_id);

    record.feasibility = feasibility::check_step(target, move.destination);
    // Pick: detach from the source plate. Place: press into the target plate
    // (clearance is only meaningful for a placement check_step accepts).
    record.operability.append(manipulation::removable(source, id, tool_));
    if (record.feasibility.ok()) {
      record.operability.append(manipulation::assembly_operable(target, move.destination, tool_));
    }
    record.reachability.append(check_reach(source, source.placement(id), reach_, tool_));
    record.reachability.append(check_reach(target, move.destination, reach_, tool_));
    for (auto* verdict : {&record.feasibility, &record.operability, &record.reachability}) {
      for (auto& v : verdict->violations) v.step = index;
    }
    move.applied = record.ok();
  }
  record.applied = move.applied;
  apply(move, storage_, assembly_);
  history_.push_back(std::move(move));
  records_.push_back(std::move(record));
  return records_.back();
}

void TwinSession::rewind(std::size_t to_index) {
  if (to_index > cursor()) {
    throw Error(ErrorCode::InvalidIndex, "cannot rewind to " + std::to_string(to_index) + " from cursor " +
                                             std::to_string(cursor()))
        .with_index(to_index);
  }
  history_.resize(to_index);
  records_.resize(to_index);
  auto [storage, assembly] = replay_history();
  storage_ = std::move(storage);
  assembly_ = std::move(assembly);
}

std::pair<WorkspaceState, WorkspaceState> TwinSession::replay_history() const {
  WorkspaceState storage = initial_storage_;
  WorkspaceState assembly = initial_assembly_;
  for (const auto& move : history_) apply(move, storage, assembly);
  return {std::move(storage), std::move(assembly)};
}

VerificationReport TwinSession::report() const { return {graph_id_, graph_.direction, records_}; }

// ---------------------------------------------------------------------------

VerificationReport execute(const TaskGraph& g, const WorkspaceState& storage, const WorkspaceState& assembly,
                           const manipulation::ToolProfile& tool, const ReachEnvelope& reach) {
  TwinSession session(g, storage, assembly, tool, reach);
  while (!session.finished()) session.step();
  return session.report();
}

VerificationReport execute(const TaskGraph& g, const WorkspaceState& storage, Dims assembly_dims,
                           const manipulation::ToolProfile& tool, const ReachEnvelope& reach) {
  if (g.direction == Direction::assembly) {
    return execute(g, storage, WorkspaceState(WorkspaceId::assembly, assembly_dims, storage.catalog_ptr()), tool,
                   reach);
  }
  const auto assembly = taskgraph::assembly_layout(g, storage.catalog_ptr(), assembly_dims, storage.next_instance_id());
  return execute(g, storage, assembly, tool, reach);
}

RoundTrip verify_roundtrip(const TaskGraph& g, const WorkspaceState& storage, const WorkspaceState& assembly,
                           const manipulation::ToolProfile& tool, const ReachEnvelope& reach) {
  if (g.direction != Direction::assembly) {
    throw Error(ErrorCode::InvalidArgument, "round trip starts from an assembly graph");
  }
  TwinSession forward(g, storage, assembly, tool, reach);
  while (!forward.finished()) forward.step();
  TwinSession back(taskgraph::reverse(g), forward.storage(), forward.assembly(), tool, reach);
  back.set_audit_missing(true);
  while (!back.finished()) back.step();
  return {forward.report(), back.report(), back.storage(), back.assembly()};
}

}  // namespace brickdemo::twin
