#include "brickdemo/http_api.hpp"

#include <charconv>
#include <cstdio>

#include <httplib.h>

namespace brickdemo::http {

namespace {

std::string hex_color(std::uint32_t rgb) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%06x", rgb & 0xFFFFFFu);
  return buf;
}

std::uint32_t parse_hex_color(const std::string& s) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, 16);
  if (s.size() != 6 || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "invalid color '" + s + "', expected rrggbb");
  }
  return value;
}

Rotation rotation_from_json(const json& j) {
  auto rot = rotation_from_degrees(j.get<int>());
  if (!rot) throw Error(ErrorCode::ParseError, "invalid rotation " + j.dump());
  return *rot;
}

json cell_json(const Cell& c) { return json::array({c.x, c.y, c.z}); }

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  }
  return j.at(key).get<T>();
}

Direction leg_of(const json& j) {
  const auto text = j.is_object() && j.contains("leg") ? j.at("leg").get<std::string>() : std::string("assembly");
  auto d = parse_direction(text);
  if (!d) throw Error(ErrorCode::InvalidArgument, "unknown leg '" + text + "'");
  return *d;
}

}  // namespace

json to_json(const BrickPlacement& p) {
  return {{"id", p.instance_id}, {"type", p.type_id}, {"x", p.x}, {"y", p.y}, {"z", p.z}, {"rot", degrees(p.rot)}};
}

json to_json(const WorkspaceState& state) {
  json bricks = json::array();
  for (const auto& [id, p] : state.placements()) bricks.push_back(to_json(p));
  const auto& d = state.dims();
  return {{"workspace", to_string(state.workspace())},
          {"dims", {{"width", d.width}, {"length", d.length}, {"height", d.height}}},
          {"bricks", std::move(bricks)}};
}

json to_json(const Violation& v) {
  json cells = json::array();
  for (const auto& c : v.cells) cells.push_back(cell_json(c));
  return {{"code", code_name(v.code)},
          {"instance_id", v.instance_id},
          {"step", v.step ? json(*v.step) : json(nullptr)},
          {"cells", std::move(cells)},
          {"detail", v.detail}};
}

json to_json(const Verdict& v) {
  json list = json::array();
  for (const auto& x : v.violations) list.push_back(to_json(x));
  return {{"ok", v.ok()}, {"violations", std::move(list)}};
}

json to_json(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"z", p.z}, {"rot", degrees(p.rot)}}; }

json to_json(const TaskNode& n) {
  return {{"index", n.index},
          {"type", n.brick_type},
          {"storage_pose", to_json(n.storage_pose)},
          {"assembly_pose", to_json(n.assembly_pose)}};
}

json to_json(const TaskGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back(to_json(n));
  return {{"direction", to_string(g.direction)},
          {"graph_id", taskgraph::graph_id(g)},
          {"nodes", std::move(nodes)},
          {"text", taskgraph::serialize(g)}};
}

json to_json(const twin::VerificationReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"index", s.index},
                     {"ok", s.ok()},
                     {"applied", s.applied},
                     {"feasibility", to_json(s.feasibility)},
                     {"operability", to_json(s.operability)},
                     {"reachability", to_json(s.reachability)}});
  }
  return {{"graph_id", r.graph_id},
          {"direction", to_string(r.direction)},
          {"operable", r.operable()},
          {"steps", std::move(steps)},
          {"text", twin::serialize_report(r)}};
}

json to_json(const twin::RoundTrip& rt) {
  return {{"operable", rt.assembly.operable() && rt.disassembly.operable()},
          {"assembly", to_json(rt.assembly)},
          {"disassembly", to_json(rt.disassembly)},
          {"final_storage", to_json(rt.final_storage)},
          {"final_assembly", to_json(rt.final_assembly)}};
}

json to_json(const service::StepFeedback& f) {
  return {{"accepted", f.accepted},
          {"feasibility", to_json(f.feasibility)},
          {"operability", to_json(f.operability)},
          {"node", f.node ? to_json(*f.node) : json(nullptr)}};
}

json to_json(const service::SessionView& v) {
  return {{"session_id", v.session_id},
          {"status", service::to_string(v.status)},
          {"mode", service::to_string(v.mode)},
          {"storage", to_json(v.storage)},
          {"assembly", to_json(v.assembly)},
          {"graph", to_json(v.graph)}};
}

json to_json(const service::ReplayView& v) {
  json records = json::array();
  for (const auto& s : v.records) {
    records.push_back({{"index", s.index},
                       {"ok", s.ok()},
                       {"applied", s.applied},
                       {"feasibility", to_json(s.feasibility)},
                       {"operability", to_json(s.operability)},
                       {"reachability", to_json(s.reachability)}});
  }
  return {{"leg", to_string(v.leg)},
          {"cursor", v.cursor},
          {"size", v.size},
          {"storage", to_json(v.storage)},
          {"assembly", to_json(v.assembly)},
          {"records", std::move(records)}};
}

json to_json(const BrickType& t) {
  return {{"type", t.type_id},
          {"width", t.width},
          {"length", t.length},
          {"color", color_name(t.color)},
          {"rgb", hex_color(color_rgb(t.color))}};
}

json to_json(const Snapshot& s) {
  json heights = json::array();
  json colors = json::array();
  for (const auto& p : s.pixels) {
    heights.push_back(p.height);
    colors.push_back(hex_color(p.color));
  }
  return {{"timestamp_ms", s.timestamp_ms},
          {"workspace", to_string(s.workspace)},
          {"resolution", s.resolution},
          {"width", s.width},
          {"length", s.length},
          {"heights", std::move(heights)},
          {"colors", std::move(colors)}};
}

Dims dims_from_json(const json& j) {
  Dims d;
  d.width = field<int>(j, "width");
  d.length = field<int>(j, "length");
  if (j.contains("height")) d.height = j.at("height").get<int>();
  if (d.width < 1 || d.length < 1 || d.height < 1) {
    throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
  }
  return d;
}

Pose pose_from_json(const json& j) {
  Pose p;
  p.x = field<int>(j, "x");
  p.y = field<int>(j, "y");
  p.z = j.contains("z") ? j.at("z").get<int>() : 1;
  p.rot = j.contains("rot") ? rotation_from_json(j.at("rot")) : Rotation::r0;
  return p;
}

Snapshot snapshot_from_json(const json& j) {
  Snapshot s;
  s.timestamp_ms = field<std::int64_t>(j, "timestamp_ms");
  const auto ws = field<std::string>(j, "workspace");
  auto id = parse_workspace_id(ws);
  if (!id) throw Error(ErrorCode::ParseError, "unknown workspace '" + ws + "'");
  s.workspace = *id;
  s.resolution = field<int>(j, "resolution");
  s.width = field<int>(j, "width");
  s.length = field<int>(j, "length");
  if (s.resolution < 1 || s.width < 1 || s.length < 1) {
    throw Error(ErrorCode::InvalidArgument, "snapshot resolution and dimensions must be positive");
  }
  const auto& heights = j.at("heights");
  const auto& colors = j.at("colors");
  const auto n = static_cast<std::size_t>(s.pixel_width()) * s.pixel_length();
  if (heights.size() != n || colors.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "snapshot needs " + std::to_string(n) + " heights and colors");
  }
  s.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.pixels[i].height = heights[i].get<double>();
    s.pixels[i].color = parse_hex_color(colors[i].get<std::string>());
  }
  return s;
}

WorkspaceState state_from_json(const json& j, std::shared_ptr<const Catalog> catalog, WorkspaceId workspace) {
  if (j.is_string()) return build_state(parse_structure(j.get<std::string>()), std::move(catalog), workspace);
  StructureFile file;
  file.dims = dims_from_json(field<json>(j, "dims"));
  InstanceId next = 1;
  for (const auto& b : field<json>(j, "bricks")) {
    BrickPlacement p;
    p.instance_id = b.contains("id") ? b.at("id").get<InstanceId>() : next;
    next = std::max(next, p.instance_id) + 1;
    p.type_id = field<std::string>(b, "type");
    const auto pose = pose_from_json(b);
    p.x = pose.x;
    p.y = pose.y;
    p.z = pose.z;
    p.rot = pose.rot;
    file.placements.push_back(std::move(p));
  }
  return build_state(file, std::move(catalog), workspace);
}

service::SessionConfig session_config_from_json(const json& body, std::shared_ptr<const Catalog> catalog) {
  if (!body.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
  std::optional<WorkspaceState> storage;
  try {
    if (body.contains("storage")) {
      storage = state_from_json(body.at("storage"), catalog, WorkspaceId::storage);
    } else {
      const Dims dims = body.contains("storage_dims") ? dims_from_json(body.at("storage_dims")) : Dims{};
      storage = service::default_storage_layout(catalog, dims);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::InvalidLayout, std::string("storage layout is invalid: ") + e.what());
  }
  const Dims assembly_dims =
      body.contains("assembly_dims") ? dims_from_json(body.at("assembly_dims")) : storage->dims();
  manipulation::ToolProfile tool;
  if (body.contains("tool")) {
    const auto& t = body.at("tool");
    if (t.contains("margin")) tool.margin = t.at("margin").get<int>();
    if (t.contains("body_height")) tool.body_height = t.at("body_height").get<int>();
    if (t.contains("length")) tool.length = t.at("length").get<int>();
  }
  auto reach = body.contains("reach") ? twin::parse_reach(body.at("reach").get<std::string>(), storage->dims(),
                                                          assembly_dims)
                                      : twin::ReachEnvelope::full(storage->dims(), assembly_dims);
  const int window = body.contains("stability_window") ? body.at("stability_window").get<int>() : 3;
  return {std::move(*storage), assembly_dims, tool, std::move(reach), window};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownInstance:
      return 404;
    case ErrorCode::ModeConflict:
    case ErrorCode::EndOfGraph:
      return 409;
    case ErrorCode::NoChange:
    case ErrorCode::MultiBrickChange:
    case ErrorCode::UnknownFootprint:
    case ErrorCode::InconsistentColor:
    case ErrorCode::InitialAssemblyNotEmpty:
    case ErrorCode::StorageMismatch:
    case ErrorCode::EmptyStream:
    case ErrorCode::EmptyGraph:
    case ErrorCode::InvalidLayout:
    case ErrorCode::CellOccupied:
    case ErrorCode::OutOfBounds:
      return 422;
    case ErrorCode::IoError:
      return 500;
    default:
      return 400;
  }
}

json error_body(const Error& e) {
  return {{"code", to_string(e.code())},
          {"message", e.what()},
          {"step_or_frame_index", e.index() ? json(*e.index()) : json(nullptr)}};
}

void register_routes(httplib::Server& server, service::SessionManager& manager) {
  using httplib::Request;
  using httplib::Response;

  auto send = [](Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  // Wraps a handler so library and JSON errors become error bodies.
  auto guard = [send](auto handler) {
    return [send, handler](const Request& req, Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send(res, http_status(e.code()), error_body(e));
      } catch (const json::exception& e) {
        send(res, 400, {{"code", "ParseError"}, {"message", e.what()}, {"step_or_frame_index", nullptr}});
      } catch (const std::exception& e) {
        send(res, 500, {{"code", "InternalError"}, {"message", e.what()}, {"step_or_frame_index", nullptr}});
      }
    };
  };
  auto body_of = [](const Request& req) { return req.body.empty() ? json::object() : json::parse(req.body); };

  server.set_post_routing_handler([](const Request&, Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });
  server.Options(R"(.*)", [](const Request&, Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Get("/catalog", guard([&manager, send](const Request&, Response& res) {
               json types = json::array();
               for (const auto& t : manager.catalog().types()) types.push_back(to_json(t));
               send(res, 200, {{"types", std::move(types)}});
             }));

  server.Get("/sessions", guard([&manager, send](const Request&, Response& res) {
               send(res, 200, {{"sessions", manager.session_ids()}});
             }));

  server.Post("/sessions", guard([&manager, send, body_of](const Request& req, Response& res) {
                auto config = session_config_from_json(body_of(req), manager.catalog_ptr());
                const auto id = manager.create_session(std::move(config));
                send(res, 200, {{"session_id", id}, {"state", to_json(manager.get_state(id))}});
              }));

  server.Get(R"(/sessions/([^/]+)/state)", guard([&manager, send](const Request& req, Response& res) {
               send(res, 200, to_json(manager.get_state(req.matches[1])));
             }));

  server.Post(R"(/sessions/([^/]+)/steps)", guard([&manager, send, body_of](const Request& req, Response& res) {
                const auto body = body_of(req);
                service::StepRequest step{field<InstanceId>(body, "storage_instance"),
                                          pose_from_json(field<json>(body, "assembly_pose"))};
                const auto feedback = manager.submit_step(req.matches[1], step);
                if (feedback.accepted) {
                  send(res, 200, to_json(feedback));
                  return;
                }
                auto out = to_json(feedback);
                out["code"] = "RejectedStep";
                out["message"] = "step violates feasibility or tool clearance";
                out["step_or_frame_index"] = manager.get_graph(req.matches[1]).size();
                send(res, 409, out);
              }));

  server.Post(R"(/sessions/([^/]+)/frames)", guard([&manager, send, body_of](const Request& req, Response& res) {
                const auto body = body_of(req);
                std::vector<Snapshot> frames;
                if (body.contains("demo_log")) {
                  frames = perception::parse_demo(body.at("demo_log").get<std::string>()).frames;
                } else {
                  for (const auto& f : field<json>(body, "frames")) frames.push_back(snapshot_from_json(f));
                }
                const auto result = manager.submit_frames(req.matches[1], frames);
                json nodes = json::array();
                for (const auto& n : result.appended) nodes.push_back(to_json(n));
                send(res, 200, {{"appended", std::move(nodes)}, {"keyframes", result.keyframes}});
              }));

  server.Post(R"(/sessions/([^/]+)/verify)", guard([&manager, send](const Request& req, Response& res) {
                send(res, 200, to_json(manager.verify(req.matches[1])));
              }));

  server.Get(R"(/sessions/([^/]+)/taskgraph)", guard([&manager, send](const Request& req, Response& res) {
               send(res, 200, to_json(manager.get_graph(req.matches[1])));
             }));

  server.Get(R"(/sessions/([^/]+)/report)", guard([&manager, send](const Request& req, Response& res) {
               auto report = manager.get_report(req.matches[1]);
               if (!report) {
                 send(res, 404, {{"code", "NoReport"},
                                 {"message", "session has not been verified"},
                                 {"step_or_frame_index", nullptr}});
                 return;
               }
               send(res, 200, to_json(*report));
             }));

  server.Get(R"(/sessions/([^/]+)/replay)", guard([&manager, send](const Request& req, Response& res) {
               json q = json::object();
               if (req.has_param("leg")) q["leg"] = req.get_param_value("leg");
               send(res, 200, to_json(manager.replay_view(req.matches[1], leg_of(q))));
             }));

  server.Post(R"(/sessions/([^/]+)/replay/step)",
              guard([&manager, send, body_of](const Request& req, Response& res) {
                send(res, 200, to_json(manager.replay_step(req.matches[1], leg_of(body_of(req)))));
              }));

  server.Post(R"(/sessions/([^/]+)/replay/rewind)",
              guard([&manager, send, body_of](const Request& req, Response& res) {
                const auto body = body_of(req);
                const auto to = field<long long>(body, "to_index");
                if (to < 0) throw Error(ErrorCode::InvalidIndex, "to_index must be non-negative");
                send(res, 200, to_json(manager.replay_rewind(req.matches[1], leg_of(body),
                                                             static_cast<std::size_t>(to))));
              }));
}

Server::Server(service::SessionManager& manager) : server_(std::make_unique<httplib::Server>()) {
  register_routes(*server_, manager);
}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Server::run(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Server::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace brickdemo::http
