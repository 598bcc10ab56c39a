#pragma once

#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "brickdemo/service.hpp"

namespace httplib {
class Server;
}

namespace brickdemo::http {

using nlohmann::json;

// JSON bodies exchanged with the studio. Cells are [x, y, z] triples; colors
// are lowercase "rrggbb" strings; rotations are degrees.

json to_json(const BrickPlacement& p);
json to_json(const WorkspaceState& state);
json to_json(const Violation& v);
json to_json(const Verdict& v);
json to_json(const Pose& p);
json to_json(const TaskNode& n);
json to_json(const TaskGraph& g);
json to_json(const twin::VerificationReport& r);
json to_json(const twin::RoundTrip& rt);
json to_json(const service::StepFeedback& f);
json to_json(const service::SessionView& v);
json to_json(const service::ReplayView& v);
json to_json(const BrickType& t);
json to_json(const Snapshot& s);

Dims dims_from_json(const json& j);
Pose pose_from_json(const json& j);
Snapshot snapshot_from_json(const json& j);
/// Accepts structure-file text or {"dims": ..., "bricks": [...]}.
WorkspaceState state_from_json(const json& j, std::shared_ptr<const Catalog> catalog, WorkspaceId workspace);
service::SessionConfig session_config_from_json(const json& body, std::shared_ptr<const Catalog> catalog);

/// HTTP status for a library error: 400 malformed request, 404 unknown
/// session or instance, 409 conflicts with session state, 422 demonstration
/// and verification errors.
int http_status(ErrorCode code);
/// {"code", "message", "step_or_frame_index"}.
json error_body(const Error& e);

/// Registers every route on the server.
void register_routes(httplib::Server& server, service::SessionManager& manager);

/// Background HTTP server over a session manager.
class Server {
 public:
  explicit Server(service::SessionManager& manager);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port. Throws IoError when binding fails.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace brickdemo::http
