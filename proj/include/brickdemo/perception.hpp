#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brickdemo/taskgraph.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo {

struct Pixel {
  double height = 0.0;  ///< layer units
  std::uint32_t color = kBackgroundRgb;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Top-down height + color image of one workspace. Pixels are stored row by
/// row: `resolution * length` rows of `resolution * width` pixels.
struct Snapshot {
  std::int64_t timestamp_ms = 0;
  WorkspaceId workspace = WorkspaceId::assembly;
  int resolution = 1;  ///< pixels per stud
  int width = 0;       ///< studs
  int length = 0;      ///< studs
  std::vector<Pixel> pixels;

  int pixel_width() const { return resolution * width; }
  int pixel_length() const { return resolution * length; }
  Pixel& at(int px, int py) { return pixels[static_cast<std::size_t>(py) * pixel_width() + px]; }
  const Pixel& at(int px, int py) const {
    return pixels[static_cast<std::size_t>(py) * pixel_width() + px];
  }

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct CellObservation {
  int top_height = 0;
  std::optional<Color> top_color;  ///< nullopt = bare plate

  friend bool operator==(const CellObservation&, const CellObservation&) = default;
};

/// Per-stud top surface of one workspace.
struct GridObservation {
  WorkspaceId workspace = WorkspaceId::assembly;
  int width = 0;
  int length = 0;
  std::vector<CellObservation> cells;  ///< row-major, y * width + x

  const CellObservation& at(int x, int y) const {
    return cells[static_cast<std::size_t>(y) * width + x];
  }

  friend bool operator==(const GridObservation&, const GridObservation&) = default;
};

namespace perception {

/// Nearest palette entry by squared RGB distance; ties go to the lower index.
Color classify_color(std::uint32_t rgb);

/// Per cell: rounded (half up) median of pixel heights clamped to
/// [0, max_height]; color by majority vote of per-pixel palette
/// classification, lowest palette index winning ties. Cells with height 0
/// are bare plate. Throws DimensionMismatch when the pixel array does not
/// match resolution * dims, InvalidArgument for resolution < 1.
GridObservation pixel_to_grid(const Snapshot& snapshot, int max_height = 16);

/// Noiseless top-down image: each pixel shows the topmost occupied layer of
/// its stud column, or bare plate.
Snapshot render(const WorkspaceState& state, int resolution, std::int64_t timestamp_ms = 0);

/// Exact top surface of a state (what a perfect camera would report).
GridObservation observe(const WorkspaceState& state);

/// A stable view of both workspaces.
struct Keyframe {
  std::size_t first_frame = 0;  ///< index of the frame whose run produced it
  std::int64_t timestamp_ms = 0;
  GridObservation storage;
  GridObservation assembly;
};

/// Simultaneous snapshots of both workspaces.
struct JointFrame {
  std::int64_t timestamp_ms = 0;
  Snapshot storage;
  Snapshot assembly;
};

/// Pairs snapshots sharing a timestamp. Each timestamp must carry exactly one
/// snapshot per workspace, and timestamps must increase. Throws
/// MalformedStream otherwise.
std::vector<JointFrame> group_frames(std::span<const Snapshot> stream);

/// Incremental keyframe detection. A keyframe is emitted as soon as k
/// consecutive frames yield identical observations of both workspaces,
/// unless it equals the previously emitted keyframe.
class KeyframeDetector {
 public:
  /// Throws InvalidArgument for k < 2.
  explicit KeyframeDetector(int stability_window = 3, int max_height = 16);

  std::optional<Keyframe> push(const JointFrame& frame);

  std::size_t frames_seen() const { return frames_; }
  int stability_window() const { return k_; }

 private:
  int k_;
  int max_height_;
  std::size_t frames_ = 0;
  std::optional<Keyframe> run_;
  int run_length_ = 0;
  std::optional<Keyframe> last_emitted_;
};

/// Throws EmptyStream for an empty stream, InvalidArgument for k < 2 and
/// MalformedStream for ungroupable input.
std::vector<Keyframe> detect_keyframes(std::span<const Snapshot> stream, int stability_window = 3,
                                       int max_height = 16);

// ---------------------------------------------------------------------------
// Demonstration logs and synthetic demonstrations
// ---------------------------------------------------------------------------

/// `demo v1 <r> <W> <L>` header, then per snapshot `frame <timestamp_ms>
/// <workspace>` followed by r*L lines of r*W `height:colorhex` tokens.
struct DemoLog {
  int resolution = 1;
  int width = 0;
  int length = 0;
  std::vector<Snapshot> frames;
};

std::string serialize_demo(const DemoLog& log);
/// Throws ParseError naming the line.
DemoLog parse_demo(std::string_view text);

struct DemoRenderOptions {
  int resolution = 4;
  int stable_frames = 4;      ///< frames per stable state; must be >= stability window
  int transition_frames = 2;  ///< hand-occluded frames per move; must be < stability window
  double noise_fraction = 0.0;  ///< share of each cell's pixels replaced by noise
  std::uint64_t seed = 1;
  int frame_interval_ms = 100;
};

/// Renders a human carrying out an assembly graph: stable views of every
/// intermediate state separated by short hand-occluded transitions.
/// The storage state must hold each node's brick at its storage pose
/// (StorageMismatch otherwise); the assembly state is the starting plate.
DemoLog render_demonstration(const TaskGraph& graph, const WorkspaceState& storage,
                             const WorkspaceState& assembly, const DemoRenderOptions& options);

/// Replaces floor(fraction * r^2) pixels of every stud cell with random
/// height/color values.
void add_pixel_noise(Snapshot& snapshot, double fraction, int max_height, std::uint64_t seed);

}  // namespace perception
}  // namespace brickdemo
