#include "brickdemo/perception.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "text_util.hpp"

namespace brickdemo::perception {

namespace {

int channel_distance(std::uint32_t a, std::uint32_t b) {
  int d = 0;
  for (int shift : {16, 8, 0}) {
    const int ca = static_cast<int>((a >> shift) & 0xFF);
    const int cb = static_cast<int>((b >> shift) & 0xFF);
    d += (ca - cb) * (ca - cb);
  }
  return d;
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

Color classify_color(std::uint32_t rgb) {
  std::size_t best = 0;
  int best_distance = channel_distance(rgb, kPalette[0].rgb);
  for (std::size_t i = 1; i < kPalette.size(); ++i) {
    const int d = channel_distance(rgb, kPalette[i].rgb);
    if (d < best_distance) {
      best = i;
      best_distance = d;
    }
  }
  return kPalette[best].color;
}

GridObservation pixel_to_grid(const Snapshot& snapshot, int max_height) {
  const int r = snapshot.resolution;
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 1");
  if (snapshot.width < 1 || snapshot.length < 1 ||
      snapshot.pixels.size() != static_cast<std::size_t>(snapshot.pixel_width()) * snapshot.pixel_length()) {
    throw Error(ErrorCode::DimensionMismatch,
                "snapshot has " + std::to_string(snapshot.pixels.size()) + " pixels, expected " +
                    std::to_string(static_cast<long long>(snapshot.pixel_width()) * snapshot.pixel_length()));
  }
  GridObservation obs{snapshot.workspace, snapshot.width, snapshot.length, {}};
  obs.cells.resize(static_cast<std::size_t>(snapshot.width) * snapshot.length);

  std::vector<double> heights(static_cast<std::size_t>(r) * r);
  for (int y = 0; y < snapshot.length; ++y) {
    for (int x = 0; x < snapshot.width; ++x) {
      std::array<int, kPalette.size()> votes{};
      std::size_t k = 0;
      for (int py = y * r; py < (y + 1) * r; ++py) {
        for (int px = x * r; px < (x + 1) * r; ++px) {
          const auto& pixel = snapshot.at(px, py);
          heights[k++] = pixel.height;
          ++votes[palette_index(classify_color(pixel.color))];
        }
      }
      std::sort(heights.begin(), heights.end());
      const std::size_t n = heights.size();
      const double median = n % 2 == 1 ? heights[n / 2] : 0.5 * (heights[n / 2 - 1] + heights[n / 2]);
      auto& cell = obs.cells[static_cast<std::size_t>(y) * snapshot.width + x];
      cell.top_height = std::clamp(round_half_up(median), 0, max_height);
      if (cell.top_height > 0) {
        // max_element returns the first maximum, i.e. the lowest palette index.
        const auto winner = std::max_element(votes.begin(), votes.end()) - votes.begin();
        cell.top_color = kPalette[static_cast<std::size_t>(winner)].color;
      }
    }
  }
  return obs;
}

Snapshot render(const WorkspaceState& state, int resolution, std::int64_t timestamp_ms) {
  if (resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 1");
  const auto& d = state.dims();
  Snapshot s{timestamp_ms, state.workspace(), resolution, d.width, d.length, {}};
  s.pixels.resize(static_cast<std::size_t>(s.pixel_width()) * s.pixel_length());
  const auto top = observe(state);
  for (int y = 0; y < d.length; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const auto& cell = top.at(x, y);
      const Pixel pixel{static_cast<double>(cell.top_height),
                        cell.top_color ? color_rgb(*cell.top_color) : kBackgroundRgb};
      for (int py = y * resolution; py < (y + 1) * resolution; ++py) {
        for (int px = x * resolution; px < (x + 1) * resolution; ++px) s.at(px, py) = pixel;
      }
    }
  }
  return s;
}

GridObservation observe(const WorkspaceState& state) {
  const auto& d = state.dims();
  GridObservation obs{state.workspace(), d.width, d.length, {}};
  obs.cells.resize(static_cast<std::size_t>(d.width) * d.length);
  for (int y = 0; y < d.length; ++y) {
    for (int x = 0; x < d.width; ++x) {
      auto& cell = obs.cells[static_cast<std::size_t>(y) * d.width + x];
      cell.top_height = state.top_height(x, y);
      if (cell.top_height > 0) cell.top_color = state.type_of(state.at({x, y, cell.top_height})).color;
    }
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Keyframes

std::vector<JointFrame> group_frames(std::span<const Snapshot> stream) {
  std::vector<JointFrame> frames;
  std::size_t i = 0;
  while (i < stream.size()) {
    const auto ts = stream[i].timestamp_ms;
    if (!frames.empty() && ts <= frames.back().timestamp_ms) {
      throw Error(ErrorCode::MalformedStream, "timestamps must increase").with_index(i);
    }
    std::size_t j = i;
    const Snapshot* storage = nullptr;
    const Snapshot* assembly = nullptr;
    for (; j < stream.size() && stream[j].timestamp_ms == ts; ++j) {
      auto& slot = stream[j].workspace == WorkspaceId::storage ? storage : assembly;
      if (slot) {
        throw Error(ErrorCode::MalformedStream,
                    "two " + std::string(to_string(stream[j].workspace)) + " snapshots at t=" +
                        std::to_string(ts))
            .with_index(j);
      }
      slot = &stream[j];
    }
    if (!storage || !assembly) {
      throw Error(ErrorCode::MalformedStream,
                  "frame at t=" + std::to_string(ts) + " lacks one workspace")
          .with_index(i);
    }
    frames.push_back({ts, *storage, *assembly});
    i = j;
  }
  return frames;
}

KeyframeDetector::KeyframeDetector(int stability_window, int max_height)
    : k_(stability_window), max_height_(max_height) {
  if (k_ < 2) throw Error(ErrorCode::InvalidArgument, "stability window must be >= 2");
}

std::optional<Keyframe> KeyframeDetector::push(const JointFrame& frame) {
  Keyframe view{frames_, frame.timestamp_ms, pixel_to_grid(frame.storage, max_height_),
                pixel_to_grid(frame.assembly, max_height_)};
  ++frames_;
  if (run_ && run_->storage == view.storage && run_->assembly == view.assembly) {
    ++run_length_;
  } else {
    run_ = std::move(view);
    run_length_ = 1;
  }
  if (run_length_ != k_) return std::nullopt;
  if (last_emitted_ && last_emitted_->storage == run_->storage &&
      last_emitted_->assembly == run_->assembly) {
    return std::nullopt;
  }
  last_emitted_ = run_;
  return run_;
}

std::vector<Keyframe> detect_keyframes(std::span<const Snapshot> stream, int stability_window,
                                       int max_height) {
  if (stream.empty()) throw Error(ErrorCode::EmptyStream, "snapshot stream is empty");
  KeyframeDetector detector(stability_window, max_height);
  std::vector<Keyframe> keyframes;
  for (const auto& frame : group_frames(stream)) {
    if (auto kf = detector.push(frame)) keyframes.push_back(std::move(*kf));
  }
  return keyframes;
}

// ---------------------------------------------------------------------------
// Demo logs

std::string serialize_demo(const DemoLog& log) {
  std::string out = "demo v1 " + std::to_string(log.resolution) + " " + std::to_string(log.width) +
                    " " + std::to_string(log.length) + "\n";
  char hex[8];
  for (const auto& s : log.frames) {
    out += "frame " + std::to_string(s.timestamp_ms) + " " + std::string(to_string(s.workspace)) + "\n";
    for (int py = 0; py < s.pixel_length(); ++py) {
      for (int px = 0; px < s.pixel_width(); ++px) {
        const auto& p = s.at(px, py);
        if (px > 0) out += ' ';
        out += detail::format_double(p.height);
        std::snprintf(hex, sizeof(hex), "%06x", p.color & 0xFFFFFFu);
        out += ':';
        out += hex;
      }
      out += '\n';
    }
  }
  return out;
}

DemoLog parse_demo(std::string_view text) {
  auto lines = detail::tokenize_lines(text);
  if (lines.empty()) detail::parse_fail(1, "missing 'demo v1' header");
  const auto& h = lines.front();
  if (h.tokens.size() != 5 || h.tokens[0] != "demo" || h.tokens[1] != "v1") {
    detail::parse_fail(h.number, "expected header 'demo v1 <r> <W> <L>'");
  }
  DemoLog log;
  log.resolution = detail::parse_int<int>(h.tokens[2], h.number, "resolution");
  log.width = detail::parse_int<int>(h.tokens[3], h.number, "W");
  log.length = detail::parse_int<int>(h.tokens[4], h.number, "L");
  if (log.resolution < 1 || log.width < 1 || log.length < 1) {
    detail::parse_fail(h.number, "resolution and dimensions must be positive");
  }
  const int rows = log.resolution * log.length;
  const int cols = log.resolution * log.width;
  std::size_t i = 1;
  while (i < lines.size()) {
    const auto& fl = lines[i];
    if (fl.tokens.size() != 3 || fl.tokens[0] != "frame") {
      detail::parse_fail(fl.number, "expected 'frame <timestamp_ms> <workspace>'");
    }
    Snapshot s;
    s.timestamp_ms = detail::parse_int<std::int64_t>(fl.tokens[1], fl.number, "timestamp");
    auto ws = parse_workspace_id(fl.tokens[2]);
    if (!ws) detail::parse_fail(fl.number, "unknown workspace '" + std::string(fl.tokens[2]) + "'");
    s.workspace = *ws;
    s.resolution = log.resolution;
    s.width = log.width;
    s.length = log.length;
    s.pixels.reserve(static_cast<std::size_t>(rows) * cols);
    ++i;
    for (int row = 0; row < rows; ++row, ++i) {
      if (i >= lines.size()) detail::parse_fail(fl.number, "frame truncated");
      const auto& pl = lines[i];
      if (pl.tokens.size() != static_cast<std::size_t>(cols)) {
        detail::parse_fail(pl.number, "expected " + std::to_string(cols) + " pixels, found " +
                                          std::to_string(pl.tokens.size()));
      }
      for (auto tok : pl.tokens) {
        auto colon = tok.find(':');
        if (colon == std::string_view::npos) detail::parse_fail(pl.number, "pixel token lacks ':'");
        Pixel p;
        p.height = detail::parse_double(tok.substr(0, colon), pl.number, "height");
        if (!(p.height >= 0.0)) detail::parse_fail(pl.number, "negative height");
        auto hex = tok.substr(colon + 1);
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
        if (ec != std::errc{} || ptr != hex.data() + hex.size() || hex.size() != 6) {
          detail::parse_fail(pl.number, "bad color '" + std::string(hex) + "'");
        }
        p.color = value;
        s.pixels.push_back(p);
      }
    }
    log.frames.push_back(std::move(s));
  }
  return log;
}

// ---------------------------------------------------------------------------
// Synthetic demonstrations

void add_pixel_noise(Snapshot& snapshot, double fraction, int max_height, std::uint64_t seed) {
  const int r = snapshot.resolution;
  const int per_cell = static_cast<int>(std::floor(fraction * r * r + 1e-9));
  if (per_cell <= 0) return;
  std::mt19937_64 rng(seed);
  std::vector<int> slots(static_cast<std::size_t>(r) * r);
  for (int y = 0; y < snapshot.length; ++y) {
    for (int x = 0; x < snapshot.width; ++x) {
      for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<int>(i);
      // Partial Fisher-Yates: the first per_cell slots are the noisy pixels.
      for (int i = 0; i < per_cell; ++i) {
        const auto j = i + static_cast<int>(rng() % (slots.size() - i));
        std::swap(slots[i], slots[j]);
        const int px = x * r + slots[i] % r;
        const int py = y * r + slots[i] / r;
        auto& pixel = snapshot.at(px, py);
        pixel.height = static_cast<double>(rng() % 100000) / 100000.0 * max_height;
        pixel.color = static_cast<std::uint32_t>(rng() & 0xFFFFFFu);
      }
    }
  }
}

namespace {

constexpr std::uint32_t kHandRgb = 0xE0AC69;

/// A hand hovering over a brick footprint: a raised blob with margin.
void draw_hand(Snapshot& s, const BrickPlacement& p, const Catalog& catalog) {
  const auto fp = effective_footprint(catalog.at(p.type_id), p.rot);
  const int r = s.resolution;
  const double height = p.z + 3.5;
  for (int y = std::max(0, p.y - 1); y < std::min(s.length, p.y + fp.fy + 1); ++y) {
    for (int x = std::max(0, p.x - 1); x < std::min(s.width, p.x + fp.fx + 1); ++x) {
      for (int py = y * r; py < (y + 1) * r; ++py) {
        for (int px = x * r; px < (x + 1) * r; ++px) s.at(px, py) = {height, kHandRgb};
      }
    }
  }
}

}  // namespace

DemoLog render_demonstration(const TaskGraph& graph, const WorkspaceState& storage,
                             const WorkspaceState& assembly, const DemoRenderOptions& options) {
  if (graph.direction != Direction::assembly) {
    throw Error(ErrorCode::InvalidArgument, "only assembly graphs can be demonstrated");
  }
  if (storage.dims().width != assembly.dims().width || storage.dims().length != assembly.dims().length) {
    throw Error(ErrorCode::DimensionMismatch, "storage and assembly plates differ in size");
  }
  if (options.stable_frames < 1 || options.transition_frames < 0) {
    throw Error(ErrorCode::InvalidArgument, "frame counts must be positive");
  }
  const int r = options.resolution;
  const int max_height = assembly.dims().height;
  DemoLog log{r, assembly.dims().width, assembly.dims().length, {}};
  std::int64_t t = 0;
  std::uint64_t frame_seed = options.seed;

  auto emit = [&](Snapshot s, Snapshot a) {
    s.timestamp_ms = a.timestamp_ms = t;
    t += options.frame_interval_ms;
    add_pixel_noise(s, options.noise_fraction, max_height, frame_seed++ * 2654435761u);
    add_pixel_noise(a, options.noise_fraction, max_height, frame_seed++ * 2654435761u);
    log.frames.push_back(std::move(s));
    log.frames.push_back(std::move(a));
  };
  auto stable = [&](const WorkspaceState& s, const WorkspaceState& a) {
    const auto rs = render(s, r);
    const auto ra = render(a, r);
    for (int i = 0; i < options.stable_frames; ++i) emit(rs, ra);
  };

  WorkspaceState live_storage = storage;
  WorkspaceState live_assembly = assembly;
  stable(live_storage, live_assembly);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    const auto id = taskgraph::find_brick(live_storage, node.brick_type, node.storage_pose);
    if (!id) {
      throw Error(ErrorCode::StorageMismatch,
                  "node " + std::to_string(i) + ": no " + node.brick_type + " at its storage pose")
          .with_index(i);
    }
    const auto moved = placement_at(node.brick_type, node.assembly_pose, *id);
    live_storage = remove(live_storage, *id);
    auto next_assembly = place(live_assembly, moved);
    for (int f = 0; f < options.transition_frames; ++f) {
      // Hand lifts the brick away, then presses it in while still in view.
      auto hand_view = render(f == 0 ? live_assembly : next_assembly, r);
      draw_hand(hand_view, moved, assembly.catalog());
      emit(render(live_storage, r), std::move(hand_view));
    }
    live_assembly = std::move(next_assembly);
    stable(live_storage, live_assembly);
  }
  return log;
}

}  // namespace brickdemo::perception
