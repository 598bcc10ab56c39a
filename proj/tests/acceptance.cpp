// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <unistd.h>

#include "brickdemo/cli.hpp"
#include "brickdemo/feasibility.hpp"
#include "brickdemo/learner.hpp"
#include "brickdemo/manipulation.hpp"
#include "brickdemo/perception.hpp"
#include "brickdemo/sequencer.hpp"
#include "brickdemo/twin.hpp"
#include "generators.hpp"

using namespace brickdemo;
namespace fs = std::filesystem;

namespace {

const auto kCatalog = default_catalog_ptr();
const manipulation::ToolProfile kTool{};

std::string fixture(const std::string& name) { return (fs::path(BRICKDEMO_FIXTURES) / name).string(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.detail = "took " + std::to_string(secs) + " s, limit " + std::to_string(limit_s) + " s; " + o.detail;
    o.pass = false;
  }
  if (!o.pass) ++failures;
  char timing[32];
  std::snprintf(timing, sizeof(timing), "%.3f s", secs);
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << timing << "] " << o.detail << std::endl;
}

WorkspaceState load(const std::string& name, WorkspaceId ws) {
  return build_state(parse_structure(read_file(fixture(name))), kCatalog, ws);
}

// ---------------------------------------------------------------------------

Outcome fig1d() {
  Outcome o;
  const auto bad = parse_structure(read_file(fixture("fig1d_bad.bricks")));
  const auto vb = feasibility::check_placements(bad.dims, kCatalog, bad.placements);
  o.require(vb.has(ViolationCode::unsupported), "gap structure not flagged UNSUPPORTED");
  bool only_middle = true;
  for (const auto& v : vb.violations) only_middle = only_middle && v.instance_id == 3;
  o.require(only_middle, "violations name bricks other than the middle brick");
  const auto good = parse_structure(read_file(fixture("fig1d_good.bricks")));
  const auto vg = feasibility::check_placements(good.dims, kCatalog, good.placements);
  o.require(vg.ok(), "long-brick variant rejected");
  o.detail += "bad: " + std::to_string(vb.violations.size()) + " violations on brick 3; long-brick variant ok";
  return o;
}

Outcome fig1e() {
  Outcome o;
  const Dims plate{12, 12, 8};
  const auto reach = twin::ReachEnvelope::full(plate, plate);
  const auto storage = load("fig1e_storage.bricks", WorkspaceId::storage);
  const auto last = taskgraph::parse(read_file(fixture("fig1e_middle_last.task")));
  const auto first = taskgraph::parse(read_file(fixture("fig1e_middle_first.task")));

  const auto rl = twin::execute(last, storage, plate, kTool, reach);
  o.require(!rl.operable(), "middle-last graph reported operable");
  o.require(rl.steps.back().operability.has(ViolationCode::no_top_clearance),
            "middle-last final step lacks NO_TOP_CLEARANCE");
  for (std::size_t i = 0; i + 1 < rl.steps.size(); ++i) o.require(rl.steps[i].ok(), "middle-last early step failed");
  o.require(twin::execute(first, storage, plate, kTool, reach).operable(), "middle-first graph inoperable");

  const auto target = load("fig1e_target.bricks", WorkspaceId::assembly);
  const auto order = sequencer::find_order({target, storage, kTool, reach});
  o.require(order.has_value(), "sequencer found no order");
  if (!order) return o;
  std::size_t middle = 0;
  for (std::size_t i = 0; i < order->size(); ++i)
    if (order->nodes[i].brick_type == "1x2_red") middle = i;
  bool before_towers_rise = true;
  for (std::size_t i = 0; i < middle; ++i) before_towers_rise = before_towers_rise && order->nodes[i].assembly_pose.z == 1;
  o.require(before_towers_rise, "sequencer places the middle brick after a tower rises");
  o.require(twin::execute(*order, storage, plate, kTool, reach).operable(), "sequencer order inoperable");
  o.detail += "middle-last fails at step " + std::to_string(rl.steps.size() - 1) +
              " with NO_TOP_CLEARANCE; sequencer places the middle brick as node " + std::to_string(middle) +
              ", before any tower brick above layer 1";
  return o;
}

Outcome demo_roundtrip() {
  Outcome o;
  testgen::Rng rng(2024);
  const Dims dims{16, 16, 8};
  std::size_t scripts = 0, bricks = 0;
  for (; scripts < 120; ++scripts) {
    const auto script = testgen::random_script(rng, kCatalog, dims, 8);
    perception::DemoRenderOptions opt;
    opt.resolution = 4;
    opt.noise_fraction = 0.1;
    opt.seed = rng();
    const auto log = perception::render_demonstration(script.graph, script.storage, script.assembly, opt);
    const auto parsed = perception::parse_demo(perception::serialize_demo(log));
    const auto g = learner::learn(perception::detect_keyframes(parsed.frames, 3, dims.height), kCatalog, dims.height);
    o.require(g == script.graph, "script " + std::to_string(scripts) + " not reproduced");
    bricks += script.graph.size();
  }
  o.detail += std::to_string(scripts) + " scripts, " + std::to_string(bricks) +
              " bricks, r=4, 10% noise: all reproduced field-exactly";
  return o;
}

/// Reachable states of the restricted build space, deduplicated by brick set.
/// Bricks: 2x2 and 2x4 (both orientations) on the even-stud lattice of an
/// 8x8 plate. Each operable placement rests on the surface under it, so
/// (state, last brick) pairs cover every step of every operable graph.
Outcome reversal() {
  Outcome o;
  const Dims dims{8, 8, 5};
  std::vector<BrickPlacement> lattice;
  for (int x = 0; x < 8; x += 2)
    for (int y = 0; y < 8; y += 2) {
      lattice.push_back({0, "2x2_red", x, y, 0, Rotation::r0});
      if (y + 4 <= 8) lattice.push_back({0, "2x4_blue", x, y, 0, Rotation::r0});
      if (x + 4 <= 8) lattice.push_back({0, "2x4_green", x, y, 0, Rotation::r90});
    }

  auto key_of = [](const WorkspaceState& s) {
    std::vector<std::tuple<std::string, int, int, int, int>> k;
    for (const auto& [id, p] : s.placements()) k.emplace_back(p.type_id, p.x, p.y, p.z, degrees(p.rot));
    std::sort(k.begin(), k.end());
    std::string out;
    for (const auto& [t, x, y, z, r] : k)
      out += t + ":" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) + "," + std::to_string(r) + ";";
    return out;
  };

  // Frontier states are kept as placement lists; the last layer is checked
  // but never stored. A deduplicated parent plus the added brick determines
  // the child, so no transition is visited twice.
  std::vector<std::vector<BrickPlacement>> frontier{{}};
  std::unordered_set<std::string> seen;
  std::size_t states = 1, transitions = 0, structural_failures = 0, twist_failures = 0;
  std::string twist_example;
  for (int size = 0; size < 5; ++size) {
    std::vector<std::vector<BrickPlacement>> next;
    for (const auto& build : frontier) {
      const auto s = testgen::state_of(WorkspaceId::assembly, dims, kCatalog, build);
      for (auto p : lattice) {
        p.instance_id = static_cast<InstanceId>(size) + 1;
        p.z = testgen::top_over(s, p) + 1;
        if (p.z > dims.height) continue;
        if (!feasibility::check_step(s, p).ok() || !manipulation::assembly_operable(s, p, kTool).ok()) continue;
        const auto after = place(s, p);
        ++transitions;
        // Reverse step: take p back off `after`.
        if (!manipulation::structurally_removable(after, p.instance_id).ok()) ++structural_failures;
        const auto full = manipulation::removable(after, p.instance_id, kTool);
        if (full.has(ViolationCode::no_side_access) || full.has(ViolationCode::no_top_clearance)) {
          if (twist_failures++ == 0) twist_example = key_of(after) + " removing " + p.type_id;
        }
        if (size + 1 == 5) continue;
        if (seen.insert(key_of(after)).second) {
          auto child = build;
          child.push_back(p);
          next.push_back(std::move(child));
        }
      }
    }
    states += next.size();
    frontier = std::move(next);
  }
  o.require(structural_failures == 0, std::to_string(structural_failures) + " reverse steps fail structural removability");
  o.detail += std::to_string(states) + " distinct builds of up to 4 bricks expanded, " + std::to_string(transitions) +
              " operable steps up to 5 bricks checked; structural removability holds on every reverse step; twist-clearance failures: " +
              std::to_string(twist_failures);
  if (twist_failures) o.detail += " (e.g. " + twist_example + ")";
  return o;
}

Outcome oracle() {
  Outcome o;
  testgen::Rng rng(99);
  const Dims target_dims{8, 8, 5};
  const Dims storage_dims{16, 16, 5};
  int solvable = 0, unsolvable = 0, targets = 0;
  while (targets < 200) {
    testgen::BuildOptions opt;
    opt.canonical = true;
    const auto n = static_cast<std::size_t>(testgen::uniform(rng, 1, 5));
    const auto build = testgen::random_build(rng, kCatalog, target_dims, n, opt);
    if (build.empty()) continue;
    const auto target = testgen::state_of(WorkspaceId::assembly, target_dims, kCatalog, build);
    std::vector<std::string> types;
    for (const auto& p : sequencer::ordered_targets(target)) types.push_back(p.type_id);
    sequencer::SequencingProblem problem{target, pack_storage(types, storage_dims, kCatalog), kTool,
                                         twin::ReachEnvelope::full(storage_dims, target_dims)};
    // Vary the robot so that some targets have no order.
    switch (targets % 4) {
      case 1:
        problem.reach.assembly = {{0, 0, 6, 8}};
        break;
      case 2:
        problem.tool.margin = 2;
        break;
      case 3:
        problem.reach.max_reach_height = problem.tool.length + testgen::uniform(rng, 1, 3);
        break;
      default:
        break;
    }
    ++targets;
    const auto all = sequencer::exhaustive_orders(problem);
    const auto found = sequencer::find_order(problem);
    o.require(found.has_value() == !all.empty(), "disagreement on target " + std::to_string(targets));
    if (found) {
      ++solvable;
      const auto report = twin::execute(*found, problem.storage,
                                        WorkspaceState(WorkspaceId::assembly, target_dims, kCatalog), problem.tool,
                                        problem.reach);
      o.require(report.operable(), "returned order inoperable on target " + std::to_string(targets));
    } else {
      ++unsolvable;
    }
  }
  o.detail += std::to_string(targets) + " targets (" + std::to_string(solvable) + " solvable, " +
              std::to_string(unsolvable) + " without an order): search and enumeration agree on all";
  return o;
}

Outcome twin_roundtrip() {
  Outcome o;
  testgen::Rng rng(7);
  const Dims dims{16, 16, 8};
  const auto reach = twin::ReachEnvelope::full(dims, dims);
  int graphs = 0, full_trips = 0, return_blocked = 0;
  auto inventory = [](const WorkspaceState& a, const WorkspaceState& b) {
    auto m = brick_multiset(a);
    const auto n = brick_multiset(b);
    m.insert(m.end(), n.begin(), n.end());
    std::sort(m.begin(), m.end());
    return m;
  };
  while (full_trips < 120) {
    const auto script = testgen::random_script(rng, kCatalog, dims, 8, true);
    ++graphs;
    const auto initial = inventory(script.storage, script.assembly);
    twin::TwinSession fwd(script.graph, script.storage, script.assembly, kTool, reach);
    while (!fwd.finished()) {
      fwd.step();
      o.require(inventory(fwd.storage(), fwd.assembly()) == initial, "multiset changed on the assembly leg");
    }
    o.require(fwd.report().operable(), "generated graph inoperable");
    twin::TwinSession back(taskgraph::reverse(script.graph), fwd.storage(), fwd.assembly(), kTool, reach);
    while (!back.finished()) {
      back.step();
      o.require(inventory(back.storage(), back.assembly()) == initial, "multiset changed on the return leg");
    }
    const auto rt = twin::verify_roundtrip(script.graph, script.storage, script.assembly, kTool, reach);
    o.require(rt.assembly == fwd.report() && rt.disassembly == back.report(), "verify_roundtrip disagrees with stepping");
    if (!rt.disassembly.operable()) {
      ++return_blocked;
      continue;
    }
    ++full_trips;
    o.require(rt.final_assembly.empty(), "assembly plate not empty after round trip");
    o.require(rt.final_storage == script.storage, "storage differs from the initial layout");
  }
  o.detail += std::to_string(graphs) + " operable graphs, multiset conserved at every step; " +
              std::to_string(full_trips) + " full round trips restore storage exactly; " +
              std::to_string(return_blocked) + " return legs blocked by tool clearance (reported)";
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("brickdemo_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::string> plate{"--plate", "12", "12", "8"};
  auto cli = [&](std::vector<std::string> args, const std::string& out) {
    args.insert(args.begin(), plate.begin(), plate.end());
    args.insert(args.begin(), {"-o", (dir / out).string()});
    std::ostringstream sink, err;
    cli::run(args, sink, err);
    return read_file((dir / out).string());
  };
  const auto demo = (dir / "demo.log").string();
  cli({"render", fixture("fig1e_middle_first.task"), "--noise", "0.1", "--seed", "3"}, "demo.log");
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"verify", {"verify", fixture("fig1d_bad.bricks")}},
      {"learn", {"learn", demo}},
      {"plan", {"plan", fixture("fig1e_target.bricks")}},
      {"replay", {"replay", fixture("fig1e_middle_last.task"), "--roundtrip"}},
  };
  for (const auto& [name, args] : commands) {
    const auto a = cli(args, name + ".1");
    const auto b = cli(args, name + ".2");
    const auto c = cli(args, name + ".3");
    o.require(!a.empty(), name + " produced no output");
    o.require(a == b && b == c, name + " output differs between runs");
  }
  fs::remove_all(dir);
  o.detail += "verify, learn, plan, replay: three runs each, byte-identical outputs";
  return o;
}

}  // namespace

int main() {
  criterion("fig1d_support_fixture", 1.0, fig1d);
  criterion("fig1e_tool_clearance_fixture", 1.0, fig1e);
  criterion("demonstration_round_trip", 60.0, demo_roundtrip);
  criterion("reversal_property", 300.0, reversal);
  criterion("oracle_equivalence", 300.0, oracle);
  criterion("twin_round_trip", 0.0, twin_roundtrip);
  criterion("determinism", 0.0, determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
