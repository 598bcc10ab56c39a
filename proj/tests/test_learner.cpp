#include <doctest.h>

#include "brickdemo/learner.hpp"
#include "generators.hpp"

using namespace brickdemo;
using namespace brickdemo::learner;
using perception::Keyframe;
using perception::observe;

namespace {

const auto kCatalog = default_catalog_ptr();
const Dims kDims{16, 16, 8};

Keyframe keyframe(const WorkspaceState& storage, const WorkspaceState& assembly, std::int64_t t = 0) {
  return {0, t, observe(storage), observe(assembly)};
}

WorkspaceState empty(WorkspaceId ws) { return WorkspaceState(ws, kDims, kCatalog); }

ErrorCode diff_error(const Keyframe& a, const Keyframe& b, const Catalog& catalog = *kCatalog) {
  try {
    diff_keyframes(a.storage, a.assembly, b.storage, b.assembly, catalog);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("diff accepted");
  return ErrorCode::InvalidArgument;
}

void paint(GridObservation& obs, int x0, int y0, int fx, int fy, int z, Color color) {
  for (int y = y0; y < y0 + fy; ++y)
    for (int x = x0; x < x0 + fx; ++x) obs.cells[static_cast<std::size_t>(y) * obs.width + x] = {z, color};
}

}  // namespace

TEST_CASE("single move diff") {
  const auto s0 = place(empty(WorkspaceId::storage), {1, "2x4_red", 0, 0, 1, Rotation::r0});
  const auto a0 = empty(WorkspaceId::assembly);
  const auto s1 = remove(s0, 1);
  const auto a1 = place(a0, {1, "2x4_red", 10, 10, 1, Rotation::r0});
  const auto d = diff_keyframes(observe(s0), observe(a0), observe(s1), observe(a1), *kCatalog);
  CHECK(d.inferred_type == "2x4_red");
  CHECK(d.storage_pose == Pose{0, 0, 1, Rotation::r0});
  CHECK(d.assembly_pose == Pose{10, 10, 1, Rotation::r0});
  CHECK(d.removed_region.size() == 8);
  CHECK(d.added_region.size() == 8);
  CHECK(d.removed_region.front() == Cell{0, 0, 1});
  CHECK(d.added_region.back() == Cell{11, 13, 1});

  // Rotated landing, and square bricks record 0 whatever the placement said.
  const auto a2 = place(a0, {1, "2x4_red", 3, 3, 1, Rotation::r270});
  CHECK(diff_keyframes(observe(s0), observe(a0), observe(s1), observe(a2), *kCatalog).assembly_pose.rot ==
        Rotation::r90);
  const auto sq = place(empty(WorkspaceId::storage), {1, "2x2_blue", 0, 0, 1, Rotation::r90});
  const auto sq_to = place(a0, {1, "2x2_blue", 5, 5, 1, Rotation::r270});
  const auto e = diff_keyframes(observe(sq), observe(a0), observe(remove(sq, 1)), observe(sq_to), *kCatalog);
  CHECK(e.storage_pose.rot == Rotation::r0);
  CHECK(e.assembly_pose.rot == Rotation::r0);

  // Stacked landing: layer is one above the highest cell below.
  const auto base = place(a0, {7, "1x2_blue", 10, 10, 1, Rotation::r0});
  const auto top = place(base, {1, "2x4_red", 10, 10, 2, Rotation::r0});
  CHECK(diff_keyframes(observe(s0), observe(base), observe(s1), observe(top), *kCatalog).assembly_pose.z == 2);
}

TEST_CASE("diff errors") {
  const auto s0 = place(place(empty(WorkspaceId::storage), {1, "2x4_red", 0, 0, 1, Rotation::r0}),
                        {2, "1x2_blue", 5, 0, 1, Rotation::r0});
  const auto a0 = empty(WorkspaceId::assembly);
  const auto k0 = keyframe(s0, a0);

  CHECK(diff_error(k0, k0) == ErrorCode::NoChange);

  // Two bricks moved at once.
  const auto both = keyframe(remove(remove(s0, 1), 2), place(place(a0, {1, "2x4_red", 8, 8, 1, Rotation::r0}),
                                                             {2, "1x2_blue", 0, 0, 1, Rotation::r0}));
  CHECK(diff_error(k0, both) == ErrorCode::MultiBrickChange);

  // Brick appears without leaving storage.
  CHECK(diff_error(k0, keyframe(s0, place(a0, {1, "2x4_red", 8, 8, 1, Rotation::r0}))) ==
        ErrorCode::MultiBrickChange);

  // Color changes in flight.
  CHECK(diff_error(k0, keyframe(remove(s0, 1), place(a0, {1, "2x4_green", 8, 8, 1, Rotation::r0}))) ==
        ErrorCode::InconsistentColor);

  // A 3x3 region has no catalog type.
  auto odd_s = observe(empty(WorkspaceId::storage));
  auto odd_a = observe(a0);
  paint(odd_s, 0, 0, 3, 3, 1, Color::red);
  const Keyframe before{0, 0, odd_s, odd_a};
  paint(odd_a, 4, 4, 3, 3, 1, Color::red);
  const Keyframe after{0, 0, observe(empty(WorkspaceId::storage)), odd_a};
  CHECK(diff_error(before, after) == ErrorCode::UnknownFootprint);

  // Two catalog types share the footprint and color.
  Catalog twins(std::vector<BrickType>{{"2x4_red", 2, 4, Color::red}, {"2x4_red_tile", 2, 4, Color::red}});
  CHECK(diff_error(k0, keyframe(remove(s0, 1), place(a0, {1, "2x4_red", 8, 8, 1, Rotation::r0})), twins) ==
        ErrorCode::UnknownFootprint);

  // Floating brick on the assembly plate.
  auto floating = observe(a0);
  paint(floating, 8, 8, 2, 4, 2, Color::red);
  CHECK(diff_error(k0, Keyframe{0, 0, observe(remove(s0, 1)), floating}) == ErrorCode::MultiBrickChange);

  // L-shaped removal.
  auto ell = observe(s0);
  paint(ell, 0, 0, 2, 4, 0, Color::red);
  for (auto& c : ell.cells)
    if (c.top_height == 0) c.top_color.reset();
  ell.cells[static_cast<std::size_t>(0) * ell.width + 0] = {1, Color::red};
  auto landed = observe(place(a0, {1, "2x4_red", 8, 8, 1, Rotation::r0}));
  CHECK(diff_error(k0, Keyframe{0, 0, ell, landed}) == ErrorCode::MultiBrickChange);

  // Mismatched plates.
  const WorkspaceState small(WorkspaceId::assembly, {8, 8, 8}, kCatalog);
  CHECK(diff_error(k0, keyframe(remove(s0, 1), small)) == ErrorCode::DimensionMismatch);
}

TEST_CASE("learner folds keyframes into a graph") {
  auto storage = place(place(empty(WorkspaceId::storage), {1, "2x4_red", 0, 0, 1, Rotation::r0}),
                       {2, "2x2_blue", 4, 0, 1, Rotation::r0});
  storage = place(storage, {3, "1x4_yellow", 8, 0, 1, Rotation::r90});
  storage = place(storage, {4, "2x4_green", 0, 6, 1, Rotation::r0});
  auto assembly = empty(WorkspaceId::assembly);
  std::vector<Keyframe> kfs{keyframe(storage, assembly)};

  const std::vector<std::pair<InstanceId, Pose>> moves{
      {1, {6, 6, 1}}, {2, {6, 7, 2}}, {3, {5, 8, 3, Rotation::r90}}, {4, {6, 6, 4}}};
  for (const auto& [id, pose] : moves) {
    const auto p = storage.placement(id);
    storage = remove(storage, id);
    assembly = place(assembly, placement_at(p.type_id, pose, id));
    kfs.push_back(keyframe(storage, assembly));
  }
  const auto g = learn(kfs, kCatalog, 8);
  REQUIRE(g.size() == 4);
  CHECK(g.direction == Direction::assembly);
  CHECK(g.nodes[0].brick_type == "2x4_red");
  CHECK(g.nodes[1].assembly_pose == Pose{6, 7, 2});
  CHECK(g.nodes[2].storage_pose == Pose{8, 0, 1, Rotation::r90});
  CHECK(g.nodes[2].assembly_pose == Pose{5, 8, 3, Rotation::r90});
  CHECK(g.nodes[3].assembly_pose == Pose{6, 6, 4});
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.nodes[i].index == i);
  CHECK(taskgraph::validate(g, kCatalog, kDims).ok());

  // The reconstruction remembers the occluded bricks.
  Learner l(kCatalog, 8);
  for (const auto& k : kfs) l.push(k);
  REQUIRE(l.assembly_state());
  CHECK(l.assembly_state()->size() == 4);
  CHECK(l.assembly_state()->placement(2).type_id == "2x2_blue");
  CHECK(l.keyframes_seen() == 5);

  // Repeated keyframes are ignored.
  std::vector<Keyframe> doubled;
  for (const auto& k : kfs) {
    doubled.push_back(k);
    doubled.push_back(k);
  }
  CHECK(learn(doubled, kCatalog, 8) == g);
}

TEST_CASE("learner edge cases") {
  const auto storage = place(empty(WorkspaceId::storage), {1, "2x4_red", 0, 0, 1, Rotation::r0});
  const auto assembly = empty(WorkspaceId::assembly);
  CHECK(learn(std::vector<Keyframe>{keyframe(storage, assembly)}, kCatalog).empty());
  CHECK_THROWS_AS(learn(std::vector<Keyframe>{}, kCatalog), Error);

  const auto busy = place(assembly, {5, "1x2_red", 0, 0, 1, Rotation::r0});
  try {
    learn(std::vector<Keyframe>{keyframe(storage, busy)}, kCatalog);
    FAIL("non-empty start accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InitialAssemblyNotEmpty);
    CHECK(e.index() == std::optional<std::size_t>(0));
  }

  // Errors carry the keyframe index, and a failed push leaves the learner intact.
  const auto s1 = remove(storage, 1);
  const auto a1 = place(assembly, {1, "2x4_red", 4, 4, 1, Rotation::r0});
  const auto bad = keyframe(s1, place(assembly, {1, "2x4_blue", 4, 4, 1, Rotation::r0}));
  Learner l(kCatalog);
  l.push(keyframe(storage, assembly));
  try {
    l.push(bad);
    FAIL("bad keyframe accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentColor);
    CHECK(e.index() == std::optional<std::size_t>(1));
  }
  CHECK(l.graph().empty());
  CHECK(l.push(keyframe(s1, a1)).has_value());
  CHECK(l.graph().size() == 1);
}

TEST_CASE("learned graphs reproduce rendered demonstrations") {
  testgen::Rng rng(41);
  for (int round = 0; round < 60; ++round) {
    const auto script = testgen::random_script(rng, kCatalog, kDims, 6);
    for (double noise : {0.0, 0.1}) {
      perception::DemoRenderOptions opt;
      opt.noise_fraction = noise;
      opt.seed = rng();
      const auto log = perception::render_demonstration(script.graph, script.storage, script.assembly, opt);
      const auto kfs = perception::detect_keyframes(log.frames, 3, kDims.height);
      const auto g = learn(kfs, kCatalog, kDims.height);
      CHECK(g == script.graph);
      CHECK(g.size() == script.build.size());
      CHECK(taskgraph::validate(g, kCatalog, kDims).ok());
    }
  }
}
