#include "brickdemo/sequencer.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "brickdemo/feasibility.hpp"

namespace brickdemo::sequencer {

namespace {

bool zxy_less(const BrickPlacement& a, const BrickPlacement& b) {
  return std::tie(a.z, a.x, a.y, a.instance_id) < std::tie(b.z, b.x, b.y, b.instance_id);
}

/// Earliest storage brick of the given type, by (z, x, y).
std::optional<BrickPlacement> earliest_free(const WorkspaceState& storage, const std::string& type_id) {
  std::optional<BrickPlacement> best;
  for (const auto& [id, p] : storage.placements()) {
    if (p.type_id != type_id) continue;
    if (!best || zxy_less(p, *best)) best = p;
  }
  return best;
}

TaskNode make_node(std::size_t index, const BrickPlacement& from, const BrickPlacement& to) {
  return {index, to.type_id, pose_of(from), pose_of(to)};
}

class Search {
 public:
  Search(const SequencingProblem& problem, SearchLimits limits)
      : problem_(problem), limits_(limits), targets_(ordered_targets(problem.target)) {}

  std::optional<TaskGraph> run() {
    WorkspaceState assembly(WorkspaceId::assembly, problem_.target.dims(), problem_.target.catalog_ptr());
    TaskGraph graph;
    if (dfs(0, assembly, problem_.storage, graph)) return graph;
    return std::nullopt;
  }

 private:
  bool dfs(std::uint64_t placed, const WorkspaceState& assembly, const WorkspaceState& storage, TaskGraph& graph) {
    if (graph.size() == targets_.size()) return true;
    if (dead_.contains(placed)) return false;
    for (std::size_t i = 0; i < targets_.size(); ++i) {
      if (placed & (1ull << i)) continue;
      if (++expanded_ > limits_.node_budget) {
        throw Error(ErrorCode::BudgetExceeded,
                    "search budget of " + std::to_string(limits_.node_budget) + " exhausted");
      }
      const auto& goal = targets_[i];
      const auto source = earliest_free(storage, goal.type_id);
      if (!source) continue;
      // The moved brick keeps its storage identity, as in the twin.
      BrickPlacement moved = goal;
      moved.instance_id = source->instance_id;
      if (!feasibility::check_step(assembly, moved).ok()) continue;
      if (!manipulation::assembly_operable(assembly, moved, problem_.tool).ok()) continue;
      if (!manipulation::removable(storage, source->instance_id, problem_.tool).ok()) continue;
      if (!twin::check_reach(storage, *source, problem_.reach, problem_.tool).ok()) continue;
      if (!twin::check_reach(assembly, moved, problem_.reach, problem_.tool).ok()) continue;

      graph.nodes.push_back(make_node(graph.size(), *source, moved));
      if (dfs(placed | (1ull << i), place(assembly, moved), remove(storage, source->instance_id), graph)) {
        return true;
      }
      graph.nodes.pop_back();
    }
    dead_.insert(placed);
    return false;
  }

  const SequencingProblem& problem_;
  SearchLimits limits_;
  std::vector<BrickPlacement> targets_;
  std::unordered_set<std::uint64_t> dead_;
  std::size_t expanded_ = 0;
};

}  // namespace

std::vector<BrickPlacement> ordered_targets(const WorkspaceState& target) {
  std::vector<BrickPlacement> out;
  out.reserve(target.size());
  for (const auto& [id, p] : target.placements()) out.push_back(p);
  std::sort(out.begin(), out.end(), zxy_less);
  return out;
}

std::optional<TaskGraph> find_order(const SequencingProblem& problem, SearchLimits limits) {
  const std::size_t cap = std::min<std::size_t>(limits.max_bricks, 64);
  if (problem.target.size() > cap) {
    throw Error(ErrorCode::TooLarge, "target has " + std::to_string(problem.target.size()) +
                                         " bricks, limit is " + std::to_string(cap));
  }
  if (auto verdict = feasibility::check_structure(problem.target); !verdict.ok()) {
    throw Error(ErrorCode::InfeasibleTarget, "target structure is infeasible: " + verdict.violations.front().detail);
  }
  problem.tool.validate();
  return Search(problem, limits).run();
}

std::vector<TaskGraph> exhaustive_orders(const SequencingProblem& problem) {
  const auto targets = ordered_targets(problem.target);
  if (targets.size() > 6) {
    throw Error(ErrorCode::TooLarge, "exhaustive enumeration is limited to 6 bricks");
  }
  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  const WorkspaceState empty_assembly(WorkspaceId::assembly, problem.target.dims(), problem.target.catalog_ptr());

  std::vector<TaskGraph> valid;
  do {
    TaskGraph graph;
    WorkspaceState storage = problem.storage;
    bool complete = true;
    for (std::size_t k : order) {
      const auto source = earliest_free(storage, targets[k].type_id);
      if (!source) {
        complete = false;
        break;
      }
      graph.nodes.push_back(make_node(graph.size(), *source, targets[k]));
      storage = remove(storage, source->instance_id);
    }
    if (!complete) continue;
    if (twin::execute(graph, problem.storage, empty_assembly, problem.tool, problem.reach).operable()) {
      valid.push_back(std::move(graph));
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return valid;
}

}  // namespace brickdemo::sequencer
