#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "brickdemo/manipulation.hpp"
#include "brickdemo/taskgraph.hpp"
#include "brickdemo/twin.hpp"
#include "brickdemo/world.hpp"

namespace brickdemo::sequencer {

struct SequencingProblem {
  WorkspaceState target;   ///< assembly goal
  WorkspaceState storage;  ///< bricks available to build it
  manipulation::ToolProfile tool;
  twin::ReachEnvelope reach;
};

struct SearchLimits {
  std::size_t node_budget = 1'000'000;  ///< candidate evaluations before BudgetExceeded
  std::size_t max_bricks = 12;
};

/// Depth-first search over placement orders. Candidates are tried in
/// (z, x, y) order; each step must pass the same feasibility, tool
/// clearance and reach checks the twin applies, so a returned graph
/// executes operably. Bricks of one type are interchangeable: each step
/// takes the earliest free storage brick of that type in (z, x, y) order.
/// Subsets already shown to be dead ends are remembered.
///
/// Returns nullopt when no order exists. Errors: InfeasibleTarget when the
/// target fails check_structure; TooLarge above limits.max_bricks;
/// BudgetExceeded.
std::optional<TaskGraph> find_order(const SequencingProblem& problem, SearchLimits limits = {});

/// Every permutation of the target bricks (with the same storage
/// assignment rule) whose twin execution is fully operable, in
/// lexicographic permutation order. Throws TooLarge above 6 bricks.
std::vector<TaskGraph> exhaustive_orders(const SequencingProblem& problem);

/// Target bricks sorted by (z, x, y).
std::vector<BrickPlacement> ordered_targets(const WorkspaceState& target);

}  // namespace brickdemo::sequencer
