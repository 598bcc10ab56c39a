#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brickdemo/core.hpp"

namespace brickdemo {

enum class ViolationCode {
  // structural
  unsupported,
  collision,
  disconnected,
  out_of_bounds,
  unknown_type,
  // tool clearance and removability
  no_top_clearance,
  no_side_access,
  brick_on_top,
  breaks_structure,
  // robot reach
  unreachable,
  // twin bookkeeping: the node's brick is not at its source pose
  missing_brick,
};

/// Upper-case wire name, e.g. "NO_TOP_CLEARANCE".
std::string_view code_name(ViolationCode code);
std::optional<ViolationCode> parse_code_name(std::string_view name);

struct Violation {
  ViolationCode code;
  InstanceId instance_id = kNoInstance;
  std::optional<std::size_t> step;  ///< task node index when aggregated over a graph
  std::vector<Cell> cells;          ///< offending / blocking cells, sorted
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// A list of violations; ok exactly when the list is empty.
struct Verdict {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationCode code) const;
  void add(Violation v) { violations.push_back(std::move(v)); }
  void append(const Verdict& other, std::optional<std::size_t> step = std::nullopt);

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

using FeasibilityVerdict = Verdict;
using OperabilityVerdict = Verdict;

/// `feasibility ok|fail` followed by one `violation <CODE> <instance> <step|-> <detail>` per entry.
std::string format_verdict(std::string_view label, const Verdict& verdict);

}  // namespace brickdemo
