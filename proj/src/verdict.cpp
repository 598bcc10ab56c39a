#include "brickdemo/verdict.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace brickdemo {

namespace {

constexpr std::array<std::pair<ViolationCode, std::string_view>, 11> kNames{{
    {ViolationCode::unsupported, "UNSUPPORTED"},
    {ViolationCode::collision, "COLLISION"},
    {ViolationCode::disconnected, "DISCONNECTED"},
    {ViolationCode::out_of_bounds, "OUT_OF_BOUNDS"},
    {ViolationCode::unknown_type, "UNKNOWN_TYPE"},
    {ViolationCode::no_top_clearance, "NO_TOP_CLEARANCE"},
    {ViolationCode::no_side_access, "NO_SIDE_ACCESS"},
    {ViolationCode::brick_on_top, "BRICK_ON_TOP"},
    {ViolationCode::breaks_structure, "BREAKS_STRUCTURE"},
    {ViolationCode::unreachable, "UNREACHABLE"},
    {ViolationCode::missing_brick, "MISSING_BRICK"},
}};

}  // namespace

std::string_view code_name(ViolationCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "UNKNOWN";
}

std::optional<ViolationCode> parse_code_name(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

bool Verdict::has(ViolationCode code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [code](const Violation& v) { return v.code == code; });
}

void Verdict::append(const Verdict& other, std::optional<std::size_t> step) {
  for (auto v : other.violations) {
    if (step) v.step = step;
    violations.push_back(std::move(v));
  }
}

std::string format_verdict(std::string_view label, const Verdict& verdict) {
  std::string out(label);
  out += verdict.ok() ? " ok\n" : " fail\n";
  for (const auto& v : verdict.violations) {
    out += "violation ";
    out += code_name(v.code);
    out += " " + std::to_string(v.instance_id) + " ";
    out += v.step ? std::to_string(*v.step) : std::string("-");
    if (!v.detail.empty()) out += " " + v.detail;
    out += "\n";
  }
  return out;
}

}  // namespace brickdemo
