#include "brickdemo/core.hpp"

namespace brickdemo {

std::string_view to_string(WorkspaceId id) {
  return id == WorkspaceId::storage ? "storage" : "assembly";
}

std::optional<WorkspaceId> parse_workspace_id(std::string_view text) {
  if (text == "storage") return WorkspaceId::storage;
  if (text == "assembly") return WorkspaceId::assembly;
  return std::nullopt;
}

std::optional<Rotation> rotation_from_degrees(int deg) {
  switch (deg) {
    case 0: return Rotation::r0;
    case 90: return Rotation::r90;
    case 180: return Rotation::r180;
    case 270: return Rotation::r270;
    default: return std::nullopt;
  }
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::CellOccupied: return "CellOccupied";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::DuplicateType: return "DuplicateType";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::MalformedStream: return "MalformedStream";
    case ErrorCode::NoChange: return "NoChange";
    case ErrorCode::MultiBrickChange: return "MultiBrickChange";
    case ErrorCode::UnknownFootprint: return "UnknownFootprint";
    case ErrorCode::InconsistentColor: return "InconsistentColor";
    case ErrorCode::InitialAssemblyNotEmpty: return "InitialAssemblyNotEmpty";
    case ErrorCode::InvalidSide: return "InvalidSide";
    case ErrorCode::StorageMismatch: return "StorageMismatch";
    case ErrorCode::EndOfGraph: return "EndOfGraph";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::InvalidLayout: return "InvalidLayout";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::ModeConflict: return "ModeConflict";
  }
  return "Unknown";
}

}  // namespace brickdemo
