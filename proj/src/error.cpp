#include "sofri/error.hpp"

namespace sofri {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonMonotoneGrid: return "NonMonotoneGrid";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::ZeroDelta: return "ZeroDelta";
    case ErrorCode::NonPositiveConcentration: return "NonPositiveConcentration";
    case ErrorCode::InvalidDegreesOfFreedom: return "InvalidDegreesOfFreedom";
    case ErrorCode::NonSpdScale: return "NonSpdScale";
    case ErrorCode::EmptyResiduals: return "EmptyResiduals";
    case ErrorCode::RankDeficientZ: return "RankDeficientZ";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooFewDraws: return "TooFewDraws";
    case ErrorCode::NoAllocationSnapshots: return "NoAllocationSnapshots";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::TooFewReplicates: return "TooFewReplicates";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace sofri
