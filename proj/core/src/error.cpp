#include "flexkit/error.hpp"

namespace flexkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::NonUniformGrid: return "NonUniformGrid";
    case ErrorCode::NegativeReading: return "NegativeReading";
    case ErrorCode::InvalidReading: return "InvalidReading";
    case ErrorCode::UpsampleRequested: return "UpsampleRequested";
    case ErrorCode::IncompatibleIntervals: return "IncompatibleIntervals";
    case ErrorCode::AllGaps: return "AllGaps";
    case ErrorCode::InvalidNormalization: return "InvalidNormalization";
    case ErrorCode::GappySeries: return "GappySeries";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NoPeaks: return "NoPeaks";
    case ErrorCode::PeriodBelowResolution: return "PeriodBelowResolution";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::UndefinedScore: return "UndefinedScore";
    case ErrorCode::InsufficientCycles: return "InsufficientCycles";
    case ErrorCode::EmptyAfterExclusion: return "EmptyAfterExclusion";
    case ErrorCode::FractionOutOfRange: return "FractionOutOfRange";
    case ErrorCode::InvalidSample: return "InvalidSample";
    case ErrorCode::InsufficientOnTime: return "InsufficientOnTime";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::HorizonZero: return "HorizonZero";
    case ErrorCode::InvalidSetpoints: return "InvalidSetpoints";
    case ErrorCode::ModelFormat: return "ModelFormat";
    case ErrorCode::NoActiveContracts: return "NoActiveContracts";
    case ErrorCode::ForecastGap: return "ForecastGap";
    case ErrorCode::InconsistentSteps: return "InconsistentSteps";
    case ErrorCode::DirectionMismatch: return "DirectionMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::UnknownAsset: return "UnknownAsset";
    case ErrorCode::DuplicateAsset: return "DuplicateAsset";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::DeadlinePassed: return "DeadlinePassed";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::Conflict: return "Conflict";
  }
  return "Unknown";
}

}  // namespace flexkit
