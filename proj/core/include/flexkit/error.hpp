#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flexkit {

/// Machine-readable failure codes shared by every module.
///
/// The string form (see `to_string`) is part of the service wire contract:
/// API error bodies carry it verbatim, so renaming an enumerator is a
/// breaking change.
enum class ErrorCode {
  // timeseries
  EmptyInput,
  NonMonotonicTimestamps,
  NonUniformGrid,
  NegativeReading,
  InvalidReading,
  UpsampleRequested,
  IncompatibleIntervals,
  AllGaps,
  InvalidNormalization,
  // spectral
  GappySeries,
  TooShort,
  NoPeaks,
  PeriodBelowResolution,
  // clustering / baselines
  InvalidParameters,
  TooFewPoints,
  UndefinedScore,
  InsufficientCycles,
  EmptyAfterExclusion,
  FractionOutOfRange,
  // hvac
  InvalidSample,
  InsufficientOnTime,
  SingularDesign,
  SingleClassTraining,
  HorizonZero,
  InvalidSetpoints,
  ModelFormat,
  // allocation
  NoActiveContracts,
  ForecastGap,
  InconsistentSteps,
  DirectionMismatch,
  GridMismatch,
  // storage
  UnknownAsset,
  DuplicateAsset,
  DuplicateTimestamp,
  MalformedRow,
  NotFound,
  StorageFailure,
  // service
  InvalidTransition,
  DeadlinePassed,
  BadRequest,
  Unauthorized,
  Conflict,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace flexkit
