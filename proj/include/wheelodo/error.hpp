#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wheelodo {

enum class Errc {
  InvalidCoordinate,
  NonConvergence,
  TooFewFixes,
  TimestampOrder,
  NonFinite,
  WrongSampleCount,
  EmptyInput,
  InsufficientMotion,
  AlignmentGap,
  DriveTooShort,
  EmptyTrainingSet,
  ShapeMismatch,
  LengthMismatch,
  StaleCache,
  EmptyDataset,
  SliceTooLong,
  VariantMismatch,
  ScalerMissing,
  UntrainedModel,
  InvalidScript,
  InvalidConfig,
  SchemaError,
  ExcessJitter,
  MissingFile,
  EmptyPartition,
  Provenance,
  IoError,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidCoordinate: return "InvalidCoordinate";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::TooFewFixes: return "TooFewFixes";
    case Errc::TimestampOrder: return "TimestampOrder";
    case Errc::NonFinite: return "NonFinite";
    case Errc::WrongSampleCount: return "WrongSampleCount";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InsufficientMotion: return "InsufficientMotion";
    case Errc::AlignmentGap: return "AlignmentGap";
    case Errc::DriveTooShort: return "DriveTooShort";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::StaleCache: return "StaleCache";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::SliceTooLong: return "SliceTooLong";
    case Errc::VariantMismatch: return "VariantMismatch";
    case Errc::ScalerMissing: return "ScalerMissing";
    case Errc::UntrainedModel: return "UntrainedModel";
    case Errc::InvalidScript: return "InvalidScript";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::SchemaError: return "SchemaError";
    case Errc::ExcessJitter: return "ExcessJitter";
    case Errc::MissingFile: return "MissingFile";
    case Errc::EmptyPartition: return "EmptyPartition";
    case Errc::Provenance: return "Provenance";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can print a single machine-parsable line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace wheelodo
