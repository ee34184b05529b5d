#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ttm {

enum class Errc {
  // repository access
  RepoNotFound,
  BranchNotFound,
  EmptyHistory,
  ObjectMissing,
  FileNotAtCommit,
  RangeOutOfBounds,
  // hunk index
  DuplicateOrOverlappingKey,
  UnknownKey,
  StoreUnwritable,
  StoreCorrupt,
  // numerics
  DomainError,
  EmptyInput,
  InsufficientData,
  DegenerateDesign,
  // synthetic histories
  PathNotEmpty,
  GitWriteFailure,
  NonLinearHistory,
  // parsing of exported reports
  ParseError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::RepoNotFound: return "RepoNotFound";
    case Errc::BranchNotFound: return "BranchNotFound";
    case Errc::EmptyHistory: return "EmptyHistory";
    case Errc::ObjectMissing: return "ObjectMissing";
    case Errc::FileNotAtCommit: return "FileNotAtCommit";
    case Errc::RangeOutOfBounds: return "RangeOutOfBounds";
    case Errc::DuplicateOrOverlappingKey: return "DuplicateOrOverlappingKey";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::StoreUnwritable: return "StoreUnwritable";
    case Errc::StoreCorrupt: return "StoreCorrupt";
    case Errc::DomainError: return "DomainError";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::DegenerateDesign: return "DegenerateDesign";
    case Errc::PathNotEmpty: return "PathNotEmpty";
    case Errc::GitWriteFailure: return "GitWriteFailure";
    case Errc::NonLinearHistory: return "NonLinearHistory";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ttm
