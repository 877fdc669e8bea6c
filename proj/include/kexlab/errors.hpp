#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kexlab {

enum class Errc {
  BothDeltasNonzero,
  BothDeltasZero,
  ZeroCurrentDelta,
  NegativeResistance,
  ValueNotInPalette,
  CrossCheckFailed,
  IncompleteRound,
  PhaseMismatch,
  OutOfRange,
  RoundPhaseMismatch,
  InvalidArgument,
  ConfigInvalid,
  FormatError,
  FrameError,
  TransportError,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Transcript / record parse failure at a given zero-based record index
// (the header is record 0).
class FormatError : public Error {
 public:
  FormatError(std::size_t record_index, const std::string& what)
      : Error(Errc::FormatError, "record " + std::to_string(record_index) + ": " + what),
        record_index_(record_index) {}

  std::size_t record_index() const noexcept { return record_index_; }

 private:
  std::size_t record_index_;
};

struct FieldDiagnostic {
  std::string field;
  std::string message;
};

class ConfigInvalid : public Error {
 public:
  explicit ConfigInvalid(std::vector<FieldDiagnostic> diagnostics)
      : Error(Errc::ConfigInvalid, summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<FieldDiagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<FieldDiagnostic>& d) {
    std::string out;
    for (const auto& item : d) {
      if (!out.empty()) out += "; ";
      out += item.field + ": " + item.message;
    }
    return out;
  }

  std::vector<FieldDiagnostic> diagnostics_;
};

}  // namespace kexlab
