#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trendseek {

enum class ErrorCode {
  Io,
  Schema,
  EmptyDataset,
  UnknownColumn,
  DegenerateViz,
  SegmentTooSmall,
  DegenerateX,
  EmptySketch,
  TooLarge,
  InfeasibleSegmentation,
  Lex,
  Parse,
  Semantic,
  UnknownPattern,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base for every error raised by the library. The code is stable and is what
/// the service and CLI map to HTTP statuses and exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trendseek
