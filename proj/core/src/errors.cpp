#include "trendseek/errors.hpp"

namespace trendseek {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::DegenerateViz: return "DegenerateViz";
    case ErrorCode::SegmentTooSmall: return "SegmentTooSmall";
    case ErrorCode::DegenerateX: return "DegenerateX";
    case ErrorCode::EmptySketch: return "EmptySketch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InfeasibleSegmentation: return "InfeasibleSegmentation";
    case ErrorCode::Lex: return "LexError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Semantic: return "SemanticError";
    case ErrorCode::UnknownPattern: return "UnknownPattern";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace trendseek
