#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "trendseek/algebra.hpp"
#include "trendseek/errors.hpp"

namespace trendseek {

enum class TokenKind {
  LBracket,
  RBracket,
  LParen,
  RParen,
  OpConcat,
  OpAnd,
  OpOr,
  OpNot,
  Ident,
  Number,
  Comma,
  Colon,
  Equals,
  Dot,
  DotPlus,
  Dollar,
  BraceQuant,
  Compare,
  End,
};

std::string_view to_string(TokenKind kind) noexcept;

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  Span span;
  double number = 0.0;
};

class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, Span span,
             std::vector<TokenKind> expected = {})
      : Error(code, message), span_(span), expected_(std::move(expected)) {}

  const Span& span() const noexcept { return span_; }
  const std::vector<TokenKind>& expected() const noexcept { return expected_; }

 private:
  Span span_;
  std::vector<TokenKind> expected_;
};

class SemanticError : public Error {
 public:
  explicit SemanticError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Throws ParseError with code Lex on characters outside the alphabet.
std::vector<Token> tokenize(std::string_view text);

/// Parses, validates and normalizes. Throws ParseError or SemanticError.
ShapeQuery parse_shapequery(std::string_view text);

/// Parses without validation or normalization (used by tooling and tests).
ShapeQuery parse_shapequery_raw(std::string_view text);

std::string format_shapequery(const ShapeQuery& ast);

/// Formats a finite double with the shortest representation that round-trips.
std::string format_number(double value);

/// Multi-line message with the query echoed and a caret under the error span.
std::string annotate_error(std::string_view text, const ParseError& error);

}  // namespace trendseek
