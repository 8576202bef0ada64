#include "trendseek/parser.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <utility>

namespace trendseek {

std::string_view to_string(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::OpConcat: return "'>>'";
    case TokenKind::OpAnd: return "'&'";
    case TokenKind::OpOr: return "'|'";
    case TokenKind::OpNot: return "'!'";
    case TokenKind::Ident: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::Comma: return "','";
    case TokenKind::Colon: return "':'";
    case TokenKind::Equals: return "'='";
    case TokenKind::Dot: return "'.'";
    case TokenKind::DotPlus: return "'.+'";
    case TokenKind::Dollar: return "position reference";
    case TokenKind::BraceQuant: return "quantifier";
    case TokenKind::Compare: return "comparator";
    case TokenKind::End: return "end of input";
  }
  return "token";
}

namespace {

std::string summarize(const ValidationReport& report) {
  std::string msg = "invalid query";
  for (const auto& issue : report.issues) {
    msg += "; " + issue.code + " at " + issue.path + ": " + issue.message;
  }
  return msg;
}

}  // namespace

SemanticError::SemanticError(ValidationReport report)
    : Error(ErrorCode::Semantic, summarize(report)), report_(std::move(report)) {}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

[[noreturn]] void lex_error(const std::string& message, std::size_t at, std::size_t len = 1) {
  throw ParseError(ErrorCode::Lex, message, Span{at, at + len});
}

std::size_t scan_number(std::string_view text, std::size_t i) {
  const std::size_t n = text.size();
  if (i < n && text[i] == '-') ++i;
  while (i < n && is_digit(text[i])) ++i;
  if (i + 1 < n && text[i] == '.' && is_digit(text[i + 1])) {
    ++i;
    while (i < n && is_digit(text[i])) ++i;
  }
  if (i < n && (text[i] == 'e' || text[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
    if (j < n && is_digit(text[j])) {
      while (j < n && is_digit(text[j])) ++j;
      i = j;
    }
  }
  return i;
}

bool after_modifier_equals(const std::vector<Token>& out) {
  const std::size_t n = out.size();
  return n >= 2 && out[n - 1].kind == TokenKind::Equals && out[n - 2].kind == TokenKind::Ident &&
         out[n - 2].text == "m";
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    Token t;
    t.kind = kind;
    t.text = std::string(text.substr(begin, end - begin));
    t.span = {begin, end};
    out.push_back(std::move(t));
  };
  while (i < n) {
    const char c = text[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    switch (c) {
      case '[': push(TokenKind::LBracket, i, i + 1); ++i; continue;
      case ']': push(TokenKind::RBracket, i, i + 1); ++i; continue;
      case '(': push(TokenKind::LParen, i, i + 1); ++i; continue;
      case ')': push(TokenKind::RParen, i, i + 1); ++i; continue;
      case ',': push(TokenKind::Comma, i, i + 1); ++i; continue;
      case ':': push(TokenKind::Colon, i, i + 1); ++i; continue;
      case '=': push(TokenKind::Equals, i, i + 1); ++i; continue;
      case '&': push(TokenKind::OpAnd, i, i + 1); ++i; continue;
      case '|': push(TokenKind::OpOr, i, i + 1); ++i; continue;
      case '!': push(TokenKind::OpNot, i, i + 1); ++i; continue;
      case ';': push(TokenKind::OpConcat, i, i + 1); ++i; continue;
      default: break;
    }
    if (c == '>') {
      if (i + 1 < n && text[i + 1] == '>') {
        push(TokenKind::OpConcat, i, i + 2);
        i += 2;
      } else {
        push(TokenKind::Compare, i, i + 1);
        ++i;
      }
      continue;
    }
    if (c == '<') {
      const std::size_t len = (i + 1 < n && text[i + 1] == '<') ? 2 : 1;
      push(TokenKind::Compare, i, i + len);
      i += len;
      continue;
    }
    if (c == '.') {
      if (i + 1 < n && text[i + 1] == '+') {
        push(TokenKind::DotPlus, i, i + 2);
        i += 2;
      } else {
        push(TokenKind::Dot, i, i + 1);
        ++i;
      }
      continue;
    }
    if (c == '$') {
      if (i + 1 < n && (text[i + 1] == '-' || text[i + 1] == '+')) {
        push(TokenKind::Dollar, i, i + 2);
        i += 2;
        continue;
      }
      std::size_t j = i + 1;
      while (j < n && is_digit(text[j])) ++j;
      if (j == i + 1) lex_error("'$' must be followed by an index, '-' or '+'", i);
      push(TokenKind::Dollar, i, j);
      i = j;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < n && (is_digit(text[j]) || text[j] == ',' || text[j] == ' ')) ++j;
      if (j >= n || text[j] != '}') lex_error("unterminated quantifier", i, j - i);
      push(TokenKind::BraceQuant, i, j + 1);
      i = j + 1;
      continue;
    }
    if (c == '?' || c == '*' || c == '+') {
      if (!after_modifier_equals(out)) {
        lex_error(std::string("'") + c + "' is only allowed directly after 'm='", i);
      }
      push(TokenKind::BraceQuant, i, i + 1);
      ++i;
      continue;
    }
    if (is_digit(c) || (c == '-' && i + 1 < n && is_digit(text[i + 1]))) {
      const std::size_t j = scan_number(text, i);
      Token t;
      t.kind = TokenKind::Number;
      t.text = std::string(text.substr(i, j - i));
      t.span = {i, j};
      t.number = std::strtod(t.text.c_str(), nullptr);
      if (!std::isfinite(t.number)) lex_error("number out of range", i, j - i);
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < n && is_ident_char(text[j])) ++j;
      push(TokenKind::Ident, i, j);
      i = j;
      continue;
    }
    lex_error("unexpected character", i);
  }
  Token end;
  end.kind = TokenKind::End;
  end.span = {n, n};
  out.push_back(std::move(end));
  return out;
}

namespace {

struct Parsed {
  ShapeQuery ast;
  std::size_t depth = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ShapeQuery parse_all() {
    Parsed q = parse_query(0);
    expect_kind(TokenKind::End, {TokenKind::OpConcat, TokenKind::OpAnd, TokenKind::OpOr,
                                 TokenKind::End});
    return std::move(q.ast);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& peek2() const { return toks_[std::min(pos_ + 1, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }
  bool accept(TokenKind k) {
    if (peek().kind == k) {
      next();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message, std::vector<TokenKind> expected) const {
    const Token& t = peek();
    Span span = t.span;
    if (span.end == span.begin && span.begin > 0 && t.kind == TokenKind::End) {
      // Point at the last character so the caret stays within the input.
      span = {span.begin - 1, span.begin};
    }
    throw ParseError(ErrorCode::Parse, message, span, std::move(expected));
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& message) const {
    throw ParseError(ErrorCode::Parse, message, t.span);
  }

  const Token& expect_kind(TokenKind k, std::vector<TokenKind> expected = {}) {
    if (peek().kind != k) {
      if (expected.empty()) expected.push_back(k);
      std::string msg = "expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += i + 1 == expected.size() ? " or " : ", ";
        msg += to_string(expected[i]);
      }
      msg += ", found ";
      msg += to_string(peek().kind);
      fail(msg, std::move(expected));
    }
    return next();
  }

  void check_depth(std::size_t d, const Token& at) const {
    if (d > kMaxQueryDepth) {
      fail_at(at, "query nests deeper than " + std::to_string(kMaxQueryDepth) + " levels");
    }
  }

  static std::optional<NodeKind> binary_kind(TokenKind k) {
    switch (k) {
      case TokenKind::OpConcat: return NodeKind::Concat;
      case TokenKind::OpAnd: return NodeKind::And;
      case TokenKind::OpOr: return NodeKind::Or;
      default: return std::nullopt;
    }
  }

  Parsed parse_query(std::size_t nesting) {
    Parsed left = parse_unary(nesting);
    while (auto kind = binary_kind(peek().kind)) {
      const Token& op = next();
      Parsed right = parse_unary(nesting);
      if (left.ast.kind == *kind) {
        left.ast.children.push_back(std::move(right.ast));
        left.depth = std::max(left.depth, right.depth + 1);
      } else {
        std::vector<ShapeQuery> kids;
        kids.push_back(std::move(left.ast));
        kids.push_back(std::move(right.ast));
        ShapeQuery node;
        node.kind = *kind;
        node.children = std::move(kids);
        left.depth = std::max(left.depth, right.depth) + 1;
        left.ast = std::move(node);
      }
      check_depth(left.depth, op);
    }
    return left;
  }

  Parsed parse_unary(std::size_t nesting) {
    if (peek().kind == TokenKind::OpNot) {
      const Token& bang = next();
      check_depth(nesting + 1, bang);
      Parsed inner = parse_unary(nesting + 1);
      inner.ast = ShapeQuery::negate(std::move(inner.ast));
      ++inner.depth;
      check_depth(inner.depth, bang);
      return inner;
    }
    return parse_primary(nesting);
  }

  Parsed parse_primary(std::size_t nesting) {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::LParen: {
        next();
        check_depth(nesting + 1, t);
        Parsed q = parse_query(nesting + 1);
        expect_kind(TokenKind::RParen, {TokenKind::RParen, TokenKind::OpConcat, TokenKind::OpAnd,
                                        TokenKind::OpOr});
        return q;
      }
      case TokenKind::LBracket:
        return parse_segment(nesting);
      case TokenKind::Ident: {
        auto p = sugar(t.text);
        if (!p) fail_at(t, "unknown pattern '" + t.text + "'; use u, d, f, any, empty or [p=...]");
        next();
        return {ShapeQuery::seg(*p), 1};
      }
      case TokenKind::Number: {
        next();
        return {ShapeQuery::seg(Pattern::theta(t.number)), 1};
      }
      default:
        fail(std::string("expected a shape segment, found ") + std::string(to_string(t.kind)),
             {TokenKind::LBracket, TokenKind::LParen, TokenKind::OpNot, TokenKind::Ident,
              TokenKind::Number});
    }
  }

  static std::optional<Pattern> sugar(const std::string& id) {
    if (id == "u" || id == "up") return Pattern::up();
    if (id == "d" || id == "down") return Pattern::down();
    if (id == "f" || id == "flat") return Pattern::flat();
    if (id == "any") return Pattern::any();
    if (id == "empty") return Pattern::empty();
    return std::nullopt;
  }

  Parsed parse_segment(std::size_t nesting) {
    const Token& open = expect_kind(TokenKind::LBracket);
    ShapeSegment seg;
    bool have_pattern = false;
    bool iter_start = false;
    std::size_t depth = 1;
    do {
      const Token& key = expect_kind(TokenKind::Ident);
      if (key.text == "x" || key.text == "y") {
        expect_kind(TokenKind::Dot);
        const Token& which = expect_kind(TokenKind::Ident);
        if (which.text != "s" && which.text != "e") fail_at(which, "expected 's' or 'e'");
        expect_kind(TokenKind::Equals);
        const bool start = which.text == "s";
        auto& loc = seg.location;
        if (key.text == "x" && peek().kind == TokenKind::Dot) {
          const Token& dot = next();
          if (!start) fail_at(dot, "'.' is only valid as x.s; write x.e=.+N");
          if (iter_start) fail_at(key, "duplicate x.s");
          iter_start = true;
          continue;
        }
        if (key.text == "x" && peek().kind == TokenKind::DotPlus) {
          const Token& dp = next();
          if (start) fail_at(dp, "'.+N' is only valid as x.e");
          const Token& num = expect_kind(TokenKind::Number);
          if (!(num.number >= 1.0) || num.number != std::floor(num.number) || num.number > 1e9) {
            fail_at(num, "iterator width must be a positive integer");
          }
          if (loc.iterator_width) fail_at(key, "duplicate x.e");
          loc.iterator_width = static_cast<std::size_t>(num.number);
          continue;
        }
        const Token& num = expect_kind(TokenKind::Number);
        auto& slot = key.text == "x" ? (start ? loc.x_start : loc.x_end)
                                     : (start ? loc.y_start : loc.y_end);
        if (slot) fail_at(key, "duplicate " + key.text + "." + which.text);
        slot = num.number;
      } else if (key.text == "p") {
        expect_kind(TokenKind::Equals);
        if (have_pattern) fail_at(key, "duplicate pattern");
        have_pattern = true;
        auto [pattern, d] = parse_pattern(nesting);
        seg.pattern = std::move(pattern);
        depth = std::max(depth, d + 1);
      } else if (key.text == "m") {
        expect_kind(TokenKind::Equals);
        parse_modifier(seg.modifier, key);
      } else if (key.text == "v") {
        expect_kind(TokenKind::Equals);
        if (have_pattern) fail_at(key, "duplicate pattern");
        have_pattern = true;
        seg.pattern = Pattern::sketch_of(parse_sketch());
      } else {
        fail_at(key, "unknown segment field '" + key.text + "'; expected x, y, p, m or v");
      }
    } while (accept(TokenKind::Comma));
    expect_kind(TokenKind::RBracket, {TokenKind::Comma, TokenKind::RBracket});
    if (iter_start && !seg.location.iterator_width) {
      fail_at(open, "x.s=. needs a matching x.e=.+N");
    }
    if (!have_pattern) seg.pattern = Pattern::any();
    return {ShapeQuery::seg(std::move(seg)), depth};
  }

  std::pair<Pattern, std::size_t> parse_pattern(std::size_t nesting) {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Ident: {
        next();
        if (auto p = sugar(t.text)) return {*p, 0};
        return {Pattern::user_defined(t.text), 0};
      }
      case TokenKind::Number:
        next();
        return {Pattern::theta(t.number), 0};
      case TokenKind::Dollar: {
        next();
        PositionRef ref;
        if (t.text == "$-") {
          ref.mode = PositionRef::Mode::Previous;
        } else if (t.text == "$+") {
          ref.mode = PositionRef::Mode::Next;
        } else {
          const auto digits = std::string_view(t.text).substr(1);
          std::size_t idx = 0;
          auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
          if (ec != std::errc() || ptr != digits.data() + digits.size()) {
            fail_at(t, "position index out of range");
          }
          ref.index = idx;
        }
        return {Pattern::position(ref), 0};
      }
      case TokenKind::LParen: {
        next();
        check_depth(nesting + 2, t);
        Parsed q = parse_query(nesting + 1);
        expect_kind(TokenKind::RParen, {TokenKind::RParen, TokenKind::OpConcat, TokenKind::OpAnd,
                                        TokenKind::OpOr});
        check_depth(q.depth + 1 + nesting, t);
        return {Pattern::nested_query(std::move(q.ast)), q.depth};
      }
      case TokenKind::LBracket: {
        check_depth(nesting + 2, t);
        Parsed q = parse_segment(nesting + 1);
        return {Pattern::nested_query(std::move(q.ast)), q.depth};
      }
      default:
        fail("expected a pattern", {TokenKind::Ident, TokenKind::Number, TokenKind::Dollar,
                                    TokenKind::LParen, TokenKind::LBracket});
    }
  }

  void parse_modifier(Modifier& m, const Token& key) {
    const Token& t = peek();
    auto set_quant = [&](Quantifier q) {
      if (m.quantifier) fail_at(key, "duplicate quantifier");
      m.quantifier = q;
    };
    auto set_cmp = [&](Comparator c) {
      if (m.comparator) fail_at(key, "duplicate comparator");
      m.comparator = c;
    };
    switch (t.kind) {
      case TokenKind::BraceQuant:
        next();
        set_quant(parse_brace(t));
        return;
      case TokenKind::Number: {
        next();
        if (!(t.number >= 0.0) || t.number != std::floor(t.number) || t.number > 1e9) {
          fail_at(t, "quantifier count must be a non-negative integer");
        }
        const auto c = static_cast<std::size_t>(t.number);
        set_quant({c, c});
        return;
      }
      case TokenKind::OpConcat:
        if (t.text != ">>") fail_at(t, "expected a comparator");
        next();
        set_cmp(Comparator::GreaterMuch);
        return;
      case TokenKind::Equals:
        next();
        set_cmp(Comparator::Equal);
        return;
      case TokenKind::Compare: {
        next();
        if (t.text == "<<") {
          set_cmp(Comparator::LessMuch);
        } else if (t.text == "<") {
          set_cmp(Comparator::Less);
        } else {
          set_cmp(Comparator::Greater);
        }
        if (peek().kind == TokenKind::Number && t.text.size() == 1) {
          const Token& num = next();
          m.multiplier = num.number;
        }
        return;
      }
      default:
        fail("expected a modifier", {TokenKind::BraceQuant, TokenKind::Number, TokenKind::Compare,
                                     TokenKind::OpConcat, TokenKind::Equals});
    }
  }

  Quantifier parse_brace(const Token& t) {
    if (t.text == "?") return {0, 1};
    if (t.text == "*") return {0, std::nullopt};
    if (t.text == "+") return {1, std::nullopt};
    std::string_view body(t.text);
    body = body.substr(1, body.size() - 2);
    auto trim = [](std::string_view s) {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      return s;
    };
    auto to_count = [&](std::string_view s) -> std::optional<std::size_t> {
      s = trim(s);
      if (s.empty()) return std::nullopt;
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) fail_at(t, "malformed quantifier");
      return v;
    };
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) {
      auto v = to_count(body);
      if (!v) fail_at(t, "empty quantifier");
      return {*v, *v};
    }
    if (body.find(',', comma + 1) != std::string_view::npos) fail_at(t, "malformed quantifier");
    auto lo = to_count(body.substr(0, comma));
    auto hi = to_count(body.substr(comma + 1));
    if (!lo && !hi) fail_at(t, "empty quantifier");
    return {lo.value_or(0), hi};
  }

  std::vector<Point> parse_sketch() {
    std::vector<Point> pts;
    for (;;) {
      const Token& x = expect_kind(TokenKind::Number);
      expect_kind(TokenKind::Colon);
      const Token& y = expect_kind(TokenKind::Number);
      pts.push_back({x.number, y.number});
      if (peek().kind == TokenKind::Comma && peek2().kind == TokenKind::Number) {
        next();
        continue;
      }
      return pts;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ShapeQuery parse_shapequery_raw(std::string_view text) {
  return Parser(tokenize(text)).parse_all();
}

ShapeQuery parse_shapequery(std::string_view text) {
  ShapeQuery raw = parse_shapequery_raw(text);
  ValidationReport report = validate_ast(raw);
  if (!report.ok) throw SemanticError(std::move(report));
  return normalize_ast(raw);
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "0";
  return std::string(buf, ptr);
}

namespace {

std::string comparator_text(Comparator c) {
  switch (c) {
    case Comparator::Less: return "<";
    case Comparator::LessMuch: return "<<";
    case Comparator::Greater: return ">";
    case Comparator::GreaterMuch: return ">>";
    case Comparator::Equal: return "=";
  }
  return "=";
}

std::string format_node(const ShapeQuery& q);

std::string format_pattern(const Pattern& p) {
  switch (p.kind) {
    case PatternKind::Up: return "up";
    case PatternKind::Down: return "down";
    case PatternKind::Flat: return "flat";
    case PatternKind::Any: return "any";
    case PatternKind::Empty: return "empty";
    case PatternKind::Theta: return format_number(p.angle_deg);
    case PatternKind::PositionRef:
      switch (p.ref.mode) {
        case PositionRef::Mode::Previous: return "$-";
        case PositionRef::Mode::Next: return "$+";
        case PositionRef::Mode::Absolute: return "$" + std::to_string(p.ref.index);
      }
      return "$0";
    case PatternKind::Nested:
      return "(" + (p.nested ? format_node(*p.nested) : std::string("[p=any]")) + ")";
    case PatternKind::Udp: return p.udp;
    case PatternKind::Sketch: return "";
  }
  return "any";
}

std::string format_segment(const ShapeSegment& s) {
  std::vector<std::string> items;
  const auto& loc = s.location;
  if (loc.iterator_width) {
    items.push_back("x.s=.");
    items.push_back("x.e=.+" + std::to_string(*loc.iterator_width));
  }
  if (loc.x_start) items.push_back("x.s=" + format_number(*loc.x_start));
  if (loc.x_end) items.push_back("x.e=" + format_number(*loc.x_end));
  if (loc.y_start) items.push_back("y.s=" + format_number(*loc.y_start));
  if (loc.y_end) items.push_back("y.e=" + format_number(*loc.y_end));
  if (s.pattern.kind == PatternKind::Sketch) {
    std::string v = "v=";
    for (std::size_t i = 0; i < s.pattern.sketch.size(); ++i) {
      if (i) v += ",";
      v += format_number(s.pattern.sketch[i].x) + ":" + format_number(s.pattern.sketch[i].y);
    }
    items.push_back(std::move(v));
  } else {
    items.push_back("p=" + format_pattern(s.pattern));
  }
  const auto& m = s.modifier;
  if (m.quantifier) {
    std::string q = "m={" + std::to_string(m.quantifier->min) + ",";
    if (m.quantifier->max) q += std::to_string(*m.quantifier->max);
    items.push_back(q + "}");
  }
  if (m.comparator) {
    std::string c = "m=" + comparator_text(*m.comparator);
    if (m.multiplier) {
      // A ratio is only expressible after a single-character comparator.
      if (*m.comparator == Comparator::Less || *m.comparator == Comparator::Greater) {
        c += format_number(*m.multiplier);
      }
    }
    items.push_back(std::move(c));
  }
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out + "]";
}

bool is_binary(const ShapeQuery& q) {
  return q.kind == NodeKind::Concat || q.kind == NodeKind::And || q.kind == NodeKind::Or;
}

std::string format_node(const ShapeQuery& q) {
  switch (q.kind) {
    case NodeKind::Segment:
      return format_segment(q.segment);
    case NodeKind::Not: {
      if (q.children.empty()) return "![p=any]";
      const auto& c = q.children[0];
      return is_binary(c) ? "!(" + format_node(c) + ")" : "!" + format_node(c);
    }
    default: {
      const char* op = q.kind == NodeKind::Concat ? " >> " : q.kind == NodeKind::And ? " & " : " | ";
      std::string out;
      for (std::size_t i = 0; i < q.children.size(); ++i) {
        const auto& c = q.children[i];
        if (i) out += op;
        if (i > 0 && is_binary(c)) {
          out += "(" + format_node(c) + ")";
        } else {
          out += format_node(c);
        }
      }
      return out;
    }
  }
}

}  // namespace

std::string format_shapequery(const ShapeQuery& ast) { return format_node(ast); }

std::string annotate_error(std::string_view text, const ParseError& error) {
  std::string out = std::string(to_string(error.code())) + ": " + error.what() + "\n";
  // Replace control characters so the caret column stays aligned.
  std::string line(text);
  for (auto& ch : line) {
    if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  }
  out += "  " + line + "\n  ";
  const std::size_t begin = std::min(error.span().begin, line.size());
  const std::size_t end = std::max(begin + 1, std::min(error.span().end, line.size() + 1));
  out += std::string(begin, ' ') + std::string(end - begin, '^') + "\n";
  return out;
}

}  // namespace trendseek
