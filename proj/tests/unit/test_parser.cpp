#include <gtest/gtest.h>

#include <random>

#include "ast_gen.hpp"
#include "trendseek/parser.hpp"

using namespace trendseek;

namespace {

using Q = ShapeQuery;

std::vector<TokenKind> kinds(std::string_view text) {
  std::vector<TokenKind> out;
  for (const auto& t : tokenize(text)) out.push_back(t.kind);
  return out;
}

Q seg(Pattern p) { return Q::seg(std::move(p)); }

}  // namespace

TEST(Tokenize, Operators) {
  using K = TokenKind;
  EXPECT_EQ(kinds("u >> d"), (std::vector<K>{K::Ident, K::OpConcat, K::Ident, K::End}));
  EXPECT_EQ(kinds("u ; d"), kinds("u >> d"));
}

TEST(Tokenize, BracketSegment) {
  using K = TokenKind;
  EXPECT_EQ(kinds("[p=up,x.s=2]"),
            (std::vector<K>{K::LBracket, K::Ident, K::Equals, K::Ident, K::Comma, K::Ident, K::Dot,
                            K::Ident, K::Equals, K::Number, K::RBracket, K::End}));
  const auto toks = tokenize("[x.s=-2.5]");
  EXPECT_EQ(toks[5].number, -2.5);
  EXPECT_EQ(toks[5].span, (Span{5, 9}));
}

TEST(Tokenize, QuestionMarkOutsideModifier) {
  try {
    tokenize("u ? d");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Lex);
    EXPECT_EQ(e.span().begin, 2u);
  }
  EXPECT_NO_THROW(tokenize("[p=up,m=?]"));
}

TEST(Tokenize, UnknownCharacter) {
  try {
    tokenize("u >> #");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.span(), (Span{5, 6}));
  }
}

TEST(Parse, LocatedRiseThenFall) {
  ShapeSegment rise;
  rise.pattern = Pattern::up();
  rise.location.x_start = 2;
  rise.location.x_end = 5;
  EXPECT_EQ(parse_shapequery("[p=up,x.s=2,x.e=5] >> [p=down]"),
            Q::concat({Q::seg(rise), seg(Pattern::down())}));
}

TEST(Parse, GroupedQuery) {
  const auto expected =
      Q::concat({seg(Pattern::up()),
                 Q::any_of({seg(Pattern::flat()), Q::concat({seg(Pattern::up()), seg(Pattern::down())})})});
  EXPECT_EQ(parse_shapequery("u >> (f | (u >> d))"), expected);
}

TEST(Parse, NotFlat) { EXPECT_EQ(parse_shapequery("!f"), Q::negate(seg(Pattern::flat()))); }

TEST(Parse, UnterminatedSegment) {
  try {
    parse_shapequery("[p=up");
    FAIL();
  } catch (const ParseError& e) {
    const auto& ex = e.expected();
    EXPECT_NE(std::find(ex.begin(), ex.end(), TokenKind::RBracket), ex.end());
  }
}

TEST(Parse, EqualPrecedenceLeftAssociative) {
  EXPECT_EQ(parse_shapequery("u >> d & f"),
            Q::all_of({Q::concat({seg(Pattern::up()), seg(Pattern::down())}), seg(Pattern::flat())}));
  EXPECT_EQ(parse_shapequery("u | d >> f"),
            Q::concat({Q::any_of({seg(Pattern::up()), seg(Pattern::down())}), seg(Pattern::flat())}));
}

TEST(Parse, SugarAndTheta) {
  EXPECT_EQ(parse_shapequery("any"), seg(Pattern::any()));
  EXPECT_EQ(parse_shapequery("empty"), seg(Pattern::empty()));
  EXPECT_EQ(parse_shapequery("30"), seg(Pattern::theta(30)));
  EXPECT_EQ(parse_shapequery("[p=-45]"), seg(Pattern::theta(-45)));
}

TEST(Parse, Modifiers) {
  auto quant = [](const char* text) {
    return *parse_shapequery(text).segment.modifier.quantifier;
  };
  EXPECT_EQ(quant("[p=up,m={2,}]"), (Quantifier{2, std::nullopt}));
  EXPECT_EQ(quant("[p=up,m={,2}]"), (Quantifier{0, 2}));
  EXPECT_EQ(quant("[p=up,m={2,5}]"), (Quantifier{2, 5}));
  EXPECT_EQ(quant("[p=up,m={3}]"), (Quantifier{3, 3}));
  EXPECT_EQ(quant("[p=up,m=+]"), (Quantifier{1, std::nullopt}));
  EXPECT_EQ(quant("[p=up,m=?]"), (Quantifier{0, 1}));
  EXPECT_EQ(quant("[p=up,m=*]"), (Quantifier{0, std::nullopt}));

  const auto sharp = parse_shapequery("[p=up,m=>>]");
  EXPECT_EQ(sharp.segment.modifier.comparator, Comparator::GreaterMuch);
  const auto ratio = parse_shapequery("u >> [p=$0,m=<0.5]");
  EXPECT_EQ(ratio.children[1].segment.modifier.comparator, Comparator::Less);
  EXPECT_EQ(ratio.children[1].segment.modifier.multiplier, 0.5);
}

TEST(Parse, PositionIteratorSketchNested) {
  const auto q = parse_shapequery("[x.s=.,x.e=.+3,p=up] >> [p=$-]");
  EXPECT_EQ(q.children[0].segment.location.iterator_width, 3u);
  EXPECT_EQ(q.children[1].segment.pattern.ref.mode, PositionRef::Mode::Previous);

  const auto sk = parse_shapequery("[v=2:10,3:14,10:100]");
  ASSERT_EQ(sk.segment.pattern.kind, PatternKind::Sketch);
  EXPECT_EQ(sk.segment.pattern.sketch.back(), (Point{10, 100}));

  const auto nested = parse_shapequery("[x.s=0,x.e=10,p=(u >> d)]");
  ASSERT_EQ(nested.segment.pattern.kind, PatternKind::Nested);
  EXPECT_EQ(nested.segment.pattern.nested->kind, NodeKind::Concat);

  EXPECT_EQ(parse_shapequery("[p=spike]").segment.pattern.udp, "spike");
}

TEST(Parse, SemanticErrorsCarryReport) {
  try {
    parse_shapequery("[p=up,x.s=5,x.e=2]");
    FAIL();
  } catch (const SemanticError& e) {
    ASSERT_FALSE(e.report().issues.empty());
    EXPECT_EQ(e.report().issues[0].code, "LOCATION_ORDER");
  }
  EXPECT_THROW(parse_shapequery("u >> [p=$7]"), SemanticError);
}

TEST(Parse, UnknownBareIdentifier) {
  try {
    parse_shapequery("u >> zigzag");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.span(), (Span{5, 11}));
  }
}

TEST(Parse, DepthLimit) {
  std::string deep;
  for (int i = 0; i < 40; ++i) deep += "(";
  deep += "u";
  for (int i = 0; i < 40; ++i) deep += ")";
  EXPECT_THROW(parse_shapequery(deep), Error);
}

TEST(Format, CanonicalExamples) {
  EXPECT_EQ(format_shapequery(seg(Pattern::up())), "[p=up]");
  EXPECT_EQ(format_shapequery(Q::concat({seg(Pattern::up()), seg(Pattern::down())})),
            "[p=up] >> [p=down]");
  EXPECT_EQ(format_shapequery(Q::negate(Q::any_of({seg(Pattern::up()), seg(Pattern::down())}))),
            "!([p=up] | [p=down])");
  EXPECT_EQ(format_shapequery(parse_shapequery("u >> (d | f)")), "[p=up] >> ([p=down] | [p=flat])");
}

TEST(Format, NumbersRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1e21), "1e+21");
}

TEST(Format, RoundTripsGeneratedAsts) {
  gen::AstGenerator g(3);
  for (int i = 0; i < 500; ++i) {
    const auto ast = g.next();
    const auto text = format_shapequery(ast);
    EXPECT_EQ(parse_shapequery(text), normalize_ast(ast)) << text;
  }
}

TEST(Parse, FuzzNeverCrashes) {
  std::mt19937_64 rng(8);
  const std::string alphabet = "[]()>|&!$.,:=+-*?{};0123456789 pxysemvudf";
  for (int i = 0; i < 5000; ++i) {
    std::string input(rng() % 200, ' ');
    for (auto& c : input) c = alphabet[rng() % alphabet.size()];
    try {
      (void)parse_shapequery(input);
    } catch (const Error&) {
    }
  }
  std::string big(64 * 1024, '(');
  EXPECT_THROW(parse_shapequery(big), Error);
}

TEST(Annotate, CaretUnderSpan) {
  try {
    parse_shapequery("u >> #");
  } catch (const ParseError& e) {
    const auto text = annotate_error("u >> #", e);
    EXPECT_NE(text.find("  u >> #\n       ^"), std::string::npos) << text;
  }
}
