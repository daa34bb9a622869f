#include "doctest.h"
#include "helpers.hpp"
#include "venture/syntax.hpp"

using namespace venture;
using venture::testing::errorKind;

TEST_CASE("parse atoms and lists") {
  CHECK(parseExpression("42") == Value::number(42));
  CHECK(parseExpression("-1.5") == Value::number(-1.5));
  CHECK(parseExpression("True") == Value::boolean(true));
  CHECK(parseExpression("foo") == Value::symbol("foo"));
  CHECK(parseExpression("(a (b 1) c)").toString() == "(a (b 1) c)");
}

TEST_CASE("quote shorthand") {
  CHECK(parseExpression("'state") == parseExpression("(quote state)"));
}

TEST_CASE("parse errors carry an offset") {
  CHECK(errorKind([] { parseExpression("(a b"); }) == "ParseError");
  CHECK(errorKind([] { parseExpression("a b"); }) == "ParseError");
  try {
    parseExpression("(a ))");
  } catch (const ParseError& e) {
    CHECK(e.position == 4);
  }
}

TEST_CASE("special forms classify") {
  CHECK(classify(parseExpression("x")) == ExprKind::Variable);
  CHECK(classify(parseExpression("3")) == ExprKind::SelfEvaluating);
  CHECK(classify(parseExpression("(quote x)")) == ExprKind::Quote);
  CHECK(classify(parseExpression("(if a b c)")) == ExprKind::Branch);
  CHECK(classify(parseExpression("(lambda (x) x)")) == ExprKind::Lambda);
  CHECK(classify(parseExpression("(scope_include 's 0 x)")) == ExprKind::ScopeInclude);
  CHECK(classify(parseExpression("(f x)")) == ExprKind::Combination);
}

TEST_CASE("desugaring") {
  CHECK(desugar(parseExpression("(if p a b)")) == parseExpression("(branch p (quote a) (quote b))"));
  CHECK(desugar(parseExpression("(lambda (x) (+ x 1))")) ==
        parseExpression("(make_csp (quote (x)) (quote (+ x 1)))"));
  CHECK(desugar(parseExpression("(scope_include (quote s) 1 (normal 0 1))")) ==
        parseExpression("(tag (quote s) 1 (normal 0 1))"));
  auto nested = parseExpression("(lambda (t) (if (= t 0) 1 (f (- t 1))))");
  CHECK(desugar(desugar(nested)) == desugar(nested));
}

TEST_CASE("instructions") {
  auto a = parseInstruction("[ASSUME x (normal 0 1)]");
  CHECK(a.kind == Instruction::Kind::Assume);
  CHECK(a.symbol == "x");
  auto o = parseInstruction("[obs1: OBSERVE (normal x 1) 2.5]");
  CHECK(o.kind == Instruction::Kind::Observe);
  CHECK(o.label == "obs1");
  CHECK(o.literal == Value::number(2.5));
  auto f = parseInstruction("[FORGET 3]");
  CHECK(f.forgetIndex.value() == 3);
  auto i = parseInstruction("[INFER]");
  CHECK(i.inference.kind == InferenceExpr::Kind::MH);
  CHECK(i.inference.transitions == 1);
  CHECK(errorKind([] { parseInstruction("[CONJURE x]"); }) == "UnknownInstruction");
  CHECK(errorKind([] { parseInstruction("[ASSUME"); }) == "ParseError");
  CHECK(parseProgram("[ASSUME a 1] ; comment\n[PREDICT a]").size() == 2);
}

TEST_CASE("inference expressions") {
  auto pg = parseInference("(pgibbs state ordered 30 1)");
  CHECK(pg.kind == InferenceExpr::Kind::PGibbs);
  CHECK(pg.scope == Value::symbol("state"));
  CHECK(pg.block.mode == BlockMode::Ordered);
  CHECK(pg.particles == 30);
  auto cyc = parseInference("(cycle ((mh hypers one 1) (mh parameters one 5)) 1000)");
  CHECK(cyc.children.size() == 2);
  CHECK(cyc.transitions == 1000);
  auto lit = parseInference("(mh clustering 3 1)");
  CHECK(lit.block.mode == BlockMode::Literal);
  CHECK(errorKind([] { parseInference("(mh default one)"); }) == "ArityError");
  CHECK(errorKind([] { parseInference("(hmc default one 1)"); }) == "TypeError");
}
