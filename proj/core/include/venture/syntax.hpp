#pragma once

#include <optional>
#include <string>
#include <vector>

#include "venture/value.hpp"

namespace venture {

// Expressions are s-expression data: a symbol is a variable, a non-empty
// list is a combination (or a special form before desugaring) and every
// other value evaluates to itself.
enum class ExprKind { SelfEvaluating, Variable, Quote, Combination, Lambda, Branch, ScopeInclude };

ExprKind classify(const Value& expr);

// Parse exactly one datum; trailing input is an error.
Value parseExpression(const std::string& text);

// Rewrite if, lambda and scope_include into applications of branch,
// make_csp and tag. Idempotent.
Value desugar(const Value& expr);

enum class BlockMode { Literal, One, All, Ordered };

struct BlockSpec {
  BlockMode mode = BlockMode::One;
  Value literal;
};

struct InferenceExpr {
  enum class Kind { MH, Rejection, PGibbs, FuncPGibbs, MeanField, EnumGibbs, Cycle, Mixture };
  Kind kind = Kind::MH;
  Value scope = Value::symbol("default");
  BlockSpec block;
  long particles = 0;
  long iterations = 0;
  long transitions = 1;
  std::vector<InferenceExpr> children;
  std::vector<double> weights;

  std::string toString() const;
};

InferenceExpr parseInference(const Value& expr);
InferenceExpr parseInference(const std::string& text);

struct Instruction {
  enum class Kind { Assume, Observe, Predict, Forget, Infer, Sample, Force };
  Kind kind = Kind::Predict;
  std::string label;
  std::string symbol;   // ASSUME
  Value expression;     // ASSUME, OBSERVE, PREDICT, SAMPLE, FORCE (desugared)
  Value literal;        // OBSERVE, FORCE
  std::optional<long> forgetIndex;
  std::string forgetLabel;
  InferenceExpr inference;
  std::string text;
};

const char* instructionName(Instruction::Kind k);

Instruction parseInstruction(const std::string& text);
std::vector<Instruction> parseProgram(const std::string& text);

}  // namespace venture
