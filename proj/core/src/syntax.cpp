#include "venture/syntax.hpp"

#include <cctype>
#include <charconv>

#include "venture/errors.hpp"

namespace venture {

namespace {

struct Token {
  enum class Type { Open, Close, OpenBracket, CloseBracket, Quote, Word, End };
  Type type;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skipSpace();
    if (i_ >= src_.size()) return {Token::Type::End, "", i_};
    std::size_t start = i_;
    char c = src_[i_];
    switch (c) {
      case '(': ++i_; return {Token::Type::Open, "(", start};
      case ')': ++i_; return {Token::Type::Close, ")", start};
      case '[': ++i_; return {Token::Type::OpenBracket, "[", start};
      case ']': ++i_; return {Token::Type::CloseBracket, "]", start};
      case '\'': ++i_; return {Token::Type::Quote, "'", start};
      default: break;
    }
    while (i_ < src_.size() && !isDelimiter(src_[i_])) ++i_;
    return {Token::Type::Word, src_.substr(start, i_ - start), start};
  }

  Token peek() {
    std::size_t save = i_;
    Token t = next();
    i_ = save;
    return t;
  }

  std::size_t offset() const { return i_; }

 private:
  static bool isDelimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' ||
           c == ']' || c == '\'' || c == ';';
  }

  void skipSpace() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
      } else if (c == ';') {
        while (i_ < src_.size() && src_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  const std::string& src_;
  std::size_t i_ = 0;
};

Value atomFromWord(const std::string& w) {
  if (w == "true" || w == "True" || w == "#t") return Value::boolean(true);
  if (w == "false" || w == "False" || w == "#f") return Value::boolean(false);
  char c = w[0];
  if (std::isdigit(static_cast<unsigned char>(c)) || ((c == '-' || c == '.') && w.size() > 1)) {
    double x = 0;
    const char* b = w.data();
    const char* e = w.data() + w.size();
    auto res = std::from_chars(b, e, x);
    if (res.ec == std::errc() && res.ptr == e) return Value::number(x);
  }
  if (w.size() > 6 && w.rfind("atom<", 0) == 0 && w.back() == '>') {
    std::int64_t k = 0;
    const char* b = w.data() + 5;
    const char* e = w.data() + w.size() - 1;
    auto res = std::from_chars(b, e, k);
    if (res.ec == std::errc() && res.ptr == e) return Value::atom(k);
  }
  return Value::symbol(w);
}

Value parseDatum(Lexer& lx) {
  Token t = lx.next();
  switch (t.type) {
    case Token::Type::Word: return atomFromWord(t.text);
    case Token::Type::Quote: {
      Value inner = parseDatum(lx);
      return Value::list({Value::symbol("quote"), inner});
    }
    case Token::Type::Open: {
      std::vector<Value> items;
      while (true) {
        Token p = lx.peek();
        if (p.type == Token::Type::Close) {
          lx.next();
          break;
        }
        if (p.type == Token::Type::End) throw ParseError("unbalanced parenthesis", p.pos);
        if (p.type == Token::Type::OpenBracket || p.type == Token::Type::CloseBracket)
          throw ParseError("unexpected bracket inside expression", p.pos);
        items.push_back(parseDatum(lx));
      }
      return Value::list(items);
    }
    case Token::Type::Close: throw ParseError("unexpected ')'", t.pos);
    case Token::Type::End: throw ParseError("unexpected end of input", t.pos);
    default: throw ParseError("unexpected '" + t.text + "'", t.pos);
  }
}

std::size_t listLength(const Value& v) {
  std::size_t n = 0;
  for (const Value* cur = &v; cur->isPair(); cur = &cur->cdr()) ++n;
  return n;
}

Value quote(const Value& v) { return Value::list({Value::symbol("quote"), v}); }

}  // namespace

ExprKind classify(const Value& expr) {
  if (expr.isSymbol()) return ExprKind::Variable;
  if (!expr.isPair()) return ExprKind::SelfEvaluating;
  const Value& head = expr.car();
  if (head.isSymbol("quote")) return ExprKind::Quote;
  if (head.isSymbol("lambda")) return ExprKind::Lambda;
  if (head.isSymbol("if")) return ExprKind::Branch;
  if (head.isSymbol("scope_include")) return ExprKind::ScopeInclude;
  return ExprKind::Combination;
}

Value parseExpression(const std::string& text) {
  Lexer lx(text);
  Value v = parseDatum(lx);
  Token t = lx.next();
  if (t.type != Token::Type::End) throw ParseError("trailing input", t.pos);
  return v;
}

Value desugar(const Value& expr) {
  switch (classify(expr)) {
    case ExprKind::SelfEvaluating:
    case ExprKind::Variable:
      return expr;
    case ExprKind::Quote:
      if (listLength(expr) != 2) throw ArityError("quote takes one argument");
      return expr;
    case ExprKind::Lambda: {
      if (listLength(expr) != 3) throw ArityError("lambda takes a parameter list and a body");
      auto parts = expr.items();
      if (!parts[1].isList()) throw TypeError("lambda parameters must be a list");
      for (const auto& p : parts[1].items())
        if (!p.isSymbol()) throw TypeError("lambda parameter must be a symbol");
      return Value::list({Value::symbol("make_csp"), quote(parts[1]), quote(desugar(parts[2]))});
    }
    case ExprKind::Branch: {
      if (listLength(expr) != 4) throw ArityError("if takes a predicate and two branches");
      auto parts = expr.items();
      return Value::list({Value::symbol("branch"), desugar(parts[1]), quote(desugar(parts[2])),
                          quote(desugar(parts[3]))});
    }
    case ExprKind::ScopeInclude: {
      if (listLength(expr) != 4) throw ArityError("scope_include takes a scope, a block and a body");
      auto parts = expr.items();
      return Value::list({Value::symbol("tag"), desugar(parts[1]), desugar(parts[2]), desugar(parts[3])});
    }
    case ExprKind::Combination: {
      if (!expr.isList()) throw TypeError("improper combination");
      std::vector<Value> out;
      for (const auto& e : expr.items()) out.push_back(desugar(e));
      return Value::list(out);
    }
  }
  return expr;
}

// ---------------------------------------------------------------- inference

namespace {

Value unquote(const Value& v) {
  if (v.isPair() && v.car().isSymbol("quote") && listLength(v) == 2) return v.cdr().car();
  return v;
}

long asCount(const Value& v, const char* what) {
  if (!v.isNumber()) throw TypeError(std::string(what) + " must be a number");
  double x = v.asNumber();
  if (x < 0 || x != static_cast<double>(static_cast<long>(x)))
    throw TypeError(std::string(what) + " must be a non-negative integer");
  return static_cast<long>(x);
}

BlockSpec parseBlock(const Value& raw) {
  BlockSpec b;
  if (raw.isSymbol("one")) { b.mode = BlockMode::One; return b; }
  if (raw.isSymbol("all")) { b.mode = BlockMode::All; return b; }
  if (raw.isSymbol("ordered")) { b.mode = BlockMode::Ordered; return b; }
  b.mode = BlockMode::Literal;
  b.literal = unquote(raw);
  return b;
}

}  // namespace

InferenceExpr parseInference(const Value& expr) {
  if (!expr.isPair() || !expr.isList() || !expr.car().isSymbol())
    throw TypeError("inference expression must be a list headed by an operator name");
  auto parts = expr.items();
  const std::string& op = parts[0].asSymbol();
  InferenceExpr ie;
  auto need = [&](std::size_t n) {
    if (parts.size() != n + 1)
      throw ArityError(op + " takes " + std::to_string(n) + " arguments, got " +
                       std::to_string(parts.size() - 1));
  };
  auto scopeBlock = [&]() {
    ie.scope = unquote(parts[1]);
    if (!ie.scope.isSymbol() && !ie.scope.isNumber() && !ie.scope.isAtom())
      throw TypeError("scope must be a symbol or a number");
    ie.block = parseBlock(parts[2]);
  };
  if (op == "mh" || op == "rejection" || op == "enumerative_gibbs" || op == "gibbs") {
    need(3);
    ie.kind = op == "mh" ? InferenceExpr::Kind::MH
              : op == "rejection" ? InferenceExpr::Kind::Rejection
                                  : InferenceExpr::Kind::EnumGibbs;
    scopeBlock();
    ie.transitions = asCount(parts[3], "transition count");
  } else if (op == "pgibbs" || op == "func_pgibbs") {
    need(4);
    ie.kind = op == "pgibbs" ? InferenceExpr::Kind::PGibbs : InferenceExpr::Kind::FuncPGibbs;
    scopeBlock();
    ie.particles = asCount(parts[3], "particle count");
    if (ie.particles < 1) throw TypeError("particle count must be at least 1");
    ie.transitions = asCount(parts[4], "transition count");
  } else if (op == "meanfield") {
    need(4);
    ie.kind = InferenceExpr::Kind::MeanField;
    scopeBlock();
    ie.iterations = asCount(parts[3], "iteration count");
    ie.transitions = asCount(parts[4], "transition count");
  } else if (op == "cycle") {
    need(2);
    ie.kind = InferenceExpr::Kind::Cycle;
    for (const auto& sub : parts[1].items()) ie.children.push_back(parseInference(sub));
    ie.transitions = asCount(parts[2], "transition count");
  } else if (op == "mixture") {
    need(2);
    ie.kind = InferenceExpr::Kind::Mixture;
    for (const auto& entry : parts[1].items()) {
      auto wp = entry.items();
      if (wp.size() != 2) throw ArityError("mixture entries are (weight operator)");
      double w = wp[0].asNumber();
      if (!(w >= 0)) throw TypeError("mixture weight must be non-negative");
      ie.weights.push_back(w);
      ie.children.push_back(parseInference(wp[1]));
    }
    double total = 0;
    for (double w : ie.weights) total += w;
    if (ie.children.empty() || !(total > 0)) throw TypeError("mixture needs a positive total weight");
    ie.transitions = asCount(parts[2], "transition count");
  } else {
    throw TypeError("unknown inference operator " + op);
  }
  return ie;
}

InferenceExpr parseInference(const std::string& text) { return parseInference(parseExpression(text)); }

std::string InferenceExpr::toString() const {
  auto blockStr = [&]() -> std::string {
    switch (block.mode) {
      case BlockMode::One: return "one";
      case BlockMode::All: return "all";
      case BlockMode::Ordered: return "ordered";
      case BlockMode::Literal:
        return block.literal.isSymbol() ? "(quote " + block.literal.toString() + ")"
                                        : block.literal.toString();
    }
    return "?";
  };
  std::string s;
  auto n = [](long x) { return std::to_string(x); };
  switch (kind) {
    case Kind::MH: return "(mh " + scope.toString() + " " + blockStr() + " " + n(transitions) + ")";
    case Kind::Rejection:
      return "(rejection " + scope.toString() + " " + blockStr() + " " + n(transitions) + ")";
    case Kind::EnumGibbs:
      return "(enumerative_gibbs " + scope.toString() + " " + blockStr() + " " + n(transitions) + ")";
    case Kind::PGibbs:
    case Kind::FuncPGibbs:
      return std::string(kind == Kind::PGibbs ? "(pgibbs " : "(func_pgibbs ") + scope.toString() + " " +
             blockStr() + " " + n(particles) + " " + n(transitions) + ")";
    case Kind::MeanField:
      return "(meanfield " + scope.toString() + " " + blockStr() + " " + n(iterations) + " " +
             n(transitions) + ")";
    case Kind::Cycle:
      s = "(cycle (";
      for (std::size_t i = 0; i < children.size(); ++i) s += (i ? " " : "") + children[i].toString();
      return s + ") " + n(transitions) + ")";
    case Kind::Mixture:
      s = "(mixture (";
      for (std::size_t i = 0; i < children.size(); ++i)
        s += (i ? " (" : "(") + formatNumber(weights[i]) + " " + children[i].toString() + ")";
      return s + ") " + n(transitions) + ")";
  }
  return s;
}

// ------------------------------------------------------------- instructions

const char* instructionName(Instruction::Kind k) {
  switch (k) {
    case Instruction::Kind::Assume: return "assume";
    case Instruction::Kind::Observe: return "observe";
    case Instruction::Kind::Predict: return "predict";
    case Instruction::Kind::Forget: return "forget";
    case Instruction::Kind::Infer: return "infer";
    case Instruction::Kind::Sample: return "sample";
    case Instruction::Kind::Force: return "force";
  }
  return "?";
}

namespace {

Value literalValue(const Value& raw, std::size_t pos) {
  Value v = unquote(raw);
  if (raw.isSymbol()) throw ParseError("observed value must be a literal, got symbol " + raw.asSymbol(), pos);
  if (v.isPair() && v == raw) throw ParseError("observed value must be a literal or quoted datum", pos);
  return v;
}

Instruction parseOne(Lexer& lx, const std::string& src) {
  Token open = lx.next();
  if (open.type != Token::Type::OpenBracket) throw ParseError("expected '['", open.pos);
  Instruction ins;
  Token kw = lx.next();
  if (kw.type != Token::Type::Word) throw ParseError("expected instruction keyword", kw.pos);
  if (kw.text.size() > 1 && kw.text.back() == ':') {
    ins.label = kw.text.substr(0, kw.text.size() - 1);
    kw = lx.next();
    if (kw.type != Token::Type::Word) throw ParseError("expected instruction keyword", kw.pos);
  }
  std::string name;
  for (char c : kw.text) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

  std::vector<std::pair<Value, std::size_t>> args;
  while (true) {
    Token p = lx.peek();
    if (p.type == Token::Type::CloseBracket) {
      lx.next();
      break;
    }
    if (p.type == Token::Type::End) throw ParseError("unterminated instruction", p.pos);
    args.emplace_back(parseDatum(lx), p.pos);
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw ArityError(name + " takes " + std::to_string(n) + " arguments, got " + std::to_string(args.size()));
  };

  if (name == "ASSUME") {
    need(2);
    ins.kind = Instruction::Kind::Assume;
    if (!args[0].first.isSymbol()) throw ParseError("ASSUME needs a symbol", args[0].second);
    ins.symbol = args[0].first.asSymbol();
    ins.expression = desugar(args[1].first);
  } else if (name == "OBSERVE" || name == "FORCE") {
    need(2);
    ins.kind = name == "OBSERVE" ? Instruction::Kind::Observe : Instruction::Kind::Force;
    ins.expression = desugar(args[0].first);
    ins.literal = literalValue(args[1].first, args[1].second);
  } else if (name == "PREDICT" || name == "SAMPLE") {
    need(1);
    ins.kind = name == "PREDICT" ? Instruction::Kind::Predict : Instruction::Kind::Sample;
    ins.expression = desugar(args[0].first);
  } else if (name == "FORGET") {
    need(1);
    ins.kind = Instruction::Kind::Forget;
    const Value& t = args[0].first;
    if (t.isNumber()) ins.forgetIndex = static_cast<long>(t.asNumber());
    else if (t.isSymbol()) ins.forgetLabel = t.asSymbol();
    else throw ParseError("FORGET needs a directive index or label", args[0].second);
  } else if (name == "INFER") {
    ins.kind = Instruction::Kind::Infer;
    if (args.empty()) {
      ins.inference = InferenceExpr{};
    } else {
      need(1);
      ins.inference = parseInference(args[0].first);
    }
  } else {
    throw UnknownInstruction("unknown instruction " + kw.text + " at offset " + std::to_string(kw.pos));
  }
  ins.text = src.substr(open.pos, lx.offset() - open.pos);
  return ins;
}

}  // namespace

Instruction parseInstruction(const std::string& text) {
  Lexer lx(text);
  Instruction ins = parseOne(lx, text);
  Token t = lx.next();
  if (t.type != Token::Type::End) throw ParseError("trailing input after instruction", t.pos);
  return ins;
}

std::vector<Instruction> parseProgram(const std::string& text) {
  Lexer lx(text);
  std::vector<Instruction> out;
  while (lx.peek().type != Token::Type::End) out.push_back(parseOne(lx, text));
  return out;
}

}  // namespace venture
