#include <cmath>

#include "builtins_internal.hpp"
#include "venture/errors.hpp"

namespace venture {

namespace detail {

Node* bindSP(Trace& trace, const std::vector<std::string>& names, SPPtr sp) {
  NodePtr node = trace.createConstantNode(Value());
  trace.setValue(node.get(), Value::spRef(node->id));
  MadeSPRecord& rec = trace.ensureMadeRecord(node.get());
  rec.aux = sp->constructSPAux();
  bool ae = sp->hasAEKernel();
  rec.sp = std::move(sp);
  if (ae) trace.registerAEKernel(node.get());
  for (const auto& n : names) trace.globalEnv()->bind(n, node);
  return node.get();
}

SPPtr simpleSP(std::shared_ptr<const PSP> outputPSP) {
  std::string n = outputPSP->name();
  return std::make_shared<SP>(NullRequestPSP::instance(), std::move(outputPSP), n);
}

Value quoted(const Value& v) { return Value::list({Value::symbol("quote"), v}); }

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

namespace {

void def(Trace& t, std::vector<std::string> names, FunctionPSP::Fn fn) {
  auto psp = std::make_shared<FunctionPSP>(names.front(), std::move(fn));
  bindSP(t, names, simpleSP(psp));
}

double num(const Args& a, std::size_t i) { return a[i].asNumber(); }

bool valuesEqual(const Value& x, const Value& y) {
  if (x.isNumber() && y.isNumber()) return x.asNumber() == y.asNumber();
  return x == y;
}

Value lookupIn(const Value& c, const Value& key) {
  if (c.isMap()) {
    const auto& m = c.asMap().entries;
    auto it = m.find(key);
    if (it == m.end()) throw TypeError("key not found: " + key.toString());
    return it->second;
  }
  double k = key.asNumber();
  if (k < 0 || k != std::floor(k)) throw TypeError("index must be a non-negative integer");
  auto i = static_cast<std::size_t>(k);
  if (c.isVector()) {
    if (i >= c.asVector().size()) throw TypeError("index out of range");
    return c.asVector()[i];
  }
  const Value* cur = &c;
  for (std::size_t j = 0; j < i; ++j) {
    if (!cur->isPair()) throw TypeError("index out of range");
    cur = &cur->cdr();
  }
  if (!cur->isPair()) throw TypeError("index out of range");
  return cur->car();
}

}  // namespace

void installDeterministic(Trace& t) {
  def(t, {"plus", "+"}, [](const Args& a) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += num(a, i);
    return Value::number(s);
  });
  def(t, {"minus", "-"}, [](const Args& a) {
    a.requireArity(1, 2, "minus");
    return Value::number(a.size() == 1 ? -num(a, 0) : num(a, 0) - num(a, 1));
  });
  def(t, {"times", "*"}, [](const Args& a) {
    double s = 1;
    for (std::size_t i = 0; i < a.size(); ++i) s *= num(a, i);
    return Value::number(s);
  });
  def(t, {"div", "/"}, [](const Args& a) {
    a.requireArity(2, "div");
    return Value::number(num(a, 0) / num(a, 1));
  });
  def(t, {"eq", "="}, [](const Args& a) {
    a.requireArity(2, "eq");
    return Value::boolean(valuesEqual(a[0], a[1]));
  });
  def(t, {"gt", ">"}, [](const Args& a) {
    a.requireArity(2, "gt");
    return Value::boolean(num(a, 0) > num(a, 1));
  });
  def(t, {"lt", "<"}, [](const Args& a) {
    a.requireArity(2, "lt");
    return Value::boolean(num(a, 0) < num(a, 1));
  });
  def(t, {"gte", ">="}, [](const Args& a) {
    a.requireArity(2, "gte");
    return Value::boolean(num(a, 0) >= num(a, 1));
  });
  def(t, {"lte", "<="}, [](const Args& a) {
    a.requireArity(2, "lte");
    return Value::boolean(num(a, 0) <= num(a, 1));
  });
  def(t, {"not"}, [](const Args& a) {
    a.requireArity(1, "not");
    return Value::boolean(!a[0].asBool());
  });
  def(t, {"and"}, [](const Args& a) {
    bool r = true;
    for (std::size_t i = 0; i < a.size(); ++i) r = r && a[i].asBool();
    return Value::boolean(r);
  });
  def(t, {"or"}, [](const Args& a) {
    bool r = false;
    for (std::size_t i = 0; i < a.size(); ++i) r = r || a[i].asBool();
    return Value::boolean(r);
  });
  def(t, {"xor"}, [](const Args& a) {
    a.requireArity(2, "xor");
    return Value::boolean(a[0].asBool() != a[1].asBool());
  });
  def(t, {"exp"}, [](const Args& a) {
    a.requireArity(1, "exp");
    return Value::number(std::exp(num(a, 0)));
  });
  def(t, {"log"}, [](const Args& a) {
    a.requireArity(1, "log");
    return Value::number(std::log(num(a, 0)));
  });
  def(t, {"pow"}, [](const Args& a) {
    a.requireArity(2, "pow");
    return Value::number(std::pow(num(a, 0), num(a, 1)));
  });
  def(t, {"sqrt"}, [](const Args& a) {
    a.requireArity(1, "sqrt");
    return Value::number(std::sqrt(num(a, 0)));
  });
  def(t, {"abs"}, [](const Args& a) {
    a.requireArity(1, "abs");
    return Value::number(std::fabs(num(a, 0)));
  });

  def(t, {"list"}, [](const Args& a) { return Value::list(a.operandValues); });
  def(t, {"vector", "array"}, [](const Args& a) { return Value::vector(a.operandValues); });
  def(t, {"pair"}, [](const Args& a) {
    a.requireArity(2, "pair");
    return Value::pair(a[0], a[1]);
  });
  def(t, {"first", "car"}, [](const Args& a) {
    a.requireArity(1, "first");
    return a[0].car();
  });
  def(t, {"rest", "cdr"}, [](const Args& a) {
    a.requireArity(1, "rest");
    return a[0].cdr();
  });
  def(t, {"is_pair"}, [](const Args& a) {
    a.requireArity(1, "is_pair");
    return Value::boolean(a[0].isPair());
  });
  def(t, {"is_symbol"}, [](const Args& a) {
    a.requireArity(1, "is_symbol");
    return Value::boolean(a[0].isSymbol());
  });
  def(t, {"is_number"}, [](const Args& a) {
    a.requireArity(1, "is_number");
    return Value::boolean(a[0].isNumber());
  });
  def(t, {"is_atom"}, [](const Args& a) {
    a.requireArity(1, "is_atom");
    return Value::boolean(a[0].isAtom());
  });
  def(t, {"lookup"}, [](const Args& a) {
    a.requireArity(2, "lookup");
    return lookupIn(a[0], a[1]);
  });
  def(t, {"contains"}, [](const Args& a) {
    a.requireArity(2, "contains");
    if (a[0].isMap()) return Value::boolean(a[0].asMap().entries.count(a[1]) != 0);
    for (const auto& x : a[0].items())
      if (valuesEqual(x, a[1])) return Value::boolean(true);
    return Value::boolean(false);
  });
  def(t, {"size"}, [](const Args& a) {
    a.requireArity(1, "size");
    if (a[0].isMap()) return Value::number(static_cast<double>(a[0].asMap().entries.size()));
    return Value::number(static_cast<double>(a[0].items().size()));
  });
  def(t, {"dict"}, [](const Args& a) {
    a.requireArity(2, "dict");
    auto ks = a[0].items();
    auto vs = a[1].items();
    if (ks.size() != vs.size()) throw TypeError("dict needs equally many keys and values");
    std::vector<std::pair<Value, Value>> entries;
    for (std::size_t i = 0; i < ks.size(); ++i) entries.emplace_back(ks[i], vs[i]);
    return Value::map(entries);
  });
  def(t, {"atom_index"}, [](const Args& a) {
    a.requireArity(1, "atom_index");
    return Value::number(static_cast<double>(a[0].asAtom()));
  });
  def(t, {"get_empty_environment"}, [](const Args& a) {
    a.requireArity(0, "get_empty_environment");
    return Value::env(std::make_shared<Environment>());
  });
  def(t, {"extend_environment"}, [](const Args& a) {
    a.requireArity(3, "extend_environment");
    auto e = std::make_shared<Environment>(a[0].asEnv());
    e->bind(a[1].asSymbol(), a.operandNodes[2]->shared_from_this());
    return Value::env(e);
  });
  // Identity on its body; the evaluator reads the scope and block operands.
  def(t, {"tag"}, [](const Args& a) {
    a.requireArity(3, "tag");
    return a[2];
  });
}

}  // namespace detail

void installBuiltins(Trace& trace) {
  detail::installDeterministic(trace);
  detail::installStochastic(trace);
  detail::installCollapsed(trace);
  detail::installRequestSPs(trace);
  detail::installHMM(trace);
}

}  // namespace venture
