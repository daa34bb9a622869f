#include "builtins_internal.hpp"
#include "venture/errors.hpp"
#include "venture/syntax.hpp"

namespace venture {
namespace detail {

namespace {

Value requestValue(Request r) { return Value::request(std::make_shared<const Request>(std::move(r))); }

Value requestAddr(const Args& a) { return Value::number(static_cast<double>(a.requestNodeId)); }

// ------------------------------------------------------------ compound SPs

class CompoundRequestPSP : public PSP {
 public:
  CompoundRequestPSP(std::vector<std::string> params, Value body, EnvPtr env)
      : params_(std::move(params)), body_(std::move(body)), env_(std::move(env)) {}
  Value simulate(const Args& a, Rng&) const override {
    if (a.size() != params_.size())
      throw ArityError("procedure takes " + std::to_string(params_.size()) + " arguments, got " +
                       std::to_string(a.size()));
    auto env = std::make_shared<Environment>(env_);
    for (std::size_t i = 0; i < params_.size(); ++i) env->bind(params_[i], a.operandNodes[i]->shared_from_this());
    return requestValue(Request{{ESR{requestAddr(a), body_, env}}, {}});
  }
  // The request binds operand nodes, not values, so it never changes when
  // operand values do.
  double logDensity(const Value&, const Args&) const override { return 0.0; }
  bool hasLogDensity() const override { return true; }
  bool canAbsorb(ParentRole role) const override { return role == ParentRole::Operand; }
  std::string name() const override { return "compound_request"; }

 private:
  std::vector<std::string> params_;
  Value body_;
  EnvPtr env_;
};

class MakeCSPPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(2, "make_csp");
    std::vector<std::string> params;
    for (const auto& p : a[0].items()) params.push_back(p.asSymbol());
    auto req = std::make_shared<CompoundRequestPSP>(std::move(params), a[1], a.env);
    return Value::sp(std::make_shared<SP>(req, ESRRefOutputPSP::instance(), "compound"));
  }
  std::string name() const override { return "make_csp"; }
};

// -------------------------------------------------------------------- mem

class MemRequestPSP : public PSP {
 public:
  explicit MemRequestPSP(NodePtr fn) : fn_(std::move(fn)) {}
  Value simulate(const Args& a, Rng&) const override {
    std::vector<Value> call{Value::symbol("memoized_sp")};
    for (const auto& v : a.operandValues) call.push_back(quoted(v));
    auto env = std::make_shared<Environment>();
    env->bind("memoized_sp", fn_);
    return requestValue(Request{{ESR{Value::list(a.operandValues), Value::list(call), env}}, {}});
  }
  std::string name() const override { return "mem_request"; }

 private:
  NodePtr fn_;
};

class MemPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(1, "mem");
    if (!a[0].isSPRef()) throw TypeError("mem needs a procedure");
    auto req = std::make_shared<MemRequestPSP>(a.operandNodes[0]->shared_from_this());
    return Value::sp(std::make_shared<SP>(req, ESRRefOutputPSP::instance(), "memoized"));
  }
  std::string name() const override { return "mem"; }
};

// ----------------------------------------------------------------- branch

class BranchRequestPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(3, "branch");
    bool p = a[0].asBool();
    Value addr = Value::pair(requestAddr(a), Value::boolean(p));
    return requestValue(Request{{ESR{addr, p ? a[1] : a[2], a.env}}, {}});
  }
  std::string name() const override { return "branch_request"; }
};

// ------------------------------------------------------------------- eval

class EvalRequestPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(1, 2, "eval");
    EnvPtr env = a.size() == 2 ? a[1].asEnv() : a.trace->globalEnv();
    return requestValue(Request{{ESR{requestAddr(a), desugar(a[0]), env}}, {}});
  }
  std::string name() const override { return "eval_request"; }
};

// --------------------------------------------------------------- map_list

class MapListRequestPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(2, "map_list");
    if (!a[0].isSPRef()) throw TypeError("map_list needs a procedure");
    auto env = std::make_shared<Environment>();
    env->bind("mapped_sp", a.operandNodes[0]->shared_from_this());
    Request r;
    auto items = a[1].items();
    for (std::size_t i = 0; i < items.size(); ++i) {
      Value addr = Value::pair(requestAddr(a), Value::number(static_cast<double>(i)));
      r.esrs.push_back(ESR{addr, Value::list({Value::symbol("mapped_sp"), quoted(items[i])}), env});
    }
    return requestValue(std::move(r));
  }
  std::string name() const override { return "map_list_request"; }
};

class MapListOutputPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng&) const override { return Value::list(a.esrValues); }
  std::string name() const override { return "map_list"; }
};

}  // namespace

void installRequestSPs(Trace& t) {
  bindSP(t, {"make_csp"}, simpleSP(std::make_shared<MakeCSPPSP>()));
  bindSP(t, {"mem"}, simpleSP(std::make_shared<MemPSP>()));
  bindSP(t, {"branch"},
         std::make_shared<SP>(std::make_shared<BranchRequestPSP>(), ESRRefOutputPSP::instance(), "branch"));
  bindSP(t, {"eval"}, std::make_shared<SP>(std::make_shared<EvalRequestPSP>(), ESRRefOutputPSP::instance(), "eval"));
  bindSP(t, {"map_list"},
         std::make_shared<SP>(std::make_shared<MapListRequestPSP>(), std::make_shared<MapListOutputPSP>(), "map_list"));
}

}  // namespace detail
}  // namespace venture
