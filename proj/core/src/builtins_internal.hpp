#pragma once

#include <functional>
#include <string>

#include "venture/sp.hpp"
#include "venture/trace.hpp"

namespace venture::detail {

// Creates a constant node holding the SP, registers it as its own maker and
// binds every given name to it in the global environment.
Node* bindSP(Trace& trace, const std::vector<std::string>& names, SPPtr sp);

SPPtr simpleSP(std::shared_ptr<const PSP> outputPSP);

class FunctionPSP : public PSP {
 public:
  using Fn = std::function<Value(const Args&)>;
  FunctionPSP(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  Value simulate(const Args& args, Rng&) const override { return fn_(args); }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

Value quoted(const Value& v);
double lbeta(double a, double b);

void installDeterministic(Trace& trace);
void installStochastic(Trace& trace);
void installCollapsed(Trace& trace);
void installRequestSPs(Trace& trace);
void installHMM(Trace& trace);

}  // namespace venture::detail
