#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "venture/inference.hpp"
#include "venture/syntax.hpp"
#include "venture/trace.hpp"

namespace venture {

struct InstructionResult {
  long index = 0;
  Instruction::Kind kind = Instruction::Kind::Predict;
  std::optional<Value> value;  // set for value-returning instructions

  nlohmann::json toJson() const;
  std::string toText() const;
};

// One trace, one generator and the directive table that built the trace.
class Engine {
 public:
  explicit Engine(std::uint64_t seed = 0, TraceConfig config = {});

  InstructionResult execute(const Instruction& instr);
  InstructionResult execute(const std::string& text);
  std::vector<InstructionResult> run(const std::string& program);

  Trace& trace() { return *trace_; }
  Rng& rng() { return rng_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

  // Whole-program re-simulations allowed when an observation cannot be met.
  int retryCap = 100;
  int retries() const { return retries_; }

  std::size_t numDirectives() const { return directives_.size(); }

 private:
  struct Directive {
    Instruction instr;
    NodePtr root;
  };

  NodePtr evaluate(const Value& expr);
  void install(long index, Directive& d);
  void observe(long index, Directive& d);
  void rebuild();
  long resolveForget(const Instruction& instr) const;
  void forget(long index);
  InstructionResult dispatch(const Instruction& instr, long index);

  Rng rng_;
  TraceConfig config_;
  std::unique_ptr<Trace> trace_;
  std::map<long, Directive> directives_;
  std::map<std::string, long> labels_;
  long next_ = 1;
  int retries_ = 0;
};

// Full walk comparing the maintained registries and edges against the trace
// structure. Returns human readable problems; empty means consistent.
std::vector<std::string> checkConsistency(Trace& trace);

}  // namespace venture
