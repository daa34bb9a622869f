#include "venture/engine.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "venture/errors.hpp"
#include "venture/regen.hpp"

namespace venture {

nlohmann::json InstructionResult::toJson() const {
  nlohmann::json j{{"index", index}, {"instruction", instructionName(kind)}};
  j["value"] = value ? value->toJson() : nlohmann::json(nullptr);
  return j;
}

std::string InstructionResult::toText() const {
  std::ostringstream os;
  os << "[" << index << "] " << instructionName(kind);
  if (value) os << " " << value->toString();
  return os.str();
}

Engine::Engine(std::uint64_t seed, TraceConfig config)
    : rng_(seed), config_(config), trace_(std::make_unique<Trace>(rng_, config)) {}

NodePtr Engine::evaluate(const Value& expr) {
  Scaffold none;
  OmegaDB db;
  NodePtr root;
  evalFamily(*trace_, expr, trace_->globalEnv(), nullptr, none, db, root);
  return root;
}

void Engine::install(long index, Directive& d) {
  d.root = evaluate(d.instr.expression);
  trace_->addRoot(index, d.root);
  if (d.instr.kind == Instruction::Kind::Assume) trace_->globalEnv()->bind(d.instr.symbol, d.root);
  if (d.instr.kind == Instruction::Kind::Observe) {
    d.root->isObservation = true;
    d.root->observedValue = d.instr.literal;
    constrain(*trace_, d.root.get(), d.instr.literal);
  }
}

// Re-simulates every live directive on a fresh trace.
void Engine::rebuild() {
  TraceConfig cfg = trace_->config();
  TraceStats stats = trace_->stats();
  trace_ = std::make_unique<Trace>(rng_, cfg);
  trace_->stats() = stats;
  for (auto& [index, d] : directives_) install(index, d);
}

void Engine::observe(long index, Directive& d) {
  directives_[index] = d;
  try {
    install(index, directives_[index]);
    return;
  } catch (const NotAbsorbing&) {
    if (retryCap <= 0) {
      directives_.erase(index);
      throw;
    }
  }
  for (int attempt = 0; attempt < retryCap; ++attempt) {
    ++retries_;
    try {
      rebuild();
      return;
    } catch (const NotAbsorbing&) {
    }
  }
  directives_.erase(index);
  rebuild();
  throw ComputeBudgetExceeded("no re-simulation of the program satisfied the observation after " +
                              std::to_string(retryCap) + " attempts");
}

long Engine::resolveForget(const Instruction& instr) const {
  if (instr.forgetIndex) return *instr.forgetIndex;
  auto it = labels_.find(instr.forgetLabel);
  if (it == labels_.end()) throw UnknownDirective("no directive labelled " + instr.forgetLabel);
  return it->second;
}

void Engine::forget(long index) {
  auto it = directives_.find(index);
  if (it == directives_.end()) throw UnknownDirective("no directive with index " + std::to_string(index));
  Directive& d = it->second;
  if (d.instr.kind == Instruction::Kind::Assume) throw ForgetOfAssume("directive " + std::to_string(index) + " is an ASSUME");
  if (d.root->isObservation) {
    unconstrain(*trace_, d.root.get());
    d.root->isObservation = false;
  }
  Scaffold none;
  OmegaDB db;
  unevalFamily(*trace_, d.root.get(), none, db);
  trace_->removeRoot(index);
  if (!d.instr.label.empty()) labels_.erase(d.instr.label);
  directives_.erase(it);
}

InstructionResult Engine::dispatch(const Instruction& instr, long index) {
  using K = Instruction::Kind;
  InstructionResult r;
  r.index = index;
  r.kind = instr.kind;
  switch (instr.kind) {
    case K::Assume:
    case K::Predict: {
      Directive d{instr, nullptr};
      install(index, d);
      directives_[index] = d;
      r.value = d.root->value;
      break;
    }
    case K::Observe: {
      Directive d{instr, nullptr};
      observe(index, d);
      break;
    }
    case K::Forget:
      forget(resolveForget(instr));
      break;
    case K::Infer:
      runInference(*trace_, instr.inference);
      break;
    case K::Sample: {
      Directive d{instr, nullptr};
      d.instr.kind = K::Predict;
      install(index, d);
      directives_[index] = d;
      r.value = d.root->value;
      forget(index);
      break;
    }
    case K::Force: {
      NodePtr root = evaluate(instr.expression);
      trace_->addRoot(index, root);
      Node* target = observationTarget(*trace_, root.get());
      if (target->isRandomChoice && !target->isConstrained) {
        constrain(*trace_, root.get(), instr.literal);
        mhTransition(*trace_, Value::symbol("default"), BlockSpec{});
        unconstrain(*trace_, root.get());
      } else if (!(target->value == instr.literal)) {
        constrain(*trace_, root.get(), instr.literal);
      }
      Scaffold none;
      OmegaDB db;
      unevalFamily(*trace_, root.get(), none, db);
      trace_->removeRoot(index);
      break;
    }
  }
  if (!instr.label.empty() && directives_.count(index)) labels_[instr.label] = index;
  return r;
}

InstructionResult Engine::execute(const Instruction& instr) {
  long index = next_++;
  try {
    return dispatch(instr, index);
  } catch (const VentureError& e) {
    using K = Instruction::Kind;
    // A half-evaluated expression may have registered choices; rebuilding
    // from the directive table is the only clean way back.
    bool evaluating = instr.kind != K::Forget && instr.kind != K::Infer;
    if (evaluating) {
      directives_.erase(index);
      rebuild();
    }
    throw VentureError(e.kind(), "instruction " + std::to_string(index) + " (" + instructionName(instr.kind) +
                                     "): " + std::string(e.what()).substr(e.kind().size() + 2));
  }
}

InstructionResult Engine::execute(const std::string& text) { return execute(parseInstruction(text)); }

std::vector<InstructionResult> Engine::run(const std::string& program) {
  std::vector<InstructionResult> out;
  for (const auto& instr : parseProgram(program)) out.push_back(execute(instr));
  return out;
}

std::vector<std::string> checkConsistency(Trace& trace) {
  std::vector<std::string> problems;
  auto nodes = trace.liveNodes();
  std::unordered_set<Node*> live(nodes.begin(), nodes.end());
  std::size_t random = 0, constrained = 0;
  for (Node* n : nodes) {
    std::string at = "node " + std::to_string(n->id);
    if (!n->hasValue) problems.push_back(at + " has no value");
    for (Node* p : n->parents())
      if (!p->children.count(n)) problems.push_back(at + " is missing from the children of " + std::to_string(p->id));
    for (Node* c : n->children) {
      auto ps = c->parents();
      if (live.count(c) && std::find(ps.begin(), ps.end(), n) == ps.end())
        problems.push_back(at + " lists child " + std::to_string(c->id) + " that does not depend on it");
    }
    if (n->kind == NodeKind::Output && n->requestNode->hasValue && n->requestNode->value.isRequest()) {
      const auto& req = *n->requestNode->value.asRequest();
      if (req.esrs.size() != n->esrParents.size()) problems.push_back(at + " has mismatched ESR parents");
    }
    bool shouldBeRandom = false;
    if (n->kind == NodeKind::Output || n->kind == NodeKind::Request) shouldBeRandom = trace.pspAt(n).isRandom();
    if (shouldBeRandom != n->isRandomChoice) problems.push_back(at + " has a stale random-choice flag");
    if (n->isRandomChoice) {
      ++random;
      if (!trace.randomChoices().contains(n)) problems.push_back(at + " is not registered");
      if (n->isConstrained) ++constrained;
      else if (!trace.unconstrainedChoices().contains(n)) problems.push_back(at + " is not registered as unconstrained");
    }
  }
  if (random != trace.randomChoices().size())
    problems.push_back("registry holds " + std::to_string(trace.randomChoices().size()) + " choices, trace has " +
                       std::to_string(random));
  if (constrained != trace.numConstrained())
    problems.push_back("registry holds " + std::to_string(trace.numConstrained()) + " constrained choices, trace has " +
                       std::to_string(constrained));
  return problems;
}

}  // namespace venture
