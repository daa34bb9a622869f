#include <cmath>
#include <unordered_set>

#include "venture/errors.hpp"
#include "venture/regen.hpp"

namespace venture {

namespace {

bool isReference(Trace& trace, Node* node) {
  return node->kind == NodeKind::Output && !node->esrParents.empty() && trace.pspAt(node).isESRReference();
}

bool hasRandomAncestor(Node* node) {
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{node};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->isRandomChoice) return true;
    for (Node* p : n->parents()) stack.push_back(p);
  }
  return false;
}

void propagate(Trace& trace, Node* node) {
  for (Node* child : node->children) {
    switch (child->kind) {
      case NodeKind::Constant:
        break;
      case NodeKind::Lookup:
        trace.setValue(child, node->value);
        propagate(trace, child);
        break;
      case NodeKind::Request: {
        if (!child->hasValue) break;
        const PSP& psp = trace.pspAt(child);
        if (!psp.canAbsorb(ParentRole::Operand))
          throw InvalidObservation("requests depend on an observed value");
        break;
      }
      case NodeKind::Output: {
        if (!child->hasValue) break;
        const PSP& psp = trace.pspAt(child);
        if (psp.isRandom()) throw InvalidObservation("random choices depend on an observed value");
        Value v = psp.simulate(trace.argsAt(child), trace.rng());
        if (v.isSP()) throw InvalidObservation("procedures depend on an observed value");
        trace.setValue(child, std::move(v));
        propagate(trace, child);
        break;
      }
    }
  }
}

}  // namespace

Node* observationTarget(Trace& trace, Node* root) {
  Node* n = root;
  for (;;) {
    if (n->kind == NodeKind::Lookup) {
      n = n->source.get();
    } else if (isReference(trace, n)) {
      n = n->esrParents[0].get();
    } else {
      return n;
    }
  }
}

double constrain(Trace& trace, Node* root, const Value& value, bool duringRegen) {
  Node* target = observationTarget(trace, root);
  if (!target->isRandomChoice) {
    if (target->value == value) return 0.0;
    if (duringRegen) return -INFINITY;
    if (hasRandomAncestor(target))
      throw NotAbsorbing("observed expression is a deterministic function of random choices");
    throw InvalidObservation("observed " + value.toString() + " but the expression is " + target->value.toString());
  }
  const PSP& psp = trace.pspAt(target);
  if (!psp.hasLogDensity()) throw NotAbsorbing(psp.name() + " has no tractable density");
  Args args = trace.argsAt(target);
  psp.unincorporate(target->value, args);
  double w = psp.logDensity(value, args);
  trace.setValue(target, value);
  psp.incorporate(value, args);
  trace.registerConstrainedChoice(target);
  propagate(trace, target);
  return w;
}

double unconstrain(Trace& trace, Node* root) {
  Node* target = observationTarget(trace, root);
  if (!target->isRandomChoice) return 0.0;
  const PSP& psp = trace.pspAt(target);
  Args args = trace.argsAt(target);
  trace.unregisterConstrainedChoice(target);
  psp.unincorporate(target->value, args);
  double w = psp.logDensity(target->value, args);
  psp.incorporate(target->value, args);
  return w;
}

}  // namespace venture
