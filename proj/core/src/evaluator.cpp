#include "venture/errors.hpp"
#include "venture/regen.hpp"
#include "venture/syntax.hpp"
#include "evaluator_internal.hpp"

namespace venture {

namespace {

bool isTagOperator(Trace& trace, const Node* op) {
  if (!op->value.isSPRef()) return false;
  const MadeSPRecord* rec = trace.madeRecord(op->value.asSPRef());
  return rec && rec->sp && rec->sp->name() == "tag";
}

void processMadeSP(Trace& trace, Node* node, bool isAAA) {
  SPPtr sp = node->value.asSP();
  MadeSPRecord& rec = trace.ensureMadeRecord(node);
  rec.sp = sp;
  trace.setValue(node, Value::spRef(node->id));
  if (!isAAA || !rec.aux) {
    rec.aux = sp->constructSPAux();
    if (sp->hasAEKernel()) trace.registerAEKernel(node);
  }
}

void teardownMadeSP(Trace& trace, Node* node, bool isAAA) {
  MadeSPRecord* rec = trace.madeRecord(node->id);
  SPPtr sp = rec->sp;
  trace.setValue(node, Value::sp(sp));
  rec->sp = nullptr;
  if (!isAAA) {
    if (sp->hasAEKernel()) trace.unregisterAEKernel(node);
    trace.eraseMadeRecord(node->id);
  }
}

}  // namespace

namespace detail {

double applyPSP(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db) {
  trace.visit();
  trace.logEvent('a', node);
  const PSP& psp = trace.pspAt(node);
  Args args = trace.argsAt(node);
  const Value* old = db.value(node->id);
  LKernel* kernel = scaffold.kernel(node);
  Value nv;
  if (restore) {
    if (!old) throw MissingFamily("no stored value for node " + std::to_string(node->id));
    nv = *old;
  } else if (kernel) {
    nv = kernel->simulate(old, args, trace.rng());
  } else {
    nv = psp.simulate(args, trace.rng());
  }
  double w = kernel ? kernel->weight(nv, old, args) : 0.0;
  trace.setValue(node, nv);
  psp.incorporate(nv, args);
  if (nv.isSP()) processMadeSP(trace, node, scaffold.isAAA(node));
  if (psp.isRandom()) trace.registerRandomChoice(node);
  return w;
}

double evalRequests(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db) {
  const Request& request = *node->value.asRequest();
  if (request.empty()) return 0.0;
  NodeId maker = trace.operatorMakerId(node);
  const SP& sp = trace.spAt(node);
  SPAux* aux = trace.spauxAt(node);
  double w = 0;
  for (const auto& esr : request.esrs) {
    NodePtr root;
    auto it = aux->families.find(esr.addr);
    if (it == aux->families.end()) {
      if (restore) {
        root = db.family(maker, esr.addr);
        if (!root) throw MissingFamily("family " + esr.addr.toString() + " not in the archive");
        w += restoreFamily(trace, root.get(), scaffold, db);
      } else {
        w += evalFamily(trace, esr.expr, esr.env, node->tags, scaffold, db, root);
      }
      aux->families[esr.addr] = root;
    } else {
      root = it->second;
    }
    trace.addESREdge(root, node->outputNode);
  }
  if (!request.lsrs.empty()) {
    LatentDB* ldb = db.latentDB(maker);
    for (const auto& lsr : request.lsrs) w += sp.simulateLatents(*aux, lsr, restore, ldb, trace.rng());
  }
  return w;
}

double unapplyPSP(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db) {
  trace.visit();
  trace.logEvent('u', node);
  const PSP& psp = trace.pspAt(node);
  if (psp.isRandom()) trace.unregisterRandomChoice(node);
  if (node->value.isSPRef() && node->value.asSPRef() == node->id) teardownMadeSP(trace, node, scaffold.isAAA(node));
  Args args = trace.argsAt(node);
  Value old = node->value;
  psp.unincorporate(old, args);
  LKernel* kernel = scaffold.kernel(node);
  double w = kernel ? kernel->reverseWeight(old, args) : 0.0;
  db.extractValue(node->id, std::move(old));
  trace.clearValue(node);
  return w;
}

double unevalRequests(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db) {
  if (!node->hasValue) return 0.0;
  const Request& request = *node->value.asRequest();
  if (request.empty()) return 0.0;
  NodeId maker = trace.operatorMakerId(node);
  const SP& sp = trace.spAt(node);
  SPAux* aux = trace.spauxAt(node);
  double w = 0;
  if (!request.lsrs.empty()) {
    if (!db.latentDB(maker)) db.registerLatentDB(maker, sp.constructLatentDB());
    LatentDB* ldb = db.latentDB(maker);
    for (auto it = request.lsrs.rbegin(); it != request.lsrs.rend(); ++it) w += sp.detachLatents(*aux, *it, *ldb);
  }
  for (auto it = request.esrs.rbegin(); it != request.esrs.rend(); ++it) {
    NodePtr root = trace.popLastESRParent(node->outputNode);
    if (root->numRequests == 0) {
      aux->families.erase(it->addr);
      db.registerFamily(maker, it->addr, root);
      w += unevalFamily(trace, root.get(), scaffold, db);
    }
  }
  return w;
}

}  // namespace detail

using namespace detail;

double evalFamily(Trace& trace, const Value& expr, const EnvPtr& env, const TagPtr& tags, Scaffold& scaffold,
                  OmegaDB& db, NodePtr& out) {
  trace.visit();
  switch (classify(expr)) {
    case ExprKind::Variable: {
      NodePtr source = env->lookup(expr.asSymbol());
      double w = regenerate(trace, source.get(), scaffold, false, db);
      out = trace.createLookupNode(source);
      trace.logEvent('l', out.get());
      return w;
    }
    case ExprKind::SelfEvaluating:
      out = trace.createConstantNode(expr);
      return 0.0;
    case ExprKind::Quote:
      out = trace.createConstantNode(expr.cdr().car());
      return 0.0;
    case ExprKind::Lambda:
    case ExprKind::Branch:
    case ExprKind::ScopeInclude:
      return evalFamily(trace, desugar(expr), env, tags, scaffold, db, out);
    case ExprKind::Combination:
      break;
  }
  if (!expr.isList()) throw TypeError("improper combination " + expr.toString());
  std::vector<Value> parts = expr.items();
  NodePtr opNode;
  double w = evalFamily(trace, parts[0], env, tags, scaffold, db, opNode);
  bool tag = isTagOperator(trace, opNode.get());
  if (tag && parts.size() != 4) throw ArityError("tag takes a scope, a block and a body");
  std::vector<NodePtr> operands;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    NodePtr operand;
    if (tag && i == 3) {
      for (int j = 0; j < 2; ++j) {
        Node* src = observationTarget(trace, operands[j].get());
        if (src->isRandomChoice) throw InvalidScope("scope and block must not be random choices");
      }
      TagPtr inner = extendTags(tags, operands[0]->value, operands[1]->value);
      w += evalFamily(trace, parts[i], env, inner, scaffold, db, operand);
    } else {
      w += evalFamily(trace, parts[i], env, tags, scaffold, db, operand);
    }
    operands.push_back(std::move(operand));
  }
  auto [req, outNode] = trace.createApplicationNodes(opNode, operands, env, tags);
  w += applySP(trace, req.get(), outNode.get(), scaffold, false, db);
  out = outNode;
  return w;
}

double applySP(Trace& trace, Node* requestNode, Node* outputNode, Scaffold& scaffold, bool restore, OmegaDB& db) {
  double w = applyPSP(trace, requestNode, scaffold, restore, db);
  w += evalRequests(trace, requestNode, scaffold, restore, db);
  for (const auto& p : outputNode->esrParents) w += regenerate(trace, p.get(), scaffold, restore, db);
  w += applyPSP(trace, outputNode, scaffold, restore, db);
  return w;
}

double unapplySP(Trace& trace, Node* outputNode, Scaffold& scaffold, OmegaDB& db) {
  double w = unapplyPSP(trace, outputNode, scaffold, db);
  for (auto it = outputNode->esrParents.rbegin(); it != outputNode->esrParents.rend(); ++it)
    w += extract(trace, it->get(), scaffold, db);
  w += unevalRequests(trace, outputNode->requestNode.get(), scaffold, db);
  w += unapplyPSP(trace, outputNode->requestNode.get(), scaffold, db);
  return w;
}

double unevalFamily(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db) {
  trace.visit();
  switch (node->kind) {
    case NodeKind::Constant:
      return 0.0;
    case NodeKind::Lookup:
      trace.logEvent('L', node);
      trace.disconnectLookup(node);
      return extract(trace, node->source.get(), scaffold, db);
    case NodeKind::Output: {
      if (node->numRequests > 0) throw DanglingRequest("family is still requested elsewhere");
      double w = unapplySP(trace, node, scaffold, db);
      for (auto it = node->operandNodes.rbegin(); it != node->operandNodes.rend(); ++it)
        w += unevalFamily(trace, it->get(), scaffold, db);
      w += unevalFamily(trace, node->operatorNode.get(), scaffold, db);
      return w;
    }
    case NodeKind::Request:
      throw TypeError("a request node is never a family root");
  }
  return 0.0;
}

double restoreFamily(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db) {
  trace.visit();
  switch (node->kind) {
    case NodeKind::Constant:
      return 0.0;
    case NodeKind::Lookup: {
      double w = regenerate(trace, node->source.get(), scaffold, true, db);
      trace.reconnectLookup(node);
      trace.logEvent('l', node);
      trace.setValue(node, node->source->value);
      return w;
    }
    case NodeKind::Output: {
      double w = restoreFamily(trace, node->operatorNode.get(), scaffold, db);
      for (const auto& o : node->operandNodes) w += restoreFamily(trace, o.get(), scaffold, db);
      w += applySP(trace, node->requestNode.get(), node, scaffold, true, db);
      return w;
    }
    case NodeKind::Request:
      throw TypeError("a request node is never a family root");
  }
  return 0.0;
}

}  // namespace venture
