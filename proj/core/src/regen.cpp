#include "venture/regen.hpp"

#include "evaluator_internal.hpp"
#include "venture/errors.hpp"

namespace venture {

using namespace detail;

NodePtr OmegaDB::family(NodeId maker, const Value& addr) const {
  auto it = families_.find(Key{maker, addr});
  return it == families_.end() ? nullptr : it->second;
}

void OmegaDB::registerFamily(NodeId maker, const Value& addr, NodePtr root) {
  families_[Key{maker, addr}] = std::move(root);
}

LatentDB* OmegaDB::latentDB(NodeId maker) const {
  auto it = latentDBs_.find(maker);
  return it == latentDBs_.end() ? nullptr : it->second.get();
}

void OmegaDB::registerLatentDB(NodeId maker, std::unique_ptr<LatentDB> db) {
  latentDBs_[maker] = std::shared_ptr<LatentDB>(std::move(db));
}

namespace {

// The made SP behind an SPRef value, when its maker absorbs at applications.
Node* aaaMakerOf(Trace& trace, Node* node, Scaffold& scaffold) {
  if (!node->hasValue || !node->value.isSPRef()) return nullptr;
  NodeId maker = node->value.asSPRef();
  if (maker == node->id) return nullptr;
  const MadeSPRecord* rec = trace.madeRecord(maker);
  if (!rec || !rec->maker || !scaffold.isAAA(rec->maker)) return nullptr;
  return rec->maker;
}

// ESR parents are read after the request node is regenerated, since that
// is where they get attached.
double regenerateParents(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db) {
  double w = 0;
  for (Node* p : node->definiteParents()) w += regenerate(trace, p, scaffold, restore, db);
  for (std::size_t i = 0; i < node->esrParents.size(); ++i)
    w += regenerate(trace, node->esrParents[i].get(), scaffold, restore, db);
  return w;
}

double extractParents(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db) {
  double w = 0;
  std::vector<NodePtr> esr = node->esrParents;
  for (auto it = esr.rbegin(); it != esr.rend(); ++it) w += extract(trace, it->get(), scaffold, db);
  auto parents = node->definiteParents();
  for (auto it = parents.rbegin(); it != parents.rend(); ++it) w += extract(trace, *it, scaffold, db);
  return w;
}

double attach(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db) {
  trace.visit();
  double w = regenerateParents(trace, node, scaffold, restore, db);
  const PSP& psp = trace.pspAt(node);
  Args args = trace.argsAt(node);
  w += psp.logDensity(node->value, args);
  psp.incorporate(node->value, args);
  return w;
}

double detach(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db) {
  trace.visit();
  const PSP& psp = trace.pspAt(node);
  Args args = trace.argsAt(node);
  psp.unincorporate(node->value, args);
  double w = psp.logDensity(node->value, args);
  w += extractParents(trace, node, scaffold, db);
  return w;
}

}  // namespace

double regenerate(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db) {
  double w = 0;
  if (scaffold.isResampling(node)) {
    int& count = scaffold.regenCounts[node];
    if (count == 0) {
      trace.visit();
      w += regenerateParents(trace, node, scaffold, restore, db);
      if (node->kind == NodeKind::Lookup) {
        trace.setValue(node, node->source->value);
      } else {
        w += applyPSP(trace, node, scaffold, restore, db);
        if (node->kind == NodeKind::Request) w += evalRequests(trace, node, scaffold, restore, db);
      }
    }
    ++scaffold.regenCounts[node];
  }
  if (Node* maker = aaaMakerOf(trace, node, scaffold)) w += regenerate(trace, maker, scaffold, restore, db);
  return w;
}

double extract(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db) {
  double w = 0;
  if (Node* maker = aaaMakerOf(trace, node, scaffold)) w += extract(trace, maker, scaffold, db);
  if (scaffold.isResampling(node)) {
    int& count = scaffold.regenCounts[node];
    --count;
    if (count < 0) throw VentureError("InternalError", "regeneration count underflow at node " + std::to_string(node->id));
    if (count == 0) {
      trace.visit();
      if (node->kind == NodeKind::Lookup) {
        trace.clearValue(node);
      } else {
        if (node->kind == NodeKind::Request) w += unevalRequests(trace, node, scaffold, db);
        w += unapplyPSP(trace, node, scaffold, db);
      }
      w += extractParents(trace, node, scaffold, db);
    }
  }
  return w;
}

double regenerateAndAttach(Trace& trace, const std::vector<Node*>& border, Scaffold& scaffold, bool restore,
                           OmegaDB& db) {
  double w = 0;
  for (Node* node : border) {
    if (scaffold.isAbsorbing(node)) {
      w += attach(trace, node, scaffold, restore, db);
    } else {
      w += regenerate(trace, node, scaffold, restore, db);
      if (node->isObservation) w += constrain(trace, node, node->observedValue, true);
    }
  }
  return w;
}

double detachAndExtract(Trace& trace, const std::vector<Node*>& border, Scaffold& scaffold, OmegaDB& db) {
  double w = 0;
  for (auto it = border.rbegin(); it != border.rend(); ++it) {
    Node* node = *it;
    if (scaffold.isAbsorbing(node)) {
      w += detach(trace, node, scaffold, db);
    } else {
      if (node->isObservation) w += unconstrain(trace, node);
      w += extract(trace, node, scaffold, db);
    }
  }
  return w;
}

}  // namespace venture
