#include "venture/scaffold.hpp"

#include <algorithm>
#include <unordered_map>

#include "venture/errors.hpp"

namespace venture {

namespace {

ParentRole roleOf(const Node* node, const Node* parent) {
  if (node->operatorNode.get() == parent) return ParentRole::Operator;
  for (const auto& p : node->esrParents)
    if (p.get() == parent) return ParentRole::ESR;
  if (node->requestNode.get() == parent) return ParentRole::Request;
  return ParentRole::Operand;
}

struct Walk {
  explicit Walk(Trace& t) : trace(t) {}
  Trace& trace;
  std::unordered_set<Node*> drg, absorbing, aaa;
  std::unordered_map<Node*, int> index;
  struct Item {
    Node* node;
    bool principal;
    Node* parent;
  };
  std::vector<Item> stack;

  void assign(Node* n, int i) { index.emplace(n, i); }

  void addResampling(Node* n, int i) {
    absorbing.erase(n);
    aaa.erase(n);
    drg.insert(n);
    assign(n, i);
    for (Node* c : n->children) stack.push_back({c, false, n});
  }
  void addAbsorbing(Node* n, int i) {
    absorbing.insert(n);
    assign(n, i);
  }
  void addAAA(Node* n, int i) {
    absorbing.erase(n);
    drg.insert(n);
    aaa.insert(n);
    assign(n, i);
  }

  // Requests never absorb a changed operator, and neither do outputs: the
  // new procedure may not even share a density with the old one.
  bool canAbsorb(Node* node, ParentRole role) {
    if (role == ParentRole::Operator) return false;
    return trace.pspAt(node).canAbsorb(role);
  }

  void run(const std::vector<Node*>& principals, int i) {
    bool useAAA = trace.config().absorbAtApplications;
    for (Node* p : principals) stack.push_back({p, true, nullptr});
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      Node* node = it.node;
      trace.visit();
      if (drg.count(node) && !aaa.count(node)) continue;
      if (it.principal) {
        if (useAAA && node->kind == NodeKind::Output && trace.pspAt(node).childrenCanAAA())
          addAAA(node, i);
        else
          addResampling(node, i);
        continue;
      }
      ParentRole role = roleOf(node, it.parent);
      if (aaa.count(node)) {
        if (role != ParentRole::Operand) addResampling(node, i);
        continue;
      }
      if (node->kind == NodeKind::Lookup || node->kind == NodeKind::Constant) {
        addResampling(node, i);
        continue;
      }
      if (canAbsorb(node, role)) {
        addAbsorbing(node, i);
        continue;
      }
      if (!absorbing.count(node) && role == ParentRole::Operand && useAAA && node->kind == NodeKind::Output &&
          trace.pspAt(node).childrenCanAAA()) {
        addAAA(node, i);
        continue;
      }
      addResampling(node, i);
    }
  }
};

struct Brush {
  std::unordered_map<Node*, int> disableCounts;
  std::unordered_set<Node*> disabledRequests;
  std::unordered_set<Node*> brush;

  void disableRequests(Node* req) {
    if (!disabledRequests.insert(req).second) return;
    for (const auto& p : req->outputNode->esrParents) {
      int& c = disableCounts[p.get()];
      ++c;
      if (c == p->numRequests) disableFamily(p.get());
    }
  }

  void disableFamily(Node* n) {
    if (!brush.insert(n).second) return;
    if (n->kind != NodeKind::Output) return;
    brush.insert(n->requestNode.get());
    disableRequests(n->requestNode.get());
    disableFamily(n->operatorNode.get());
    for (const auto& o : n->operandNodes) disableFamily(o.get());
  }
};

std::vector<Node*> sortedById(const std::unordered_set<Node*>& s) {
  std::vector<Node*> v(s.begin(), s.end());
  std::sort(v.begin(), v.end(), NodeIdLess());
  return v;
}

Node* aaaMaker(Trace& trace, Node* node, const std::unordered_set<Node*>& aaa) {
  if (!node->hasValue || !node->value.isSPRef() || node->value.asSPRef() == node->id) return nullptr;
  const MadeSPRecord* rec = trace.madeRecord(node->value.asSPRef());
  if (!rec || !rec->maker || !aaa.count(rec->maker)) return nullptr;
  return rec->maker;
}

// A constrained node may be resampled only if an observation rooted on it
// is resampled too, since that re-imposes the observed value.
bool reconstrained(Trace& trace, Node* node, const std::unordered_set<Node*>& drg) {
  std::vector<Node*> stack{node};
  std::unordered_set<Node*> seen;
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->isObservation && drg.count(n)) return true;
    for (Node* c : n->children) {
      if (c->kind == NodeKind::Lookup) stack.push_back(c);
      else if (c->kind == NodeKind::Output && !c->esrParents.empty() && c->esrParents[0].get() == n &&
               c->hasValue && trace.pspAt(c).isESRReference())
        stack.push_back(c);
    }
  }
  return false;
}

}  // namespace

std::vector<Node*> Scaffold::flatBorder() const {
  std::vector<Node*> out;
  for (const auto& g : border) out.insert(out.end(), g.begin(), g.end());
  return out;
}

nlohmann::json Scaffold::toJson() const {
  using nlohmann::json;
  auto ids = [](const std::unordered_set<Node*>& s) {
    json a = json::array();
    for (Node* n : sortedById(s)) a.push_back(n->id);
    return a;
  };
  json groups = json::array();
  for (const auto& g : border) {
    json a = json::array();
    for (Node* n : g) a.push_back(n->id);
    groups.push_back(a);
  }
  json counts = json::object();
  std::vector<Node*> keys;
  for (const auto& [n, c] : regenCounts) keys.push_back(n);
  std::sort(keys.begin(), keys.end(), NodeIdLess());
  for (Node* n : keys) counts[std::to_string(n->id)] = regenCounts.at(n);
  json principalIds = json::array();
  for (const auto& set : principals) {
    json a = json::array();
    for (Node* n : set) a.push_back(n->id);
    principalIds.push_back(a);
  }
  return json{{"principals", principalIds}, {"drg", ids(drg)},       {"absorbing", ids(absorbing)},
              {"aaa", ids(aaa)},            {"brush", ids(brush)},   {"border", groups},
              {"regenCounts", counts}};
}

Scaffold constructScaffold(Trace& trace, const std::vector<std::vector<Node*>>& principalSets) {
  Walk walk{trace};
  for (std::size_t i = 0; i < principalSets.size(); ++i) walk.run(principalSets[i], static_cast<int>(i));

  Brush b;
  for (Node* n : sortedById(walk.drg))
    if (n->kind == NodeKind::Request) b.disableRequests(n);

  Scaffold s;
  s.principals = principalSets;
  for (const auto& set : principalSets) s.principalNodes.insert(set.begin(), set.end());
  s.brush = std::move(b.brush);
  for (Node* n : walk.drg)
    if (!s.brush.count(n)) s.drg.insert(n);
  for (Node* n : walk.absorbing)
    if (!s.brush.count(n)) s.absorbing.insert(n);
  for (Node* n : walk.aaa)
    if (!s.brush.count(n)) s.aaa.insert(n);

  for (Node* n : sortedById(s.drg))
    if (n->isConstrained && !s.aaa.count(n) && !reconstrained(trace, n, s.drg))
      throw CannotAbsorb("observed node " + std::to_string(n->id) + " would have to be resampled");

  std::unordered_set<Node*> border(s.absorbing.begin(), s.absorbing.end());
  for (Node* n : s.drg) {
    if (s.aaa.count(n)) {
      border.insert(n);
      continue;
    }
    bool leaf = true;
    for (Node* c : n->children)
      if (s.drg.count(c) || s.absorbing.count(c)) leaf = false;
    if (leaf) border.insert(n);
  }
  s.border.assign(principalSets.size(), {});
  for (Node* n : sortedById(border)) {
    auto it = walk.index.find(n);
    s.border[it == walk.index.end() ? 0 : it->second].push_back(n);
  }

  // Regeneration counts equal the number of extract calls each resampled
  // node receives while the current trace is detached.
  for (Node* n : s.drg) s.regenCounts[n] = 0;
  auto addExtract = [&](Node* n) {
    if (s.drg.count(n)) ++s.regenCounts[n];
    if (Node* m = aaaMaker(trace, n, s.aaa)) ++s.regenCounts[m];
  };
  for (Node* n : border)
    if (!s.absorbing.count(n)) addExtract(n);
  for (auto* set : {&s.drg, &s.absorbing})
    for (Node* n : *set)
      for (Node* p : n->parents()) addExtract(p);
  for (Node* n : s.brush) {
    if (n->kind == NodeKind::Lookup) addExtract(n->source.get());
    if (n->kind == NodeKind::Output)
      for (const auto& p : n->esrParents) addExtract(p.get());
  }

  for (Node* n : s.aaa) s.kernels[n] = std::make_shared<AAAKernel>(&trace.pspAt(n));
  return s;
}

}  // namespace venture
