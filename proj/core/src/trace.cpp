#include "venture/trace.hpp"

#include <algorithm>

#include "venture/errors.hpp"

namespace venture {

const char* nodeKindName(NodeKind k) {
  switch (k) {
    case NodeKind::Constant: return "constant";
    case NodeKind::Lookup: return "lookup";
    case NodeKind::Request: return "request";
    case NodeKind::Output: return "output";
  }
  return "?";
}

TagPtr extendTags(const TagPtr& tags, Value scope, Value block) {
  return std::make_shared<const TagContext>(TagContext{std::move(scope), std::move(block), tags});
}

std::vector<Node*> Node::definiteParents() const {
  std::vector<Node*> out;
  switch (kind) {
    case NodeKind::Constant: break;
    case NodeKind::Lookup: out.push_back(source.get()); break;
    case NodeKind::Request:
      out.push_back(operatorNode.get());
      for (const auto& o : operandNodes) out.push_back(o.get());
      break;
    case NodeKind::Output:
      out.push_back(operatorNode.get());
      for (const auto& o : operandNodes) out.push_back(o.get());
      out.push_back(requestNode.get());
      break;
  }
  return out;
}

std::vector<Node*> Node::parents() const {
  auto out = definiteParents();
  for (const auto& p : esrParents) out.push_back(p.get());
  return out;
}

Trace::Trace(Rng& rng, TraceConfig config) : rng_(&rng), config_(config) {
  globalEnv_ = std::make_shared<Environment>();
  installBuiltins(*this);
}

Trace::~Trace() {
  // Application nodes hold their environment and the global frame holds
  // application nodes, so break the cycle explicitly.
  roots_.clear();
  madeSPs_.clear();
  globalEnv_->clear();
}

NodePtr Trace::newNode(NodeKind k) { return std::make_shared<Node>(nextId_++, k); }

NodePtr Trace::createConstantNode(Value v) {
  auto n = newNode(NodeKind::Constant);
  n->value = std::move(v);
  n->hasValue = true;
  return n;
}

NodePtr Trace::createLookupNode(const NodePtr& source) {
  auto n = newNode(NodeKind::Lookup);
  n->source = source;
  source->children.insert(n.get());
  n->value = source->value;
  n->hasValue = true;
  return n;
}

std::pair<NodePtr, NodePtr> Trace::createApplicationNodes(const NodePtr& op, const std::vector<NodePtr>& operands,
                                                          const EnvPtr& env, const TagPtr& tags) {
  auto req = newNode(NodeKind::Request);
  auto out = newNode(NodeKind::Output);
  req->operatorNode = op;
  req->operandNodes = operands;
  req->env = env;
  req->tags = tags;
  req->outputNode = out.get();
  out->operatorNode = op;
  out->operandNodes = operands;
  out->requestNode = req;
  out->env = env;
  out->tags = tags;
  op->children.insert(req.get());
  op->children.insert(out.get());
  for (const auto& o : operands) {
    o->children.insert(req.get());
    o->children.insert(out.get());
  }
  req->children.insert(out.get());
  return {req, out};
}

void Trace::disconnectLookup(Node* lookup) { lookup->source->children.erase(lookup); }
void Trace::reconnectLookup(Node* lookup) { lookup->source->children.insert(lookup); }

void Trace::addESREdge(const NodePtr& root, Node* output) {
  output->esrParents.push_back(root);
  root->children.insert(output);
  ++root->numRequests;
}

NodePtr Trace::popLastESRParent(Node* output) {
  NodePtr root = output->esrParents.back();
  output->esrParents.pop_back();
  root->children.erase(output);
  --root->numRequests;
  return root;
}

void Trace::setValue(Node* n, Value v) {
  n->value = std::move(v);
  n->hasValue = true;
}

void Trace::clearValue(Node* n) {
  n->value = Value();
  n->hasValue = false;
}

NodeId Trace::operatorMakerId(const Node* app) const {
  const Value& v = app->operatorNode->value;
  if (!v.isSPRef()) throw TypeError("operator is not a procedure: " + v.toString());
  return v.asSPRef();
}

const SP& Trace::spAt(const Node* app) const {
  const MadeSPRecord* rec = madeRecord(operatorMakerId(app));
  if (!rec || !rec->sp) throw TypeError("operator refers to a procedure that no longer exists");
  return *rec->sp;
}

const PSP& Trace::pspAt(const Node* app) const {
  const SP& sp = spAt(app);
  return app->kind == NodeKind::Request ? sp.requestPSP() : sp.outputPSP();
}

SPAux* Trace::spauxAt(const Node* app) {
  MadeSPRecord* rec = madeRecord(operatorMakerId(app));
  return rec ? rec->aux.get() : nullptr;
}

Args Trace::argsAt(Node* app) {
  Args a;
  a.trace = this;
  a.node = app;
  a.env = app->env;
  a.operandNodes.reserve(app->operandNodes.size());
  a.operandValues.reserve(app->operandNodes.size());
  for (const auto& o : app->operandNodes) {
    a.operandNodes.push_back(o.get());
    a.operandValues.push_back(o->value);
  }
  if (app->kind == NodeKind::Output) {
    a.requestNodeId = app->requestNode->id;
    for (const auto& p : app->esrParents) a.esrValues.push_back(p->value);
    if (app->requestNode->hasValue && app->requestNode->value.isRequest())
      a.request = app->requestNode->value.asRequest().get();
  } else {
    a.requestNodeId = app->id;
  }
  a.spaux = spauxAt(app);
  if (auto* rec = madeRecord(app->id)) a.madeSPAux = rec->aux.get();
  return a;
}

MadeSPRecord* Trace::madeRecord(NodeId maker) {
  auto it = madeSPs_.find(maker);
  return it == madeSPs_.end() ? nullptr : &it->second;
}

const MadeSPRecord* Trace::madeRecord(NodeId maker) const {
  auto it = madeSPs_.find(maker);
  return it == madeSPs_.end() ? nullptr : &it->second;
}

MadeSPRecord& Trace::ensureMadeRecord(Node* maker) {
  auto& rec = madeSPs_[maker->id];
  rec.maker = maker;
  return rec;
}

void Trace::eraseMadeRecord(NodeId maker) { madeSPs_.erase(maker); }

void Trace::registerRandomChoice(Node* n) {
  if (n->isRandomChoice) return;
  n->isRandomChoice = true;
  randomChoices_.insert(n);
  if (!n->isConstrained) unconstrained_.insert(n);
  std::vector<Value> seen;
  for (const TagContext* t = n->tags.get(); t; t = t->next.get()) {
    bool dup = false;
    for (const auto& s : seen)
      if (s == t->scope) dup = true;
    if (dup) continue;  // innermost tag per scope wins
    seen.push_back(t->scope);
    auto& sb = scopes_[t->scope];
    auto it = sb.blocks.find(t->block);
    if (it == sb.blocks.end()) {
      it = sb.blocks.emplace(t->block, IndexedSet<Node*>()).first;
      sb.keys.insert(t->block);
    }
    it->second.insert(n);
    n->scopeMemberships.emplace_back(t->scope, t->block);
  }
}

void Trace::unregisterRandomChoice(Node* n) {
  if (!n->isRandomChoice) return;
  n->isRandomChoice = false;
  randomChoices_.erase(n);
  unconstrained_.erase(n);
  for (const auto& [scope, block] : n->scopeMemberships) {
    auto sit = scopes_.find(scope);
    if (sit == scopes_.end()) continue;
    auto& sb = sit->second;
    auto bit = sb.blocks.find(block);
    if (bit == sb.blocks.end()) continue;
    bit->second.erase(n);
    if (bit->second.empty()) {
      sb.blocks.erase(bit);
      sb.keys.erase(block);
    }
    if (sb.blocks.empty()) scopes_.erase(sit);
  }
  n->scopeMemberships.clear();
}

void Trace::registerConstrainedChoice(Node* n) {
  n->isConstrained = true;
  unconstrained_.erase(n);
}

void Trace::unregisterConstrainedChoice(Node* n) {
  n->isConstrained = false;
  if (n->isRandomChoice) unconstrained_.insert(n);
}

const ScopeBlocks* Trace::scope(const Value& s) const {
  auto it = scopes_.find(s);
  return it == scopes_.end() ? nullptr : &it->second;
}

std::vector<Node*> Trace::liveNodes() const {
  NodeSet seen;
  std::vector<Node*> stack;
  for (const auto& [id, root] : roots_) stack.push_back(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!n || !seen.insert(n).second) continue;
    for (Node* p : n->parents()) stack.push_back(p);
  }
  return {seen.begin(), seen.end()};
}

nlohmann::json Trace::summary() const {
  using nlohmann::json;
  json scopes = json::object();
  for (const auto& [scope, sb] : scopes_) {
    json blocks = json::object();
    std::vector<Value> keys = sb.keys.items();
    std::sort(keys.begin(), keys.end(), ValueLess());
    for (const auto& k : keys) blocks[k.toString()] = sb.blocks.at(k).size();
    scopes[scope.toString()] = blocks;
  }
  return json{{"nodeCount", liveNodes().size()},
              {"randomChoiceCount", randomChoices_.size()},
              {"constrainedCount", numConstrained()},
              {"scopes", scopes}};
}

}  // namespace venture
