#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "venture/rng.hpp"
#include "venture/sp.hpp"
#include "venture/value.hpp"

namespace venture {

enum class NodeKind : std::uint8_t { Constant, Lookup, Request, Output };

const char* nodeKindName(NodeKind k);

// Immutable chain of (scope, block) tags active where a node was created.
struct TagContext {
  Value scope;
  Value block;
  std::shared_ptr<const TagContext> next;
};
using TagPtr = std::shared_ptr<const TagContext>;

TagPtr extendTags(const TagPtr& tags, Value scope, Value block);

struct NodeIdLess {
  bool operator()(const Node* a, const Node* b) const;
};
using NodeSet = std::set<Node*, NodeIdLess>;

class Node : public std::enable_shared_from_this<Node> {
 public:
  Node(NodeId id, NodeKind kind) : id(id), kind(kind) {}

  const NodeId id;
  const NodeKind kind;

  Value value;
  bool hasValue = false;

  NodePtr source;                    // lookup
  NodePtr operatorNode;              // request, output
  std::vector<NodePtr> operandNodes; // request, output
  NodePtr requestNode;               // output
  Node* outputNode = nullptr;        // request
  std::vector<NodePtr> esrParents;   // output
  EnvPtr env;                        // request, output
  TagPtr tags;                       // request, output

  NodeSet children;
  int numRequests = 0;  // ESR edges into this family root

  bool isObservation = false;  // root of an OBSERVE directive
  Value observedValue;

  bool isRandomChoice = false;
  bool isConstrained = false;
  std::vector<std::pair<Value, Value>> scopeMemberships;

  // Definite parents followed by ESR parents.
  std::vector<Node*> parents() const;
  std::vector<Node*> definiteParents() const;
};

inline bool NodeIdLess::operator()(const Node* a, const Node* b) const { return a->id < b->id; }

// Vector-backed set with O(1) insert, erase and uniform selection.
template <typename T, typename Hash = std::hash<T>, typename Eq = std::equal_to<T>>
class IndexedSet {
 public:
  bool insert(const T& x) {
    if (index_.count(x)) return false;
    index_.emplace(x, items_.size());
    items_.push_back(x);
    return true;
  }
  bool erase(const T& x) {
    auto it = index_.find(x);
    if (it == index_.end()) return false;
    std::size_t i = it->second;
    index_.erase(it);
    if (i + 1 != items_.size()) {
      items_[i] = items_.back();
      index_[items_[i]] = i;
    }
    items_.pop_back();
    return true;
  }
  bool contains(const T& x) const { return index_.count(x) != 0; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const T& at(std::size_t i) const { return items_[i]; }
  const std::vector<T>& items() const { return items_; }

 private:
  std::vector<T> items_;
  std::unordered_map<T, std::size_t, Hash, Eq> index_;
};

struct ScopeBlocks {
  std::unordered_map<Value, IndexedSet<Node*>, ValueHash> blocks;
  IndexedSet<Value, ValueHash> keys;
};

struct TraceConfig {
  bool absorbAtApplications = true;  // AAA in the scaffold walk
  bool selectionCorrection = true;   // MH selection-probability factor
  bool driftKernel = false;          // random-walk proposals for normal choices
  double driftSigma = 0.5;
  long rejectionCap = 100000;        // attempts before ComputeBudgetExceeded
  double supportCap = 1e6;           // largest enumerated product
  double meanfieldA = 0.1;           // step size a / (b + t)
  double meanfieldB = 10.0;
  bool boltzmannPGibbs = false;      // select among all particles and always accept
};

struct TraceStats {
  std::uint64_t nodeVisits = 0;
  std::uint64_t transitions = 0;
  std::uint64_t accepted = 0;
  std::uint64_t scopeViolations = 0;
  std::uint64_t rejectionAttempts = 0;
  std::uint64_t restoreVisits = 0;  // part of nodeVisits spent undoing rejected MH proposals
};

struct MadeSPRecord {
  SPPtr sp;                    // null while torn down for AAA
  std::unique_ptr<SPAux> aux;
  Node* maker = nullptr;
};

class Trace {
 public:
  explicit Trace(Rng& rng, TraceConfig config = {});
  ~Trace();
  Trace(const Trace&) = delete;
  Trace& operator=(const Trace&) = delete;

  Rng& rng() { return *rng_; }
  TraceConfig& config() { return config_; }
  TraceStats& stats() { return stats_; }
  const EnvPtr& globalEnv() const { return globalEnv_; }

  // Node construction. Lookup and application nodes are linked into the
  // children sets of their parents.
  NodePtr createConstantNode(Value v);
  NodePtr createLookupNode(const NodePtr& source);
  std::pair<NodePtr, NodePtr> createApplicationNodes(const NodePtr& op, const std::vector<NodePtr>& operands,
                                                     const EnvPtr& env, const TagPtr& tags);
  void disconnectLookup(Node* lookup);
  void reconnectLookup(Node* lookup);
  void addESREdge(const NodePtr& root, Node* output);
  NodePtr popLastESRParent(Node* output);

  void setValue(Node* n, Value v);
  void clearValue(Node* n);

  // SP access for application nodes.
  const SP& spAt(const Node* app) const;
  NodeId operatorMakerId(const Node* app) const;
  const PSP& pspAt(const Node* app) const;
  SPAux* spauxAt(const Node* app);
  Args argsAt(Node* app);

  // Made-SP registry, keyed by maker node id.
  MadeSPRecord* madeRecord(NodeId maker);
  const MadeSPRecord* madeRecord(NodeId maker) const;
  MadeSPRecord& ensureMadeRecord(Node* maker);
  void eraseMadeRecord(NodeId maker);
  const std::unordered_map<NodeId, MadeSPRecord>& madeRecords() const { return madeSPs_; }

  // Random choice and constraint registries.
  void registerRandomChoice(Node* n);
  void unregisterRandomChoice(Node* n);
  void registerConstrainedChoice(Node* n);
  void unregisterConstrainedChoice(Node* n);
  const IndexedSet<Node*>& randomChoices() const { return randomChoices_; }
  const IndexedSet<Node*>& unconstrainedChoices() const { return unconstrained_; }
  std::size_t numConstrained() const { return randomChoices_.size() - unconstrained_.size(); }
  const std::map<Value, ScopeBlocks, ValueLess>& scopes() const { return scopes_; }
  const ScopeBlocks* scope(const Value& s) const;

  void registerAEKernel(Node* maker) { aeNodes_.insert(maker); }
  void unregisterAEKernel(Node* maker) { aeNodes_.erase(maker); }
  const IndexedSet<Node*>& aeKernelNodes() const { return aeNodes_; }

  // Directive roots, keyed by directive index.
  void addRoot(long id, NodePtr root) { roots_[id] = std::move(root); }
  void removeRoot(long id) { roots_.erase(id); }
  const std::map<long, NodePtr>& roots() const { return roots_; }

  // All nodes reachable from directive roots, ordered by id.
  std::vector<Node*> liveNodes() const;

  std::string toDot(const class Scaffold* scaffold = nullptr) const;
  nlohmann::json summary() const;

  void visit() { ++stats_.nodeVisits; }
  // Optional event log used by ordering tests: (event, node id).
  std::vector<std::pair<char, NodeId>>* eventLog = nullptr;
  void logEvent(char e, const Node* n) {
    if (eventLog) eventLog->emplace_back(e, n->id);
  }

  NodeId peekNextId() const { return nextId_; }

 private:
  NodePtr newNode(NodeKind k);

  Rng* rng_;
  TraceConfig config_;
  TraceStats stats_;
  NodeId nextId_ = 1;
  EnvPtr globalEnv_;
  std::unordered_map<NodeId, MadeSPRecord> madeSPs_;
  IndexedSet<Node*> randomChoices_;
  IndexedSet<Node*> unconstrained_;
  std::map<Value, ScopeBlocks, ValueLess> scopes_;
  IndexedSet<Node*> aeNodes_;
  std::map<long, NodePtr> roots_;
};

// Installs every builtin SP into the global environment of the trace.
void installBuiltins(Trace& trace);

}  // namespace venture
