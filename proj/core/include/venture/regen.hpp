#pragma once

#include <memory>
#include <unordered_map>

#include "venture/scaffold.hpp"
#include "venture/trace.hpp"

namespace venture {

// Everything removed by a detach, sufficient to restore the trace exactly.
class OmegaDB {
 public:
  bool hasValue(NodeId id) const { return values_.count(id) != 0; }
  const Value* value(NodeId id) const {
    auto it = values_.find(id);
    return it == values_.end() ? nullptr : &it->second;
  }
  void extractValue(NodeId id, Value v) { values_[id] = std::move(v); }

  NodePtr family(NodeId maker, const Value& addr) const;
  void registerFamily(NodeId maker, const Value& addr, NodePtr root);

  LatentDB* latentDB(NodeId maker) const;
  void registerLatentDB(NodeId maker, std::unique_ptr<LatentDB> db);

  std::size_t numValues() const { return values_.size(); }
  std::size_t numFamilies() const { return families_.size(); }

 private:
  struct Key {
    NodeId maker;
    Value addr;
    bool operator==(const Key& o) const { return maker == o.maker && addr == o.addr; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return k.addr.hash() * 31 + k.maker; }
  };
  std::unordered_map<NodeId, Value> values_;
  std::unordered_map<Key, NodePtr, KeyHash> families_;
  std::unordered_map<NodeId, std::shared_ptr<LatentDB>> latentDBs_;
};

// Evaluator.
double evalFamily(Trace& trace, const Value& expr, const EnvPtr& env, const TagPtr& tags, Scaffold& scaffold,
                  OmegaDB& db, NodePtr& out);
double unevalFamily(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db);
double restoreFamily(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db);
double applySP(Trace& trace, Node* requestNode, Node* outputNode, Scaffold& scaffold, bool restore, OmegaDB& db);
double unapplySP(Trace& trace, Node* outputNode, Scaffold& scaffold, OmegaDB& db);

// Regeneration and detachment over a scaffold border.
double regenerate(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db);
double extract(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db);
double regenerateAndAttach(Trace& trace, const std::vector<Node*>& border, Scaffold& scaffold, bool restore,
                           OmegaDB& db);
double detachAndExtract(Trace& trace, const std::vector<Node*>& border, Scaffold& scaffold, OmegaDB& db);

// Observations. The target is reached by following lookups and ESR
// references back from the root.
Node* observationTarget(Trace& trace, Node* root);
// Returns log p(value); during regeneration a deterministic mismatch yields
// -inf instead of throwing.
double constrain(Trace& trace, Node* root, const Value& value, bool duringRegen = false);
double unconstrain(Trace& trace, Node* root);

}  // namespace venture
