#pragma once

#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "venture/trace.hpp"

namespace venture {

// Partition of the trace induced by a set of principal nodes: the DRG is
// resampled, absorbing nodes rescore, AAA makers keep their statistics and
// the brush is re-evaluated from scratch.
class Scaffold {
 public:
  std::vector<std::vector<Node*>> principals;
  std::unordered_set<Node*> principalNodes;
  std::unordered_set<Node*> drg;
  std::unordered_set<Node*> absorbing;
  std::unordered_set<Node*> aaa;
  std::unordered_set<Node*> brush;
  std::vector<std::vector<Node*>> border;  // one group per principal set, ordered by id
  std::unordered_map<Node*, int> regenCounts;
  std::unordered_map<Node*, std::shared_ptr<LKernel>> kernels;

  bool isResampling(Node* n) const { return drg.count(n) != 0; }
  bool isAbsorbing(Node* n) const { return absorbing.count(n) != 0; }
  bool isAAA(Node* n) const { return aaa.count(n) != 0; }
  bool isBrush(Node* n) const { return brush.count(n) != 0; }
  // Only resampled nodes propose through a kernel; brush is simulated fresh.
  LKernel* kernel(Node* n) const {
    if (!isResampling(n)) return nullptr;
    auto it = kernels.find(n);
    return it == kernels.end() ? nullptr : it->second.get();
  }
  std::vector<Node*> flatBorder() const;
  nlohmann::json toJson() const;
};

// Builds the scaffold for the given principal sets, one border group per set.
// Loads AAA kernels; principal kernels are attached by the caller.
Scaffold constructScaffold(Trace& trace, const std::vector<std::vector<Node*>>& principalSets);

}  // namespace venture
