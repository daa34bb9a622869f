#pragma once

#include <vector>

#include "venture/regen.hpp"
#include "venture/syntax.hpp"

namespace venture {

// Principal sets chosen for one transition and the log-probability of that
// choice under the current trace.
struct Selection {
  Value scope;
  BlockSpec block;
  Value chosenBlock;  // set for `one` and literal selections
  std::vector<std::vector<Node*>> sets;
  double logProb = 0.0;
  bool empty() const;
};

Selection selectPrincipals(Trace& trace, const Value& scope, const BlockSpec& block);
// Log-probability of selecting `sel` again from the current trace.
double reselectionLogProb(Trace& trace, const Selection& sel);

bool mhTransition(Trace& trace, const Value& scope, const BlockSpec& block);
void rejectionTransition(Trace& trace, const Value& scope, const BlockSpec& block);
bool enumerativeGibbsTransition(Trace& trace, const Value& scope, const BlockSpec& block);
bool pgibbsTransition(Trace& trace, const Value& scope, const BlockSpec& block, long particles, bool functional);

struct MeanFieldResult {
  bool accepted = false;
  // Learned parameters per principal node with a variational family.
  std::vector<std::pair<NodeId, std::vector<double>>> parameters;
};
MeanFieldResult meanfieldTransition(Trace& trace, const Value& scope, const BlockSpec& block, long iterations);

// Runs an AE kernel on a uniformly chosen maker, `times` times.
void latentsTransition(Trace& trace, long times);

void runInference(Trace& trace, const InferenceExpr& expr);

}  // namespace venture
