#pragma once

#include "venture/regen.hpp"

namespace venture::detail {

// Single-node steps shared by the evaluator and regeneration.
double applyPSP(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db);
double unapplyPSP(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db);
double evalRequests(Trace& trace, Node* node, Scaffold& scaffold, bool restore, OmegaDB& db);
double unevalRequests(Trace& trace, Node* node, Scaffold& scaffold, OmegaDB& db);

}  // namespace venture::detail
