#include <sstream>

#include "venture/scaffold.hpp"
#include "venture/trace.hpp"

namespace venture {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string label(const Node* n) {
  std::string v = n->hasValue ? n->value.toString() : "-";
  if (v.size() > 24) v = v.substr(0, 21) + "...";
  return std::to_string(n->id) + " " + nodeKindName(n->kind) + "\\n" + escape(v);
}

}  // namespace

std::string Trace::toDot(const Scaffold* scaffold) const {
  std::ostringstream os;
  os << "digraph trace {\n  node [shape=box, fontsize=10];\n";
  for (Node* n : liveNodes()) {
    const char* color = "white";
    if (scaffold) {
      Node* m = n;
      if (scaffold->isAAA(m)) color = "orange";
      else if (scaffold->isResampling(m)) color = "red";
      else if (scaffold->isAbsorbing(m)) color = "yellow";
      else if (scaffold->isBrush(m)) color = "gray";
    }
    os << "  n" << n->id << " [label=\"" << label(n) << "\", style=filled, fillcolor=" << color;
    if (n->isConstrained) os << ", penwidth=3";
    os << "];\n";
    for (Node* p : n->definiteParents()) os << "  n" << p->id << " -> n" << n->id << ";\n";
    for (const auto& p : n->esrParents) os << "  n" << p->id << " -> n" << n->id << " [style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace venture
