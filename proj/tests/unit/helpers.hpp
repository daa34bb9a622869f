#pragma once

#include <functional>
#include <string>

#include "venture/engine.hpp"
#include "venture/errors.hpp"

namespace venture::testing {

// Kind tag of the error thrown by `f`, or "" if nothing was thrown.
inline std::string errorKind(const std::function<void()>& f) {
  try {
    f();
  } catch (const VentureError& e) {
    return e.kind();
  }
  return "";
}

inline const SP& builtin(Trace& t, const std::string& name) {
  return *t.madeRecord(t.globalEnv()->lookup(name)->value.asSPRef())->sp;
}

inline Value predict(Engine& e, const std::string& expr) {
  auto r = e.execute("[PREDICT " + expr + "]");
  e.execute("[FORGET " + std::to_string(r.index) + "]");
  return *r.value;
}

}  // namespace venture::testing
