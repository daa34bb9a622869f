#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "venture/regen.hpp"

using namespace venture;
using namespace venture::testing;

TEST_CASE("observing a random choice fixes its value") {
  Engine e(1);
  e.run("[ASSUME x (normal 0 1)]\n[OBSERVE (normal x 1) 2.0]");
  Node* obs = e.trace().roots().at(2).get();
  Node* target = observationTarget(e.trace(), obs);
  CHECK(target->value == Value::number(2.0));
  CHECK(target->isConstrained);
  CHECK(e.trace().numConstrained() == 1);
  CHECK(e.trace().unconstrainedChoices().size() == 1);
}

TEST_CASE("observations through lookups reach the choice") {
  Engine e(2);
  e.run("[ASSUME b (bernoulli 0.3)]\n[OBSERVE b True]");
  CHECK(predict(e, "b") == Value::boolean(true));
  Node* target = observationTarget(e.trace(), e.trace().roots().at(2).get());
  CHECK(target == e.trace().roots().at(1).get());
}

TEST_CASE("unconstrain returns the log density and frees the choice") {
  Engine e(3);
  e.run("[ASSUME x (normal 0 1)]\n[OBSERVE (normal x 2) 1.0]");
  Node* obs = e.trace().roots().at(2).get();
  double x = e.trace().roots().at(1)->value.asNumber();
  double w = unconstrain(e.trace(), obs);
  double expect = -0.5 * std::log(2 * M_PI * 4) - (1.0 - x) * (1.0 - x) / 8;
  CHECK(w == doctest::Approx(expect).epsilon(1e-12));
  CHECK(e.trace().numConstrained() == 0);
  CHECK(constrain(e.trace(), obs, Value::number(1.0)) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("deterministic observations") {
  Engine e(4);
  CHECK(errorKind([&] { e.execute("[OBSERVE 3 4]"); }) == "InvalidObservation");
  e.execute("[OBSERVE 3 3]");
  // a deterministic function of a discrete choice: whole-program retries
  e.run("[ASSUME b (bernoulli 0.5)]\n[OBSERVE (not b) True]");
  CHECK(predict(e, "b") == Value::boolean(false));
  // a continuous one can never be met exactly
  Engine f(5);
  f.retryCap = 5;
  CHECK(errorKind([&] { f.run("[ASSUME x (normal 0 1)]\n[OBSERVE (+ x 1) 2]"); }) == "ComputeBudgetExceeded");
}

TEST_CASE("impossible observations of a random choice") {
  Engine e(6);
  Args args;
  args.operandValues = {Value::number(0.5)};
  CHECK(std::isinf(builtin(e.trace(), "bernoulli").outputPSP().logDensity(Value::number(2), args)));
  args.operandValues = {Value::number(1), Value::number(1)};
  CHECK(std::isinf(builtin(e.trace(), "beta").outputPSP().logDensity(Value::number(1.5), args)));
}
