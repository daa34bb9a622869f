#include "doctest.h"
#include "helpers.hpp"

using namespace venture;
using namespace venture::testing;

TEST_CASE("directive indices and values") {
  Engine e(1);
  auto r = e.execute("[ASSUME x 3]");
  CHECK(r.index == 1);
  CHECK(*r.value == Value::number(3));
  auto p = e.execute("[PREDICT (+ x 1)]");
  CHECK(p.index == 2);
  CHECK(*p.value == Value::number(4));
  CHECK(p.toJson() == nlohmann::json{{"index", 2}, {"instruction", "predict"}, {"value", 4.0}});
  auto i = e.execute("[INFER (mh default one 1)]");
  CHECK(i.index == 3);
  CHECK_FALSE(i.value.has_value());
}

TEST_CASE("forget") {
  Engine e(2);
  e.execute("[ASSUME x (normal 0 1)]");
  e.execute("[obs: OBSERVE (normal x 1) 0.5]");
  CHECK(e.trace().numConstrained() == 1);
  CHECK(errorKind([&] { e.execute("[FORGET 1]"); }) == "ForgetOfAssume");
  CHECK(errorKind([&] { e.execute("[FORGET 99]"); }) == "UnknownDirective");
  e.execute("[FORGET obs]");
  CHECK(e.trace().numConstrained() == 0);
  CHECK(e.numDirectives() == 1);
  CHECK(checkConsistency(e.trace()).empty());
}

TEST_CASE("sample leaves no trace behind") {
  Engine e(3);
  e.run("[ASSUME m (mem (lambda (i) (normal 0 1)))]\n[ASSUME a (m 1)]");
  auto nodes = e.trace().liveNodes().size();
  auto choices = e.trace().randomChoices().size();
  auto s = e.execute("[SAMPLE (+ (m 1) (m 2) (normal 0 1))]");
  CHECK(s.value->isNumber());
  CHECK(e.trace().liveNodes().size() == nodes);
  CHECK(e.trace().randomChoices().size() == choices);
  CHECK(e.numDirectives() == 2);
  CHECK(checkConsistency(e.trace()).empty());
}

TEST_CASE("force sets a random choice without keeping the constraint") {
  Engine e(4);
  e.execute("[ASSUME b (bernoulli 0.5)]");
  e.execute("[FORCE b True]");
  CHECK(predict(e, "b") == Value::boolean(true));
  CHECK(e.trace().numConstrained() == 0);
  e.execute("[FORCE b False]");
  CHECK(predict(e, "b") == Value::boolean(false));
}

TEST_CASE("failed instructions leave the model unchanged") {
  Engine e(5);
  e.execute("[ASSUME x 1]");
  auto before = e.numDirectives();
  auto err = errorKind([&] { e.execute("[ASSUME y (undefined_thing 1)]"); });
  CHECK(err == "UnboundSymbol");
  CHECK(e.numDirectives() == before);
  try {
    e.execute("[PREDICT (normal 1)]");
  } catch (const VentureError& ex) {
    CHECK(std::string(ex.what()).find("instruction") != std::string::npos);
  }
  CHECK(checkConsistency(e.trace()).empty());
}

TEST_CASE("same seed, same run") {
  auto run = [](std::uint64_t seed) {
    Engine e(seed);
    std::string out;
    for (const auto& r : e.run(R"(
[ASSUME is_tricky (bernoulli 0.1)]
[ASSUME coin_weight (if is_tricky (beta 1.0 1.0) 0.5)]
[OBSERVE (bernoulli coin_weight) True]
[INFER (mh default one 50)]
[PREDICT coin_weight]
)"))
      out += r.toJson().dump();
    return out;
  };
  CHECK(run(10) == run(10));
}
