#include <unordered_set>

#include "doctest.h"
#include "venture/value.hpp"

using namespace venture;

TEST_CASE("values compare structurally") {
  auto a = Value::list({Value::number(1), Value::symbol("x"), Value::boolean(true)});
  auto b = Value::list({Value::number(1), Value::symbol("x"), Value::boolean(true)});
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  CHECK_FALSE(a == Value::list({Value::number(1), Value::symbol("x")}));
  CHECK_FALSE(Value::number(1) == Value::atom(1));
  CHECK_FALSE(Value::number(1) == Value::boolean(true));
}

TEST_CASE("values hash consistently in containers") {
  std::unordered_set<Value, ValueHash> s;
  s.insert(Value::pair(Value::number(3), Value::boolean(false)));
  s.insert(Value::pair(Value::number(3), Value::boolean(false)));
  s.insert(Value::atom(2));
  CHECK(s.size() == 2);
}

TEST_CASE("ordering puts numbers and atoms in numeric order") {
  ValueLess less;
  CHECK(less(Value::number(1), Value::number(2)));
  CHECK_FALSE(less(Value::number(2), Value::number(1)));
  CHECK(less(Value::atom(1), Value::atom(5)));
}

TEST_CASE("printing round trips numbers exactly") {
  double x = 0.1 + 0.2;
  CHECK(std::stod(Value::number(x).toString()) == x);
  CHECK(Value::list({Value::number(1), Value::symbol("a")}).toString() == "(1 a)");
  CHECK(Value::list({}).toString() == "()");
}

TEST_CASE("json forms") {
  CHECK(Value::number(2.5).toJson() == nlohmann::json(2.5));
  CHECK(Value::boolean(true).toJson() == nlohmann::json(true));
  CHECK(Value::atom(3).toJson() == nlohmann::json{{"atom", 3}});
  CHECK(Value::spRef(17).toJson() == nlohmann::json{{"sp", 17}});
}

TEST_CASE("list accessors") {
  auto l = Value::list({Value::number(1), Value::number(2)});
  CHECK(l.isList());
  CHECK(l.car() == Value::number(1));
  CHECK(l.cdr().car() == Value::number(2));
  CHECK(l.items().size() == 2);
  CHECK_FALSE(Value::pair(Value::number(1), Value::number(2)).isList());
}
