#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

namespace venture {

class Node;
class SP;
class Environment;
struct Request;
class Value;

using NodeId = std::uint64_t;
using NodePtr = std::shared_ptr<Node>;
using EnvPtr = std::shared_ptr<Environment>;
using SPPtr = std::shared_ptr<SP>;
using RequestPtr = std::shared_ptr<const Request>;

struct PairCell;
struct MapData;

// Opaque discrete value. Atoms are ordered by index.
struct Atom {
  std::int64_t index = 0;
};

// Handle to an SP owned by the trace; the SP lives in the registry entry of
// the node that made it.
struct SPRef {
  NodeId maker = 0;
};

struct Symbol {
  std::shared_ptr<const std::string> name;
};

class Value {
 public:
  enum class Kind : std::uint8_t {
    Nil, Number, Boolean, Atom, Symbol, Pair, Vector, Map, Env, SPRef, SP, Request
  };

  Value() = default;

  static Value number(double x);
  static Value boolean(bool b);
  static Value atom(std::int64_t i);
  static Value symbol(const std::string& name);
  static Value pair(Value car, Value cdr);
  static Value list(const std::vector<Value>& items);
  static Value vector(std::vector<Value> items);
  static Value map(const std::vector<std::pair<Value, Value>>& entries);
  static Value env(EnvPtr e);
  static Value spRef(NodeId maker);
  static Value sp(SPPtr s);
  static Value request(RequestPtr r);

  Kind kind() const { return static_cast<Kind>(data_.index()); }
  bool isNil() const { return kind() == Kind::Nil; }
  bool isNumber() const { return kind() == Kind::Number; }
  bool isBoolean() const { return kind() == Kind::Boolean; }
  bool isAtom() const { return kind() == Kind::Atom; }
  bool isSymbol() const { return kind() == Kind::Symbol; }
  bool isPair() const { return kind() == Kind::Pair; }
  bool isVector() const { return kind() == Kind::Vector; }
  bool isMap() const { return kind() == Kind::Map; }
  bool isEnv() const { return kind() == Kind::Env; }
  bool isSPRef() const { return kind() == Kind::SPRef; }
  bool isSP() const { return kind() == Kind::SP; }
  bool isRequest() const { return kind() == Kind::Request; }
  bool isList() const;
  bool isSymbol(const char* name) const;

  double asNumber() const;
  bool asBool() const;
  std::int64_t asAtom() const;
  const std::string& asSymbol() const;
  const Value& car() const;
  const Value& cdr() const;
  const std::vector<Value>& asVector() const;
  const MapData& asMap() const;
  const EnvPtr& asEnv() const;
  NodeId asSPRef() const;
  const SPPtr& asSP() const;
  const RequestPtr& asRequest() const;

  // Elements of a proper list or a vector.
  std::vector<Value> items() const;
  std::size_t hash() const;

  // s-expression rendering; parseable for data values.
  std::string toString() const;
  nlohmann::json toJson() const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

 private:
  using Data = std::variant<std::monostate, double, bool, Atom, Symbol,
                            std::shared_ptr<const PairCell>,
                            std::shared_ptr<const std::vector<Value>>,
                            std::shared_ptr<const MapData>, EnvPtr, SPRef,
                            SPPtr, RequestPtr>;
  Data data_;
};

struct ValueHash {
  std::size_t operator()(const Value& v) const { return v.hash(); }
};

struct PairCell {
  Value car;
  Value cdr;
};

struct MapData {
  std::unordered_map<Value, Value, ValueHash> entries;
};

// Total order used wherever output or iteration must be deterministic.
int compare(const Value& a, const Value& b);

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return compare(a, b) < 0; }
};

std::string formatNumber(double x);
const char* kindName(Value::Kind k);

// Frames map symbols to trace nodes, never to bare values.
class Environment {
 public:
  explicit Environment(EnvPtr outer = nullptr) : outer_(std::move(outer)) {}

  void bind(const std::string& sym, NodePtr node);
  void unbind(const std::string& sym);
  NodePtr find(const std::string& sym) const;
  NodePtr lookup(const std::string& sym) const;
  const EnvPtr& outer() const { return outer_; }
  const std::unordered_map<std::string, NodePtr>& frame() const { return frame_; }
  void clear() { frame_.clear(); }

 private:
  EnvPtr outer_;
  std::unordered_map<std::string, NodePtr> frame_;
};

}  // namespace venture
