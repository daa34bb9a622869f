#include "venture/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "venture/errors.hpp"

namespace venture {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

[[noreturn]] void wrongKind(const char* want, Value::Kind got) {
  throw TypeError(std::string("expected ") + want + ", got " + kindName(got));
}

template <typename T>
int cmp3(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

}  // namespace

const char* kindName(Value::Kind k) {
  switch (k) {
    case Value::Kind::Nil: return "nil";
    case Value::Kind::Number: return "number";
    case Value::Kind::Boolean: return "boolean";
    case Value::Kind::Atom: return "atom";
    case Value::Kind::Symbol: return "symbol";
    case Value::Kind::Pair: return "pair";
    case Value::Kind::Vector: return "vector";
    case Value::Kind::Map: return "map";
    case Value::Kind::Env: return "environment";
    case Value::Kind::SPRef: return "sp";
    case Value::Kind::SP: return "raw sp";
    case Value::Kind::Request: return "request";
  }
  return "?";
}

Value Value::number(double x) { Value v; v.data_ = x; return v; }
Value Value::boolean(bool b) { Value v; v.data_ = b; return v; }
Value Value::atom(std::int64_t i) { Value v; v.data_ = Atom{i}; return v; }
Value Value::symbol(const std::string& name) {
  Value v;
  v.data_ = Symbol{std::make_shared<const std::string>(name)};
  return v;
}
Value Value::pair(Value car, Value cdr) {
  Value v;
  v.data_ = std::shared_ptr<const PairCell>(
      std::make_shared<PairCell>(PairCell{std::move(car), std::move(cdr)}));
  return v;
}
Value Value::list(const std::vector<Value>& items) {
  Value out;
  for (auto it = items.rbegin(); it != items.rend(); ++it) out = pair(*it, out);
  return out;
}
Value Value::vector(std::vector<Value> items) {
  Value v;
  v.data_ = std::shared_ptr<const std::vector<Value>>(
      std::make_shared<std::vector<Value>>(std::move(items)));
  return v;
}
Value Value::map(const std::vector<std::pair<Value, Value>>& entries) {
  auto m = std::make_shared<MapData>();
  for (const auto& [k, val] : entries) m->entries[k] = val;
  Value v;
  v.data_ = std::shared_ptr<const MapData>(std::move(m));
  return v;
}
Value Value::env(EnvPtr e) { Value v; v.data_ = std::move(e); return v; }
Value Value::spRef(NodeId maker) { Value v; v.data_ = SPRef{maker}; return v; }
Value Value::sp(SPPtr s) { Value v; v.data_ = std::move(s); return v; }
Value Value::request(RequestPtr r) { Value v; v.data_ = std::move(r); return v; }

bool Value::isList() const {
  const Value* cur = this;
  while (cur->isPair()) cur = &cur->cdr();
  return cur->isNil();
}

bool Value::isSymbol(const char* name) const {
  return isSymbol() && *std::get<Symbol>(data_).name == name;
}

double Value::asNumber() const {
  if (auto p = std::get_if<double>(&data_)) return *p;
  if (auto b = std::get_if<bool>(&data_)) return *b ? 1.0 : 0.0;
  wrongKind("number", kind());
}

bool Value::asBool() const {
  if (auto b = std::get_if<bool>(&data_)) return *b;
  if (auto p = std::get_if<double>(&data_)) return *p != 0.0;
  wrongKind("boolean", kind());
}

std::int64_t Value::asAtom() const {
  if (auto a = std::get_if<Atom>(&data_)) return a->index;
  wrongKind("atom", kind());
}

const std::string& Value::asSymbol() const {
  if (auto s = std::get_if<Symbol>(&data_)) return *s->name;
  wrongKind("symbol", kind());
}

const Value& Value::car() const {
  if (auto p = std::get_if<std::shared_ptr<const PairCell>>(&data_)) return (*p)->car;
  wrongKind("pair", kind());
}

const Value& Value::cdr() const {
  if (auto p = std::get_if<std::shared_ptr<const PairCell>>(&data_)) return (*p)->cdr;
  wrongKind("pair", kind());
}

const std::vector<Value>& Value::asVector() const {
  if (auto p = std::get_if<std::shared_ptr<const std::vector<Value>>>(&data_)) return **p;
  wrongKind("vector", kind());
}

const MapData& Value::asMap() const {
  if (auto p = std::get_if<std::shared_ptr<const MapData>>(&data_)) return **p;
  wrongKind("map", kind());
}

const EnvPtr& Value::asEnv() const {
  if (auto p = std::get_if<EnvPtr>(&data_)) return *p;
  wrongKind("environment", kind());
}

NodeId Value::asSPRef() const {
  if (auto p = std::get_if<SPRef>(&data_)) return p->maker;
  wrongKind("sp", kind());
}

const SPPtr& Value::asSP() const {
  if (auto p = std::get_if<SPPtr>(&data_)) return *p;
  wrongKind("raw sp", kind());
}

const RequestPtr& Value::asRequest() const {
  if (auto p = std::get_if<RequestPtr>(&data_)) return *p;
  wrongKind("request", kind());
}

std::vector<Value> Value::items() const {
  if (isVector()) return asVector();
  std::vector<Value> out;
  const Value* cur = this;
  while (cur->isPair()) {
    out.push_back(cur->car());
    cur = &cur->cdr();
  }
  if (!cur->isNil()) throw TypeError("expected a proper list");
  return out;
}

std::size_t Value::hash() const {
  std::size_t h = data_.index();
  switch (kind()) {
    case Kind::Nil: return h;
    case Kind::Number: {
      double x = std::get<double>(data_);
      if (x == 0.0) x = 0.0;
      return mix(h, std::hash<double>()(x));
    }
    case Kind::Boolean: return mix(h, std::get<bool>(data_));
    case Kind::Atom: return mix(h, std::hash<std::int64_t>()(std::get<Atom>(data_).index));
    case Kind::Symbol: return mix(h, std::hash<std::string>()(asSymbol()));
    case Kind::Pair: return mix(mix(h, car().hash()), cdr().hash());
    case Kind::Vector:
      for (const auto& x : asVector()) h = mix(h, x.hash());
      return h;
    case Kind::Map: {
      // order independent
      std::size_t acc = 0;
      for (const auto& [k, v] : asMap().entries) acc += mix(k.hash(), v.hash());
      return mix(h, acc);
    }
    case Kind::Env: return mix(h, std::hash<const void*>()(asEnv().get()));
    case Kind::SPRef: return mix(h, std::hash<NodeId>()(asSPRef()));
    case Kind::SP: return mix(h, std::hash<const void*>()(asSP().get()));
    case Kind::Request: return mix(h, std::hash<const void*>()(asRequest().get()));
  }
  return h;
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  using K = Value::Kind;
  switch (a.kind()) {
    case K::Nil: return true;
    case K::Number: return std::get<double>(a.data_) == std::get<double>(b.data_);
    case K::Boolean: return std::get<bool>(a.data_) == std::get<bool>(b.data_);
    case K::Atom: return a.asAtom() == b.asAtom();
    case K::Symbol: return a.asSymbol() == b.asSymbol();
    case K::Pair: {
      if (std::get<std::shared_ptr<const PairCell>>(a.data_) ==
          std::get<std::shared_ptr<const PairCell>>(b.data_))
        return true;
      return a.car() == b.car() && a.cdr() == b.cdr();
    }
    case K::Vector: return a.asVector() == b.asVector();
    case K::Map: {
      const auto& ma = a.asMap().entries;
      const auto& mb = b.asMap().entries;
      if (ma.size() != mb.size()) return false;
      for (const auto& [k, v] : ma) {
        auto it = mb.find(k);
        if (it == mb.end() || !(it->second == v)) return false;
      }
      return true;
    }
    case K::Env: return a.asEnv() == b.asEnv();
    case K::SPRef: return a.asSPRef() == b.asSPRef();
    case K::SP: return a.asSP() == b.asSP();
    case K::Request: return a.asRequest() == b.asRequest();
  }
  return false;
}

namespace {

std::vector<std::pair<Value, Value>> sortedEntries(const MapData& m) {
  std::vector<std::pair<Value, Value>> out(m.entries.begin(), m.entries.end());
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return compare(x.first, y.first) < 0; });
  return out;
}

}  // namespace

int compare(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return cmp3(static_cast<int>(a.kind()), static_cast<int>(b.kind()));
  using K = Value::Kind;
  switch (a.kind()) {
    case K::Nil: return 0;
    case K::Number: return cmp3(a.asNumber(), b.asNumber());
    case K::Boolean: return cmp3(a.asBool(), b.asBool());
    case K::Atom: return cmp3(a.asAtom(), b.asAtom());
    case K::Symbol: return a.asSymbol().compare(b.asSymbol()) < 0 ? -1 : (a.asSymbol() == b.asSymbol() ? 0 : 1);
    case K::Pair: {
      int c = compare(a.car(), b.car());
      return c != 0 ? c : compare(a.cdr(), b.cdr());
    }
    case K::Vector: {
      const auto& va = a.asVector();
      const auto& vb = b.asVector();
      for (std::size_t i = 0; i < std::min(va.size(), vb.size()); ++i) {
        int c = compare(va[i], vb[i]);
        if (c != 0) return c;
      }
      return cmp3(va.size(), vb.size());
    }
    case K::Map: {
      auto ea = sortedEntries(a.asMap());
      auto eb = sortedEntries(b.asMap());
      for (std::size_t i = 0; i < std::min(ea.size(), eb.size()); ++i) {
        int c = compare(ea[i].first, eb[i].first);
        if (c == 0) c = compare(ea[i].second, eb[i].second);
        if (c != 0) return c;
      }
      return cmp3(ea.size(), eb.size());
    }
    case K::Env: return cmp3(a.asEnv().get(), b.asEnv().get());
    case K::SPRef: return cmp3(a.asSPRef(), b.asSPRef());
    case K::SP: return cmp3(a.asSP().get(), b.asSP().get());
    case K::Request: return cmp3(a.asRequest().get(), b.asRequest().get());
  }
  return 0;
}

std::string formatNumber(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string Value::toString() const {
  switch (kind()) {
    case Kind::Nil: return "()";
    case Kind::Number: return formatNumber(asNumber());
    case Kind::Boolean: return asBool() ? "true" : "false";
    case Kind::Atom: return "atom<" + std::to_string(asAtom()) + ">";
    case Kind::Symbol: return asSymbol();
    case Kind::Pair: {
      std::string s = "(";
      const Value* cur = this;
      bool first = true;
      while (cur->isPair()) {
        if (!first) s += " ";
        s += cur->car().toString();
        first = false;
        cur = &cur->cdr();
      }
      if (!cur->isNil()) s += " . " + cur->toString();
      return s + ")";
    }
    case Kind::Vector: {
      std::string s = "(vector";
      for (const auto& x : asVector()) s += " " + x.toString();
      return s + ")";
    }
    case Kind::Map: {
      std::string s = "{";
      bool first = true;
      for (const auto& [k, v] : sortedEntries(asMap())) {
        if (!first) s += ", ";
        s += k.toString() + ": " + v.toString();
        first = false;
      }
      return s + "}";
    }
    case Kind::Env: return "<environment>";
    case Kind::SPRef: return "<sp " + std::to_string(asSPRef()) + ">";
    case Kind::SP: return "<unprocessed sp>";
    case Kind::Request: return "<request>";
  }
  return "?";
}

nlohmann::json Value::toJson() const {
  using nlohmann::json;
  switch (kind()) {
    case Kind::Nil: return json::array();
    case Kind::Number: {
      double x = asNumber();
      if (!std::isfinite(x)) return formatNumber(x);
      return x;
    }
    case Kind::Boolean: return asBool();
    case Kind::Atom: return json{{"atom", asAtom()}};
    case Kind::Symbol: return asSymbol();
    case Kind::Pair: {
      if (!isList()) return json{{"pair", json::array({car().toJson(), cdr().toJson()})}};
      json arr = json::array();
      for (const auto& x : items()) arr.push_back(x.toJson());
      return arr;
    }
    case Kind::Vector: {
      json arr = json::array();
      for (const auto& x : asVector()) arr.push_back(x.toJson());
      return arr;
    }
    case Kind::Map: {
      json arr = json::array();
      for (const auto& [k, v] : sortedEntries(asMap())) arr.push_back(json::array({k.toJson(), v.toJson()}));
      return json{{"map", arr}};
    }
    case Kind::Env: return json{{"environment", true}};
    case Kind::SPRef: return json{{"sp", asSPRef()}};
    case Kind::SP: return json{{"sp", nullptr}};
    case Kind::Request: return json{{"request", true}};
  }
  return nullptr;
}

void Environment::bind(const std::string& sym, NodePtr node) { frame_[sym] = std::move(node); }

void Environment::unbind(const std::string& sym) { frame_.erase(sym); }

NodePtr Environment::find(const std::string& sym) const {
  for (const Environment* e = this; e; e = e->outer_.get()) {
    auto it = e->frame_.find(sym);
    if (it != e->frame_.end()) return it->second;
  }
  return nullptr;
}

NodePtr Environment::lookup(const std::string& sym) const {
  auto n = find(sym);
  if (!n) throw UnboundSymbol(sym);
  return n;
}

}  // namespace venture
