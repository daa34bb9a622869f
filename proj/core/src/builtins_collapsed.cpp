#include <algorithm>
#include <cmath>
#include <map>

#include "builtins_internal.hpp"
#include "venture/errors.hpp"

namespace venture {
namespace detail {

namespace {

template <typename AuxT>
const AuxT& auxAs(const SPAux* aux) {
  auto* p = dynamic_cast<const AuxT*>(aux);
  if (!p) throw TypeError("collapsed SP applied without its statistics");
  return *p;
}

template <typename AuxT>
AuxT& auxAs(SPAux* aux) {
  auto* p = dynamic_cast<AuxT*>(aux);
  if (!p) throw TypeError("collapsed SP applied without its statistics");
  return *p;
}

class CollapsedOutputPSP : public PSP {
 public:
  bool isRandom() const override { return true; }
  bool canAbsorb(ParentRole) const override { return true; }
  bool hasLogDensity() const override { return true; }
  double logDensityBound(const Value&, const Args&, const std::vector<bool>&) const override { return 0.0; }
  double logDensityOfCountsBound(const SPAux&) const override { return 0.0; }
};

template <typename AuxT>
class CollapsedSP : public SP {
 public:
  using SP::SP;
  std::unique_ptr<SPAux> constructSPAux() const override { return std::make_unique<AuxT>(); }
};

class MakerPSP : public PSP {
 public:
  bool childrenCanAAA() const override { return true; }
};

// ---------------------------------------------------------- beta bernoulli

struct BetaBernoulliAux : SPAux {
  long heads = 0;
  long tails = 0;
  std::unique_ptr<SPAux> clone() const override { return std::make_unique<BetaBernoulliAux>(*this); }
  bool equals(const SPAux& o) const override {
    auto* p = dynamic_cast<const BetaBernoulliAux*>(&o);
    return p && p->heads == heads && p->tails == tails;
  }
  nlohmann::json toJson() const override { return {{"heads", heads}, {"tails", tails}}; }
};

class BetaBernoulliPSP : public CollapsedOutputPSP {
 public:
  BetaBernoulliPSP(double a, double b) : a_(a), b_(b) {}
  double p(const SPAux* aux) const {
    const auto& s = auxAs<BetaBernoulliAux>(aux);
    return (a_ + s.heads) / (a_ + b_ + s.heads + s.tails);
  }
  Value simulate(const Args& a, Rng& rng) const override {
    a.requireArity(0, "beta_bernoulli");
    return Value::boolean(rng.bernoulli(p(a.spaux)));
  }
  double logDensity(const Value& v, const Args& a) const override {
    double q = p(a.spaux);
    return std::log(v.asBool() ? q : 1 - q);
  }
  void incorporate(const Value& v, const Args& a) const override {
    auto& s = auxAs<BetaBernoulliAux>(a.spaux);
    (v.asBool() ? s.heads : s.tails)++;
  }
  void unincorporate(const Value& v, const Args& a) const override {
    auto& s = auxAs<BetaBernoulliAux>(a.spaux);
    (v.asBool() ? s.heads : s.tails)--;
  }
  double logDensityOfCounts(const SPAux& aux) const override {
    const auto& s = auxAs<BetaBernoulliAux>(&aux);
    return lbeta(a_ + s.heads, b_ + s.tails) - lbeta(a_, b_);
  }
  std::vector<Value> enumerateValues(const Args&) const override {
    return {Value::boolean(false), Value::boolean(true)};
  }
  std::string name() const override { return "beta_bernoulli"; }

 private:
  double a_, b_;
};

class MakeBetaBernoulliPSP : public MakerPSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(2, "make_beta_bernoulli");
    double al = a[0].asNumber(), be = a[1].asNumber();
    if (!(al > 0 && be > 0)) throw TypeError("make_beta_bernoulli needs positive pseudocounts");
    return Value::sp(std::make_shared<CollapsedSP<BetaBernoulliAux>>(
        NullRequestPSP::instance(), std::make_shared<BetaBernoulliPSP>(al, be), "beta_bernoulli"));
  }
  std::string name() const override { return "make_beta_bernoulli"; }
};

// ------------------------------------------------- symmetric dirichlet discrete

struct CountsAux : SPAux {
  std::vector<long> counts;
  long total = 0;
  std::unique_ptr<SPAux> clone() const override { return std::make_unique<CountsAux>(*this); }
  bool equals(const SPAux& o) const override {
    auto* p = dynamic_cast<const CountsAux*>(&o);
    if (!p || p->total != total) return false;
    // counts are sized on first use, so a missing entry is a zero
    std::size_t n = std::max(counts.size(), p->counts.size());
    for (std::size_t i = 0; i < n; ++i) {
      long a = i < counts.size() ? counts[i] : 0, b = i < p->counts.size() ? p->counts[i] : 0;
      if (a != b) return false;
    }
    return true;
  }
  nlohmann::json toJson() const override { return {{"counts", counts}}; }
};

class SymDirDiscretePSP : public CollapsedOutputPSP {
 public:
  SymDirDiscretePSP(double alpha, std::size_t n) : alpha_(alpha), n_(n) {}
  static std::vector<long>& counts(SPAux* aux, std::size_t n) {
    auto& s = auxAs<CountsAux>(aux);
    if (s.counts.size() != n) s.counts.assign(n, 0);
    return s.counts;
  }
  Value simulate(const Args& a, Rng& rng) const override {
    a.requireArity(0, "sym_dir_discrete");
    const auto& c = counts(a.spaux, n_);
    std::vector<double> w(n_);
    for (std::size_t i = 0; i < n_; ++i) w[i] = alpha_ + static_cast<double>(c[i]);
    return Value::atom(static_cast<std::int64_t>(rng.categorical(w)));
  }
  double logDensity(const Value& v, const Args& a) const override {
    auto k = v.asAtom();
    if (k < 0 || k >= static_cast<std::int64_t>(n_)) return -INFINITY;
    const auto& c = counts(a.spaux, n_);
    const auto& s = auxAs<CountsAux>(a.spaux);
    return std::log((alpha_ + c[k]) / (n_ * alpha_ + s.total));
  }
  void incorporate(const Value& v, const Args& a) const override {
    counts(a.spaux, n_)[v.asAtom()]++;
    auxAs<CountsAux>(a.spaux).total++;
  }
  void unincorporate(const Value& v, const Args& a) const override {
    counts(a.spaux, n_)[v.asAtom()]--;
    auxAs<CountsAux>(a.spaux).total--;
  }
  double logDensityOfCounts(const SPAux& aux) const override {
    const auto& s = auxAs<CountsAux>(&aux);
    double n = static_cast<double>(n_);
    double out = std::lgamma(n * alpha_) - std::lgamma(n * alpha_ + s.total);
    for (long c : s.counts) out += std::lgamma(alpha_ + c) - std::lgamma(alpha_);
    return out;
  }
  std::vector<Value> enumerateValues(const Args&) const override {
    std::vector<Value> out;
    for (std::size_t i = 0; i < n_; ++i) out.push_back(Value::atom(static_cast<std::int64_t>(i)));
    return out;
  }
  std::string name() const override { return "sym_dir_discrete"; }

 private:
  double alpha_;
  std::size_t n_;
};

class MakeSymDirDiscretePSP : public MakerPSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(2, "make_sym_dir_discrete");
    double alpha = a[0].asNumber();
    double n = a[1].asNumber();
    if (!(alpha > 0) || n < 1 || n != std::floor(n)) throw TypeError("make_sym_dir_discrete needs alpha > 0, n >= 1");
    return Value::sp(std::make_shared<CollapsedSP<CountsAux>>(
        NullRequestPSP::instance(), std::make_shared<SymDirDiscretePSP>(alpha, static_cast<std::size_t>(n)),
        "sym_dir_discrete"));
  }
  std::string name() const override { return "make_sym_dir_discrete"; }
};

// -------------------------------------------------------------------- crp

struct CRPAux : SPAux {
  std::map<std::int64_t, long> tables;
  long total = 0;
  std::unique_ptr<SPAux> clone() const override { return std::make_unique<CRPAux>(*this); }
  bool equals(const SPAux& o) const override {
    auto* p = dynamic_cast<const CRPAux*>(&o);
    return p && p->tables == tables && p->total == total;
  }
  nlohmann::json toJson() const override {
    nlohmann::json t = nlohmann::json::object();
    for (auto [k, c] : tables) t[std::to_string(k)] = c;
    return {{"tables", t}};
  }
  std::int64_t freshTable() const { return tables.empty() ? 1 : tables.rbegin()->first + 1; }
};

class CRPPSP : public CollapsedOutputPSP {
 public:
  explicit CRPPSP(double alpha) : alpha_(alpha) {}
  Value simulate(const Args& a, Rng& rng) const override {
    a.requireArity(0, "crp");
    const auto& s = auxAs<CRPAux>(a.spaux);
    std::vector<double> w;
    std::vector<std::int64_t> ids;
    for (auto [k, c] : s.tables) {
      ids.push_back(k);
      w.push_back(static_cast<double>(c));
    }
    ids.push_back(s.freshTable());
    w.push_back(alpha_);
    return Value::atom(ids[rng.categorical(w)]);
  }
  double logDensity(const Value& v, const Args& a) const override {
    const auto& s = auxAs<CRPAux>(a.spaux);
    auto it = s.tables.find(v.asAtom());
    double num = it == s.tables.end() ? alpha_ : static_cast<double>(it->second);
    return std::log(num / (s.total + alpha_));
  }
  void incorporate(const Value& v, const Args& a) const override {
    auto& s = auxAs<CRPAux>(a.spaux);
    s.tables[v.asAtom()]++;
    s.total++;
  }
  void unincorporate(const Value& v, const Args& a) const override {
    auto& s = auxAs<CRPAux>(a.spaux);
    auto it = s.tables.find(v.asAtom());
    if (it == s.tables.end()) throw TypeError("unincorporating an unseated customer");
    if (--it->second == 0) s.tables.erase(it);
    s.total--;
  }
  double logDensityOfCounts(const SPAux& aux) const override {
    const auto& s = auxAs<CRPAux>(&aux);
    double out = std::lgamma(alpha_) - std::lgamma(alpha_ + s.total);
    for (auto [k, c] : s.tables) out += std::log(alpha_) + std::lgamma(static_cast<double>(c));
    return out;
  }
  std::vector<Value> enumerateValues(const Args& a) const override {
    const auto& s = auxAs<CRPAux>(a.spaux);
    std::vector<Value> out;
    for (auto [k, c] : s.tables) out.push_back(Value::atom(k));
    out.push_back(Value::atom(s.freshTable()));
    return out;
  }
  std::string name() const override { return "crp"; }

 private:
  double alpha_;
};

class MakeCRPPSP : public MakerPSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    a.requireArity(1, "make_crp");
    double alpha = a[0].asNumber();
    if (!(alpha > 0)) throw TypeError("make_crp needs alpha > 0");
    return Value::sp(std::make_shared<CollapsedSP<CRPAux>>(NullRequestPSP::instance(),
                                                           std::make_shared<CRPPSP>(alpha), "crp"));
  }
  std::string name() const override { return "make_crp"; }
};

}  // namespace

void installCollapsed(Trace& t) {
  bindSP(t, {"make_beta_bernoulli"}, simpleSP(std::make_shared<MakeBetaBernoulliPSP>()));
  bindSP(t, {"make_sym_dir_discrete"}, simpleSP(std::make_shared<MakeSymDirDiscretePSP>()));
  bindSP(t, {"make_crp"}, simpleSP(std::make_shared<MakeCRPPSP>()));
}

}  // namespace detail
}  // namespace venture
