#include "venture/hmm.hpp"

#include <cmath>

#include "builtins_internal.hpp"
#include "venture/errors.hpp"

namespace venture {

std::unique_ptr<SPAux> HMMAux::clone() const {
  if (!clonableFlag) throw NonClonableAux("hmm statistics were marked non-clonable");
  return std::make_unique<HMMAux>(*this);
}

bool HMMAux::equals(const SPAux& other) const {
  auto* o = dynamic_cast<const HMMAux*>(&other);
  return o && o->latents == latents && o->live == live && o->observations == observations;
}

nlohmann::json HMMAux::toJson() const {
  nlohmann::json l = nlohmann::json::object();
  for (const auto& [seq, xs] : latents) l[std::to_string(seq)] = xs;
  return {{"latents", l}};
}

namespace {

std::pair<long, long> seqAndTime(const Value& lsr) {
  return {static_cast<long>(lsr.car().asNumber()), static_cast<long>(lsr.cdr().asNumber())};
}

HMMAux& hmmAux(SPAux* aux) {
  auto* p = dynamic_cast<HMMAux*>(aux);
  if (!p) throw TypeError("hmm applied without its statistics");
  return *p;
}

const HMMAux& hmmAux(const SPAux& aux) {
  auto* p = dynamic_cast<const HMMAux*>(&aux);
  if (!p) throw TypeError("hmm applied without its statistics");
  return *p;
}

std::pair<long, long> seqTimeArgs(const Args& a) {
  a.requireArity(2, "hmm");
  double s = a[0].asNumber(), t = a[1].asNumber();
  if (t < 0 || t != std::floor(t) || s != std::floor(s)) throw TypeError("hmm takes integer (seq, t) with t >= 0");
  return {static_cast<long>(s), static_cast<long>(t)};
}

class HMMRequestPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng&) const override {
    auto [s, t] = seqTimeArgs(a);
    Request r;
    r.lsrs.push_back(Value::pair(Value::number(static_cast<double>(s)), Value::number(static_cast<double>(t))));
    return Value::request(std::make_shared<const Request>(std::move(r)));
  }
  std::string name() const override { return "hmm_request"; }
};

class HMMOutputPSP : public PSP {
 public:
  explicit HMMOutputPSP(std::shared_ptr<const HMMParams> p) : p_(std::move(p)) {}
  int state(const Args& a) const {
    auto [s, t] = seqTimeArgs(a);
    const auto& aux = hmmAux(a.spaux);
    auto it = aux.latents.find(s);
    if (it == aux.latents.end() || static_cast<long>(it->second.size()) <= t)
      throw MissingLatent("latent state not simulated");
    return it->second[static_cast<std::size_t>(t)];
  }
  Value simulate(const Args& a, Rng& rng) const override {
    return Value::number(static_cast<double>(rng.categorical(p_->emission[state(a)])));
  }
  double logDensity(const Value& v, const Args& a) const override {
    double o = v.asNumber();
    if (o < 0 || o >= p_->numSymbols() || o != std::floor(o)) return -INFINITY;
    return std::log(p_->emission[state(a)][static_cast<std::size_t>(o)]);
  }
  bool hasLogDensity() const override { return true; }
  bool isRandom() const override { return true; }
  bool canAbsorb(ParentRole) const override { return true; }
  double logDensityBound(const Value&, const Args&, const std::vector<bool>&) const override { return 0.0; }
  double logDensityOfCountsBound(const SPAux&) const override { return 0.0; }
  void incorporate(const Value& v, const Args& a) const override {
    auto st = seqTimeArgs(a);
    hmmAux(a.spaux).observations[st][static_cast<long>(v.asNumber())]++;
  }
  void unincorporate(const Value& v, const Args& a) const override {
    auto st = seqTimeArgs(a);
    auto& obs = hmmAux(a.spaux).observations;
    auto& m = obs[st];
    long o = static_cast<long>(v.asNumber());
    if (--m[o] == 0) m.erase(o);
    if (m.empty()) obs.erase(st);
  }
  double logDensityOfCounts(const SPAux& aux) const override { return HMMSP::jointLogDensity(*p_, hmmAux(aux)); }
  std::vector<Value> enumerateValues(const Args&) const override {
    std::vector<Value> out;
    for (std::size_t i = 0; i < p_->numSymbols(); ++i) out.push_back(Value::number(static_cast<double>(i)));
    return out;
  }
  std::string name() const override { return "hmm"; }

 private:
  std::shared_ptr<const HMMParams> p_;
};

double dirichletLogPdf(const std::vector<double>& x, double alpha) {
  double k = static_cast<double>(x.size());
  double out = std::lgamma(k * alpha) - k * std::lgamma(alpha);
  for (double xi : x) out += (alpha - 1) * std::log(xi);
  return out;
}

class MakeHMMPSP : public PSP {
 public:
  static void check(const Args& a) {
    a.requireArity(4, 5, "make_hmm");
    if (a[0].asNumber() < 1 || a[2].asNumber() < 1) throw TypeError("make_hmm needs at least one state and symbol");
    if (!(a[1].asNumber() > 0 && a[3].asNumber() > 0)) throw TypeError("make_hmm hyperparameters must be positive");
  }
  Value simulate(const Args& a, Rng& rng) const override {
    check(a);
    auto n = static_cast<std::size_t>(a[0].asNumber());
    auto m = static_cast<std::size_t>(a[2].asNumber());
    auto p = std::make_shared<HMMParams>();
    p->initial.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) p->transition.push_back(rng.dirichlet(std::vector<double>(n, a[1].asNumber())));
    for (std::size_t i = 0; i < n; ++i) p->emission.push_back(rng.dirichlet(std::vector<double>(m, a[3].asNumber())));
    bool clonable = a.size() < 5 || a[4].asBool();
    return Value::sp(std::make_shared<HMMSP>(p, clonable));
  }
  double logDensity(const Value& v, const Args& a) const override {
    check(a);
    const auto* sp = dynamic_cast<const HMMSP*>(v.asSP().get());
    if (!sp) throw TypeError("make_hmm density of a non-hmm value");
    double out = 0;
    for (const auto& row : sp->params().transition) out += dirichletLogPdf(row, a[1].asNumber());
    for (const auto& row : sp->params().emission) out += dirichletLogPdf(row, a[3].asNumber());
    return out;
  }
  bool hasLogDensity() const override { return true; }
  bool isRandom() const override { return true; }
  bool childrenCanAAA() const override { return true; }
  std::string name() const override { return "make_hmm"; }
};

}  // namespace

HMMSP::HMMSP(std::shared_ptr<const HMMParams> params, bool clonable)
    : SP(std::make_shared<HMMRequestPSP>(), std::make_shared<HMMOutputPSP>(params), "hmm"),
      params_(std::move(params)),
      clonable_(clonable) {}

std::unique_ptr<SPAux> HMMSP::constructSPAux() const {
  auto aux = std::make_unique<HMMAux>();
  aux->clonableFlag = clonable_;
  return aux;
}

double HMMSP::simulateLatents(SPAux& auxBase, const Value& lsr, bool restore, LatentDB* db, Rng& rng) const {
  auto& aux = hmmAux(&auxBase);
  auto [seq, t] = seqAndTime(lsr);
  aux.live[seq][t]++;
  auto& xs = aux.latents[seq];
  auto* hdb = dynamic_cast<HMMLatentDB*>(db);
  while (static_cast<long>(xs.size()) <= t) {
    long i = static_cast<long>(xs.size());
    if (restore) {
      if (!hdb) throw MissingLatent("no latent archive to restore from");
      auto it = hdb->values.find({seq, i});
      if (it == hdb->values.end()) throw MissingLatent("latent (" + std::to_string(seq) + ", " + std::to_string(i) + ")");
      xs.push_back(it->second);
    } else if (i == 0) {
      xs.push_back(static_cast<int>(rng.categorical(params_->initial)));
    } else {
      xs.push_back(static_cast<int>(rng.categorical(params_->transition[xs.back()])));
    }
  }
  return 0.0;
}

double HMMSP::detachLatents(SPAux& auxBase, const Value& lsr, LatentDB& db) const {
  auto& aux = hmmAux(&auxBase);
  auto& hdb = dynamic_cast<HMMLatentDB&>(db);
  auto [seq, t] = seqAndTime(lsr);
  auto& lv = aux.live[seq];
  if (--lv[t] == 0) lv.erase(t);
  long keep = lv.empty() ? -1 : lv.rbegin()->first;
  auto& xs = aux.latents[seq];
  while (static_cast<long>(xs.size()) > keep + 1) {
    hdb.values[{seq, static_cast<long>(xs.size()) - 1}] = xs.back();
    xs.pop_back();
  }
  if (lv.empty()) {
    aux.live.erase(seq);
    aux.latents.erase(seq);
  }
  return 0.0;
}

double HMMSP::jointLogDensity(const HMMParams& p, const HMMAux& aux) {
  double out = 0;
  for (const auto& [seq, xs] : aux.latents) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      out += std::log(i == 0 ? p.initial[xs[0]] : p.transition[xs[i - 1]][xs[i]]);
  }
  for (const auto& [st, counts] : aux.observations) {
    int x = aux.latents.at(st.first).at(static_cast<std::size_t>(st.second));
    for (auto [o, c] : counts) out += static_cast<double>(c) * std::log(p.emission[x][o]);
  }
  return out;
}

void HMMSP::AEInfer(SPAux& auxBase, Rng& rng) const {
  auto& aux = hmmAux(&auxBase);
  const auto& p = *params_;
  std::size_t n = p.numStates();
  for (auto& [seq, xs] : aux.latents) {
    std::size_t len = xs.size();
    if (len == 0) continue;
    std::vector<std::vector<double>> alpha(len, std::vector<double>(n));
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<double> ev(n, 1.0);
      auto it = aux.observations.find({seq, static_cast<long>(t)});
      if (it != aux.observations.end())
        for (std::size_t x = 0; x < n; ++x)
          for (auto [o, c] : it->second) ev[x] *= std::pow(p.emission[x][o], static_cast<double>(c));
      double z = 0;
      for (std::size_t x = 0; x < n; ++x) {
        double prior = 0;
        if (t == 0) {
          prior = p.initial[x];
        } else {
          for (std::size_t y = 0; y < n; ++y) prior += alpha[t - 1][y] * p.transition[y][x];
        }
        alpha[t][x] = prior * ev[x];
        z += alpha[t][x];
      }
      for (double& v : alpha[t]) v /= z;
    }
    xs[len - 1] = static_cast<int>(rng.categorical(alpha[len - 1]));
    for (std::size_t t = len - 1; t-- > 0;) {
      std::vector<double> w(n);
      for (std::size_t x = 0; x < n; ++x) w[x] = alpha[t][x] * p.transition[x][xs[t + 1]];
      xs[t] = static_cast<int>(rng.categorical(w));
    }
  }
}

namespace detail {
void installHMM(Trace& t) { bindSP(t, {"make_hmm"}, simpleSP(std::make_shared<MakeHMMPSP>())); }
}  // namespace detail

}  // namespace venture
