#include <cmath>

#include "builtins_internal.hpp"
#include "venture/errors.hpp"

namespace venture {
namespace detail {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normalLogPdf(double x, double mu, double sigma) {
  double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

bool anyFree(const std::vector<bool>& f) {
  for (bool b : f)
    if (b) return true;
  return false;
}

class RandomPSP : public PSP {
 public:
  bool isRandom() const override { return true; }
  bool canAbsorb(ParentRole) const override { return true; }
  bool hasLogDensity() const override { return true; }
};

class BernoulliPSP : public RandomPSP {
 public:
  static double p(const Args& a) {
    a.requireArity(0, 1, "bernoulli");
    double p = a.size() == 0 ? 0.5 : a[0].asNumber();
    if (!(p >= 0 && p <= 1)) throw TypeError("bernoulli weight outside [0, 1]");
    return p;
  }
  Value simulate(const Args& a, Rng& rng) const override { return Value::boolean(rng.bernoulli(p(a))); }
  double logDensity(const Value& v, const Args& a) const override {
    if (!v.isBoolean()) return -INFINITY;
    double q = p(a);
    return std::log(v.asBool() ? q : 1.0 - q);
  }
  double logDensityBound(const Value& v, const Args& a, const std::vector<bool>& f) const override {
    if (anyFree(f)) return 0.0;
    return logDensity(v, a);
  }
  std::vector<Value> enumerateValues(const Args&) const override {
    return {Value::boolean(false), Value::boolean(true)};
  }
  bool hasVariationalFamily() const override { return true; }
  std::string name() const override { return "bernoulli"; }
};

class NormalPSP : public RandomPSP {
 public:
  static void check(const Args& a) {
    a.requireArity(2, "normal");
    if (!(a[1].asNumber() > 0)) throw TypeError("normal scale must be positive");
  }
  Value simulate(const Args& a, Rng& rng) const override {
    check(a);
    return Value::number(rng.normal(a[0].asNumber(), a[1].asNumber()));
  }
  double logDensity(const Value& v, const Args& a) const override {
    check(a);
    return normalLogPdf(v.asNumber(), a[0].asNumber(), a[1].asNumber());
  }
  double logDensityBound(const Value& v, const Args& a, const std::vector<bool>& f) const override {
    check(a);
    if (f.size() > 1 && f[1]) throw NoDensityBound("normal with a free scale");
    if (!f.empty() && f[0]) return -std::log(a[1].asNumber()) - kLogSqrt2Pi;
    return logDensity(v, a);
  }
  bool hasVariationalFamily() const override { return true; }
  std::string name() const override { return "normal"; }
};

// shape, rate
class GammaPSP : public RandomPSP {
 public:
  static void check(const Args& a) {
    a.requireArity(2, "gamma");
    if (!(a[0].asNumber() > 0 && a[1].asNumber() > 0)) throw TypeError("gamma parameters must be positive");
  }
  Value simulate(const Args& a, Rng& rng) const override {
    check(a);
    return Value::number(rng.gamma(a[0].asNumber(), a[1].asNumber()));
  }
  double logDensity(const Value& v, const Args& a) const override {
    check(a);
    double x = v.asNumber(), k = a[0].asNumber(), r = a[1].asNumber();
    if (x <= 0) return -INFINITY;
    return k * std::log(r) - std::lgamma(k) + (k - 1) * std::log(x) - r * x;
  }
  double logDensityBound(const Value& v, const Args& a, const std::vector<bool>& f) const override {
    if (anyFree(f)) throw NoDensityBound("gamma with free parameters");
    return logDensity(v, a);
  }
  std::string name() const override { return "gamma"; }
};

class BetaPSP : public RandomPSP {
 public:
  static void check(const Args& a) {
    a.requireArity(2, "beta");
    if (!(a[0].asNumber() > 0 && a[1].asNumber() > 0)) throw TypeError("beta parameters must be positive");
  }
  Value simulate(const Args& a, Rng& rng) const override {
    check(a);
    return Value::number(rng.beta(a[0].asNumber(), a[1].asNumber()));
  }
  double logDensity(const Value& v, const Args& a) const override {
    check(a);
    double x = v.asNumber(), al = a[0].asNumber(), be = a[1].asNumber();
    if (x <= 0 || x >= 1) return -INFINITY;
    return (al - 1) * std::log(x) + (be - 1) * std::log1p(-x) - lbeta(al, be);
  }
  double logDensityBound(const Value& v, const Args& a, const std::vector<bool>& f) const override {
    if (anyFree(f)) throw NoDensityBound("beta with free parameters");
    return logDensity(v, a);
  }
  std::string name() const override { return "beta"; }
};

class UniformContinuousPSP : public RandomPSP {
 public:
  static void check(const Args& a) {
    a.requireArity(2, "uniform_continuous");
    if (!(a[0].asNumber() < a[1].asNumber())) throw TypeError("uniform_continuous needs lo < hi");
  }
  Value simulate(const Args& a, Rng& rng) const override {
    check(a);
    return Value::number(rng.uniform(a[0].asNumber(), a[1].asNumber()));
  }
  double logDensity(const Value& v, const Args& a) const override {
    check(a);
    double x = v.asNumber(), lo = a[0].asNumber(), hi = a[1].asNumber();
    if (x < lo || x > hi) return -INFINITY;
    return -std::log(hi - lo);
  }
  double logDensityBound(const Value& v, const Args& a, const std::vector<bool>& f) const override {
    if (anyFree(f)) throw NoDensityBound("uniform_continuous with free bounds");
    return logDensity(v, a);
  }
  std::string name() const override { return "uniform_continuous"; }
};

std::vector<double> probabilities(const Value& v) {
  std::vector<double> ps;
  double total = 0;
  for (const auto& x : v.items()) {
    double p = x.asNumber();
    if (p < 0) throw TypeError("negative probability");
    ps.push_back(p);
    total += p;
  }
  if (ps.empty() || !(total > 0)) throw TypeError("probabilities must have a positive sum");
  for (double& p : ps) p /= total;
  return ps;
}

// Index into a probability vector; returned as a number or as an atom.
class CategoricalPSP : public RandomPSP {
 public:
  explicit CategoricalPSP(bool atoms) : atoms_(atoms) {}
  Value wrap(std::size_t i) const {
    return atoms_ ? Value::atom(static_cast<std::int64_t>(i)) : Value::number(static_cast<double>(i));
  }
  std::int64_t unwrap(const Value& v) const {
    if (atoms_) return v.asAtom();
    double x = v.asNumber();
    return x == std::floor(x) ? static_cast<std::int64_t>(x) : -1;
  }
  Value simulate(const Args& a, Rng& rng) const override {
    a.requireArity(1, name().c_str());
    return wrap(rng.categorical(probabilities(a[0])));
  }
  double logDensity(const Value& v, const Args& a) const override {
    a.requireArity(1, name().c_str());
    auto ps = probabilities(a[0]);
    auto i = unwrap(v);
    if (i < 0 || i >= static_cast<std::int64_t>(ps.size())) return -INFINITY;
    return std::log(ps[static_cast<std::size_t>(i)]);
  }
  double logDensityBound(const Value& v, const Args& a, const std::vector<bool>& f) const override {
    if (anyFree(f)) return 0.0;
    return logDensity(v, a);
  }
  std::vector<Value> enumerateValues(const Args& a) const override {
    std::vector<Value> out;
    for (std::size_t i = 0; i < a[0].items().size(); ++i) out.push_back(wrap(i));
    return out;
  }
  std::string name() const override { return atoms_ ? "draw_atom" : "categorical"; }

 private:
  bool atoms_;
};

class UniformDiscretePSP : public RandomPSP {
 public:
  static std::pair<long, long> range(const Args& a) {
    a.requireArity(2, "uniform_discrete");
    long lo = static_cast<long>(a[0].asNumber()), hi = static_cast<long>(a[1].asNumber());
    if (hi <= lo) throw TypeError("uniform_discrete needs lo < hi");
    return {lo, hi};
  }
  Value simulate(const Args& a, Rng& rng) const override {
    auto [lo, hi] = range(a);
    return Value::number(static_cast<double>(rng.uniformInt(lo, hi)));
  }
  double logDensity(const Value& v, const Args& a) const override {
    auto [lo, hi] = range(a);
    double x = v.asNumber();
    if (x != std::floor(x) || x < lo || x >= hi) return -INFINITY;
    return -std::log(static_cast<double>(hi - lo));
  }
  double logDensityBound(const Value& v, const Args& a, const std::vector<bool>& f) const override {
    if (anyFree(f)) return 0.0;
    return logDensity(v, a);
  }
  std::vector<Value> enumerateValues(const Args& a) const override {
    auto [lo, hi] = range(a);
    std::vector<Value> out;
    for (long i = lo; i < hi; ++i) out.push_back(Value::number(static_cast<double>(i)));
    return out;
  }
  std::string name() const override { return "uniform_discrete"; }
};

// Likelihood-free: iterate the logistic map then add Gaussian noise. There is
// no density, so applications can only be resampled.
class NoisyLogisticMapPSP : public PSP {
 public:
  Value simulate(const Args& a, Rng& rng) const override {
    a.requireArity(1, "noisy_logistic_map");
    double x = a[0].asNumber();
    x = x - std::floor(x);
    for (int i = 0; i < 20; ++i) x = 3.99 * x * (1 - x);
    return Value::number(x + rng.normal(0.0, 0.01));
  }
  bool isRandom() const override { return true; }
  std::string name() const override { return "noisy_logistic_map"; }
};

class NormalVariationalKernel : public VariationalKernel {
 public:
  NormalVariationalKernel(const PSP* psp, double mu, double sigma) : psp_(psp), theta_{mu, std::log(sigma)} {}
  Value simulate(const Value*, const Args&, Rng& rng) override {
    return Value::number(rng.normal(theta_[0], std::exp(theta_[1])));
  }
  double logQ(const Value& x) const override {
    return normalLogPdf(x.asNumber(), theta_[0], std::exp(theta_[1]));
  }
  double weight(const Value& v, const Value*, const Args& a) override { return psp_->logDensity(v, a) - logQ(v); }
  double reverseWeight(const Value& v, const Args& a) override { return psp_->logDensity(v, a) - logQ(v); }
  std::vector<double>& parameters() override { return theta_; }
  std::vector<double> gradientOfLogQ(const Value& xv) const override {
    double s2 = std::exp(2 * theta_[1]);
    double d = xv.asNumber() - theta_[0];
    return {d / s2, d * d / s2 - 1.0};
  }

 private:
  const PSP* psp_;
  std::vector<double> theta_;  // mean, log scale
};

class BernoulliVariationalKernel : public VariationalKernel {
 public:
  BernoulliVariationalKernel(const PSP* psp, double p) : psp_(psp) {
    double q = std::min(std::max(p, 1e-6), 1 - 1e-6);
    theta_ = {std::log(q / (1 - q))};
  }
  double q() const { return 1.0 / (1.0 + std::exp(-theta_[0])); }
  Value simulate(const Value*, const Args&, Rng& rng) override { return Value::boolean(rng.bernoulli(q())); }
  double logQ(const Value& x) const override { return std::log(x.asBool() ? q() : 1 - q()); }
  double weight(const Value& v, const Value*, const Args& a) override { return psp_->logDensity(v, a) - logQ(v); }
  double reverseWeight(const Value& v, const Args& a) override { return psp_->logDensity(v, a) - logQ(v); }
  std::vector<double>& parameters() override { return theta_; }
  std::vector<double> gradientOfLogQ(const Value& x) const override { return {(x.asBool() ? 1.0 : 0.0) - q()}; }

 private:
  const PSP* psp_;
  std::vector<double> theta_;  // logit
};

}  // namespace

void installStochastic(Trace& t) {
  bindSP(t, {"bernoulli", "flip"}, simpleSP(std::make_shared<BernoulliPSP>()));
  bindSP(t, {"normal"}, simpleSP(std::make_shared<NormalPSP>()));
  bindSP(t, {"gamma"}, simpleSP(std::make_shared<GammaPSP>()));
  bindSP(t, {"beta"}, simpleSP(std::make_shared<BetaPSP>()));
  bindSP(t, {"uniform_continuous", "uniform"}, simpleSP(std::make_shared<UniformContinuousPSP>()));
  bindSP(t, {"categorical"}, simpleSP(std::make_shared<CategoricalPSP>(false)));
  bindSP(t, {"draw_atom"}, simpleSP(std::make_shared<CategoricalPSP>(true)));
  bindSP(t, {"uniform_discrete"}, simpleSP(std::make_shared<UniformDiscretePSP>()));
  bindSP(t, {"noisy_logistic_map"}, simpleSP(std::make_shared<NoisyLogisticMapPSP>()));
}

}  // namespace detail

std::shared_ptr<VariationalKernel> makeVariationalKernel(const PSP& psp, const Args& args) {
  if (dynamic_cast<const detail::NormalPSP*>(&psp))
    return std::make_shared<detail::NormalVariationalKernel>(&psp, args[0].asNumber(), args[1].asNumber());
  if (dynamic_cast<const detail::BernoulliPSP*>(&psp))
    return std::make_shared<detail::BernoulliVariationalKernel>(&psp, detail::BernoulliPSP::p(args));
  return nullptr;
}

}  // namespace venture
