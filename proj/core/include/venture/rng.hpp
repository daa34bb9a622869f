#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace venture {

// Single source of randomness for an engine. Distribution objects are
// built per call so no hidden state survives between draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  void seed(std::uint64_t s) { eng_.seed(s); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = std::generate_canonical<double, 53>(eng_);
    } while (u <= 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }

  double normal(double mu, double sigma) { return std::normal_distribution<double>(mu, sigma)(eng_); }

  // shape / rate parameterisation
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(eng_);
  }

  double beta(double a, double b) {
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    return x / (x + y);
  }

  bool bernoulli(double p) { return uniform() < p; }

  long uniformInt(long lo, long hiExclusive) {
    return std::uniform_int_distribution<long>(lo, hiExclusive - 1)(eng_);
  }

  // Index drawn proportionally to non-negative weights.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0) return i;
    return 0;
  }

  // Index drawn proportionally to exp(logWeights).
  std::size_t categoricalLog(const std::vector<double>& logWeights) {
    double m = -INFINITY;
    for (double w : logWeights) m = std::max(m, w);
    std::vector<double> ws(logWeights.size());
    for (std::size_t i = 0; i < ws.size(); ++i)
      ws[i] = std::isinf(m) ? 1.0 : std::exp(logWeights[i] - m);
    return categorical(ws);
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double total = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) total += (out[i] = gamma(alpha[i], 1.0));
    for (double& x : out) x /= total;
    return out;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline double logSumExp(const std::vector<double>& xs) {
  double m = -INFINITY;
  for (double x : xs) m = std::max(m, x);
  if (std::isinf(m)) return m;
  double s = 0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace venture
