#include "venture/sp.hpp"

#include <cmath>

#include "venture/errors.hpp"

namespace venture {

void Args::requireArity(std::size_t n, const char* sp) const {
  if (size() != n)
    throw ArityError(std::string(sp) + " takes " + std::to_string(n) + " arguments, got " +
                     std::to_string(size()));
}

void Args::requireArity(std::size_t lo, std::size_t hi, const char* sp) const {
  if (size() < lo || size() > hi)
    throw ArityError(std::string(sp) + " takes " + std::to_string(lo) + " to " + std::to_string(hi) +
                     " arguments, got " + std::to_string(size()));
}

std::unique_ptr<SPAux> SPAux::clone() const {
  auto out = std::make_unique<SPAux>();
  out->families = families;
  return out;
}

double PSP::logDensity(const Value&, const Args&) const {
  throw NotAbsorbing(name() + " has no tractable density");
}

double PSP::logDensityBound(const Value&, const Args&, const std::vector<bool>&) const {
  throw NoDensityBound(name() + " has no density bound");
}

double PSP::logDensityOfCounts(const SPAux&) const {
  throw NotAbsorbing(name() + " cannot score its statistics");
}

double PSP::logDensityOfCountsBound(const SPAux&) const {
  throw NoDensityBound(name() + " has no bound on the density of its statistics");
}

Value NullRequestPSP::simulate(const Args&, Rng&) const {
  static const RequestPtr empty = std::make_shared<const Request>();
  return Value::request(empty);
}

std::shared_ptr<const PSP> NullRequestPSP::instance() {
  static const std::shared_ptr<const PSP> p = std::make_shared<NullRequestPSP>();
  return p;
}

Value ESRRefOutputPSP::simulate(const Args& args, Rng&) const {
  if (args.esrValues.empty()) throw TypeError("reference output without a requested family");
  return args.esrValues[0];
}

double ESRRefOutputPSP::logDensity(const Value& value, const Args& args) const {
  if (args.esrValues.empty()) return -INFINITY;
  return value == args.esrValues[0] ? 0.0 : -INFINITY;
}

std::shared_ptr<const PSP> ESRRefOutputPSP::instance() {
  static const std::shared_ptr<const PSP> p = std::make_shared<ESRRefOutputPSP>();
  return p;
}

Value DriftKernel::simulate(const Value* oldValue, const Args& args, Rng& rng) {
  if (!oldValue) return psp_->simulate(args, rng);
  return Value::number(oldValue->asNumber() + rng.normal(0.0, sigma_));
}

double AAAKernel::weight(const Value& newValue, const Value*, const Args& args) {
  if (!args.madeSPAux) throw TypeError("absorbing maker without statistics");
  return newValue.asSP()->outputPSP().logDensityOfCounts(*args.madeSPAux);
}

double AAAKernel::reverseWeight(const Value& oldValue, const Args& args) {
  if (!args.madeSPAux) throw TypeError("absorbing maker without statistics");
  return oldValue.asSP()->outputPSP().logDensityOfCounts(*args.madeSPAux);
}

}  // namespace venture
