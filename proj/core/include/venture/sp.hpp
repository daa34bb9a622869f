#pragma once

#include <memory>
#include <string>
#include <vector>

#include "venture/rng.hpp"
#include "venture/value.hpp"

namespace venture {

// How the scaffold walk arrived at an application node.
enum class ParentRole { Operand, Operator, Request, ESR };

// Exposed simulation request: a family to evaluate (or reuse) under addr.
struct ESR {
  Value addr;
  Value expr;
  EnvPtr env;
};

struct Request {
  std::vector<ESR> esrs;
  std::vector<Value> lsrs;
  bool empty() const { return esrs.empty() && lsrs.empty(); }
};

// Per-SP mutable state. The family map is shared by all request-making SPs;
// subclasses hold sufficient statistics.
class SPAux {
 public:
  virtual ~SPAux() = default;
  std::unordered_map<Value, NodePtr, ValueHash> families;

  virtual std::unique_ptr<SPAux> clone() const;
  virtual bool clonable() const { return true; }
  // Compares statistics only; family maps are structural and checked elsewhere.
  virtual bool equals(const SPAux& other) const { return true; }
  virtual nlohmann::json toJson() const { return nlohmann::json::object(); }
};

class LatentDB {
 public:
  virtual ~LatentDB() = default;
};

class Trace;

// Everything a PSP may read about the application it is serving.
struct Args {
  Trace* trace = nullptr;
  Node* node = nullptr;
  NodeId requestNodeId = 0;
  std::vector<Value> operandValues;
  std::vector<Node*> operandNodes;
  std::vector<Value> esrValues;
  EnvPtr env;                       // environment of the application
  SPAux* spaux = nullptr;           // aux of the SP being applied
  SPAux* madeSPAux = nullptr;       // aux of the SP made at this node, if any
  const Request* request = nullptr; // request issued by this application

  std::size_t size() const { return operandValues.size(); }
  const Value& operator[](std::size_t i) const { return operandValues[i]; }
  void requireArity(std::size_t n, const char* sp) const;
  void requireArity(std::size_t lo, std::size_t hi, const char* sp) const;
};

class PSP {
 public:
  virtual ~PSP() = default;

  virtual Value simulate(const Args& args, Rng& rng) const = 0;
  // Throws NotAbsorbing when the PSP has no tractable density.
  virtual double logDensity(const Value& value, const Args& args) const;
  virtual bool isRandom() const { return false; }
  virtual bool canAbsorb(ParentRole role) const { return false; }
  virtual bool hasLogDensity() const { return false; }

  // Upper bound on logDensity(value, args) over all values of the free
  // arguments. Throws NoDensityBound when none is known.
  virtual double logDensityBound(const Value& value, const Args& args,
                                 const std::vector<bool>& freeArgs) const;

  virtual void incorporate(const Value& value, const Args& args) const {}
  virtual void unincorporate(const Value& value, const Args& args) const {}

  // Collapsed SPs: the maker PSP advertises absorption at applications and
  // the made output PSP scores its incorporated statistics.
  virtual bool childrenCanAAA() const { return false; }
  virtual double logDensityOfCounts(const SPAux& aux) const;
  virtual double logDensityOfCountsBound(const SPAux& aux) const;

  // Finite support, in a fixed order. Empty means not enumerable.
  virtual std::vector<Value> enumerateValues(const Args& args) const { return {}; }

  // Output equals the value of the first ESR parent.
  virtual bool isESRReference() const { return false; }

  // Variational family support for mean-field inference.
  virtual bool hasVariationalFamily() const { return false; }

  virtual std::string name() const = 0;
};

class SP {
 public:
  SP(std::shared_ptr<const PSP> requestPSP, std::shared_ptr<const PSP> outputPSP, std::string name)
      : requestPSP_(std::move(requestPSP)), outputPSP_(std::move(outputPSP)), name_(std::move(name)) {}
  virtual ~SP() = default;

  const PSP& requestPSP() const { return *requestPSP_; }
  const PSP& outputPSP() const { return *outputPSP_; }
  const std::string& name() const { return name_; }

  virtual std::unique_ptr<SPAux> constructSPAux() const { return std::make_unique<SPAux>(); }
  virtual std::unique_ptr<LatentDB> constructLatentDB() const { return nullptr; }
  virtual double simulateLatents(SPAux& aux, const Value& lsr, bool restore, LatentDB* db, Rng& rng) const {
    return 0.0;
  }
  virtual double detachLatents(SPAux& aux, const Value& lsr, LatentDB& db) const { return 0.0; }
  virtual bool hasAEKernel() const { return false; }
  virtual void AEInfer(SPAux& aux, Rng& rng) const {}

 private:
  std::shared_ptr<const PSP> requestPSP_;
  std::shared_ptr<const PSP> outputPSP_;
  std::string name_;
};

// A request PSP that never requests anything.
class NullRequestPSP : public PSP {
 public:
  Value simulate(const Args&, Rng&) const override;
  double logDensity(const Value&, const Args&) const override { return 0.0; }
  bool hasLogDensity() const override { return true; }
  bool canAbsorb(ParentRole) const override { return true; }
  std::string name() const override { return "null_request"; }
  static std::shared_ptr<const PSP> instance();
};

// Output PSP that forwards the value of the first ESR parent.
class ESRRefOutputPSP : public PSP {
 public:
  Value simulate(const Args& args, Rng&) const override;
  // Operands only shape the request, so a change there leaves the output
  // intact as long as the referenced family is unchanged.
  double logDensity(const Value& value, const Args& args) const override;
  bool hasLogDensity() const override { return true; }
  bool isESRReference() const override { return true; }
  bool canAbsorb(ParentRole role) const override { return role == ParentRole::Operand; }
  std::string name() const override { return "esr_ref"; }
  static std::shared_ptr<const PSP> instance();
};

// Local proposal kernels attached to scaffold nodes.
class LKernel {
 public:
  virtual ~LKernel() = default;
  virtual Value simulate(const Value* oldValue, const Args& args, Rng& rng) = 0;
  virtual double weight(const Value& newValue, const Value* oldValue, const Args& args) = 0;
  virtual double reverseWeight(const Value& oldValue, const Args& args) = 0;
  virtual bool isVariational() const { return false; }
};

// Proposes a fixed value; used by enumeration and FORCE.
class DeterministicKernel : public LKernel {
 public:
  DeterministicKernel(Value v, const PSP* psp) : value_(std::move(v)), psp_(psp) {}
  Value simulate(const Value*, const Args&, Rng&) override { return value_; }
  double weight(const Value& newValue, const Value*, const Args& args) override {
    return psp_->logDensity(newValue, args);
  }
  double reverseWeight(const Value& oldValue, const Args& args) override {
    return psp_->logDensity(oldValue, args);
  }

 private:
  Value value_;
  const PSP* psp_;
};

// Gaussian random-walk proposal for continuous scalar choices.
class DriftKernel : public LKernel {
 public:
  DriftKernel(double sigma, const PSP* psp) : sigma_(sigma), psp_(psp) {}
  Value simulate(const Value* oldValue, const Args& args, Rng& rng) override;
  double weight(const Value& newValue, const Value*, const Args& args) override {
    return psp_->logDensity(newValue, args);
  }
  double reverseWeight(const Value& oldValue, const Args& args) override {
    return psp_->logDensity(oldValue, args);
  }

 private:
  double sigma_;
  const PSP* psp_;
};

// Kernel for makers absorbing at applications: resimulate the maker and score
// the retained statistics under the new and old made SP.
class AAAKernel : public LKernel {
 public:
  explicit AAAKernel(const PSP* makerPSP) : makerPSP_(makerPSP) {}
  Value simulate(const Value*, const Args& args, Rng& rng) override { return makerPSP_->simulate(args, rng); }
  double weight(const Value& newValue, const Value*, const Args& args) override;
  double reverseWeight(const Value& oldValue, const Args& args) override;

 private:
  const PSP* makerPSP_;
};

// Parametric proposal Q_theta with score-function gradients.
class VariationalKernel : public LKernel {
 public:
  bool isVariational() const override { return true; }
  virtual std::vector<double>& parameters() = 0;
  virtual std::vector<double> gradientOfLogQ(const Value& x) const = 0;
  virtual double logQ(const Value& x) const = 0;
};

std::shared_ptr<VariationalKernel> makeVariationalKernel(const PSP& psp, const Args& args);

}  // namespace venture
