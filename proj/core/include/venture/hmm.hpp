#pragma once

#include <map>
#include <memory>
#include <vector>

#include "venture/sp.hpp"

namespace venture {

// Parameters of an uncollapsed hidden Markov model. The initial state is
// uniform; transition and emission rows are drawn by make_hmm.
struct HMMParams {
  std::vector<double> initial;
  std::vector<std::vector<double>> transition;
  std::vector<std::vector<double>> emission;
  std::size_t numStates() const { return initial.size(); }
  std::size_t numSymbols() const { return emission.empty() ? 0 : emission[0].size(); }
};

struct HMMAux : SPAux {
  std::map<long, std::vector<int>> latents;          // seq -> x_0..x_n
  std::map<long, std::map<long, long>> live;         // seq -> t -> live request count
  std::map<std::pair<long, long>, std::map<long, long>> observations;  // (seq, t) -> symbol -> count
  bool clonableFlag = true;

  std::unique_ptr<SPAux> clone() const override;
  bool clonable() const override { return clonableFlag; }
  bool equals(const SPAux& other) const override;
  nlohmann::json toJson() const override;
};

struct HMMLatentDB : LatentDB {
  std::map<std::pair<long, long>, int> values;
};

// Applications are (sp seq t); each application requests the latent chain of
// seq up to t and emits a symbol given x_t.
class HMMSP : public SP {
 public:
  HMMSP(std::shared_ptr<const HMMParams> params, bool clonable);

  const HMMParams& params() const { return *params_; }

  std::unique_ptr<SPAux> constructSPAux() const override;
  std::unique_ptr<LatentDB> constructLatentDB() const override { return std::make_unique<HMMLatentDB>(); }
  double simulateLatents(SPAux& aux, const Value& lsr, bool restore, LatentDB* db, Rng& rng) const override;
  double detachLatents(SPAux& aux, const Value& lsr, LatentDB& db) const override;
  bool hasAEKernel() const override { return true; }
  // Forward filtering, backward sampling of every latent chain.
  void AEInfer(SPAux& aux, Rng& rng) const override;

  // log p(latents, emitted symbols | params)
  static double jointLogDensity(const HMMParams& p, const HMMAux& aux);

 private:
  std::shared_ptr<const HMMParams> params_;
  bool clonable_;
};

}  // namespace venture
