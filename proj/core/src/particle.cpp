#include "venture/particle.hpp"

namespace venture {

Particle particleFromArchives(std::vector<std::shared_ptr<OmegaDB>> stages, double weight) {
  Particle p;
  p.stages = std::move(stages);
  p.weight = weight;
  return p;
}

void attachParticle(Trace& trace, Scaffold& scaffold, const Particle& p, std::size_t n) {
  for (std::size_t s = 0; s < n; ++s) regenerateAndAttach(trace, scaffold.border[s], scaffold, true, *p.stages[s]);
}

void detachParticle(Trace& trace, Scaffold& scaffold, Particle& p, std::size_t n) {
  for (std::size_t s = n; s-- > 0;) {
    auto db = std::make_shared<OmegaDB>();
    detachAndExtract(trace, scaffold.border[s], scaffold, *db);
    p.stages[s] = std::move(db);
  }
}

Particle extendParticle(Trace& trace, Scaffold& scaffold, const Particle& parent, std::size_t stage) {
  Particle child;
  child.stages.assign(stage + 1, nullptr);
  for (std::size_t s = 0; s < stage; ++s) child.stages[s] = parent.stages[s];
  attachParticle(trace, scaffold, child, stage);
  OmegaDB fresh;
  child.weight = regenerateAndAttach(trace, scaffold.border[stage], scaffold, false, fresh);
  child.unconstrained = trace.unconstrainedChoices().size();
  detachParticle(trace, scaffold, child, stage + 1);
  return child;
}

}  // namespace venture
