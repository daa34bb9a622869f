#pragma once

#include <memory>
#include <vector>

#include "venture/regen.hpp"

namespace venture {

// One completion of a torus, held as the per-stage archives that rebuild it.
// Only one particle is attached to the trace at a time; the rest live in
// their archives, so extending or committing one never touches another.
struct Particle {
  std::vector<std::shared_ptr<OmegaDB>> stages;
  double weight = 0.0;          // log weight of the latest stage
  std::size_t unconstrained = 0; // unconstrained choices once complete
};

// Wraps the archives produced by detaching the current trace stage by stage.
Particle particleFromArchives(std::vector<std::shared_ptr<OmegaDB>> stages, double weight);

// Re-attaches the first n stages onto the torus.
void attachParticle(Trace& trace, Scaffold& scaffold, const Particle& p, std::size_t n);
// Detaches the first n stages again, refreshing the archives.
void detachParticle(Trace& trace, Scaffold& scaffold, Particle& p, std::size_t n);

// New particle: the parent's stages [0, stage) followed by a fresh
// simulation of `stage`. Leaves the trace as the torus.
Particle extendParticle(Trace& trace, Scaffold& scaffold, const Particle& parent, std::size_t stage);

}  // namespace venture
