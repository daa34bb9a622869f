#include "venture/inference.hpp"

#include <algorithm>
#include <cmath>

#include "venture/errors.hpp"
#include "venture/particle.hpp"

namespace venture {

namespace {

bool isDefaultScope(const Value& scope) { return scope.isSymbol() && scope.asSymbol() == "default"; }
bool isLatentsScope(const Value& scope) { return scope.isSymbol() && scope.asSymbol() == "latents"; }

std::vector<Node*> unconstrainedOf(const IndexedSet<Node*>& block) {
  std::vector<Node*> out;
  for (Node* n : block.items())
    if (!n->isConstrained) out.push_back(n);
  std::sort(out.begin(), out.end(), NodeIdLess());
  return out;
}

std::size_t chosenBlockSize(Trace& trace, const Selection& sel) {
  if (isDefaultScope(sel.scope) || sel.chosenBlock.isNil()) return 0;
  const ScopeBlocks* sb = trace.scope(sel.scope);
  if (!sb) return 0;
  auto it = sb->blocks.find(sel.chosenBlock);
  return it == sb->blocks.end() ? 0 : it->second.size();
}

bool accept(Trace& trace, double alpha) {
  if (std::isnan(alpha)) return false;
  return std::log(trace.rng().uniform()) < alpha;
}

double selectionDelta(Trace& trace, const Selection& sel) {
  if (!trace.config().selectionCorrection) return 0.0;
  return reselectionLogProb(trace, sel) - sel.logProb;
}

void noteScopeChange(Trace& trace, const Selection& sel, std::size_t before) {
  if (!isDefaultScope(sel.scope) && !sel.chosenBlock.isNil() && chosenBlockSize(trace, sel) != before)
    ++trace.stats().scopeViolations;
}

void attachDriftKernels(Trace& trace, Scaffold& sc) {
  if (!trace.config().driftKernel) return;
  for (Node* p : sc.principalNodes) {
    if (!sc.isResampling(p) || sc.isAAA(p)) continue;
    const PSP& psp = trace.pspAt(p);
    if (psp.name() == "normal") sc.kernels[p] = std::make_shared<DriftKernel>(trace.config().driftSigma, &psp);
  }
}

void requireClonable(Trace& trace, const Scaffold& sc) {
  auto check = [&](Node* n) {
    if (n->kind != NodeKind::Request && n->kind != NodeKind::Output) return;
    for (NodeId id : {trace.operatorMakerId(n), n->id}) {
      const MadeSPRecord* rec = trace.madeRecord(id);
      if (rec && rec->aux && !rec->aux->clonable())
        throw NonClonableAux("procedure made at node " + std::to_string(id) + " cannot clone its state");
    }
  };
  for (auto* set : {&sc.drg, &sc.absorbing, &sc.brush})
    for (Node* n : *set) check(n);
}

}  // namespace

bool Selection::empty() const {
  for (const auto& s : sets)
    if (!s.empty()) return false;
  return true;
}

Selection selectPrincipals(Trace& trace, const Value& scope, const BlockSpec& block) {
  Selection sel;
  sel.scope = scope;
  sel.block = block;
  Rng& rng = trace.rng();
  if (isDefaultScope(scope)) {
    const auto& uc = trace.unconstrainedChoices();
    if (uc.empty()) return sel;
    switch (block.mode) {
      case BlockMode::One: {
        long i = rng.uniformInt(0, static_cast<long>(uc.size()));
        sel.sets = {{uc.at(static_cast<std::size_t>(i))}};
        sel.logProb = -std::log(static_cast<double>(uc.size()));
        break;
      }
      case BlockMode::All:
      case BlockMode::Ordered: {
        std::vector<Node*> all = uc.items();
        std::sort(all.begin(), all.end(), NodeIdLess());
        sel.sets = {all};
        break;
      }
      case BlockMode::Literal:
        throw InvalidInference("the default scope has no named blocks");
    }
    return sel;
  }
  const ScopeBlocks* sb = trace.scope(scope);
  if (!sb || sb->keys.empty()) {
    if (block.mode == BlockMode::Literal)
      throw UnknownScope("unknown scope " + scope.toString());
    return sel;
  }
  switch (block.mode) {
    case BlockMode::One: {
      long i = rng.uniformInt(0, static_cast<long>(sb->keys.size()));
      sel.chosenBlock = sb->keys.at(static_cast<std::size_t>(i));
      sel.sets = {unconstrainedOf(sb->blocks.at(sel.chosenBlock))};
      sel.logProb = -std::log(static_cast<double>(sb->keys.size()));
      break;
    }
    case BlockMode::Literal: {
      auto it = sb->blocks.find(block.literal);
      if (it == sb->blocks.end())
        throw UnknownBlock("unknown block " + block.literal.toString() + " in scope " + scope.toString());
      sel.chosenBlock = block.literal;
      sel.sets = {unconstrainedOf(it->second)};
      break;
    }
    case BlockMode::All: {
      std::vector<Node*> all;
      for (const auto& [k, b] : sb->blocks) {
        auto nodes = unconstrainedOf(b);
        all.insert(all.end(), nodes.begin(), nodes.end());
      }
      std::sort(all.begin(), all.end(), NodeIdLess());
      sel.sets = {all};
      break;
    }
    case BlockMode::Ordered: {
      std::vector<Value> keys = sb->keys.items();
      std::sort(keys.begin(), keys.end(), ValueLess());
      for (const auto& k : keys) {
        auto nodes = unconstrainedOf(sb->blocks.at(k));
        if (!nodes.empty()) sel.sets.push_back(std::move(nodes));
      }
      break;
    }
  }
  return sel;
}

double reselectionLogProb(Trace& trace, const Selection& sel) {
  if (sel.block.mode != BlockMode::One) return 0.0;
  if (isDefaultScope(sel.scope)) {
    std::size_t n = trace.unconstrainedChoices().size();
    return n == 0 ? -INFINITY : -std::log(static_cast<double>(n));
  }
  const ScopeBlocks* sb = trace.scope(sel.scope);
  if (!sb || !sb->blocks.count(sel.chosenBlock)) return -INFINITY;
  return -std::log(static_cast<double>(sb->keys.size()));
}

bool mhTransition(Trace& trace, const Value& scope, const BlockSpec& block) {
  ++trace.stats().transitions;
  Selection sel = selectPrincipals(trace, scope, block);
  if (sel.empty()) {
    ++trace.stats().accepted;
    return true;
  }
  Scaffold sc = constructScaffold(trace, sel.sets);
  attachDriftKernels(trace, sc);
  std::vector<Node*> border = sc.flatBorder();
  std::size_t before = chosenBlockSize(trace, sel);
  OmegaDB rhoDB;
  double rhoW = detachAndExtract(trace, border, sc, rhoDB);
  double xiW = regenerateAndAttach(trace, border, sc, false, rhoDB);
  noteScopeChange(trace, sel, before);
  double alpha = selectionDelta(trace, sel) + xiW - rhoW;
  if (accept(trace, alpha)) {
    ++trace.stats().accepted;
    return true;
  }
  std::uint64_t v0 = trace.stats().nodeVisits;
  OmegaDB xiDB;
  detachAndExtract(trace, border, sc, xiDB);
  regenerateAndAttach(trace, border, sc, true, rhoDB);
  trace.stats().restoreVisits += trace.stats().nodeVisits - v0;
  return false;
}

void rejectionTransition(Trace& trace, const Value& scope, const BlockSpec& block) {
  ++trace.stats().transitions;
  Selection sel = selectPrincipals(trace, scope, block);
  if (sel.empty()) {
    ++trace.stats().accepted;
    return;
  }
  Scaffold sc = constructScaffold(trace, sel.sets);
  std::vector<Node*> border = sc.flatBorder();

  double bound = 0.0;
  for (Node* n : sc.absorbing) {
    const PSP& psp = trace.pspAt(n);
    if (n->kind == NodeKind::Request || psp.isESRReference()) continue;
    Args args = trace.argsAt(n);
    std::vector<bool> free(n->operandNodes.size());
    for (std::size_t i = 0; i < free.size(); ++i) free[i] = sc.isResampling(n->operandNodes[i].get());
    bound += psp.logDensityBound(n->value, args, free);
  }
  for (Node* n : sc.aaa) {
    const MadeSPRecord* rec = trace.madeRecord(n->id);
    if (rec && rec->sp && rec->aux) bound += rec->sp->outputPSP().logDensityOfCountsBound(*rec->aux);
  }
  for (Node* n : border) {
    if (sc.isAbsorbing(n) || !n->isObservation) continue;
    Node* target = observationTarget(trace, n);
    if (!target->isRandomChoice) continue;
    Args args = trace.argsAt(target);
    bound += trace.pspAt(target).logDensityBound(n->observedValue, args, std::vector<bool>(args.size(), true));
  }

  OmegaDB rhoDB;
  detachAndExtract(trace, border, sc, rhoDB);
  for (long attempt = 0; attempt < trace.config().rejectionCap; ++attempt) {
    ++trace.stats().rejectionAttempts;
    double xiW = regenerateAndAttach(trace, border, sc, false, rhoDB);
    if (accept(trace, xiW - bound)) {
      ++trace.stats().accepted;
      return;
    }
    OmegaDB discard;
    detachAndExtract(trace, border, sc, discard);
  }
  regenerateAndAttach(trace, border, sc, true, rhoDB);
  throw ComputeBudgetExceeded("rejection gave up after " + std::to_string(trace.config().rejectionCap) +
                              " attempts");
}

bool enumerativeGibbsTransition(Trace& trace, const Value& scope, const BlockSpec& block) {
  Selection sel = selectPrincipals(trace, scope, block);
  if (sel.empty()) {
    ++trace.stats().transitions;
    ++trace.stats().accepted;
    return true;
  }
  Scaffold sc = constructScaffold(trace, sel.sets);
  std::vector<Node*> nodes;
  std::vector<const PSP*> psps;
  std::vector<std::vector<Value>> supports;
  std::vector<Node*> principals(sc.principalNodes.begin(), sc.principalNodes.end());
  std::sort(principals.begin(), principals.end(), NodeIdLess());
  double product = 1.0;
  for (Node* p : principals) {
    if (!sc.isResampling(p) || sc.isAAA(p)) continue;
    const PSP& psp = trace.pspAt(p);
    auto vals = psp.enumerateValues(trace.argsAt(p));
    if (vals.empty()) continue;
    nodes.push_back(p);
    psps.push_back(&psp);
    product *= static_cast<double>(vals.size());
    supports.push_back(std::move(vals));
  }
  if (product > trace.config().supportCap)
    throw SupportTooLarge("enumeration needs " + std::to_string(product) + " particles");
  ++trace.stats().transitions;

  std::vector<Value> current;
  for (Node* n : nodes) current.push_back(n->value);
  auto setKernels = [&](const std::vector<Value>& tuple) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      sc.kernels[nodes[i]] = std::make_shared<DeterministicKernel>(tuple[i], psps[i]);
  };

  std::vector<Node*> border = sc.flatBorder();
  setKernels(current);
  OmegaDB rhoDB;
  double rhoW = detachAndExtract(trace, border, sc, rhoDB);

  std::vector<double> weights;
  std::vector<std::vector<Value>> tuples;
  std::vector<std::shared_ptr<OmegaDB>> dbs;
  long rhoIndex = -1;
  std::vector<std::size_t> digit(nodes.size(), 0);
  for (long count = 0; count < static_cast<long>(product); ++count) {
    std::vector<Value> tuple;
    for (std::size_t i = 0; i < nodes.size(); ++i) tuple.push_back(supports[i][digit[i]]);
    if (rhoIndex < 0 && tuple == current) {
      rhoIndex = static_cast<long>(weights.size());
      weights.push_back(rhoW);
      dbs.push_back(nullptr);
    } else {
      setKernels(tuple);
      weights.push_back(regenerateAndAttach(trace, border, sc, false, rhoDB));
      auto db = std::make_shared<OmegaDB>();
      detachAndExtract(trace, border, sc, *db);
      dbs.push_back(db);
    }
    tuples.push_back(std::move(tuple));
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (++digit[i] < supports[i].size()) break;
      digit[i] = 0;
    }
  }
  if (rhoIndex < 0) {
    rhoIndex = static_cast<long>(weights.size());
    weights.push_back(rhoW);
    dbs.push_back(nullptr);
    tuples.push_back(current);
  }

  auto chosen = static_cast<long>(trace.rng().categoricalLog(weights));
  setKernels(tuples[chosen]);
  regenerateAndAttach(trace, border, sc, true, chosen == rhoIndex ? rhoDB : *dbs[chosen]);
  if (chosen != rhoIndex) ++trace.stats().accepted;
  return chosen != rhoIndex;
}

bool pgibbsTransition(Trace& trace, const Value& scope, const BlockSpec& block, long P, bool functional) {
  if (P < 2) throw InvalidInference("particle Gibbs needs at least two particles");
  ++trace.stats().transitions;
  Selection sel = selectPrincipals(trace, scope, block);
  if (sel.empty()) {
    ++trace.stats().accepted;
    return true;
  }
  Scaffold sc = constructScaffold(trace, sel.sets);
  if (functional) requireClonable(trace, sc);
  std::size_t T = sc.border.size();
  std::size_t before = chosenBlockSize(trace, sel);

  std::size_t rhoCount = trace.unconstrainedChoices().size();
  std::vector<double> rhoWeights(T);
  std::vector<std::shared_ptr<OmegaDB>> rhoDBs(T);
  for (std::size_t t = T; t-- > 0;) {
    rhoDBs[t] = std::make_shared<OmegaDB>();
    rhoWeights[t] = detachAndExtract(trace, sc.border[t], sc, *rhoDBs[t]);
  }
  auto n = static_cast<std::size_t>(P);
  std::size_t rho = n - 1;
  Particle rhoParticle = particleFromArchives(rhoDBs, rhoWeights[0]);
  rhoParticle.unconstrained = rhoCount;

  std::vector<Particle> particles(n);
  Particle root;
  for (std::size_t p = 0; p < rho; ++p) particles[p] = extendParticle(trace, sc, root, 0);
  particles[rho] = rhoParticle;

  Rng& rng = trace.rng();
  auto weightsOf = [](const std::vector<Particle>& ps) {
    std::vector<double> w;
    for (const auto& p : ps) w.push_back(p.weight);
    return w;
  };
  for (std::size_t t = 1; t < T; ++t) {
    std::vector<double> w = weightsOf(particles);
    std::vector<Particle> next(n);
    for (std::size_t p = 0; p < rho; ++p) next[p] = extendParticle(trace, sc, particles[rng.categoricalLog(w)], t);
    next[rho] = rhoParticle;
    next[rho].weight = rhoWeights[t];
    particles = std::move(next);
  }

  std::vector<double> w = weightsOf(particles);
  std::size_t chosen;
  bool boltzmann = trace.config().boltzmannPGibbs;
  if (boltzmann) {
    chosen = rng.categoricalLog(w);
  } else if (rho == 1) {
    chosen = 0;
  } else {
    chosen = rng.categoricalLog(std::vector<double>(w.begin(), w.begin() + static_cast<long>(rho)));
  }
  if (chosen == rho) {
    attachParticle(trace, sc, rhoParticle, T);
    return false;
  }
  attachParticle(trace, sc, particles[chosen], T);
  noteScopeChange(trace, sel, before);
  if (boltzmann) {
    ++trace.stats().accepted;
    return true;
  }
  std::vector<double> minusXi, minusRho;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != chosen) minusXi.push_back(w[i]);
    if (i != rho) minusRho.push_back(w[i]);
  }
  double alpha = selectionDelta(trace, sel) + logSumExp(minusRho) - logSumExp(minusXi);
  if (accept(trace, alpha)) {
    ++trace.stats().accepted;
    return true;
  }
  Particle xi = particles[chosen];
  detachParticle(trace, sc, xi, T);
  attachParticle(trace, sc, rhoParticle, T);
  return false;
}

MeanFieldResult meanfieldTransition(Trace& trace, const Value& scope, const BlockSpec& block, long iterations) {
  MeanFieldResult result;
  ++trace.stats().transitions;
  Selection sel = selectPrincipals(trace, scope, block);
  if (sel.empty()) {
    ++trace.stats().accepted;
    result.accepted = true;
    return result;
  }
  Scaffold sc = constructScaffold(trace, sel.sets);
  std::vector<Node*> principals(sc.principalNodes.begin(), sc.principalNodes.end());
  std::sort(principals.begin(), principals.end(), NodeIdLess());
  std::vector<std::pair<Node*, std::shared_ptr<VariationalKernel>>> kernels;
  for (Node* p : principals) {
    if (!sc.isResampling(p) || sc.isAAA(p)) continue;
    const PSP& psp = trace.pspAt(p);
    if (psp.hasVariationalFamily()) kernels.emplace_back(p, makeVariationalKernel(psp, trace.argsAt(p)));
  }
  std::vector<Node*> border = sc.flatBorder();
  std::size_t before = chosenBlockSize(trace, sel);

  OmegaDB rhoDB;
  detachAndExtract(trace, border, sc, rhoDB);
  for (auto& [node, k] : kernels) sc.kernels[node] = k;

  const double a = trace.config().meanfieldA, b = trace.config().meanfieldB;
  for (long t = 0; t < iterations; ++t) {
    double w = regenerateAndAttach(trace, border, sc, false, rhoDB);
    std::vector<std::vector<double>> grads;
    for (auto& [node, k] : kernels) grads.push_back(k->gradientOfLogQ(node->value));
    OmegaDB discard;
    detachAndExtract(trace, border, sc, discard);
    if (!std::isfinite(w)) continue;
    double step = a / (b + static_cast<double>(t));
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      auto& theta = kernels[i].second->parameters();
      for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += step * grads[i][j] * w;
    }
  }

  regenerateAndAttach(trace, border, sc, true, rhoDB);
  OmegaDB rhoDB2;
  double rhoW = detachAndExtract(trace, border, sc, rhoDB2);
  double xiW = regenerateAndAttach(trace, border, sc, false, rhoDB2);
  noteScopeChange(trace, sel, before);
  double alpha = selectionDelta(trace, sel) + xiW - rhoW;
  for (auto& [node, k] : kernels) result.parameters.emplace_back(node->id, k->parameters());
  if (accept(trace, alpha)) {
    ++trace.stats().accepted;
    result.accepted = true;
    return result;
  }
  OmegaDB xiDB;
  detachAndExtract(trace, border, sc, xiDB);
  regenerateAndAttach(trace, border, sc, true, rhoDB2);
  return result;
}

void latentsTransition(Trace& trace, long times) {
  for (long i = 0; i < times; ++i) {
    ++trace.stats().transitions;
    const auto& makers = trace.aeKernelNodes();
    if (makers.empty()) continue;
    Node* m = makers.at(static_cast<std::size_t>(trace.rng().uniformInt(0, static_cast<long>(makers.size()))));
    MadeSPRecord* rec = trace.madeRecord(m->id);
    if (!rec || !rec->sp || !rec->aux) continue;
    rec->sp->AEInfer(*rec->aux, trace.rng());
    ++trace.stats().accepted;
  }
}

void runInference(Trace& trace, const InferenceExpr& e) {
  using K = InferenceExpr::Kind;
  if (isLatentsScope(e.scope) && e.kind != K::Cycle && e.kind != K::Mixture) {
    if (e.kind != K::MH) throw InvalidInference("the latents scope only supports mh");
    latentsTransition(trace, e.transitions);
    return;
  }
  for (long t = 0; t < e.transitions; ++t) {
    switch (e.kind) {
      case K::MH: mhTransition(trace, e.scope, e.block); break;
      case K::Rejection: rejectionTransition(trace, e.scope, e.block); break;
      case K::EnumGibbs: enumerativeGibbsTransition(trace, e.scope, e.block); break;
      case K::PGibbs: pgibbsTransition(trace, e.scope, e.block, e.particles, false); break;
      case K::FuncPGibbs: pgibbsTransition(trace, e.scope, e.block, e.particles, true); break;
      case K::MeanField: meanfieldTransition(trace, e.scope, e.block, e.iterations); break;
      case K::Cycle:
        for (const auto& c : e.children) runInference(trace, c);
        break;
      case K::Mixture: {
        if (e.children.empty()) break;
        std::size_t i = trace.rng().categorical(e.weights);
        runInference(trace, e.children[i]);
        break;
      }
    }
  }
}

}  // namespace venture
