#include <benchmark/benchmark.h>

#include <string>

#include "venture/engine.hpp"
#include "venture/regen.hpp"

using namespace venture;

namespace {

std::string independent(long n) {
  std::string p;
  for (long i = 0; i < n; ++i) {
    p += "[ASSUME x" + std::to_string(i) + " (normal 0 1)]\n";
    p += "[OBSERVE (normal x" + std::to_string(i) + " 1) 0.5]\n";
  }
  return p;
}

std::string collapsedCoin(long n) {
  std::string p = "[ASSUME alpha (gamma 1 1)]\n[ASSUME coin (make_beta_bernoulli alpha alpha)]\n";
  for (long i = 0; i < n; ++i) p += i % 2 ? "[OBSERVE (coin) True]\n" : "[OBSERVE (coin) False]\n";
  return p;
}

const char* kTrick = R"(
[ASSUME is_tricky (bernoulli 0.1)]
[ASSUME coin_weight (if is_tricky (beta 1.0 1.0) 0.5)]
[OBSERVE (bernoulli coin_weight) True]
[OBSERVE (bernoulli coin_weight) True]
)";

void BM_MHTrickCoin(benchmark::State& state) {
  Engine e(1);
  e.run(kTrick);
  InferenceExpr mh = parseInference("(mh default one 1)");
  for (auto _ : state) runInference(e.trace(), mh);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MHTrickCoin);

// One single-site transition should not depend on model size.
void BM_MHIndependent(benchmark::State& state) {
  Engine e(2);
  e.run(independent(state.range(0)));
  InferenceExpr mh = parseInference("(mh default one 1)");
  for (auto _ : state) runInference(e.trace(), mh);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MHIndependent)->RangeMultiplier(10)->Range(10, 10000);

void BM_ScaffoldConstruction(benchmark::State& state) {
  Engine e(3);
  auto rs = e.run(independent(state.range(0)));
  Node* principal = e.trace().roots().at(rs.front().index).get();
  for (auto _ : state) {
    Scaffold sc = constructScaffold(e.trace(), {{principal}});
    benchmark::DoNotOptimize(sc.drg.size());
  }
}
BENCHMARK(BM_ScaffoldConstruction)->RangeMultiplier(10)->Range(10, 10000);

void BM_CollapsedAlpha(benchmark::State& state) {
  TraceConfig cfg;
  cfg.absorbAtApplications = state.range(1) != 0;
  Engine e(4, cfg);
  e.run(collapsedCoin(state.range(0)));
  InferenceExpr mh = parseInference("(mh default one 1)");
  for (auto _ : state) runInference(e.trace(), mh);
  state.SetLabel(cfg.absorbAtApplications ? "aaa" : "no aaa");
}
BENCHMARK(BM_CollapsedAlpha)->ArgsProduct({{100, 1000, 10000}, {1, 0}});

void BM_PGibbsHMM(benchmark::State& state) {
  std::string p = R"([ASSUME get_state (mem (lambda (t)
  (scope_include (quote state) t
    (if (= t 0) (bernoulli 0.5) (bernoulli (if (get_state (- t 1)) 0.7 0.3))))))]
)";
  for (long t = 0; t < 20; ++t)
    p += "[OBSERVE (normal (if (get_state " + std::to_string(t) + ") 1.0 -1.0) 1.0) " + (t % 3 ? "0.8" : "-0.6") +
         "]\n";
  Engine e(5);
  e.run(p);
  InferenceExpr pg = parseInference("(pgibbs state ordered " + std::to_string(state.range(0)) + " 1)");
  for (auto _ : state) runInference(e.trace(), pg);
}
BENCHMARK(BM_PGibbsHMM)->Arg(2)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
