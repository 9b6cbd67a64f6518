#include <benchmark/benchmark.h>

#include "csmpc/clustering.hpp"
#include "csmpc/sampling.hpp"
#include "csmpc/snmpc.hpp"

using namespace csmpc;

namespace {

const StateVec kX0{{1.0, 0.15, 0.0, 1.0}};

ControlSequence pulse() {
  std::vector<ControlInput> u;
  for (int i = 0; i < 10; ++i) u.push_back({5.0, i % 3 == 0 ? 1.0 : 0.0});
  return ControlSequence(u);
}

std::vector<SolveRecord> records(std::size_t n) {
  SamplerConfig sc;
  sc.seed = 1;
  std::vector<SolveRecord> out;
  for (const auto& w : draw(sc, 0, n)) out.push_back(solve_nominal(kX0, w, {}, {}));
  return out;
}

}  // namespace

static void BM_Rollout(benchmark::State& st) {
  const OcpConfig ocp;
  const auto u = pulse();
  for (auto _ : st) benchmark::DoNotOptimize(evaluate(kX0, u, nominal_parameters(), ocp).J);
}
BENCHMARK(BM_Rollout);

static void BM_Gradient(benchmark::State& st) {
  const OcpConfig ocp;
  const auto u = pulse();
  for (auto _ : st) benchmark::DoNotOptimize(gradient(kX0, u, nominal_parameters(), ocp).J);
}
BENCHMARK(BM_Gradient);

static void BM_SolveNominal(benchmark::State& st) {
  const OcpConfig ocp;
  const SolverConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(solve_nominal(kX0, nominal_parameters(), ocp, cfg).J_star);
}
BENCHMARK(BM_SolveNominal)->Unit(benchmark::kMillisecond);

static void BM_SolveSnmpc(benchmark::State& st) {
  const auto recs = records(100);
  ClusteringConfig cc;
  cc.n_cl = static_cast<int>(st.range(0));
  const auto km = kmeans(label_vectors(recs), cc);
  const SnmpcProblem p{kX0, summarize(recs, km.labels, cc.n_cl), {}, {}};
  for (auto _ : st) benchmark::DoNotOptimize(solve_snmpc(p, {}).J_stoch);
}
BENCHMARK(BM_SolveSnmpc)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_KMeans(benchmark::State& st) {
  const auto pts = label_vectors(records(static_cast<std::size_t>(st.range(0))));
  const ClusteringConfig cc;
  for (auto _ : st) benchmark::DoNotOptimize(kmeans(pts, cc).inertia);
}
BENCHMARK(BM_KMeans)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
