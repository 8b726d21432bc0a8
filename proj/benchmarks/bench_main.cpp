#include "gsrsep/dsp.hpp"
#include "gsrsep/ialm.hpp"
#include "gsrsep/prox.hpp"
#include "gsrsep/synth.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace gsrsep {
namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

void BM_SoftThresholdElementwise(benchmark::State& state) {
  const Matrix m = random_matrix(706, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(prox::soft_threshold_elementwise(m, 0.3));
  state.SetItemsProcessed(state.iterations() * m.size());
}
BENCHMARK(BM_SoftThresholdElementwise)->Arg(500)->Arg(2000);

void BM_SoftThresholdRows(benchmark::State& state) {
  const Matrix m = random_matrix(100, state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(prox::soft_threshold_rows(m, 0.3));
  state.SetItemsProcessed(state.iterations() * m.size());
}
BENCHMARK(BM_SoftThresholdRows)->Arg(500)->Arg(2000);

void BM_SingularValueThreshold(benchmark::State& state) {
  const Matrix m = random_matrix(100, state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(prox::singular_value_threshold(m, 0.3));
}
BENCHMARK(BM_SingularValueThreshold)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

// One full IALM sweep (J, Z, B, E, multipliers) at m=706, k=100.
void BM_IalmIteration(benchmark::State& state) {
  const auto method = static_cast<ialm::Method>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto inst = synth::gen_group_sparse(706, n, 100, 10, 0.02, 0.0, 5);
  const Matrix D = ialm::uses_dictionary(method) ? inst.D : Matrix::Identity(706, 706);
  const auto k = D.cols();
  const Matrix E0 = inst.E_true;
  auto s = ialm::SolverState::zeros(706, k, static_cast<Eigen::Index>(n), 1e-3);
  for (auto _ : state) {
    s.J = ialm::update_J(s, method);
    s.Z = ialm::update_Z(s, inst.X, D);
    s.B = ialm::update_B(s, 1.0 / std::sqrt(706.0));
    s.E = ialm::update_E(s, inst.X, D, E0, ialm::is_informed(method) ? 1.0 : 0.0);
    s = ialm::update_multipliers(std::move(s), inst.X, D, 1.5, 1e6);
    benchmark::DoNotOptimize(s.E.data());
  }
  state.SetLabel(std::string(ialm::to_string(method)));
}
BENCHMARK(BM_IalmIteration)
    ->ArgsProduct({{static_cast<long>(ialm::Method::gsr), static_cast<long>(ialm::Method::gsri),
                    static_cast<long>(ialm::Method::lrr), static_cast<long>(ialm::Method::rpca)},
                   {500, 1000, 2000}})
    ->Unit(benchmark::kMillisecond);

void BM_Stft(benchmark::State& state) {
  const auto fx = synth::gen_audio_fixture(static_cast<double>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::stft(fx.mixture).magnitude.data());
}
BENCHMARK(BM_Stft)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gsrsep

BENCHMARK_MAIN();
