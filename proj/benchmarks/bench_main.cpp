#include <benchmark/benchmark.h>

#include "deeppolar/channel.hpp"
#include "deeppolar/crc.hpp"
#include "deeppolar/model.hpp"
#include "deeppolar/polar.hpp"

using namespace dpp;

namespace {

ModelConfig bench_model() {
  ModelConfig m;
  m.enc_hidden = 32;
  m.dec_hidden = 32;
  m.heads = 4;
  m.head_dim = 8;
  m.dec_layers = 2;
  m.dropout = 0.0;
  return m;
}

void BM_PolarTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const BitMatrix u = random_bits(rng, 1000, n);
  for (auto _ : state) benchmark::DoNotOptimize(polar_transform(u));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_PolarTransform)->Arg(16)->Arg(256)->Arg(1024);

void BM_ScDecode(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CodeConfig code = build_info_set(n, n / 4, 2);
  Rng rng(2);
  const Matrix llr = llr_from_channel(awgn(bpsk(polar_transform(code.embed(random_bits(rng, 1, code.k())))), 1.0, rng), 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(sc_decode(std::span<const double>(llr.data(), static_cast<std::size_t>(n)), code));
}
BENCHMARK(BM_ScDecode)->Arg(16)->Arg(256)->Arg(1024);

void BM_NeuralEncode(benchmark::State& state) {
  NeuralCode m = NeuralCode::create(build_info_set(16, 7, 4), bench_model(), 3);
  m.calibrate(1, 1000);
  Rng rng(4);
  const BitMatrix msgs = random_bits(rng, state.range(0), 7);
  for (auto _ : state) benchmark::DoNotOptimize(m.encode(msgs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NeuralEncode)->Arg(1)->Arg(1000);

void BM_NeuralDecode(benchmark::State& state) {
  ModelConfig model = bench_model();
  model.decoder = state.range(1) ? DecoderKind::Plus : DecoderKind::DeepPolar;
  NeuralCode m = NeuralCode::create(build_info_set(16, 7, 4), model, 5);
  m.calibrate(1, 1000);
  Rng rng(6);
  const Matrix llr = llr_from_channel(awgn(m.encode(random_bits(rng, state.range(0), 7)), 1.0, rng), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(m.decode(llr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NeuralDecode)->Args({1000, 0})->Args({1000, 1});

void BM_Crc(benchmark::State& state) {
  const CrcSpec crc = CrcSpec::preset(state.range(0) == 3 ? "crc3" : "crc8");
  std::vector<std::uint8_t> payload(static_cast<std::size_t>(state.range(1)));
  Rng rng(7);
  for (auto& b : payload) b = rng() & 1u;
  for (auto _ : state) benchmark::DoNotOptimize(crc_append(payload, crc));
}
BENCHMARK(BM_Crc)->Args({3, 34})->Args({8, 29});

}  // namespace
BENCHMARK_MAIN();
