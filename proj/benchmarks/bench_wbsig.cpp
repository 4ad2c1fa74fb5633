#include <benchmark/benchmark.h>

#include "wbsig/dataset.hpp"
#include "wbsig/dsp.hpp"
#include "wbsig/modem.hpp"
#include "wbsig/record_store.hpp"
#include "wbsig/rng.hpp"

using namespace wbsig;

namespace {

Samples noise(std::size_t n) {
  Rng rng(7);
  Samples x(n);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  return x;
}

void BM_Fft(benchmark::State& state) {
  auto x = noise(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    dsp::fft(x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(256, 262144);

void BM_Resample(benchmark::State& state) {
  const auto x = noise(65536);
  const double rate = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(dsp::resample(x, rate));
  state.SetItemsProcessed(state.iterations() * 65536);
}
BENCHMARK(BM_Resample)->Arg(50)->Arg(137)->Arg(200);

void BM_Spectrogram(benchmark::State& state) {
  const auto x = noise(262144);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::spectrogram(x));
  state.SetItemsProcessed(state.iterations() * 262144);
}
BENCHMARK(BM_Spectrogram)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state) {
  const auto c = static_cast<SignalClass>(state.range(0));
  Rng rng(11);
  for (auto _ : state) benchmark::DoNotOptimize(modem::synthesize_at_bandwidth(c, 0.1, 65536, rng));
  state.SetLabel(std::string(class_name(c)));
}
BENCHMARK(BM_Synthesize)
    ->Arg(static_cast<int>(SignalClass::QAM64))
    ->Arg(static_cast<int>(SignalClass::GMSK16))
    ->Arg(static_cast<int>(SignalClass::OFDM2048))
    ->Unit(benchmark::kMillisecond);

void BM_GenerateExample(benchmark::State& state) {
  const auto v = state.range(0) ? DatasetVariant::ImpairedTrain : DatasetVariant::CleanTrain;
  std::size_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dataset::generate_example(v, index++, 42));
  state.SetLabel(std::string(variant_name(v)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GenerateExample)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EncodeRecord(benchmark::State& state) {
  const auto x = dataset::generate_example(DatasetVariant::ImpairedTrain, 0, 42);
  for (auto _ : state) benchmark::DoNotOptimize(store::encode_record(x, 0));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(x.size() * 8));
}
BENCHMARK(BM_EncodeRecord)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
