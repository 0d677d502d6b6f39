// Microbenchmarks for the per-frame hot paths and the SMO trainer.

#include <benchmark/benchmark.h>

#include "svmrx/harness.hpp"

namespace {

using namespace svmrx;

FadingParams bench_params(double alpha = 0.95, double snr_db = 20.0) {
  FadingParams p;
  p.alpha = alpha;
  p.sigma_h2 = 1.0;
  p.sigma_w2 = snr_to_noise_var(1.0, snr_db);
  return p;
}

void BM_FrameStreamNext(benchmark::State& state) {
  FrameStream stream(bench_params(), 1.0, 17);
  for (auto _ : state) benchmark::DoNotOptimize(stream.next());
}
BENCHMARK(BM_FrameStreamNext);

void BM_Cholesky9(benchmark::State& state) {
  const HermitianMatrix sigma = fading_covariance(kWindowLen, bench_params());
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(sigma));
}
BENCHMARK(BM_Cholesky9);

void BM_MlDecode(benchmark::State& state) {
  const FadingParams p = bench_params();
  const CVector pilots = build_frame(InfoWord(0), 1.0).pilots;
  MlReceiver rx(pilots, p, 1.0);
  FrameStream stream(p, 1.0, 17);
  const FrameItem item = stream.next();
  for (auto _ : state) benchmark::DoNotOptimize(rx.decode(item.window));
}
BENCHMARK(BM_MlDecode);

void BM_MmseDecode(benchmark::State& state) {
  const FadingParams p = bench_params();
  const CVector pilots = build_frame(InfoWord(0), 1.0).pilots;
  MmseReceiver rx(pilots, p);
  FrameStream stream(p, 1.0, 17);
  const FrameItem item = stream.next();
  for (auto _ : state) benchmark::DoNotOptimize(rx.decode(item.window));
}
BENCHMARK(BM_MmseDecode);

void BM_KalmanDecode(benchmark::State& state) {
  const FadingParams p = bench_params();
  const CVector pilots = build_frame(InfoWord(0), 1.0).pilots;
  KalmanReceiver rx(pilots, p);
  FrameStream stream(p, 1.0, 17);
  for (auto _ : state) benchmark::DoNotOptimize(rx.decode(stream.next().window));
}
BENCHMARK(BM_KalmanDecode);

void BM_KernelEval(benchmark::State& state) {
  const KernelSpec kernel{state.range(0) ? KernelKind::Rbf : KernelKind::Poly2, 2.0};
  FrameStream stream(bench_params(), 1.0, 17);
  const FeatureVector a = extract_features(stream.next().window, 32);
  const FeatureVector b = extract_features(stream.next().window, 32);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_eval(kernel, a, b));
}
BENCHMARK(BM_KernelEval)->Arg(0)->Arg(1);

TrainingSet bench_training_set(std::size_t frames) {
  FrameStream stream(bench_params(), 1.0, 23);
  TrainingSet set;
  for (std::size_t i = 0; i < frames; ++i) {
    const FrameItem item = stream.next();
    set.features.push_back(extract_features(item.window, 32));
    set.labels.push_back(static_cast<int>(item.truth.index()));
  }
  return set;
}

void BM_SmoTrainBinary400(benchmark::State& state) {
  const TrainingSet set = bench_training_set(400);
  std::vector<int> y;
  for (int lbl : set.labels) y.push_back(lbl < 8 ? +1 : -1);
  const KernelSpec kernel{KernelKind::Rbf, 3.0};
  TrainOptions opt;
  for (auto _ : state)
    benchmark::DoNotOptimize(train_binary(set.features, y, kernel, opt));
}
BENCHMARK(BM_SmoTrainBinary400)->Unit(benchmark::kMillisecond);

void BM_OvoPredict(benchmark::State& state) {
  const TrainingSet set = bench_training_set(800);
  const KernelSpec kernel{KernelKind::Rbf, 3.0};
  TrainOptions opt;
  const ReceiverModel model = train_ovo(set, kernel, opt);
  const ReceiverEvaluator eval(model);
  FrameStream stream(bench_params(), 1.0, 29);
  const FeatureVector x = extract_features(stream.next().window, 32);
  for (auto _ : state) benchmark::DoNotOptimize(eval.predict(x));
}
BENCHMARK(BM_OvoPredict)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
