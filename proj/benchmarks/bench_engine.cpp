#include <benchmark/benchmark.h>

#include "stle/galerkin.hpp"
#include "stle/moments.hpp"

using namespace stle;

namespace {

NoiseSpectrum shell(int radius) {
    return build_spectrum(SpectrumFamily::shell_indicator, 1.0 / radius, 0.0, 2, radius);
}

SpectralField pair_u0() {
    SpectralField u0 = SpectralField::scalar(2, 1);
    u0.set_pair_scalar(mode(1, 0), 0.5);
    return u0;
}

void BM_transport_convolution(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    SpectralField b = SpectralField::vector(2, 2);
    b.set_pair(mode(0, 1), {Complex(0.1, 0.05), Complex(0, 0)});
    SpectralField u = SpectralField::scalar(2, n);
    for (const Mode& k : modes_in_ball(2, n, false))
        if (in_half_lattice(k)) u.set_pair_scalar(k, Complex(0.1, 0.2));
    for (auto _ : state) benchmark::DoNotOptimize(transport_convolution(b, u, n));
}
BENCHMARK(BM_transport_convolution)->Arg(4)->Arg(8)->Arg(16);

void BM_galerkin_path(benchmark::State& state) {
    const int radius = static_cast<int>(state.range(0));
    SdeRunConfig cfg;
    cfg.dim = 2;
    cfg.cutoff = radius + 1;
    cfg.spectrum = shell(radius);
    cfg.epsilon = epsilon_for_nu(cfg.spectrum, 1.0);
    cfg.T = 64e-4;
    cfg.dt = 1e-4;
    cfg.seed = 1;
    cfg.output_times = {cfg.T};
    const GalerkinEngine engine(cfg, pair_u0());
    std::uint64_t path = 0;
    for (auto _ : state) {
        engine.run_path(path++, [](int, double, const std::vector<Complex>&) {});
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_galerkin_path)->Arg(2)->Arg(4)->Arg(8);

void BM_qmatrix_build(benchmark::State& state) {
    const NoiseSpectrum s = shell(1);
    for (auto _ : state) benchmark::DoNotOptimize(build_q_matrix(s, 1.0, state.range(0)));
}
BENCHMARK(BM_qmatrix_build)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
