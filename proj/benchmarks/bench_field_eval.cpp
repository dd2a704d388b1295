#include <benchmark/benchmark.h>

#include "abfield/compensated.hpp"
#include "abfield/electron.hpp"
#include "abfield/elliptic.hpp"
#include "abfield/sources.hpp"

namespace {

using namespace abfield;

const PhysicalConstants kC = PhysicalConstants::cgs();

ExternalField make_solenoid(bool ideal) {
    SolenoidSource s;
    s.radius = 1.0;
    s.length = 20.0;
    s.turns_per_cm = 100.0;
    s.current = 1.0;
    return ExternalField(s, ideal);
}

void bm_elliptic(benchmark::State& state) {
    double m = 0.0;
    for (auto _ : state) {
        m += 1e-4;
        if (m >= 0.999) m = 1e-4;
        benchmark::DoNotOptimize(complete_elliptic(m));
    }
}
BENCHMARK(bm_elliptic);

void bm_b0_finite(benchmark::State& state) {
    const ExternalField src = make_solenoid(false);
    QuadratureSpec spec;
    spec.rel_tol = 1e-6;
    double z = -9.0;
    for (auto _ : state) {
        z += 0.37;
        if (z > 9.0) z = -9.0;
        benchmark::DoNotOptimize(b0_field(src, {0.4, 0.3, z}, kC, spec));
    }
}
BENCHMARK(bm_b0_finite);

void bm_b0_ideal(benchmark::State& state) {
    const ExternalField src = make_solenoid(true);
    QuadratureSpec spec;
    double z = -9.0;
    for (auto _ : state) {
        z += 0.37;
        if (z > 9.0) z = -9.0;
        benchmark::DoNotOptimize(b0_field(src, {0.4, 0.3, z}, kC, spec));
    }
}
BENCHMARK(bm_b0_ideal);

void bm_electron_fields(benchmark::State& state) {
    const ElectronState st(-kC.e_charge, {3.0, 0.0, 0.0}, {0.0, 1e8, 0.0}, kC);
    double x = -2.0;
    for (auto _ : state) {
        x += 0.011;
        if (x > 2.0) x = -2.0;
        benchmark::DoNotOptimize(electron_b_field(st, {x, 0.2, 0.5}, kC));
    }
}
BENCHMARK(bm_electron_fields);

void bm_disc_flux(benchmark::State& state) {
    const ElectronState st(-kC.e_charge, {3.0, 0.0, 0.0}, {0.0, 1e8, 0.0}, kC);
    LoopSpec loop;
    loop.radius = 1.0;
    QuadratureSpec spec;
    spec.rel_tol = 1e-6;
    for (auto _ : state)
        benchmark::DoNotOptimize(electron_flux_through_loop(st, loop, kC, spec));
}
BENCHMARK(bm_disc_flux);

void bm_neumaier_1e6(benchmark::State& state) {
    std::vector<double> xs(1000000);
    for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = (i % 2 ? 1.0 : -1.0) * (1.0 + 1e-12 * static_cast<double>(i));
    for (auto _ : state) {
        NeumaierSum sum;
        for (const double x : xs) sum.add(x);
        benchmark::DoNotOptimize(sum.value());
    }
}
BENCHMARK(bm_neumaier_1e6);

} // namespace

BENCHMARK_MAIN();
