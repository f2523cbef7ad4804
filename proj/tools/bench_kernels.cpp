// Throughput comparison of the serial reference kernels against the
// OpenMP-parallel versions, plus an end-to-end filter-iteration timing.
// Build target: bench_kernels. Output is a plain table on stdout.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "terratrack/gmm.hpp"
#include "terratrack/kernels.hpp"
#include "terratrack/phd.hpp"
#include "terratrack/pipeline.hpp"
#include "terratrack/rng.hpp"
#include "terratrack/scenario.hpp"

using namespace terratrack;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename F>
double best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

std::vector<TargetState> random_states(size_t n, uint64_t seed) {
    rng::Substream rs(rng::derive_stream(seed, "bench"), 0, 0);
    std::vector<TargetState> states(n);
    for (auto& s : states)
        s = {rs.uniform() * 4000.0, rs.uniform() * 4000.0, rs.uniform() * 15.0,
             (rs.uniform() - 0.5) * kTwoPi};
    return states;
}

void row(const char* name, size_t n, double serial_ms, double omp_ms) {
    std::printf("%-22s %9zu %12.3f %12.3f %9.2fx\n", name, n, serial_ms, omp_ms,
                serial_ms / omp_ms);
}

}  // namespace

int main() {
#if defined(_OPENMP)
    std::printf("OpenMP threads: %d\n\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both columns run serially\n\n");
#endif
    std::printf("%-22s %9s %12s %12s %9s\n", "kernel", "n", "serial ms", "omp ms",
                "speedup");

    const TerrainMap map = genmap(200, 200, 25.0, 42);
    const NoiseSpec sigma_w{10.0, 10.0, 2.0, kPi / 4.0};
    const uint64_t key = rng::derive_stream(1, "bench-kernels");
    const int reps = 7;

    for (size_t n : {size_t(1000), size_t(10000), size_t(100000)}) {
        const std::vector<TargetState> base = random_states(n, n);

        std::vector<TargetState> scratch = base;
        const double prop_serial = best_of(reps, [&] {
            scratch = base;
            kernels::propagate_serial(scratch, 5.0, sigma_w, key, 1);
        });
        const double prop_omp = best_of(reps, [&] {
            scratch = base;
            kernels::propagate_omp(scratch, 5.0, sigma_w, key, 1);
        });
        row("propagate", n, prop_serial, prop_omp);

        std::vector<double> weights(n);
        const double tw_serial = best_of(
            reps, [&] { kernels::terrain_weights_serial(base, map, weights); });
        const double tw_omp =
            best_of(reps, [&] { kernels::terrain_weights_omp(base, map, weights); });
        row("terrain_weights", n, tw_serial, tw_omp);

        Report report;
        report.observed = base[n / 2];
        report.noise = {50.0, 50.0, 1.0, kPi / 8.0};
        const double lk_serial =
            best_of(reps, [&] { kernels::likelihoods_serial(report, base, weights); });
        const double lk_omp =
            best_of(reps, [&] { kernels::likelihoods_omp(report, base, weights); });
        row("likelihoods", n, lk_serial, lk_omp);

        std::vector<double> cumulative(n);
        double acc = 0.0;
        rng::Substream rs(key, 0, 0);
        for (size_t i = 0; i < n; ++i) cumulative[i] = (acc += rs.uniform());
        std::vector<uint32_t> picks(n);
        const double mn_serial = best_of(reps, [&] {
            kernels::sample_multinomial_serial(cumulative, key, 2, picks);
        });
        const double mn_omp = best_of(reps, [&] {
            kernels::sample_multinomial_omp(cumulative, key, 2, picks);
        });
        row("sample_multinomial", n, mn_serial, mn_omp);

        const double sy_serial = best_of(reps, [&] {
            kernels::sample_systematic_serial(cumulative, key, 2, picks);
        });
        const double sy_omp = best_of(reps, [&] {
            kernels::sample_systematic_omp(cumulative, key, 2, picks);
        });
        row("sample_systematic", n, sy_serial, sy_omp);
        std::printf("\n");
    }

    // One steady-state filter iteration at the scenario's working point:
    // three targets, three reports, 1000 particles per unit mass.
    {
        const Scenario sc = default_scenario();
        GroundTruth truth = simulate(sc, rng::derive_stream(2, "scenario"));
        auto reports = generate_reports(truth, 0.1, sc.sigma_r,
                                        rng::derive_stream(2, "reports"));

        for (Exec exec : {Exec::Serial, Exec::Parallel}) {
            FilterParams params;
            params.p_fn = 0.1;
            PhdParticleSet state;
            state.step = -1;
            const uint64_t fkey = rng::derive_stream(3, "filter");
            double step_ms = 0.0, gmm_ms = 0.0;
            const int warmup = 40, measured = 20;
            for (int step = 0; step < warmup + measured; ++step) {
                static const std::vector<Report> none;
                const auto& prev = step > 0 ? reports[step - 1] : none;
                const auto t0 = Clock::now();
                auto [next, out] =
                    filter_step(state, prev, reports[step], params, map,
                                rng::derive_substream(fkey, step), TerrainMode::Resample,
                                ResampleScheme::Multinomial, exec);
                const double dt_ms = ms_since(t0);
                state = std::move(next);

                const auto t1 = Clock::now();
                std::vector<Peak> peaks;
                fit_peaks(state, out.expected_count, out.expected_count,
                          rng::derive_substream(fkey, 7777 + step), peaks, nullptr);
                const double fit_ms = ms_since(t1);
                if (step >= warmup) {
                    step_ms += dt_ms;
                    gmm_ms += fit_ms;
                }
            }
            std::printf("filter_step (%s): %.3f ms/iter, gmm fit: %.3f ms/iter (%zu particles)\n",
                        exec == Exec::Serial ? "serial" : "omp   ",
                        step_ms / measured, gmm_ms / measured, state.cloud.size());
        }
    }
    return 0;
}
