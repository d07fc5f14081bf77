// Times the OpenMP ensemble kernels against their serial reference twins and
// checks that the outputs are bitwise identical.

#include "pilotwave/ensemble.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>

using namespace pilotwave;

namespace {

template <class F>
double seconds(F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

bool bitwise_equal(double a, double b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
}

} // namespace

int main() {
    const PhysicalParams params;
    EnsembleConfig cfg;
    cfg.n_pairs = 2000;
    const IntegratorSettings settings;

    std::printf("sampling %llu pairs...\n", (unsigned long long)cfg.n_pairs);
    const auto points = sample_equilibrium(cfg, params);

    ArrivalSet serial, parallel;
    const double t_serial = seconds(
        [&] { serial = evolve_ensemble_reference(points, params.t0, settings, cfg, params); });
    const double t_parallel =
        seconds([&] { parallel = evolve_ensemble(points, params.t0, settings, cfg, params); });

    bool identical = serial.records.size() == parallel.records.size();
    for (std::size_t i = 0; identical && i < serial.records.size(); ++i) {
        const auto& a = serial.records[i];
        const auto& b = parallel.records[i];
        identical = a.status == b.status && bitwise_equal(a.y1_t, b.y1_t) &&
                    bitwise_equal(a.y2_t, b.y2_t);
    }

    std::printf("evolve to t0=%.1f:\n", params.t0);
    std::printf("  serial   %8.3f s  (%6.1f us/pair)\n", t_serial,
                1e6 * t_serial / double(cfg.n_pairs));
    std::printf("  parallel %8.3f s  (%6.1f us/pair, speedup %.2fx)\n", t_parallel,
                1e6 * t_parallel / double(cfg.n_pairs), t_serial / t_parallel);
    std::printf("  bitwise identical: %s\n", identical ? "yes" : "NO");

    const TwoSlitWavefunction wf(params);
    const HistogramGrid grid = diagnostic_grid(params, params.t0);
    std::vector<double> probs_serial, probs_parallel;
    const double t_ps =
        seconds([&] { probs_serial = model_bin_probabilities_reference(wf, params.t0, grid); });
    const double t_pp =
        seconds([&] { probs_parallel = model_bin_probabilities(wf, params.t0, grid); });

    bool probs_identical = probs_serial.size() == probs_parallel.size();
    for (std::size_t i = 0; probs_identical && i < probs_serial.size(); ++i) {
        probs_identical = bitwise_equal(probs_serial[i], probs_parallel[i]);
    }

    std::printf("model bin probabilities (%zu bins):\n", grid.n_bins());
    std::printf("  serial   %8.3f s\n", t_ps);
    std::printf("  parallel %8.3f s  (speedup %.2fx)\n", t_pp, t_ps / t_pp);
    std::printf("  bitwise identical: %s\n", probs_identical ? "yes" : "NO");

    return (identical && probs_identical) ? 0 : 1;
}
