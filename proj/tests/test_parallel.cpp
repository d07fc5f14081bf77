#include "pilotwave/ensemble.hpp"

#include <doctest.h>

using namespace pilotwave;

namespace {

bool arrivals_identical(const ArrivalSet& a, const ArrivalSet& b) {
    if (a.t0 != b.t0 || a.aborted_count != b.aborted_count ||
        a.points.size() != b.points.size() || a.records.size() != b.records.size())
        return false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i].y1 != b.points[i].y1 || a.points[i].y2 != b.points[i].y2 ||
            a.points[i].t != b.points[i].t)
            return false;
    }
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const ArrivalRecord& ra = a.records[i];
        const ArrivalRecord& rb = b.records[i];
        if (ra.pair_id != rb.pair_id || ra.status != rb.status || ra.y1_0 != rb.y1_0 ||
            ra.y2_0 != rb.y2_0 || ra.y1_t != rb.y1_t || ra.y2_t != rb.y2_t)
            return false;
    }
    return true;
}

} // namespace

TEST_SUITE("parallel") {

TEST_CASE("parallel ensemble evolution matches the serial reference bitwise") {
    const PhysicalParams params;
    EnsembleConfig cfg;
    cfg.n_pairs = 2000;
    cfg.master_seed = 31;
    const IntegratorSettings settings;
    const std::vector<PhasePoint> initial = sample_initial(cfg, params);

    const ArrivalSet serial =
        evolve_ensemble_reference(initial, params.t0, settings, cfg, params);
    for (int workers : {1, 3, 8}) {
        const ArrivalSet parallel =
            evolve_ensemble(initial, params.t0, settings, cfg, params, workers);
        CHECK(arrivals_identical(serial, parallel));
    }
}

TEST_CASE("the constrained preparation evolves identically under any schedule") {
    const PhysicalParams params;
    EnsembleConfig cfg;
    cfg.n_pairs = 1200;
    cfg.master_seed = 5;
    cfg.constraint = InitialConstraint::antidiagonal;
    const IntegratorSettings settings;
    const std::vector<PhasePoint> initial = sample_initial(cfg, params);

    const ArrivalSet serial =
        evolve_ensemble_reference(initial, params.t0, settings, cfg, params);
    const ArrivalSet parallel = evolve_ensemble(initial, params.t0, settings, cfg, params, 8);
    CHECK(arrivals_identical(serial, parallel));
}

TEST_CASE("parallel model probabilities match the serial reference bitwise") {
    const PhysicalParams params;
    const auto& wf = cached_wavefunction(params);
    const HistogramGrid grid = diagnostic_grid(params, params.t0);
    const std::vector<double> serial =
        model_bin_probabilities_reference(wf, params.t0, grid);
    for (int workers : {1, 3, 8}) {
        const std::vector<double> parallel =
            model_bin_probabilities(wf, params.t0, grid, workers);
        CHECK(parallel == serial);
    }
}

} // TEST_SUITE
