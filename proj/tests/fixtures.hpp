#pragma once

// Shared, lazily computed test ensembles. Static-local memoization keeps the
// cost to one evaluation per test binary invocation.

#include "pilotwave/ensemble.hpp"

namespace fixtures {

using namespace pilotwave;

inline const PhysicalParams& params() {
    static const PhysicalParams p;
    return p;
}

constexpr std::uint64_t kFixtureN = 20000;

inline EnsembleConfig equilibrium_config() {
    EnsembleConfig cfg;
    cfg.n_pairs = kFixtureN;
    cfg.master_seed = 1;
    return cfg;
}

inline EnsembleConfig constrained_config() {
    EnsembleConfig cfg;
    cfg.n_pairs = kFixtureN;
    cfg.master_seed = 1;
    cfg.constraint = InitialConstraint::antidiagonal;
    return cfg;
}

inline const std::vector<PhasePoint>& equilibrium_points() {
    static const std::vector<PhasePoint> pts = sample_equilibrium(equilibrium_config(), params());
    return pts;
}

inline const std::vector<PhasePoint>& constrained_points() {
    static const std::vector<PhasePoint> pts = sample_constrained(constrained_config(), params());
    return pts;
}

inline const ArrivalSet& equilibrium_arrivals() {
    static const ArrivalSet a = evolve_ensemble(equilibrium_points(), params().t0,
                                                IntegratorSettings{}, equilibrium_config(),
                                                params());
    return a;
}

inline const ArrivalSet& constrained_arrivals() {
    static const ArrivalSet a = evolve_ensemble(constrained_points(), params().t0,
                                                IntegratorSettings{}, constrained_config(),
                                                params());
    return a;
}

} // namespace fixtures
