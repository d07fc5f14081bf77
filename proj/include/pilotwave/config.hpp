#pragma once

#include "pilotwave/detection.hpp"

#include <string>

namespace pilotwave {

enum class ExperimentName {
    equivariance,   // evolved equilibrium ensemble matches |psi(t0)|^2
    coincidence,    // window coincidences match quadrature probabilities
    constrained,    // antidiagonal preparation: disagreement + equilibrium violation
    ghose_pstar,    // time-ensemble joint-detection mean stays below 1
    spread,         // initial center-of-mass spread sigma0/sqrt(2)
    ergodicity_toy, // time average vs diagonal average, discrete spectra
    eq44,           // Bohmian space average vs direct expectation
};

std::string to_string(ExperimentName name);
ExperimentName experiment_from_string(const std::string& s);

/// Settings for the discrete-spectrum toy runs.
struct ToyConfig {
    std::size_t n_systems = 10;
    std::size_t n_modes = 5;
    double min_gap = 0.02;
    std::uint64_t seed = 1;

    void validate() const;
};

/// A fully resolved experiment: which scenario to run and every knob it
/// needs. parse_config fills defaults and rejects keys the named experiment
/// does not accept.
struct ExperimentSpec {
    ExperimentName name = ExperimentName::spread;
    PhysicalParams params;
    EnsembleConfig ensemble;
    IntegratorSettings integrator;
    bool has_windows = false;
    DetectorWindow w1, w2;
    ToyConfig toy;
    std::string output_dir; // empty = "out/<name>"
    std::size_t n_trajectory_dump = 0;

    std::string resolved_output_dir() const {
        return output_dir.empty() ? "out/" + to_string(name) : output_dir;
    }
    void validate() const;
};

/// Parse a flat INI document (sections [experiment], [params], [ensemble],
/// [integrator], [windows], [ergodicity], [output]; # and ; comments).
/// Unknown keys, missing required keys, and invariant-violating values throw
/// unknown_key_error / missing_key_error / bad_value_error with the key path.
ExperimentSpec parse_config(const std::string& text);

/// parse_config over the contents of a file; throws std::runtime_error if
/// the file cannot be read.
ExperimentSpec load_config_file(const std::string& path);

} // namespace pilotwave
