#pragma once

#include "pilotwave/guidance.hpp"

#include <cstdint>
#include <vector>

namespace pilotwave {

/// How the initial configuration ensemble is drawn: from |psi(0)|^2 (quantum
/// equilibrium), or restricted to the antidiagonal y1 + y2 = 0 (the
/// constrained preparation that violates equilibrium).
enum class InitialConstraint { equilibrium, antidiagonal };

struct EnsembleConfig {
    std::uint64_t n_pairs = 100000;
    std::uint64_t master_seed = 1;
    InitialConstraint constraint = InitialConstraint::equilibrium;

    void validate() const {
        if (n_pairs < 1) throw bad_value_error("ensemble.n_pairs", "must be >= 1");
    }
};

/// One pair's evolution outcome, retained for the arrival dump.
struct ArrivalRecord {
    std::uint64_t pair_id = 0;
    double y1_0 = 0.0, y2_0 = 0.0; // configuration at the common start time
    double y1_t = 0.0, y2_t = 0.0; // last integrated configuration
    TrajectoryStatus status = TrajectoryStatus::completed;
};

/// Ensemble arrivals at the common detection time t0. points holds the
/// completed pairs only, in pair order; node-aborted pairs are counted and
/// kept in records (with their last reached configuration) for the dump.
struct ArrivalSet {
    double t0 = 0.0;
    std::vector<PhasePoint> points;
    std::size_t aborted_count = 0;
    std::vector<ArrivalRecord> records;

    std::size_t n_total() const { return records.size(); }
    double abort_fraction() const {
        return records.empty() ? 0.0 : double(aborted_count) / double(records.size());
    }
};

/// i.i.d. draws from |psi(.,.,0)|^2 by rejection sampling. Proposal: equal
/// mixture of the two Gaussian products (slit A x slit B and its swap);
/// envelope constant 4 N^2 from |a+b|^2 <= 2(|a|^2 + |b|^2). Deterministic
/// given cfg.master_seed; pair i consumes only its own counter-based
/// substream, so the result is independent of scheduling.
std::vector<PhasePoint> sample_equilibrium(const EnsembleConfig& cfg,
                                           const PhysicalParams& params);

/// Draws y1 from the 1D density proportional to |psi(y, -y, 0)|^2 and sets
/// y2 = -y1 exactly (the antidiagonal preparation).
std::vector<PhasePoint> sample_constrained(const EnsembleConfig& cfg,
                                           const PhysicalParams& params);

/// Dispatch on cfg.constraint.
std::vector<PhasePoint> sample_initial(const EnsembleConfig& cfg, const PhysicalParams& params);

/// Sample standard deviation of the center of mass (y1+y2)/2. Requires n >= 2.
double com_spread(const std::vector<PhasePoint>& points);

/// Integrate every pair from the common start time to t_final. Results are
/// in input order and independent of the worker count (each trajectory is a
/// pure function of its start point). n_workers <= 0 uses all available
/// threads. Throws abort_fraction_error if the node-abort fraction reaches
/// 1e-3.
ArrivalSet evolve_ensemble(const std::vector<PhasePoint>& points, double t_final,
                           const IntegratorSettings& settings, const EnsembleConfig& cfg,
                           const PhysicalParams& params, int n_workers = 0);

/// Serial twin of evolve_ensemble, kept as the reference implementation the
/// parallel path is checked against (results must match bitwise).
ArrivalSet evolve_ensemble_reference(const std::vector<PhasePoint>& points, double t_final,
                                     const IntegratorSettings& settings,
                                     const EnsembleConfig& cfg, const PhysicalParams& params);

/// Square histogram grid: n x n equal bins over [lo, hi)^2; everything
/// outside is lumped into one overflow region.
struct HistogramGrid {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 64;

    double bin_width() const { return (hi - lo) / double(n); }
    double edge(std::size_t i) const { return lo + bin_width() * double(i); }
    /// Bin index along one axis, or n if y lies outside [lo, hi).
    std::size_t index(double y) const {
        if (!(y >= lo) || !(y < hi)) return n;
        auto i = std::size_t((y - lo) / bin_width());
        return (i < n) ? i : n - 1;
    }
    std::size_t n_bins() const { return n * n; }
};

/// Grid covering essentially all probability mass at time t:
/// [-R, R]^2 with R = Y + |u_y| t + 6 |sigma_t|.
HistogramGrid diagnostic_grid(const PhysicalParams& params, double t, std::size_t n = 64);

struct Histogram2D {
    HistogramGrid grid;
    std::vector<std::uint64_t> counts; // row-major: counts[i1 * n + i2]
    std::uint64_t overflow = 0;
    std::uint64_t total = 0;
};

Histogram2D histogram_counts(const std::vector<PhasePoint>& points, const HistogramGrid& grid);

/// Model probability of each bin: per-cell Gauss-Legendre quadrature of
/// |psi(t)|^2. Parallel over rows; _reference is the serial twin (bitwise
/// identical results).
std::vector<double> model_bin_probabilities(const TwoSlitWavefunction& wf, double t,
                                            const HistogramGrid& grid, int n_workers = 0);
std::vector<double> model_bin_probabilities_reference(const TwoSlitWavefunction& wf, double t,
                                                      const HistogramGrid& grid);

/// Total-variation distance between a histogram's empirical frequencies and
/// the per-bin model probabilities, with the model's missing mass compared
/// against the histogram overflow.
double tv_distance(const Histogram2D& hist, const std::vector<double>& model_probs);

/// Total-variation distance between the arrival histogram and the
/// quadrature-binned model density on the diagnostic grid at arrivals.t0,
/// overflow mass included.
double equivariance_distance(const ArrivalSet& arrivals, const PhysicalParams& params);

/// Monte Carlo acceptance bound c * sqrt(B/n) on the total-variation
/// distance of an n-point histogram with B bins.
double mc_tv_bound(std::size_t n_points, std::size_t n_bins, double c = 2.0);

} // namespace pilotwave
