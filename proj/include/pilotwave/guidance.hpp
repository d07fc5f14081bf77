#pragma once

#include "pilotwave/wavepacket.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace pilotwave {

/// A configuration-space point (y1, y2) at time t: the pair's hidden variables.
struct PhasePoint {
    double y1 = 0.0;
    double y2 = 0.0;
    double t = 0.0;

    double com() const { return 0.5 * (y1 + y2); }
};

struct Velocities {
    double v1 = 0.0;
    double v2 = 0.0;
};

struct IntegratorSettings {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    double node_eps = 1e-12; // threshold on density/peak

    void validate() const {
        if (!(rel_tol > 0.0)) throw bad_value_error("integrator.rel_tol", "must be > 0");
        if (!(abs_tol > 0.0)) throw bad_value_error("integrator.abs_tol", "must be > 0");
        if (!(max_step > 0.0)) throw bad_value_error("integrator.max_step", "must be > 0");
        if (!(node_eps > 0.0)) throw bad_value_error("integrator.node_eps", "must be > 0");
    }
};

enum class TrajectoryStatus { completed, node_adjacent_abort };

struct TrajectorySample {
    double t;
    double y1, y2;
    double v1, v2;
    /// Largest speed seen among the stage evaluations of the step that ended
    /// at this sample (0 for the initial sample). Supports the continuity
    /// check |dy| <= v_max * dt.
    double max_step_speed;
};

/// Time-ordered integration record of one pair.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    TrajectoryStatus status = TrajectoryStatus::completed;
    /// Sum over accepted steps of the embedded local-error estimate
    /// (max over the two components); an upper proxy for accumulated error.
    double error_budget = 0.0;

    const TrajectorySample& back() const { return samples.back(); }
    PhasePoint final_point() const {
        const auto& s = samples.back();
        return {s.y1, s.y2, s.t};
    }
};

/// Peak configuration-space density per time slice, sampled on a coarse grid
/// and linearly interpolated. Shared read-only across worker threads; the
/// node threshold is node_eps times this peak.
class PeakDensityTable {
public:
    PeakDensityTable() = default;
    PeakDensityTable(const TwoSlitWavefunction& wf, double t_max, std::size_t n_slices = 65,
                     std::size_t grid_n = 64);

    double peak(double t) const;
    double t_max() const { return t_max_; }
    bool empty() const { return values_.empty(); }

private:
    double t_max_ = 0.0;
    std::vector<double> values_;
};

/// Bohmian velocities v_k = (hbar/m) Im(d_k psi / psi) from analytic
/// gradients. density_floor is the absolute density below which the point
/// counts as node-adjacent.
bool try_velocity_field(const TwoSlitWavefunction& wf, const PhasePoint& p, Velocities& out,
                        double density_floor = 0.0);
Velocities velocity_field(const TwoSlitWavefunction& wf, const PhasePoint& p,
                          double density_floor = 0.0);
/// Spec-surface wrapper on the cached wavefunction; throws node_proximity_error
/// at exact nodes.
Velocities velocity_field(const PhasePoint& p, const PhysicalParams& params);

/// Closed-form center-of-mass velocity for the Gaussian pair state:
/// dy/dt = alpha^2 t y / (1 + alpha^2 t^2), alpha = hbar/(2 m sigma0^2).
double com_velocity(const PhasePoint& p, const PhysicalParams& params);

/// Closed-form center-of-mass position y(t) = y0 sqrt(1 + alpha^2 t^2).
double com_oracle(double y0, double t, const PhysicalParams& params);

/// Adaptive Dormand-Prince 5(4) integration of the pair from start.t to
/// t_final. Node-adjacent evaluations trigger step halving; after 10 halvings
/// (or step underflow below 1e-14 * t_final) the trajectory aborts with
/// node_adjacent_abort and the partial record is returned. The final sample
/// of a completed trajectory lands exactly on t_final.
Trajectory integrate_pair(const TwoSlitWavefunction& wf, const PhasePoint& start, double t_final,
                          const IntegratorSettings& settings,
                          const PeakDensityTable* peaks = nullptr);
/// Spec-surface wrapper; builds (and caches per thread) a peak table.
Trajectory integrate_pair(const PhasePoint& start, double t_final,
                          const IntegratorSettings& settings, const PhysicalParams& params);

} // namespace pilotwave
