#include "pilotwave/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace pilotwave {

PeakDensityTable::PeakDensityTable(const TwoSlitWavefunction& wf, double t_max,
                                   std::size_t n_slices, std::size_t grid_n)
    : t_max_(t_max) {
    const PhysicalParams& p = wf.params();
    values_.resize(n_slices);
    for (std::size_t k = 0; k < n_slices; ++k) {
        const double t = (n_slices == 1) ? 0.0 : t_max * double(k) / double(n_slices - 1);
        const double reach = p.Y + std::abs(p.u_y()) * t + 6.0 * std::abs(wf.sigma_t(t));
        const auto s = wf.slice(t);
        double best = 0.0;
        for (std::size_t i = 0; i <= grid_n; ++i) {
            const double y1 = -reach + 2.0 * reach * double(i) / double(grid_n);
            const cplx a1 = wf.packet_unprefixed(s, PacketLabel::A, y1);
            const cplx b1 = wf.packet_unprefixed(s, PacketLabel::B, y1);
            for (std::size_t j = 0; j <= grid_n; ++j) {
                const double y2 = -reach + 2.0 * reach * double(j) / double(grid_n);
                const cplx a2 = wf.packet_unprefixed(s, PacketLabel::A, y2);
                const cplx b2 = wf.packet_unprefixed(s, PacketLabel::B, y2);
                best = std::max(best, std::norm(a1 * b2 + b1 * a2));
            }
        }
        values_[k] = wf.density_from_reduced(s, cplx(std::sqrt(best), 0.0));
    }
}

double PeakDensityTable::peak(double t) const {
    if (values_.empty()) return 0.0;
    if (values_.size() == 1 || t_max_ <= 0.0) return values_[0];
    const double s = std::clamp(t / t_max_, 0.0, 1.0) * double(values_.size() - 1);
    std::size_t i = std::size_t(s);
    if (i >= values_.size() - 1) i = values_.size() - 2;
    const double frac = s - double(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

bool try_velocity_field(const TwoSlitWavefunction& wf, const PhasePoint& p, Velocities& out,
                        double density_floor) {
    const auto s = wf.slice(p.t);
    cplx psi, d1, d2;
    wf.eval_reduced(s, p.y1, p.y2, psi, d1, d2);
    const double density = wf.density_from_reduced(s, psi);
    if (!(density > density_floor) || density == 0.0) return false;
    const double scale = wf.params().hbar / wf.params().m;
    out.v1 = scale * std::imag(d1 / psi);
    out.v2 = scale * std::imag(d2 / psi);
    return true;
}

Velocities velocity_field(const TwoSlitWavefunction& wf, const PhasePoint& p,
                          double density_floor) {
    Velocities v;
    if (!try_velocity_field(wf, p, v, density_floor)) {
        throw node_proximity_error("velocity field evaluated node-adjacent at t=" +
                                   std::to_string(p.t));
    }
    return v;
}

Velocities velocity_field(const PhasePoint& p, const PhysicalParams& params) {
    return velocity_field(cached_wavefunction(params), p);
}

double com_velocity(const PhasePoint& p, const PhysicalParams& params) {
    const double a = params.alpha();
    const double at = a * p.t;
    return a * at * p.com() / (1.0 + at * at);
}

double com_oracle(double y0, double t, const PhysicalParams& params) {
    const double at = params.alpha() * t;
    return y0 * std::sqrt(1.0 + at * at);
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;

struct StageEval {
    Velocities v;
    bool ok;
    double speed() const { return std::max(std::abs(v.v1), std::abs(v.v2)); }
};

} // namespace

Trajectory integrate_pair(const TwoSlitWavefunction& wf, const PhasePoint& start, double t_final,
                          const IntegratorSettings& settings, const PeakDensityTable* peaks) {
    settings.validate();
    Trajectory traj;
    auto floor_at = [&](double t) { return peaks ? settings.node_eps * peaks->peak(t) : 0.0; };

    auto eval = [&](double t, double y1, double y2) -> StageEval {
        StageEval st;
        st.ok = try_velocity_field(wf, {y1, y2, t}, st.v, floor_at(t));
        return st;
    };

    double t = start.t;
    double y1 = start.y1, y2 = start.y2;

    StageEval k1 = eval(t, y1, y2);
    if (!k1.ok) {
        // Start already node-adjacent: nothing to integrate.
        traj.samples.push_back({t, y1, y2, 0.0, 0.0, 0.0});
        traj.status = TrajectoryStatus::node_adjacent_abort;
        return traj;
    }
    traj.samples.push_back({t, y1, y2, k1.v.v1, k1.v.v2, 0.0});

    const double span = t_final - start.t;
    const double h_min = 1e-14 * t_final;
    double h = std::min({settings.max_step, 0.05 * span, span});
    int halvings = 0;

    while (t < t_final) {
        h = std::min(h, t_final - t);
        bool node_hit = false;
        double max_speed = k1.speed();

        auto stage = [&](double ct, double z1, double z2) -> StageEval {
            StageEval st = eval(ct, z1, z2);
            if (!st.ok) node_hit = true;
            else max_speed = std::max(max_speed, st.speed());
            return st;
        };

        const StageEval k2 = stage(t + C2 * h, y1 + h * A21 * k1.v.v1, y2 + h * A21 * k1.v.v2);
        StageEval k3{}, k4{}, k5{}, k6{}, k7{};
        if (!node_hit)
            k3 = stage(t + C3 * h, y1 + h * (A31 * k1.v.v1 + A32 * k2.v.v1),
                       y2 + h * (A31 * k1.v.v2 + A32 * k2.v.v2));
        if (!node_hit)
            k4 = stage(t + C4 * h, y1 + h * (A41 * k1.v.v1 + A42 * k2.v.v1 + A43 * k3.v.v1),
                       y2 + h * (A41 * k1.v.v2 + A42 * k2.v.v2 + A43 * k3.v.v2));
        if (!node_hit)
            k5 = stage(t + C5 * h,
                       y1 + h * (A51 * k1.v.v1 + A52 * k2.v.v1 + A53 * k3.v.v1 + A54 * k4.v.v1),
                       y2 + h * (A51 * k1.v.v2 + A52 * k2.v.v2 + A53 * k3.v.v2 + A54 * k4.v.v2));
        if (!node_hit)
            k6 = stage(t + h,
                       y1 + h * (A61 * k1.v.v1 + A62 * k2.v.v1 + A63 * k3.v.v1 + A64 * k4.v.v1 +
                                 A65 * k5.v.v1),
                       y2 + h * (A61 * k1.v.v2 + A62 * k2.v.v2 + A63 * k3.v.v2 + A64 * k4.v.v2 +
                                 A65 * k5.v.v2));

        double ny1 = 0.0, ny2 = 0.0;
        if (!node_hit) {
            ny1 = y1 + h * (B1 * k1.v.v1 + B3 * k3.v.v1 + B4 * k4.v.v1 + B5 * k5.v.v1 +
                            B6 * k6.v.v1);
            ny2 = y2 + h * (B1 * k1.v.v2 + B3 * k3.v.v2 + B4 * k4.v.v2 + B5 * k5.v.v2 +
                            B6 * k6.v.v2);
            k7 = stage(t + h, ny1, ny2); // FSAL stage
        }

        if (node_hit) {
            if (++halvings > 10 || h <= h_min) {
                traj.status = TrajectoryStatus::node_adjacent_abort;
                return traj;
            }
            h *= 0.5;
            continue;
        }

        const double err1 = h * (E1 * k1.v.v1 + E3 * k3.v.v1 + E4 * k4.v.v1 + E5 * k5.v.v1 +
                                 E6 * k6.v.v1 + E7 * k7.v.v1);
        const double err2 = h * (E1 * k1.v.v2 + E3 * k3.v.v2 + E4 * k4.v.v2 + E5 * k5.v.v2 +
                                 E6 * k6.v.v2 + E7 * k7.v.v2);
        const double sc1 = settings.abs_tol +
                           settings.rel_tol * std::max(std::abs(y1), std::abs(ny1));
        const double sc2 = settings.abs_tol +
                           settings.rel_tol * std::max(std::abs(y2), std::abs(ny2));
        const double r1 = err1 / sc1, r2 = err2 / sc2;
        const double err_norm = std::sqrt(0.5 * (r1 * r1 + r2 * r2));

        if (err_norm <= 1.0) {
            t += h;
            y1 = ny1;
            y2 = ny2;
            k1 = k7; // FSAL
            halvings = 0;
            traj.error_budget += std::max(std::abs(err1), std::abs(err2));
            traj.samples.push_back({t, y1, y2, k1.v.v1, k1.v.v2, max_speed});
        }

        const double factor = (err_norm > 0.0)
                                  ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0)
                                  : 5.0;
        h = std::min(h * factor, settings.max_step);
        if (h <= h_min) {
            if (t < t_final) {
                traj.status = TrajectoryStatus::node_adjacent_abort;
                return traj;
            }
        }
    }
    traj.status = TrajectoryStatus::completed;
    return traj;
}

Trajectory integrate_pair(const PhasePoint& start, double t_final,
                          const IntegratorSettings& settings, const PhysicalParams& params) {
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    thread_local std::optional<PeakDensityTable> table;
    thread_local PhysicalParams table_params;
    if (!table || !(table_params == params) || table->t_max() < t_final) {
        table.emplace(wf, std::max(t_final, params.t0));
        table_params = params;
    }
    return integrate_pair(wf, start, t_final, settings, &*table);
}

} // namespace pilotwave
