#include "pilotwave/ensemble.hpp"

#include "pilotwave/quadrature.hpp"
#include "pilotwave/rng.hpp"

#include <cmath>
#include <omp.h>
#include <utility>

namespace pilotwave {

namespace {

// Per-attempt draw pattern is fixed (one mixture uniform, one normal pair,
// one acceptance uniform) so a pair's stream position depends only on its
// own attempt count, never on other pairs.
PhasePoint draw_equilibrium_pair(PairStream& rng, const TwoSlitWavefunction& wf,
                                 const TwoSlitWavefunction::Slice& s0) {
    const PhysicalParams& p = wf.params();
    const double sig = p.sigma0;
    const double envelope = 4.0 * wf.norm_constant() * wf.norm_constant();
    const double gauss_norm = 1.0 / (2.0 * M_PI * sig * sig);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double u_mix = rng.next_u01();
        const auto [z1, z2] = rng.next_normal_pair();
        const double u_acc = rng.next_u01();
        const bool ab = u_mix < 0.5; // slit A for particle 1, B for particle 2
        const double y1 = (ab ? p.Y : -p.Y) + sig * z1;
        const double y2 = (ab ? -p.Y : p.Y) + sig * z2;

        const double da = (y1 - p.Y) * (y1 - p.Y) + (y2 + p.Y) * (y2 + p.Y);
        const double db = (y1 + p.Y) * (y1 + p.Y) + (y2 - p.Y) * (y2 - p.Y);
        const double inv2s2 = 1.0 / (2.0 * sig * sig);
        const double proposal =
            0.5 * gauss_norm * (std::exp(-da * inv2s2) + std::exp(-db * inv2s2));

        const cplx a1 = wf.packet_unprefixed(s0, PacketLabel::A, y1);
        const cplx b1 = wf.packet_unprefixed(s0, PacketLabel::B, y1);
        const cplx a2 = wf.packet_unprefixed(s0, PacketLabel::A, y2);
        const cplx b2 = wf.packet_unprefixed(s0, PacketLabel::B, y2);
        const double target = wf.density_from_reduced(s0, a1 * b2 + b1 * a2);

        const double bound = envelope * proposal;
        if (target > bound * (1.0 + 1e-9)) {
            throw envelope_violation_error("equilibrium target density exceeds its envelope");
        }
        if (u_acc * bound < target) return {y1, y2, 0.0};
    }
    throw envelope_violation_error("equilibrium rejection sampling stalled");
}

PhasePoint draw_constrained_pair(PairStream& rng, const TwoSlitWavefunction& wf,
                                 const TwoSlitWavefunction::Slice& s0) {
    const PhysicalParams& p = wf.params();
    const double sig = p.sigma0;
    const double n2 = wf.norm_constant() * wf.norm_constant();
    // |psi(y,-y,0)|^2 <= envelope * proposal with proposal the half-width
    // Gaussian mixture; the bound is tight where the two slit terms decouple.
    const double envelope = 2.0 * n2 / (std::sqrt(M_PI) * sig);
    const double half_norm = 1.0 / (sig * std::sqrt(M_PI)); // Normal(0, sig^2/2) pdf scale
    const double half_width = sig / std::sqrt(2.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double u_mix = rng.next_u01();
        const auto [z1, z2] = rng.next_normal_pair();
        (void)z2; // pair drawn whole to keep the per-attempt stream layout fixed
        const double u_acc = rng.next_u01();
        const double y = (u_mix < 0.5 ? p.Y : -p.Y) + half_width * z1;

        const double ea = (y - p.Y) * (y - p.Y);
        const double eb = (y + p.Y) * (y + p.Y);
        const double inv_s2 = 1.0 / (sig * sig);
        const double proposal =
            0.5 * half_norm * (std::exp(-ea * inv_s2) + std::exp(-eb * inv_s2));

        // On the antidiagonal the reduced amplitude collapses to a^2 + b^2.
        const cplx a = wf.packet_unprefixed(s0, PacketLabel::A, y);
        const cplx b = wf.packet_unprefixed(s0, PacketLabel::B, y);
        const double target = wf.density_from_reduced(s0, a * a + b * b);

        const double bound = envelope * proposal;
        if (target > bound * (1.0 + 1e-9)) {
            throw envelope_violation_error("antidiagonal target density exceeds its envelope");
        }
        if (u_acc * bound < target) return {y, -y, 0.0};
    }
    throw envelope_violation_error("antidiagonal rejection sampling stalled");
}

} // namespace

std::vector<PhasePoint> sample_equilibrium(const EnsembleConfig& cfg,
                                           const PhysicalParams& params) {
    cfg.validate();
    if (cfg.constraint != InitialConstraint::equilibrium) {
        throw bad_value_error("ensemble.constraint", "sample_equilibrium needs equilibrium");
    }
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const auto s0 = wf.slice(0.0);
    std::vector<PhasePoint> out;
    out.reserve(cfg.n_pairs);
    for (std::uint64_t i = 0; i < cfg.n_pairs; ++i) {
        PairStream rng(cfg.master_seed, i);
        out.push_back(draw_equilibrium_pair(rng, wf, s0));
    }
    return out;
}

std::vector<PhasePoint> sample_constrained(const EnsembleConfig& cfg,
                                           const PhysicalParams& params) {
    cfg.validate();
    if (cfg.constraint != InitialConstraint::antidiagonal) {
        throw bad_value_error("ensemble.constraint", "sample_constrained needs antidiagonal");
    }
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const auto s0 = wf.slice(0.0);
    std::vector<PhasePoint> out;
    out.reserve(cfg.n_pairs);
    for (std::uint64_t i = 0; i < cfg.n_pairs; ++i) {
        PairStream rng(cfg.master_seed, i);
        out.push_back(draw_constrained_pair(rng, wf, s0));
    }
    return out;
}

std::vector<PhasePoint> sample_initial(const EnsembleConfig& cfg, const PhysicalParams& params) {
    return cfg.constraint == InitialConstraint::equilibrium ? sample_equilibrium(cfg, params)
                                                            : sample_constrained(cfg, params);
}

double com_spread(const std::vector<PhasePoint>& points) {
    if (points.size() < 2) throw bad_value_error("points", "com_spread needs at least 2 points");
    double mean = 0.0;
    for (const auto& p : points) mean += p.com();
    mean /= double(points.size());
    double ss = 0.0;
    for (const auto& p : points) {
        const double d = p.com() - mean;
        ss += d * d;
    }
    return std::sqrt(ss / double(points.size() - 1));
}

namespace {

void evolve_one(const TwoSlitWavefunction& wf, const PeakDensityTable& peaks,
                const PhasePoint& start, double t_final, const IntegratorSettings& settings,
                std::uint64_t pair_id, ArrivalRecord& rec) {
    const Trajectory tr = integrate_pair(wf, start, t_final, settings, &peaks);
    rec.pair_id = pair_id;
    rec.y1_0 = start.y1;
    rec.y2_0 = start.y2;
    rec.y1_t = tr.back().y1;
    rec.y2_t = tr.back().y2;
    rec.status = tr.status;
}

ArrivalSet evolve_common(const std::vector<PhasePoint>& points, double t_final,
                         const IntegratorSettings& settings, const EnsembleConfig& cfg,
                         const PhysicalParams& params, int n_workers, bool parallel) {
    cfg.validate();
    params.validate();
    settings.validate();
    if (points.empty()) throw bad_value_error("points", "nothing to evolve");
    const double t_start = points.front().t;
    for (const auto& p : points) {
        if (p.t != t_start) throw bad_value_error("points", "must share a common start time");
    }
    if (!(t_final > t_start)) throw bad_value_error("t_final", "must exceed the start time");

    const TwoSlitWavefunction wf(params);
    const PeakDensityTable peaks(wf, t_final);

    const std::size_t n = points.size();
    std::vector<ArrivalRecord> records(n);

    if (parallel) {
        const int threads = n_workers > 0 ? n_workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 32) num_threads(threads)
        for (long long i = 0; i < (long long)n; ++i) {
            evolve_one(wf, peaks, points[std::size_t(i)], t_final, settings, std::uint64_t(i),
                       records[std::size_t(i)]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            evolve_one(wf, peaks, points[i], t_final, settings, i, records[i]);
        }
    }

    ArrivalSet out;
    out.t0 = t_final;
    out.records = std::move(records);
    out.points.reserve(n);
    for (const auto& r : out.records) {
        if (r.status == TrajectoryStatus::completed) {
            out.points.push_back({r.y1_t, r.y2_t, t_final});
        } else {
            ++out.aborted_count;
        }
    }
    if (out.abort_fraction() >= 1e-3) {
        throw abort_fraction_error("node-abort fraction " + std::to_string(out.abort_fraction()) +
                                   " reached the 1e-3 failure threshold");
    }
    return out;
}

} // namespace

ArrivalSet evolve_ensemble(const std::vector<PhasePoint>& points, double t_final,
                           const IntegratorSettings& settings, const EnsembleConfig& cfg,
                           const PhysicalParams& params, int n_workers) {
    return evolve_common(points, t_final, settings, cfg, params, n_workers, true);
}

ArrivalSet evolve_ensemble_reference(const std::vector<PhasePoint>& points, double t_final,
                                     const IntegratorSettings& settings,
                                     const EnsembleConfig& cfg, const PhysicalParams& params) {
    return evolve_common(points, t_final, settings, cfg, params, 1, false);
}

HistogramGrid diagnostic_grid(const PhysicalParams& params, double t, std::size_t n) {
    const double reach =
        params.Y + std::abs(params.u_y()) * t + 6.0 * std::abs(sigma_t(params, t));
    return {-reach, reach, n};
}

Histogram2D histogram_counts(const std::vector<PhasePoint>& points, const HistogramGrid& grid) {
    Histogram2D h;
    h.grid = grid;
    h.counts.assign(grid.n_bins(), 0);
    for (const auto& p : points) {
        const std::size_t i1 = grid.index(p.y1);
        const std::size_t i2 = grid.index(p.y2);
        if (i1 == grid.n || i2 == grid.n) {
            ++h.overflow;
        } else {
            ++h.counts[i1 * grid.n + i2];
        }
        ++h.total;
    }
    return h;
}

namespace {

// One grid row of per-cell quadrature; shared verbatim by the parallel and
// serial variants so their outputs are bitwise identical.
void model_row(const TwoSlitWavefunction& wf, const TwoSlitWavefunction::Slice& s,
               const HistogramGrid& grid, std::size_t i1, double* row) {
    auto rho = [&](double y1, double y2) {
        const cplx a1 = wf.packet_unprefixed(s, PacketLabel::A, y1);
        const cplx b1 = wf.packet_unprefixed(s, PacketLabel::B, y1);
        const cplx a2 = wf.packet_unprefixed(s, PacketLabel::A, y2);
        const cplx b2 = wf.packet_unprefixed(s, PacketLabel::B, y2);
        return wf.density_from_reduced(s, a1 * b2 + b1 * a2);
    };
    const double x0 = grid.edge(i1);
    const double x1 = grid.edge(i1 + 1);
    for (std::size_t i2 = 0; i2 < grid.n; ++i2) {
        row[i2] = GaussLegendre16::integrate_cell(rho, x0, x1, grid.edge(i2), grid.edge(i2 + 1));
    }
}

} // namespace

std::vector<double> model_bin_probabilities(const TwoSlitWavefunction& wf, double t,
                                            const HistogramGrid& grid, int n_workers) {
    const auto s = wf.slice(t);
    std::vector<double> probs(grid.n_bins());
    const int threads = n_workers > 0 ? n_workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i1 = 0; i1 < (long long)grid.n; ++i1) {
        model_row(wf, s, grid, std::size_t(i1), probs.data() + std::size_t(i1) * grid.n);
    }
    return probs;
}

std::vector<double> model_bin_probabilities_reference(const TwoSlitWavefunction& wf, double t,
                                                      const HistogramGrid& grid) {
    const auto s = wf.slice(t);
    std::vector<double> probs(grid.n_bins());
    for (std::size_t i1 = 0; i1 < grid.n; ++i1) {
        model_row(wf, s, grid, i1, probs.data() + i1 * grid.n);
    }
    return probs;
}

double tv_distance(const Histogram2D& hist, const std::vector<double>& model_probs) {
    if (hist.total == 0) throw bad_value_error("hist", "empty histogram");
    if (model_probs.size() != hist.counts.size())
        throw bad_value_error("model_probs", "bin count mismatch");
    const double inv_total = 1.0 / double(hist.total);
    double tv = 0.0;
    double model_mass = 0.0;
    for (std::size_t k = 0; k < model_probs.size(); ++k) {
        tv += std::abs(double(hist.counts[k]) * inv_total - model_probs[k]);
        model_mass += model_probs[k];
    }
    tv += std::abs(double(hist.overflow) * inv_total - std::max(0.0, 1.0 - model_mass));
    return 0.5 * tv;
}

double equivariance_distance(const ArrivalSet& arrivals, const PhysicalParams& params) {
    if (arrivals.points.empty()) throw bad_value_error("arrivals", "no completed points");
    const HistogramGrid grid = diagnostic_grid(params, arrivals.t0);
    const Histogram2D hist = histogram_counts(arrivals.points, grid);
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const std::vector<double> model = model_bin_probabilities(wf, arrivals.t0, grid);
    return tv_distance(hist, model);
}

double mc_tv_bound(std::size_t n_points, std::size_t n_bins, double c) {
    if (n_points == 0) throw bad_value_error("n_points", "must be >= 1");
    return c * std::sqrt(double(n_bins) / double(n_points));
}

} // namespace pilotwave
