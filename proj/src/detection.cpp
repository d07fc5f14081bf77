#include "pilotwave/detection.hpp"

#include "pilotwave/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pilotwave {

namespace {

// Half-width beyond which the state carries no appreciable mass at time t.
double mass_reach(const PhysicalParams& p, double t, double n_sigmas) {
    return p.Y + std::abs(p.u_y()) * t + n_sigmas * std::abs(sigma_t(p, t));
}

// Ordered-window mass I(w1, w2) = P(y1 in w1, y2 in w2).
double ordered_mass(const TwoSlitWavefunction& wf, const TwoSlitWavefunction::Slice& s,
                    const DetectorWindow& w1, const DetectorWindow& w2, double tol) {
    auto rho = [&](double y1, double y2) {
        const cplx a1 = wf.packet_unprefixed(s, PacketLabel::A, y1);
        const cplx b1 = wf.packet_unprefixed(s, PacketLabel::B, y1);
        const cplx a2 = wf.packet_unprefixed(s, PacketLabel::A, y2);
        const cplx b2 = wf.packet_unprefixed(s, PacketLabel::B, y2);
        return wf.density_from_reduced(s, a1 * b2 + b1 * a2);
    };
    return integrate_2d(rho, w1.lo, w1.hi(), w2.lo, w2.hi(), tol);
}

// Closed-form single-particle marginal at one time: everything but the
// packet cross-overlap reduces to the unit-normalized packet densities.
struct MarginalModel {
    const TwoSlitWavefunction& wf;
    TwoSlitWavefunction::Slice s;
    double scale; // N^2 / sqrt(2 pi |sigma_t|^2)
    cplx w;       // integral of psi_B conj(psi_A) at time t

    MarginalModel(const TwoSlitWavefunction& wf_, double t) : wf(wf_), s(wf_.slice(t)) {
        const double r2 = std::norm(wf.sigma_t(t));
        scale = wf.norm_constant() * wf.norm_constant() / std::sqrt(2.0 * M_PI * r2);
        const double reach = mass_reach(wf.params(), t, 10.0);
        auto cross = [&](double z) {
            return wf.packet_unprefixed(s, PacketLabel::B, z) *
                   std::conj(wf.packet_unprefixed(s, PacketLabel::A, z));
        };
        const double pref2 = 1.0 / std::sqrt(2.0 * M_PI * r2);
        const double re =
            adaptive_simpson([&](double z) { return cross(z).real(); }, -reach, reach, 1e-12);
        const double im =
            adaptive_simpson([&](double z) { return cross(z).imag(); }, -reach, reach, 1e-12);
        w = pref2 * cplx(re, im);
    }

    double operator()(double y) const {
        const cplx a = wf.packet_unprefixed(s, PacketLabel::A, y);
        const cplx b = wf.packet_unprefixed(s, PacketLabel::B, y);
        return scale * (std::norm(a) + std::norm(b) + 2.0 * std::real(a * std::conj(b) * w));
    }
};

} // namespace

double sqm_window_probability(const DetectorWindow& w1, const DetectorWindow& w2, double t0,
                              const PhysicalParams& params, double quad_tol) {
    w1.validate();
    w2.validate();
    if (!(t0 >= 0.0)) throw bad_value_error("t0", "must be >= 0");
    if (!(quad_tol > 0.0)) throw bad_value_error("quad_tol", "must be > 0");
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const auto s = wf.slice(t0);

    // Unordered union mass: I(w1,w2) + I(w2,w1) - I(c,c) with c the window
    // intersection; exchange symmetry merges the first two terms.
    double p = 2.0 * ordered_mass(wf, s, w1, w2, 0.25 * quad_tol);
    const double c_lo = std::max(w1.lo, w2.lo);
    const double c_hi = std::min(w1.hi(), w2.hi());
    if (c_hi > c_lo) {
        const DetectorWindow c{c_lo, c_hi - c_lo};
        p -= ordered_mass(wf, s, c, c, 0.5 * quad_tol);
    }
    return p;
}

CoincidenceResult bm_coincidence_fraction(const ArrivalSet& arrivals, const DetectorWindow& w1,
                                          const DetectorWindow& w2) {
    w1.validate();
    w2.validate();
    if (arrivals.points.empty()) throw bad_value_error("arrivals", "no completed points");
    CoincidenceResult r;
    r.n = arrivals.points.size();
    for (const auto& p : arrivals.points) {
        const bool hit = (w1.contains(p.y1) && w2.contains(p.y2)) ||
                         (w2.contains(p.y1) && w1.contains(p.y2));
        if (hit) ++r.hits;
    }
    r.p_hat = double(r.hits) / double(r.n);
    r.se = std::sqrt(r.p_hat * (1.0 - r.p_hat) / double(r.n));
    return r;
}

PairAverage ghose_p_star(const ArrivalSet& arrivals,
                         const std::function<double(double, double, double)>& density) {
    if (arrivals.points.empty()) throw bad_value_error("arrivals", "no completed points");
    PairAverage out;
    out.n = arrivals.points.size();
    double mean = 0.0;
    for (const auto& p : arrivals.points) mean += density(p.y1, -p.y1, arrivals.t0);
    mean /= double(out.n);
    double ss = 0.0;
    for (const auto& p : arrivals.points) {
        const double d = density(p.y1, -p.y1, arrivals.t0) - mean;
        ss += d * d;
    }
    out.mean = mean;
    out.se = out.n > 1 ? std::sqrt(ss / double(out.n - 1) / double(out.n)) : 0.0;
    return out;
}

PairAverage ghose_p_star(const ArrivalSet& arrivals, const PhysicalParams& params) {
    for (const auto& p : arrivals.points) {
        if (std::abs(p.y1 + p.y2) > 1e-6 * params.sigma0) {
            throw bad_value_error("arrivals", "ghose_p_star needs antidiagonal arrivals");
        }
    }
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const auto s = wf.slice(arrivals.t0);
    auto rho = [&](double y1, double y2, double) {
        const cplx a1 = wf.packet_unprefixed(s, PacketLabel::A, y1);
        const cplx b1 = wf.packet_unprefixed(s, PacketLabel::B, y1);
        const cplx a2 = wf.packet_unprefixed(s, PacketLabel::A, y2);
        const cplx b2 = wf.packet_unprefixed(s, PacketLabel::B, y2);
        return wf.density_from_reduced(s, a1 * b2 + b1 * a2);
    };
    return ghose_p_star(arrivals, rho);
}

double marginal_density(double y, double t, const PhysicalParams& params) {
    if (!(t >= 0.0)) throw bad_value_error("t", "must be >= 0");
    const MarginalModel m(cached_wavefunction(params), t);
    return m(y);
}

double marginal_ks_statistic(const ArrivalSet& arrivals, const PhysicalParams& params) {
    if (arrivals.points.empty()) throw bad_value_error("arrivals", "no completed points");
    std::vector<double> pooled;
    pooled.reserve(2 * arrivals.points.size());
    for (const auto& p : arrivals.points) {
        pooled.push_back(p.y1);
        pooled.push_back(p.y2);
    }
    std::sort(pooled.begin(), pooled.end());

    const MarginalModel m(cached_wavefunction(params), arrivals.t0);
    const double reach = mass_reach(params, arrivals.t0, 8.0);
    const CdfTable cdf(m, -reach, reach, 8193);

    const double n = double(pooled.size());
    double d = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        const double f = cdf(pooled[i]);
        d = std::max(d, double(i + 1) / n - f);
        d = std::max(d, f - double(i) / n);
    }
    return d;
}

double ks_critical_value(std::size_t n_pooled, double alpha) {
    if (n_pooled == 0) throw bad_value_error("n_pooled", "must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw bad_value_error("alpha", "must be in (0, 1)");
    return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(double(n_pooled));
}

ComparisonVerdict compare(double sqm_p, const CoincidenceResult& bm) {
    if (bm.n < 100) throw bad_value_error("bm.n", "comparison needs at least 100 pairs");
    ComparisonVerdict v;
    v.sqm_p = sqm_p;
    v.bm = bm;
    if (bm.se > 0.0) {
        v.z = (bm.p_hat - sqm_p) / bm.se;
        v.agrees = std::abs(v.z) <= 3.0;
    } else if (bm.p_hat == sqm_p) {
        v.z = 0.0;
        v.agrees = true;
    } else {
        v.z = std::copysign(std::numeric_limits<double>::infinity(), bm.p_hat - sqm_p);
        v.agrees = false;
    }
    return v;
}

} // namespace pilotwave
