#include "pilotwave/wavepacket.hpp"

#include "pilotwave/quadrature.hpp"

#include <cmath>
#include <optional>

namespace pilotwave {

namespace {

// t=0 packet overlap s = integral of conj(psi_A) psi_B over the slit window.
cplx packet_overlap(const PhysicalParams& p) {
    const double pref = std::pow(2.0 * M_PI * p.sigma0 * p.sigma0, -0.5);
    const double inv4 = 1.0 / (4.0 * p.sigma0 * p.sigma0);
    auto integrand = [&](double y) -> cplx {
        const double da = y - p.Y;
        const double db = -y - p.Y;
        // conj(psi_A) psi_B at t=0; the Gaussian factors are real there.
        const double env = std::exp(-(da * da + db * db) * inv4);
        const double phase = p.ky * ((-y - p.Y) - (y - p.Y));
        return pref * env * cplx(std::cos(phase), std::sin(phase));
    };
    const double a = -p.Y - 10.0 * p.sigma0;
    const double b = p.Y + 10.0 * p.sigma0;
    const double re = adaptive_simpson([&](double y) { return integrand(y).real(); }, a, b, 1e-10);
    const double im = adaptive_simpson([&](double y) { return integrand(y).imag(); }, a, b, 1e-10);
    return {re, im};
}

} // namespace

TwoSlitWavefunction::TwoSlitWavefunction(const PhysicalParams& params) : params_(params) {
    params_.validate();
    const cplx s = packet_overlap(params_);
    norm_ = 1.0 / std::sqrt(2.0 * (1.0 + std::norm(s)));
}

cplx TwoSlitWavefunction::sigma_t(double t) const {
    const double tau = params_.alpha() * t;
    return params_.sigma0 * cplx(1.0, tau);
}

TwoSlitWavefunction::Slice TwoSlitWavefunction::slice(double t) const {
    Slice s;
    s.t = t;
    const cplx st = sigma_t(t);
    s.inv_four = 1.0 / (4.0 * params_.sigma0 * st);
    s.inv_two = 2.0 * s.inv_four;
    const double uy = params_.u_y();
    s.center = params_.Y + uy * t;
    s.phase_c = params_.Y + 0.5 * uy * t;
    s.ky = params_.ky;
    // (2 pi sigma_t^2)^(-1/4) via polar form; principal branch.
    const double r2 = std::norm(st);                  // |sigma_t|^2
    const double theta = std::arg(st);                // arg(sigma_t^2) = 2 theta
    s.prefactor = std::polar(std::pow(2.0 * M_PI * r2, -0.25), -0.5 * theta);
    s.density_scale = norm_ * norm_ / (2.0 * M_PI * r2);
    return s;
}

cplx TwoSlitWavefunction::packet(PacketLabel label, double y, double t) const {
    const Slice s = slice(t);
    return s.prefactor * packet_unprefixed(s, label, y);
}

cplx TwoSlitWavefunction::packet_gradient(PacketLabel label, double y, double t) const {
    const Slice s = slice(t);
    return s.prefactor * gradient_unprefixed(s, label, y);
}

cplx TwoSlitWavefunction::joint(double y1, double y2, double t) const {
    const Slice s = slice(t);
    cplx psi, d1, d2;
    eval_reduced(s, y1, y2, psi, d1, d2);
    return norm_ * (s.prefactor * s.prefactor) * psi;
}

double TwoSlitWavefunction::density(double y1, double y2, double t) const {
    const Slice s = slice(t);
    const cplx a1 = packet_unprefixed(s, PacketLabel::A, y1);
    const cplx b1 = packet_unprefixed(s, PacketLabel::B, y1);
    const cplx a2 = packet_unprefixed(s, PacketLabel::A, y2);
    const cplx b2 = packet_unprefixed(s, PacketLabel::B, y2);
    return density_from_reduced(s, a1 * b2 + b1 * a2);
}

const TwoSlitWavefunction& cached_wavefunction(const PhysicalParams& params) {
    thread_local std::optional<TwoSlitWavefunction> cache;
    if (!cache || !(cache->params() == params)) cache.emplace(params);
    return *cache;
}

cplx sigma_t(const PhysicalParams& params, double t) {
    const double tau = params.alpha() * t;
    return params.sigma0 * cplx(1.0, tau);
}

cplx packet_amplitude(PacketLabel label, double y, double t, const PhysicalParams& params) {
    return cached_wavefunction(params).packet(label, y, t);
}

cplx packet_gradient_y(PacketLabel label, double y, double t, const PhysicalParams& params) {
    return cached_wavefunction(params).packet_gradient(label, y, t);
}

double normalization_constant(const PhysicalParams& params) {
    return cached_wavefunction(params).norm_constant();
}

cplx joint_amplitude(double y1, double y2, double t, const PhysicalParams& params) {
    return cached_wavefunction(params).joint(y1, y2, t);
}

double joint_density(double y1, double y2, double t, const PhysicalParams& params) {
    return cached_wavefunction(params).density(y1, y2, t);
}

} // namespace pilotwave
