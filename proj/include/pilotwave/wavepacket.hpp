#pragma once

#include "pilotwave/params.hpp"

#include <complex>

namespace pilotwave {

using cplx = std::complex<double>;

/// Which slit a diffracted packet came from. Slit A sits at y = +Y, slit B at
/// y = -Y; the B packet is the A packet reflected through the axis.
enum class PacketLabel { A, B };

/// The symmetrized two-particle Gaussian state produced by the double slit,
/// restricted to the y-coordinates (the x plane-wave factor is dropped).
///
///   psi(y1, y2, t) = N [ psi_A(y1,t) psi_B(y2,t) + psi_B(y1,t) psi_A(y2,t) ]
///
/// with each single-slit packet
///
///   psi_{A,B}(y,t) = (2 pi sigma_t^2)^(-1/4)
///                    exp[ -(±y - Y - u_y t)^2 / (4 sigma0 sigma_t)
///                         + i k_y (±y - Y - u_y t/2) ],
///   sigma_t = sigma0 (1 + i hbar t / (2 m sigma0^2)).
///
/// N is fixed once per parameter set from the t=0 packet overlap by
/// deterministic quadrature (free propagation keeps it valid for all t).
class TwoSlitWavefunction {
public:
    explicit TwoSlitWavefunction(const PhysicalParams& params);

    const PhysicalParams& params() const { return params_; }
    double norm_constant() const { return norm_; }

    cplx sigma_t(double t) const;
    cplx packet(PacketLabel label, double y, double t) const;
    cplx packet_gradient(PacketLabel label, double y, double t) const;
    cplx joint(double y1, double y2, double t) const;
    double density(double y1, double y2, double t) const;

    /// Per-time constants shared by every evaluation at the same t. The hot
    /// paths (trajectory integration, cell quadrature) build one slice per
    /// stage time instead of recomputing sigma_t per point.
    struct Slice {
        double t;
        cplx inv_four;    // 1/(4 sigma0 sigma_t)
        cplx inv_two;     // 1/(2 sigma0 sigma_t)
        double center;    // Y + u_y t
        double phase_c;   // Y + u_y t/2
        double ky;
        cplx prefactor;          // (2 pi sigma_t^2)^(-1/4)
        double density_scale;    // N^2 / (2 pi |sigma_t|^2)
    };
    Slice slice(double t) const;

    /// Packet amplitude without the (2 pi sigma_t^2)^(-1/4) prefactor; the
    /// prefactor cancels in the guidance velocity ratio.
    cplx packet_unprefixed(const Slice& s, PacketLabel label, double y) const {
        const double sy = (label == PacketLabel::A) ? y : -y;
        const double d = sy - s.center;
        return std::exp(cplx(0.0, s.ky * (sy - s.phase_c)) - d * d * s.inv_four);
    }

    /// d/dy of the unprefixed packet amplitude.
    cplx gradient_unprefixed(const Slice& s, PacketLabel label, double y) const {
        const double sy = (label == PacketLabel::A) ? y : -y;
        const double sign = (label == PacketLabel::A) ? 1.0 : -1.0;
        const double d = sy - s.center;
        const cplx g = cplx(0.0, s.ky) - d * s.inv_two;
        return sign * (packet_unprefixed(s, label, y) * g);
    }

    /// psi/(N prefactor^2) and its two gradients, for one configuration point.
    void eval_reduced(const Slice& s, double y1, double y2, cplx& psi, cplx& d1, cplx& d2) const {
        const cplx a1 = packet_unprefixed(s, PacketLabel::A, y1);
        const cplx b1 = packet_unprefixed(s, PacketLabel::B, y1);
        const cplx a2 = packet_unprefixed(s, PacketLabel::A, y2);
        const cplx b2 = packet_unprefixed(s, PacketLabel::B, y2);
        const cplx ga1 = gradient_unprefixed(s, PacketLabel::A, y1);
        const cplx gb1 = gradient_unprefixed(s, PacketLabel::B, y1);
        const cplx ga2 = gradient_unprefixed(s, PacketLabel::A, y2);
        const cplx gb2 = gradient_unprefixed(s, PacketLabel::B, y2);
        psi = a1 * b2 + b1 * a2;
        d1 = ga1 * b2 + gb1 * a2;
        d2 = a1 * gb2 + b1 * ga2;
    }

    /// |psi|^2 from the reduced amplitude of eval_reduced.
    double density_from_reduced(const Slice& s, const cplx& psi_reduced) const {
        return s.density_scale * std::norm(psi_reduced);
    }

private:
    PhysicalParams params_;
    double norm_;
};

// Spec-surface free functions. Each keeps a thread-local cache of the last
// wavefunction so repeated calls with the same parameters avoid re-running
// the normalization quadrature.
const TwoSlitWavefunction& cached_wavefunction(const PhysicalParams& params);

cplx sigma_t(const PhysicalParams& params, double t);
cplx packet_amplitude(PacketLabel label, double y, double t, const PhysicalParams& params);
cplx packet_gradient_y(PacketLabel label, double y, double t, const PhysicalParams& params);
double normalization_constant(const PhysicalParams& params);
cplx joint_amplitude(double y1, double y2, double t, const PhysicalParams& params);
double joint_density(double y1, double y2, double t, const PhysicalParams& params);

} // namespace pilotwave
