#pragma once

#include "pilotwave/errors.hpp"

namespace pilotwave {

/// Physical constants and slit/packet parameters of the two-slit pair state.
/// Natural units hbar = m = 1 by default; every formula keeps hbar and m
/// explicit so the defaults are overridable.
///
/// Slits sit at y = +Y and y = -Y, each producing a Gaussian packet of
/// initial width sigma0 with transverse wavenumber ky. Detection happens at
/// the fixed time t0 (the x-motion is not modeled).
struct PhysicalParams {
    double hbar = 1.0;
    double m = 1.0;
    double sigma0 = 1.0;
    double Y = 5.0;
    double ky = 0.0;
    double t0 = 10.0;

    /// Packet drift speed u_y = hbar*ky/m.
    double u_y() const { return hbar * ky / m; }

    /// Spreading rate alpha = hbar/(2 m sigma0^2); tau(t) = alpha*t is the
    /// dimensionless spreading parameter.
    double alpha() const { return hbar / (2.0 * m * sigma0 * sigma0); }

    void validate() const {
        if (!(hbar > 0.0)) throw bad_value_error("params.hbar", "must be > 0");
        if (!(m > 0.0)) throw bad_value_error("params.m", "must be > 0");
        if (!(sigma0 > 0.0)) throw bad_value_error("params.sigma0", "must be > 0");
        if (!(Y >= 0.0)) throw bad_value_error("params.Y", "must be >= 0");
        if (!(t0 >= 0.0)) throw bad_value_error("params.t0", "must be >= 0");
        if (ky != ky) throw bad_value_error("params.ky", "must be finite");
    }

    friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

} // namespace pilotwave
