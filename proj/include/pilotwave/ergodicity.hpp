#pragma once

#include "pilotwave/ensemble.hpp"

#include <cstdint>
#include <vector>

namespace pilotwave {

/// Discrete-spectrum toy state psi = sum_n c_n e^{-i E_n t / hbar} phi_n,
/// the regime where time averages reduce to diagonal space averages.
struct ModeExpansion {
    std::vector<cplx> coeffs;
    std::vector<double> energies;
    double hbar = 1.0;

    void validate() const;
    /// Smallest |E_m - E_n| over distinct mode pairs (0 for a degeneracy).
    double min_energy_gap() const;
};

/// Hermitian observable in the mode basis: F_mn = <phi_m|F|phi_n>.
struct ObservableMatrix {
    std::size_t n = 0;
    std::vector<cplx> elements; // row-major n x n

    cplx at(std::size_t m, std::size_t k) const { return elements[m * n + k]; }
    void validate() const;
};

/// Re sum_{mn} conj(c_m) c_n F_mn e^{-i (E_n - E_m) t / hbar}.
double expectation_at_time(const ModeExpansion& x, const ObservableMatrix& F, double t);

/// Trapezoidal average of expectation_at_time over [0, T] with n_samples
/// intervals (n_samples >= 100; keep the sample spacing well under the
/// fastest beat period 2 pi hbar / max|E_m - E_n|).
double time_average(const ModeExpansion& x, const ObservableMatrix& F, double T,
                    std::size_t n_samples);

/// Sample count giving spacing h = 1/(points_per_radian * omega_max), the
/// resolution time_average needs for its trapezoidal error to stay small.
std::size_t suggested_time_samples(const ModeExpansion& x, double T,
                                   double points_per_radian = 4.0);

/// sum_n |c_n|^2 F_nn — the stationary part the time average converges to
/// when the spectrum is nondegenerate.
double diagonal_average(const ModeExpansion& x, const ObservableMatrix& F);

/// Deterministic random toy: unit-norm complex coefficients, energies
/// uniform in [0, 1] redrawn until every pairwise gap reaches min_gap, and a
/// dense Hermitian observable.
struct ToySystem {
    ModeExpansion modes;
    ObservableMatrix F;
};
ToySystem random_toy_system(std::uint64_t seed, std::size_t n_modes = 5, double min_gap = 0.02);

/// Particle-attached observables for the two-slit state: F(y1,y2,t) =
/// Re(psi* F_hat psi / psi* psi).
enum class LocalObservable { position_y1, momentum_y1 };

struct LocalExpectationGrid {
    HistogramGrid grid;
    std::vector<double> values;       // at cell centers, row-major
    std::vector<std::uint8_t> masked; // 1 where the density is node-adjacent
    std::size_t masked_count = 0;
};

/// Local expectation value at every cell center of the grid; points with
/// density below node_eps times the peak are masked instead of evaluated.
LocalExpectationGrid local_expectation_grid(LocalObservable obs, double t,
                                            const PhysicalParams& params,
                                            const HistogramGrid& grid, double node_eps = 1e-12);

/// SQM expectation of the observable at time t: Re of the direct matrix
/// element by adaptive iterated quadrature. Throws quadrature_error if the
/// imaginary part of the matrix element is not negligible (< 1e-10).
double sqm_expectation(LocalObservable obs, double t, const PhysicalParams& params,
                       double quad_tol = 1e-8);

/// Full complex matrix element integral of conj(psi) F_hat psi: real part by
/// adaptive quadrature, imaginary part by a symmetric Gauss-Legendre sweep
/// (whose mirror points cancel exactly for these reflection-odd integrands).
cplx sqm_expectation_complex(LocalObservable obs, double t, const PhysicalParams& params,
                             double quad_tol = 1e-8);

/// Bohmian space average: per-cell Gauss-Legendre quadrature of density
/// times local expectation over the diagnostic grid, node points masked
/// (their density mass must stay below 1e-8 of the total). The grid is
/// refined x4 if the result disagrees with the direct expectation beyond
/// max(quad_tol, 1e-8).
double bohm_space_average(LocalObservable obs, double t, const PhysicalParams& params,
                          double quad_tol = 1e-8);

} // namespace pilotwave
