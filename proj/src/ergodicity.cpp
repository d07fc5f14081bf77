#include "pilotwave/ergodicity.hpp"

#include "pilotwave/quadrature.hpp"
#include "pilotwave/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pilotwave {

void ModeExpansion::validate() const {
    if (coeffs.empty() || coeffs.size() != energies.size()) {
        throw bad_value_error("modes", "coefficients and energies must match and be nonempty");
    }
    if (!(hbar > 0.0)) throw bad_value_error("modes.hbar", "must be > 0");
    double norm2 = 0.0;
    for (const cplx& c : coeffs) norm2 += std::norm(c);
    if (std::abs(norm2 - 1.0) > 1e-12) {
        throw bad_value_error("modes.coeffs", "squared norm must be 1 within 1e-12");
    }
    for (double e : energies) {
        if (!std::isfinite(e)) throw bad_value_error("modes.energies", "must be finite");
    }
}

double ModeExpansion::min_energy_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < energies.size(); ++i) {
        for (std::size_t j = i + 1; j < energies.size(); ++j) {
            gap = std::min(gap, std::abs(energies[i] - energies[j]));
        }
    }
    return energies.size() < 2 ? 0.0 : gap;
}

void ObservableMatrix::validate() const {
    if (n == 0 || elements.size() != n * n) {
        throw bad_value_error("observable", "matrix must be square and nonempty");
    }
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t k = m; k < n; ++k) {
            if (std::abs(at(m, k) - std::conj(at(k, m))) > 1e-12) {
                throw bad_value_error("observable", "matrix must be hermitian");
            }
        }
    }
}

double expectation_at_time(const ModeExpansion& x, const ObservableMatrix& F, double t) {
    x.validate();
    F.validate();
    if (F.n != x.coeffs.size()) throw bad_value_error("observable", "dimension mismatch");
    cplx sum = 0.0;
    for (std::size_t m = 0; m < F.n; ++m) {
        for (std::size_t k = 0; k < F.n; ++k) {
            const double omega = (x.energies[k] - x.energies[m]) / x.hbar;
            sum += std::conj(x.coeffs[m]) * x.coeffs[k] * F.at(m, k) *
                   std::polar(1.0, -omega * t);
        }
    }
    return sum.real();
}

double time_average(const ModeExpansion& x, const ObservableMatrix& F, double T,
                    std::size_t n_samples) {
    x.validate();
    F.validate();
    if (F.n != x.coeffs.size()) throw bad_value_error("observable", "dimension mismatch");
    if (!(T > 0.0)) throw bad_value_error("T", "must be > 0");
    if (n_samples < 100) throw bad_value_error("n_samples", "must be >= 100");

    // Collapse the double mode sum once: the expectation is
    //   diag + sum_{m<k} 2 [Re g_mk cos(w t) + Im g_mk sin(w t)],
    // g_mk = conj(c_m) c_k F_mk, w = (E_k - E_m)/hbar, so each time sample
    // costs one sin/cos per mode pair instead of a full matrix sweep.
    double diag = 0.0;
    struct Beat {
        double omega, re, im;
    };
    std::vector<Beat> beats;
    for (std::size_t m = 0; m < F.n; ++m) {
        diag += std::norm(x.coeffs[m]) * F.at(m, m).real();
        for (std::size_t k = m + 1; k < F.n; ++k) {
            const cplx g = std::conj(x.coeffs[m]) * x.coeffs[k] * F.at(m, k);
            beats.push_back({(x.energies[k] - x.energies[m]) / x.hbar, g.real(), g.imag()});
        }
    }

    const double h = T / double(n_samples);
    double acc = 0.0;
    for (std::size_t i = 0; i <= n_samples; ++i) {
        const double t = h * double(i);
        double f = 0.0;
        for (const Beat& b : beats) {
            f += 2.0 * (b.re * std::cos(b.omega * t) + b.im * std::sin(b.omega * t));
        }
        acc += (i == 0 || i == n_samples) ? 0.5 * f : f;
    }
    return diag + acc * h / T;
}

std::size_t suggested_time_samples(const ModeExpansion& x, double T, double points_per_radian) {
    double omega_max = 0.0;
    for (std::size_t m = 0; m < x.energies.size(); ++m) {
        for (std::size_t k = m + 1; k < x.energies.size(); ++k) {
            omega_max = std::max(omega_max, std::abs(x.energies[k] - x.energies[m]) / x.hbar);
        }
    }
    const double n = std::ceil(points_per_radian * omega_max * T);
    return std::max<std::size_t>(100, std::size_t(n));
}

double diagonal_average(const ModeExpansion& x, const ObservableMatrix& F) {
    x.validate();
    F.validate();
    if (F.n != x.coeffs.size()) throw bad_value_error("observable", "dimension mismatch");
    double sum = 0.0;
    for (std::size_t m = 0; m < F.n; ++m) sum += std::norm(x.coeffs[m]) * F.at(m, m).real();
    return sum;
}

ToySystem random_toy_system(std::uint64_t seed, std::size_t n_modes, double min_gap) {
    if (n_modes < 2) throw bad_value_error("n_modes", "must be >= 2");
    if (!(min_gap > 0.0 && min_gap < 1.0 / double(n_modes))) {
        throw bad_value_error("min_gap", "must lie in (0, 1/n_modes)");
    }
    PairStream rng(seed, 0);

    std::vector<double> energies(n_modes);
    for (int attempt = 0;; ++attempt) {
        if (attempt >= 10000) throw bad_value_error("min_gap", "cannot satisfy the gap");
        for (double& e : energies) e = rng.next_u01();
        std::vector<double> sorted = energies;
        std::sort(sorted.begin(), sorted.end());
        bool ok = true;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            if (sorted[i + 1] - sorted[i] < min_gap) ok = false;
        }
        if (ok) break;
    }

    std::vector<cplx> coeffs(n_modes);
    double norm2 = 0.0;
    for (cplx& c : coeffs) {
        const auto [re, im] = rng.next_normal_pair();
        c = cplx(re, im);
        norm2 += std::norm(c);
    }
    for (cplx& c : coeffs) c /= std::sqrt(norm2);

    ObservableMatrix F;
    F.n = n_modes;
    F.elements.assign(n_modes * n_modes, 0.0);
    for (std::size_t m = 0; m < n_modes; ++m) {
        for (std::size_t k = m; k < n_modes; ++k) {
            const auto [re, im] = rng.next_normal_pair();
            if (k == m) {
                F.elements[m * n_modes + m] = 0.5 * re;
            } else {
                const cplx v(0.5 * re, 0.5 * im);
                F.elements[m * n_modes + k] = v;
                F.elements[k * n_modes + m] = std::conj(v);
            }
        }
    }

    ToySystem toy{{std::move(coeffs), std::move(energies), 1.0}, std::move(F)};
    toy.modes.validate();
    toy.F.validate();
    return toy;
}

namespace {

// rho and (for momentum) the local value hbar Im(d1 psi / psi) at one point.
struct LocalEval {
    double rho;
    cplx psi_r, d1_r;
};

LocalEval eval_point(const TwoSlitWavefunction& wf, const TwoSlitWavefunction::Slice& s,
                     double y1, double y2) {
    LocalEval e;
    cplx d2;
    wf.eval_reduced(s, y1, y2, e.psi_r, e.d1_r, d2);
    e.rho = wf.density_from_reduced(s, e.psi_r);
    return e;
}

double density_peak(const TwoSlitWavefunction& wf, double t) {
    const PeakDensityTable table(wf, t, 2, 64);
    return table.peak(t);
}

struct GridRoute {
    double integral = 0.0;
    double masked_mass = 0.0;
    double total_mass = 0.0;
    std::size_t masked_points = 0;
};

GridRoute grid_route(const TwoSlitWavefunction& wf, const TwoSlitWavefunction::Slice& s,
                     LocalObservable obs, const HistogramGrid& grid, double floor) {
    const double hbar = wf.params().hbar;
    GridRoute r;
    const auto& gx = GaussLegendre16::x;
    const auto& gw = GaussLegendre16::w;
    for (std::size_t i1 = 0; i1 < grid.n; ++i1) {
        const double cx = 0.5 * (grid.edge(i1) + grid.edge(i1 + 1));
        const double hx = 0.5 * grid.bin_width();
        for (std::size_t i2 = 0; i2 < grid.n; ++i2) {
            const double cy = 0.5 * (grid.edge(i2) + grid.edge(i2 + 1));
            const double hy = 0.5 * grid.bin_width();
            for (std::size_t i = 0; i < 16; ++i) {
                const double wi = gw[i % 8];
                const double y1 = cx + hx * (i < 8 ? gx[i] : -gx[i - 8]);
                for (std::size_t j = 0; j < 16; ++j) {
                    const double wj = gw[j % 8];
                    const double y2 = cy + hy * (j < 8 ? gx[j] : -gx[j - 8]);
                    const double weight = wi * wj * hx * hy;
                    const LocalEval e = eval_point(wf, s, y1, y2);
                    r.total_mass += weight * e.rho;
                    if (e.rho < floor) {
                        r.masked_mass += weight * e.rho;
                        ++r.masked_points;
                        continue;
                    }
                    const double local = (obs == LocalObservable::position_y1)
                                             ? y1
                                             : hbar * std::imag(e.d1_r / e.psi_r);
                    r.integral += weight * e.rho * local;
                }
            }
        }
    }
    return r;
}

// Complex integrand of conj(psi) F_hat psi expressed through the reduced
// amplitudes (the prefactors collapse into density_scale).
cplx matrix_element_integrand(const TwoSlitWavefunction& wf, const TwoSlitWavefunction::Slice& s,
                              LocalObservable obs, double y1, double y2) {
    const LocalEval e = eval_point(wf, s, y1, y2);
    if (obs == LocalObservable::position_y1) return cplx(y1 * e.rho, 0.0);
    const double scale = wf.params().hbar * s.density_scale;
    const cplx prod = std::conj(e.psi_r) * e.d1_r;
    // conj(psi) (-i hbar d1 psi) = hbar density_scale (Im prod - i Re prod)
    return scale * cplx(prod.imag(), -prod.real());
}

} // namespace

LocalExpectationGrid local_expectation_grid(LocalObservable obs, double t,
                                            const PhysicalParams& params,
                                            const HistogramGrid& grid, double node_eps) {
    if (!(t >= 0.0)) throw bad_value_error("t", "must be >= 0");
    if (!(node_eps > 0.0)) throw bad_value_error("node_eps", "must be > 0");
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const auto s = wf.slice(t);
    const double floor = node_eps * density_peak(wf, t);

    LocalExpectationGrid out;
    out.grid = grid;
    out.values.assign(grid.n_bins(), 0.0);
    out.masked.assign(grid.n_bins(), 0);
    for (std::size_t i1 = 0; i1 < grid.n; ++i1) {
        const double y1 = grid.edge(i1) + 0.5 * grid.bin_width();
        for (std::size_t i2 = 0; i2 < grid.n; ++i2) {
            const double y2 = grid.edge(i2) + 0.5 * grid.bin_width();
            const LocalEval e = eval_point(wf, s, y1, y2);
            const std::size_t k = i1 * grid.n + i2;
            if (e.rho < floor) {
                out.masked[k] = 1;
                ++out.masked_count;
                continue;
            }
            out.values[k] = (obs == LocalObservable::position_y1)
                                ? y1
                                : params.hbar * std::imag(e.d1_r / e.psi_r);
        }
    }
    return out;
}

cplx sqm_expectation_complex(LocalObservable obs, double t, const PhysicalParams& params,
                             double quad_tol) {
    if (!(t >= 0.0)) throw bad_value_error("t", "must be >= 0");
    if (!(quad_tol > 0.0)) throw bad_value_error("quad_tol", "must be > 0");
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const auto s = wf.slice(t);
    const double reach =
        params.Y + std::abs(params.u_y()) * t + 8.0 * std::abs(wf.sigma_t(t));

    const double re = integrate_2d(
        [&](double y1, double y2) {
            return matrix_element_integrand(wf, s, obs, y1, y2).real();
        },
        -reach, reach, -reach, reach, quad_tol);

    // The imaginary part integrates to zero by hermiticity; a symmetric
    // Gauss-Legendre sweep makes the mirror-point cancellation explicit
    // instead of asking an adaptive rule for a tiny absolute answer.
    double im = 0.0;
    if (obs == LocalObservable::momentum_y1) {
        const HistogramGrid g{-reach, reach, 128};
        for (std::size_t i1 = 0; i1 < g.n; ++i1) {
            for (std::size_t i2 = 0; i2 < g.n; ++i2) {
                im += GaussLegendre16::integrate_cell(
                    [&](double y1, double y2) {
                        return matrix_element_integrand(wf, s, obs, y1, y2).imag();
                    },
                    g.edge(i1), g.edge(i1 + 1), g.edge(i2), g.edge(i2 + 1));
            }
        }
    }
    return {re, im};
}

double sqm_expectation(LocalObservable obs, double t, const PhysicalParams& params,
                       double quad_tol) {
    const cplx v = sqm_expectation_complex(obs, t, params, quad_tol);
    if (std::abs(v.imag()) >= 1e-10) {
        throw quadrature_error("expectation matrix element has a non-negligible imaginary part");
    }
    return v.real();
}

double bohm_space_average(LocalObservable obs, double t, const PhysicalParams& params,
                          double quad_tol) {
    if (!(t >= 0.0)) throw bad_value_error("t", "must be >= 0");
    if (!(quad_tol > 0.0)) throw bad_value_error("quad_tol", "must be > 0");
    const TwoSlitWavefunction& wf = cached_wavefunction(params);
    const auto s = wf.slice(t);
    const double floor = 1e-12 * density_peak(wf, t);

    auto run = [&](std::size_t n) {
        const GridRoute r = grid_route(wf, s, obs, diagnostic_grid(params, t, n), floor);
        if (r.masked_mass > 1e-8 * r.total_mass) {
            throw quadrature_error("node-masked density mass exceeds 1e-8 of the total");
        }
        return r.integral;
    };

    const double coarse = run(64);
    const double direct = sqm_expectation(obs, t, params, quad_tol);
    if (std::abs(coarse - direct) <= std::max(quad_tol, 1e-8)) return coarse;
    return run(256);
}

} // namespace pilotwave
