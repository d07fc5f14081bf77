#pragma once

#include "pilotwave/errors.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pilotwave {

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) throw quadrature_error("adaptive Simpson: refinement depth exhausted");
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
/// Throws quadrature_error if the recursion depth is exhausted before the
/// local error estimate converges.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 52) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

/// Iterated 2D integral of f(x, y) over [x0,x1] x [y0,y1]: an adaptive outer
/// pass in x over adaptive inner integrals in y. Inner tolerance is scaled so
/// the inner error cannot dominate the requested total tolerance.
template <class F2>
double integrate_2d(F2&& f, double x0, double x1, double y0, double y1, double tol) {
    const double span = std::abs(x1 - x0);
    if (span == 0.0 || y0 == y1) return 0.0;
    const double inner_tol = tol / (8.0 * std::max(1.0, span));
    auto outer = [&](double x) {
        auto inner = [&](double y) { return f(x, y); };
        return adaptive_simpson(inner, y0, y1, inner_tol);
    };
    return adaptive_simpson(outer, x0, x1, 0.5 * tol);
}

/// 16-point Gauss-Legendre rule on [-1, 1] (positive half; the rule is
/// symmetric). Exact through polynomial degree 31.
struct GaussLegendre16 {
    static constexpr std::array<double, 8> x = {
        0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
        0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
    static constexpr std::array<double, 8> w = {
        0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
        0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

    template <class F>
    static double integrate(F&& f, double a, double b) {
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            sum += w[i] * (f(c + h * x[i]) + f(c - h * x[i]));
        }
        return h * sum;
    }

    /// Tensor-product rule over a rectangular cell.
    template <class F2>
    static double integrate_cell(F2&& f, double x0, double x1, double y0, double y1) {
        const double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
        const double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
        double sum = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            for (int si = -1; si <= 1; si += 2) {
                const double xx = cx + si * hx * x[i];
                double row = 0.0;
                for (std::size_t j = 0; j < 8; ++j) {
                    row += w[j] * (f(xx, cy + hy * x[j]) + f(xx, cy - hy * x[j]));
                }
                sum += w[i] * row;
            }
        }
        return hx * hy * sum;
    }
};

/// Tabulated CDF of a 1D density on [lo, hi]: per-interval Simpson cumulative
/// sums with linear interpolation between knots. Normalized so cdf(hi) = 1.
class CdfTable {
public:
    template <class F>
    CdfTable(F&& density, double lo, double hi, std::size_t n_knots) : lo_(lo), hi_(hi) {
        if (n_knots < 2) n_knots = 2;
        const double h = (hi - lo) / double(n_knots - 1);
        std::vector<double> f(n_knots);
        for (std::size_t i = 0; i < n_knots; ++i) f[i] = density(lo + h * double(i));
        cum_.resize(n_knots);
        cum_[0] = 0.0;
        for (std::size_t i = 0; i + 1 < n_knots; ++i) {
            const double fmid = density(lo + h * (double(i) + 0.5));
            cum_[i + 1] = cum_[i] + h / 6.0 * (f[i] + 4.0 * fmid + f[i + 1]);
        }
        total_ = cum_.back();
        if (!(total_ > 0.0)) throw quadrature_error("CdfTable: density integrates to zero");
    }

    double operator()(double y) const {
        if (y <= lo_) return 0.0;
        if (y >= hi_) return 1.0;
        const double h = (hi_ - lo_) / double(cum_.size() - 1);
        const double s = (y - lo_) / h;
        std::size_t i = std::size_t(s);
        if (i >= cum_.size() - 1) i = cum_.size() - 2;
        const double frac = s - double(i);
        return (cum_[i] + frac * (cum_[i + 1] - cum_[i])) / total_;
    }

    double total_mass() const { return total_; }

private:
    double lo_, hi_, total_;
    std::vector<double> cum_;
};

} // namespace pilotwave
