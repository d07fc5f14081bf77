#pragma once

#include "pilotwave/ensemble.hpp"

#include <functional>

namespace pilotwave {

/// Detection interval [lo, lo + width) on the y axis at the common detection
/// time. Half-open so disjoint windows partition counts exactly.
struct DetectorWindow {
    double lo = 0.0;
    double width = 0.0;

    double hi() const { return lo + width; }
    bool contains(double y) const { return y >= lo && y < hi(); }
    void validate() const {
        if (!(width > 0.0)) throw bad_value_error("window.width", "must be > 0");
    }
};

/// Binomial coincidence estimate from an arrival ensemble.
struct CoincidenceResult {
    std::uint64_t hits = 0;
    std::uint64_t n = 0;
    double p_hat = 0.0;
    double se = 0.0; // binomial standard error sqrt(p_hat (1 - p_hat) / n)
};

struct ComparisonVerdict {
    double sqm_p = 0.0;
    CoincidenceResult bm;
    double z = 0.0;
    bool agrees = false; // |z| <= 3 (or exact match when se = 0)
};

/// Probability that one particle lands in w1 and the other in w2 (unordered:
/// the mass of (w1 x w2) union (w2 x w1) under |psi(t0)|^2), by adaptive 2D
/// quadrature to absolute tolerance quad_tol.
double sqm_window_probability(const DetectorWindow& w1, const DetectorWindow& w2, double t0,
                              const PhysicalParams& params, double quad_tol = 1e-8);

/// Fraction of completed pairs with one member in w1 and the other in w2
/// (unordered, matching sqm_window_probability).
CoincidenceResult bm_coincidence_fraction(const ArrivalSet& arrivals, const DetectorWindow& w1,
                                          const DetectorWindow& w2);

/// Mean and standard error of a per-pair statistic.
struct PairAverage {
    double mean = 0.0;
    double se = 0.0;
    std::uint64_t n = 0;
};

/// Time-ensemble detection quantity for the antidiagonal preparation: the
/// mean over pairs of the joint density at (y1(t0), -y1(t0)). Stays strictly
/// below 1, unlike the claimed unit joint-detection probability it
/// operationalizes.
PairAverage ghose_p_star(const ArrivalSet& arrivals, const PhysicalParams& params);
/// Same average against a caller-supplied density (for linearity checks).
PairAverage ghose_p_star(const ArrivalSet& arrivals,
                         const std::function<double(double, double, double)>& density);

/// Single-particle marginal density m(y) = integral of |psi(y, y2, t)|^2
/// over y2, evaluated from the packet closed forms plus one overlap
/// quadrature.
double marginal_density(double y, double t, const PhysicalParams& params);

/// Two-sided Kolmogorov-Smirnov statistic between the pooled arrival
/// coordinates (y1 and y2 of every completed pair) and the model marginal
/// CDF at arrivals.t0.
double marginal_ks_statistic(const ArrivalSet& arrivals, const PhysicalParams& params);

/// KS critical value sqrt(-ln(alpha/2)/2) / sqrt(n) for a pooled sample of
/// size n (1.9495/sqrt(n) at alpha = 1e-3).
double ks_critical_value(std::size_t n_pooled, double alpha = 1e-3);

/// z-score of the Bohmian estimate against the quadrature probability;
/// agreement means |z| <= 3. With se = 0 the verdict is agreement only on an
/// exact match. Requires bm.n >= 100.
ComparisonVerdict compare(double sqm_p, const CoincidenceResult& bm);

} // namespace pilotwave
