#include "pilotwave/ensemble.hpp"

#include "fixtures.hpp"
#include "pilotwave/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace pilotwave;

TEST_SUITE("ensemble") {

TEST_CASE("equilibrium sample reproduces the marginal moments") {
    const auto& pts = fixtures::equilibrium_points();
    const double n = double(pts.size());
    REQUIRE(pts.size() == fixtures::kFixtureN);

    double mean1 = 0.0, mean_com = 0.0;
    for (const auto& p : pts) {
        mean1 += p.y1;
        mean_com += p.com();
    }
    mean1 /= n;
    mean_com /= n;

    double var1 = 0.0;
    for (const auto& p : pts) var1 += (p.y1 - mean1) * (p.y1 - mean1);
    var1 /= n - 1.0;
    const double sd1 = std::sqrt(var1);

    const auto& par = fixtures::params();
    // y1 is a half/half mixture of Gaussians at +-Y, so its variance is
    // Y^2 + sigma0^2 and the sampling error of the sd needs the mixture's
    // fourth moment, not the normal-theory shortcut.
    const double var_true = par.Y * par.Y + par.sigma0 * par.sigma0;
    const double sd_true = std::sqrt(var_true);
    const double mu4 = std::pow(par.Y, 4.0) + 6.0 * par.Y * par.Y * par.sigma0 * par.sigma0 +
                       3.0 * std::pow(par.sigma0, 4.0);
    const double se_sd = std::sqrt((mu4 - var_true * var_true) / n) / (2.0 * sd_true);
    CHECK(std::abs(sd1 - sd_true) < 4.0 * se_sd);

    // The center of mass is exactly Gaussian with spread sigma0/sqrt(2).
    const double com_sd = par.sigma0 / std::sqrt(2.0);
    CHECK(std::abs(mean_com) < 4.0 * com_sd / std::sqrt(n));
    const double spread = com_spread(pts);
    const double se_spread = com_sd / std::sqrt(2.0 * (n - 1.0));
    CHECK(std::abs(spread - com_sd) < 4.0 * se_spread);
}

TEST_CASE("equilibrium sample matches the joint density bin by bin") {
    const auto& pts = fixtures::equilibrium_points();
    const auto& par = fixtures::params();
    const HistogramGrid grid = diagnostic_grid(par, 0.0);
    const Histogram2D hist = histogram_counts(pts, grid);
    const auto model = model_bin_probabilities(cached_wavefunction(par), 0.0, grid);
    const double tv = tv_distance(hist, model);
    CHECK(tv < mc_tv_bound(pts.size(), grid.n_bins()));
}

TEST_CASE("histogram mismatch shrinks like one over sqrt(n)") {
    const auto& par = fixtures::params();
    EnsembleConfig small = fixtures::equilibrium_config();
    small.n_pairs = fixtures::kFixtureN / 4;
    small.master_seed = 2; // independent of the big fixture draw
    const auto small_pts = sample_equilibrium(small, par);

    const HistogramGrid grid = diagnostic_grid(par, 0.0);
    const auto model = model_bin_probabilities(cached_wavefunction(par), 0.0, grid);
    const double tv_small = tv_distance(histogram_counts(small_pts, grid), model);
    const double tv_big =
        tv_distance(histogram_counts(fixtures::equilibrium_points(), grid), model);
    CHECK(tv_small / tv_big > 1.7);
    CHECK(tv_small / tv_big < 2.3);
}

TEST_CASE("constrained sample sits exactly on the antidiagonal") {
    const auto& pts = fixtures::constrained_points();
    REQUIRE(pts.size() == fixtures::kFixtureN);
    for (const auto& p : pts) CHECK(p.y1 + p.y2 == 0.0);
    CHECK(com_spread(pts) == 0.0);
}

TEST_CASE("constrained sample follows the antidiagonal line density") {
    const auto& pts = fixtures::constrained_points();
    const auto& par = fixtures::params();
    const double reach = par.Y + 6.0 * par.sigma0;
    const std::size_t nbins = 64;
    const double w = 2.0 * reach / double(nbins);

    std::vector<std::uint64_t> counts(nbins, 0);
    std::uint64_t inside = 0;
    for (const auto& p : pts) {
        const double s = (p.y1 + reach) / w;
        if (s < 0.0 || s >= double(nbins)) continue;
        ++counts[std::size_t(s)];
        ++inside;
    }
    REQUIRE(inside == pts.size()); // the slit line density has no 6-sigma tail mass

    auto line_density = [&](double y) { return joint_density(y, -y, 0.0, par); };
    const double mass = adaptive_simpson(line_density, -reach, reach, 1e-12);
    double tv = 0.0;
    for (std::size_t k = 0; k < nbins; ++k) {
        const double lo = -reach + w * double(k);
        const double model = adaptive_simpson(line_density, lo, lo + w, 1e-12) / mass;
        tv += std::abs(double(counts[k]) / double(inside) - model);
    }
    tv *= 0.5;
    CHECK(tv < mc_tv_bound(pts.size(), nbins));
}

TEST_CASE("constrained sample is far from equilibrium on the joint grid") {
    const auto& par = fixtures::params();
    EnsembleConfig cfg = fixtures::constrained_config();
    cfg.n_pairs = 2 * fixtures::kFixtureN;
    const auto pts = sample_constrained(cfg, par);
    const HistogramGrid grid = diagnostic_grid(par, 0.0);
    const auto model = model_bin_probabilities(cached_wavefunction(par), 0.0, grid);
    const double tv = tv_distance(histogram_counts(pts, grid), model);
    CHECK(tv > mc_tv_bound(pts.size(), grid.n_bins()));
}

TEST_CASE("sampling is reproducible and seed-sensitive") {
    const auto& par = fixtures::params();
    EnsembleConfig cfg = fixtures::equilibrium_config();
    cfg.n_pairs = 512;
    const auto a = sample_equilibrium(cfg, par);
    const auto b = sample_equilibrium(cfg, par);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].y1 == b[i].y1);
        CHECK(a[i].y2 == b[i].y2);
    }
    cfg.master_seed = 99;
    const auto c = sample_equilibrium(cfg, par);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].y1 == c[i].y1) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("a sampler only serves its own constraint") {
    const auto& par = fixtures::params();
    CHECK_THROWS_AS(sample_equilibrium(fixtures::constrained_config(), par), bad_value_error);
    CHECK_THROWS_AS(sample_constrained(fixtures::equilibrium_config(), par), bad_value_error);
    EnsembleConfig zero;
    zero.n_pairs = 0;
    CHECK_THROWS_AS(sample_initial(zero, par), bad_value_error);
}

TEST_CASE("evolved equilibrium ensemble still matches the evolved density") {
    const auto& par = fixtures::params();
    const auto& arrivals = fixtures::equilibrium_arrivals();
    REQUIRE(arrivals.aborted_count == 0);
    CHECK(equivariance_distance(arrivals, par) <
          mc_tv_bound(arrivals.points.size(), diagnostic_grid(par, arrivals.t0).n_bins()));

    // Equivariance is not a detection-time accident; it holds mid-flight too.
    const ArrivalSet half =
        evolve_ensemble(fixtures::equilibrium_points(), 0.5 * par.t0, IntegratorSettings{},
                        fixtures::equilibrium_config(), par);
    REQUIRE(half.aborted_count == 0);
    CHECK(equivariance_distance(half, par) <
          mc_tv_bound(half.points.size(), diagnostic_grid(par, half.t0).n_bins()));
}

TEST_CASE("stopping halfway and restarting reproduces the direct evolution") {
    const auto& par = fixtures::params();
    const IntegratorSettings settings;
    const std::vector<PhasePoint> starts(fixtures::equilibrium_points().begin(),
                                         fixtures::equilibrium_points().begin() + 500);
    const ArrivalSet direct =
        evolve_ensemble(starts, par.t0, settings, fixtures::equilibrium_config(), par);
    const ArrivalSet half =
        evolve_ensemble(starts, 0.5 * par.t0, settings, fixtures::equilibrium_config(), par);
    REQUIRE(half.aborted_count == 0);
    const ArrivalSet rest =
        evolve_ensemble(half.points, par.t0, settings, fixtures::equilibrium_config(), par);
    REQUIRE(rest.aborted_count == 0);
    // Three integrations at the default tolerances stack their error
    // budgets (a few 1e-7 each), so the worst pair can reach a few 1e-6.
    for (std::size_t i = 0; i < starts.size(); ++i) {
        CHECK(std::abs(rest.points[i].y1 - direct.points[i].y1) < 1e-5);
        CHECK(std::abs(rest.points[i].y2 - direct.points[i].y2) < 1e-5);
    }
}

TEST_CASE("arrival records preserve pair identity and status") {
    const auto& arrivals = fixtures::equilibrium_arrivals();
    const auto& pts = fixtures::equilibrium_points();
    REQUIRE(arrivals.records.size() == pts.size());
    CHECK(arrivals.n_total() == pts.size());
    CHECK(arrivals.abort_fraction() == 0.0);
    CHECK(arrivals.t0 == fixtures::params().t0);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(arrivals.records[i].pair_id == i);
        CHECK(arrivals.records[i].y1_0 == pts[i].y1);
        CHECK(arrivals.records[i].y2_0 == pts[i].y2);
        CHECK(arrivals.records[i].status == TrajectoryStatus::completed);
        CHECK(arrivals.points[i].y1 == arrivals.records[i].y1_t);
    }
}

TEST_CASE("node-ridden ensembles abort loudly past the failure threshold") {
    PhysicalParams merged;
    merged.Y = 0.0;
    merged.ky = 1.0;
    EnsembleConfig cfg;
    cfg.n_pairs = 1;

    // Diagonal starts ride the antinode ridge and never meet a node line.
    std::vector<PhasePoint> pts;
    for (int i = 0; i < 1500; ++i) {
        pts.push_back({-2.0 + 4.0 * double(i) / 1500.0, -2.0 + 4.0 * double(i) / 1500.0, 0.0});
    }
    // One start on the node line ky (y1 - y2) = pi/2 stays under the 1e-3
    // abort threshold...
    pts.push_back({M_PI / 4.0, -M_PI / 4.0, 0.0});
    const ArrivalSet one =
        evolve_ensemble(pts, merged.t0, IntegratorSettings{}, cfg, merged);
    CHECK(one.aborted_count == 1);
    CHECK(one.points.size() == 1500);
    CHECK(one.records[1500].status == TrajectoryStatus::node_adjacent_abort);

    // ...a second crosses it.
    pts.push_back({3.0 * M_PI / 4.0, -3.0 * M_PI / 4.0, 0.0});
    CHECK_THROWS_AS(evolve_ensemble(pts, merged.t0, IntegratorSettings{}, cfg, merged),
                    abort_fraction_error);
}

TEST_CASE("evolution rejects malformed inputs") {
    const auto& par = fixtures::params();
    const EnsembleConfig cfg = fixtures::equilibrium_config();
    const IntegratorSettings settings;
    CHECK_THROWS_AS(evolve_ensemble({}, par.t0, settings, cfg, par), bad_value_error);
    CHECK_THROWS_AS(
        evolve_ensemble({{5.0, -5.0, 0.0}, {5.0, -5.0, 1.0}}, par.t0, settings, cfg, par),
        bad_value_error);
    CHECK_THROWS_AS(evolve_ensemble({{5.0, -5.0, 2.0}}, 2.0, settings, cfg, par),
                    bad_value_error);
    CHECK_THROWS_AS(evolve_ensemble({{5.0, -5.0, 2.0}}, 1.0, settings, cfg, par),
                    bad_value_error);
}

TEST_CASE("histogram bins by cell and lumps strays into overflow") {
    HistogramGrid grid{0.0, 2.0, 2};
    CHECK(grid.bin_width() == 1.0);
    CHECK(grid.n_bins() == 4);
    CHECK(grid.index(0.0) == 0);
    CHECK(grid.index(1.999) == 1);
    CHECK(grid.index(2.0) == 2);   // right edge is exclusive
    CHECK(grid.index(-0.001) == 2);

    const std::vector<PhasePoint> pts = {
        {0.5, 0.5, 0.0},  // cell (0, 0)
        {1.5, 0.1, 0.0},  // cell (1, 0)
        {1.5, 0.1, 0.0},  // cell (1, 0) again
        {-1.0, 0.5, 0.0}, // y1 underflows
        {0.5, 2.0, 0.0},  // y2 on the open edge
    };
    const Histogram2D h = histogram_counts(pts, grid);
    CHECK(h.total == 5);
    CHECK(h.overflow == 2);
    CHECK(h.counts[0] == 1);
    CHECK(h.counts[1] == 0);
    CHECK(h.counts[2] == 2);
    CHECK(h.counts[3] == 0);
}

TEST_CASE("hand-sized histogram distances come out exact") {
    HistogramGrid grid{0.0, 2.0, 2};
    Histogram2D h;
    h.grid = grid;
    h.counts = {2, 0, 1, 1};
    h.overflow = 0;
    h.total = 4;
    // Model puts 1/4 in every cell: TV = 0.5 * (|.5-.25| + .25 + 0 + 0 + 0).
    const std::vector<double> model = {0.25, 0.25, 0.25, 0.25};
    CHECK(tv_distance(h, model) == doctest::Approx(0.25).epsilon(1e-15));
    // Short model mass flows into the overflow comparison.
    const std::vector<double> short_model = {0.25, 0.25, 0.25, 0.0};
    CHECK(tv_distance(h, short_model) ==
          doctest::Approx(0.5 * (0.25 + 0.25 + 0.0 + 0.25 + 0.25)).epsilon(1e-15));

    Histogram2D empty;
    empty.grid = grid;
    empty.counts = {0, 0, 0, 0};
    CHECK_THROWS_AS(tv_distance(empty, model), bad_value_error);
    Histogram2D mismatched = h;
    CHECK_THROWS_AS(tv_distance(mismatched, std::vector<double>{1.0}), bad_value_error);
}

TEST_CASE("model bin probabilities capture the full mass") {
    const auto& par = fixtures::params();
    const auto& wf = cached_wavefunction(par);
    for (double t : {0.0, par.t0}) {
        const HistogramGrid grid = diagnostic_grid(par, t);
        const auto probs = model_bin_probabilities(wf, t, grid);
        REQUIRE(probs.size() == grid.n_bins());
        double mass = 0.0;
        for (double p : probs) {
            CHECK(p >= 0.0);
            mass += p;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("diagnostic grid widens with the spreading packets") {
    const auto& par = fixtures::params();
    const HistogramGrid g0 = diagnostic_grid(par, 0.0);
    CHECK(g0.n == 64);
    CHECK(g0.lo == doctest::Approx(-11.0).epsilon(1e-12));
    CHECK(g0.hi == doctest::Approx(11.0).epsilon(1e-12));
    const HistogramGrid gt = diagnostic_grid(par, par.t0);
    const double reach = par.Y + 6.0 * std::sqrt(26.0);
    CHECK(gt.hi == doctest::Approx(reach).epsilon(1e-12));

    PhysicalParams drifting = par;
    drifting.ky = 0.5;
    const HistogramGrid gd = diagnostic_grid(drifting, drifting.t0);
    CHECK(gd.hi == doctest::Approx(reach + 0.5 * drifting.t0).epsilon(1e-12));
}

TEST_CASE("monte carlo band matches its closed form") {
    CHECK(mc_tv_bound(100000, 4096) == doctest::Approx(0.4045).epsilon(1e-3));
    CHECK(mc_tv_bound(100, 4, 3.0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS_AS(mc_tv_bound(0, 4096), bad_value_error);
}

TEST_CASE("spread statistics need at least two points") {
    CHECK_THROWS_AS(com_spread({}), bad_value_error);
    CHECK_THROWS_AS(com_spread({{1.0, 2.0, 0.0}}), bad_value_error);
    CHECK(com_spread({{1.0, 1.0, 0.0}, {3.0, 3.0, 0.0}}) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

} // TEST_SUITE
