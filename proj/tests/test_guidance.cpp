#include "pilotwave/guidance.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pilotwave;

namespace {

IntegratorSettings default_settings() { return IntegratorSettings{}; }

} // namespace

TEST_SUITE("guidance") {

TEST_CASE("center-of-mass velocity follows the spreading law") {
    const PhysicalParams p; // hbar = m = sigma0 = 1
    CHECK(com_velocity({1.0, 1.0, 2.0}, p) == 0.25);
    CHECK(com_velocity({0.5, -0.5, 2.0}, p) == 0.0);  // com = 0 is a fixed point
    CHECK(com_velocity({1.0, 1.0, 0.0}, p) == 0.0);   // flow starts at rest
}

TEST_CASE("center-of-mass position grows like sqrt(1 + (alpha t)^2)") {
    const PhysicalParams p;
    CHECK(com_oracle(0.1, 2.0, p) ==
          doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(com_oracle(0.37, 0.0, p) == 0.37);
    CHECK(com_oracle(-0.1, 2.0, p) ==
          doctest::Approx(-0.1 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("mean pair velocity equals the closed-form center-of-mass velocity") {
    // The center of mass decouples from the relative coordinate for every
    // transverse wavenumber, not just stationary packets.
    for (double ky : {0.0, 0.5}) {
        PhysicalParams p;
        p.ky = ky;
        std::mt19937 gen(31);
        std::uniform_real_distribution<double> ypt(-9.0, 9.0);
        std::uniform_real_distribution<double> tpt(0.0, p.t0);
        for (int i = 0; i < 1000; ++i) {
            const double t = tpt(gen);
            const double drift = p.u_y() * t;
            const PhasePoint pt{drift + ypt(gen), -drift + ypt(gen), t};
            Velocities v;
            if (!try_velocity_field(cached_wavefunction(p), pt, v, 0.0)) continue;
            const double cv = com_velocity(pt, p);
            CHECK(std::abs(0.5 * (v.v1 + v.v2) - cv) <= 1e-8 * (1.0 + std::abs(cv)));
        }
    }
}

TEST_CASE("velocity field is exchange antisymmetric to the bit") {
    for (double ky : {0.0, 0.5}) {
        PhysicalParams p;
        p.ky = ky;
        std::mt19937 gen(41);
        std::uniform_real_distribution<double> ypt(-9.0, 9.0);
        std::uniform_real_distribution<double> tpt(0.0, p.t0);
        for (int i = 0; i < 300; ++i) {
            const double a = ypt(gen), b = ypt(gen), t = tpt(gen);
            const Velocities v = velocity_field({a, b, t}, p);
            const Velocities vx = velocity_field({b, a, t}, p);
            CHECK(v.v1 == vx.v2);
            CHECK(v.v2 == vx.v1);
            const Velocities vr = velocity_field({-a, -b, t}, p);
            CHECK(vr.v1 == -v.v1);
            CHECK(vr.v2 == -v.v2);
        }
    }
}

TEST_CASE("velocities on the antidiagonal cancel exactly") {
    const PhysicalParams p;
    std::mt19937 gen(43);
    std::uniform_real_distribution<double> ypt(-9.0, 9.0);
    std::uniform_real_distribution<double> tpt(0.0, p.t0);
    for (int i = 0; i < 300; ++i) {
        const double a = ypt(gen), t = tpt(gen);
        const Velocities v = velocity_field({a, -a, t}, p);
        CHECK(v.v1 + v.v2 == 0.0);
    }
}

TEST_CASE("velocity field refuses configuration-space nodes") {
    const PhysicalParams p;
    // Density underflows to an exact zero far outside the packets.
    CHECK_THROWS_AS(velocity_field({1000.0, -1000.0, 0.0}, p),
                    node_proximity_error);

    // Merged slits with transverse momentum put genuine node lines at
    // ky (y1 - y2) = pi/2 + k pi; a peak-relative floor must reject them.
    PhysicalParams merged;
    merged.Y = 0.0;
    merged.ky = 1.0;
    const TwoSlitWavefunction wf(merged);
    const double floor = 1e-12 * wf.density(0.0, 0.0, 0.0);
    REQUIRE(floor > 0.0);
    Velocities v;
    CHECK_FALSE(try_velocity_field(wf, {M_PI / 4.0, -M_PI / 4.0, 0.0}, v, floor));
    CHECK_THROWS_AS(velocity_field(wf, {M_PI / 4.0, -M_PI / 4.0, 0.0}, floor),
                    node_proximity_error);
    CHECK(try_velocity_field(wf, {0.3, 0.0, 0.0}, v, floor));
}

TEST_CASE("peak density table tracks the spreading packets") {
    const PhysicalParams p;
    const TwoSlitWavefunction wf(p);
    const PeakDensityTable table(wf, p.t0);
    const double d0 = wf.density(p.Y, -p.Y, 0.0);
    CHECK(table.peak(0.0) > 0.5 * d0);
    CHECK(table.peak(0.0) <= 1.001 * d0);
    // Spreading dilutes the peak monotonically for separated slits.
    CHECK(table.peak(p.t0) < table.peak(0.0));
    CHECK(table.peak(p.t0) > 0.0);
}

TEST_CASE("trajectory lands exactly on the requested final time") {
    const PhysicalParams p;
    const Trajectory traj = integrate_pair({6.0, -4.0, 0.0}, p.t0, default_settings(), p);
    REQUIRE(traj.status == TrajectoryStatus::completed);
    CHECK(traj.back().t == p.t0);
    CHECK(traj.samples.front().t == 0.0);
    CHECK(traj.samples.front().max_step_speed == 0.0);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].t > traj.samples[i - 1].t);
    }
}

TEST_CASE("zero-length integration returns the start point unchanged") {
    const PhysicalParams p;
    const Trajectory traj = integrate_pair({6.0, -4.0, 0.0}, 0.0, default_settings(), p);
    CHECK(traj.status == TrajectoryStatus::completed);
    CHECK(traj.samples.size() == 1);
    CHECK(traj.back().y1 == 6.0);
    CHECK(traj.back().y2 == -4.0);
}

TEST_CASE("trajectories preserve an antidiagonal start exactly") {
    const PhysicalParams p;
    const IntegratorSettings settings = default_settings();
    for (double a : {0.5, 3.0, 6.2}) {
        const Trajectory traj = integrate_pair({a, -a, 0.0}, p.t0, settings, p);
        REQUIRE(traj.status == TrajectoryStatus::completed);
        // Mirror-image velocities keep the sum a bitwise zero at every step...
        CHECK(traj.back().y1 + traj.back().y2 == 0.0);
        // ...which sits far inside the documented tolerance band.
        CHECK(std::abs(traj.back().y1 + traj.back().y2) <= 10.0 * settings.abs_tol);
    }
}

TEST_CASE("integrated center of mass matches the closed form") {
    for (double ky : {0.0, 0.5}) {
        PhysicalParams p;
        p.ky = ky;
        std::mt19937 gen(53);
        std::uniform_real_distribution<double> off(-2.5, 2.5);
        for (int i = 0; i < 50; ++i) {
            const PhasePoint start{p.Y + off(gen), -p.Y + off(gen), 0.0};
            const Trajectory traj = integrate_pair(start, p.t0, default_settings(), p);
            REQUIRE(traj.status == TrajectoryStatus::completed);
            const double want = com_oracle(start.com(), p.t0, p);
            const double got = traj.final_point().com();
            CHECK(std::abs(got - want) / (std::abs(start.com()) + p.sigma0) < 1e-6);
        }
    }
}

TEST_CASE("center of mass never crosses the axis") {
    const PhysicalParams p;
    std::mt19937 gen(59);
    std::uniform_real_distribution<double> off(-2.5, 2.5);
    int tested = 0;
    while (tested < 30) {
        const PhasePoint start{p.Y + off(gen), -p.Y + off(gen), 0.0};
        if (std::abs(start.com()) < 1e-4) continue;
        ++tested;
        const Trajectory traj = integrate_pair(start, p.t0, default_settings(), p);
        REQUIRE(traj.status == TrajectoryStatus::completed);
        const double sign = start.com() > 0.0 ? 1.0 : -1.0;
        double prev = std::abs(start.com());
        for (const auto& s : traj.samples) {
            const double c = 0.5 * (s.y1 + s.y2);
            CHECK(sign * c > 0.0);
            CHECK(std::abs(c) + 1e-7 >= prev);
            prev = std::abs(c);
        }
    }
}

TEST_CASE("each step moves no faster than its fastest stage evaluation") {
    PhysicalParams p;
    p.ky = 0.4;
    std::mt19937 gen(61);
    std::uniform_real_distribution<double> off(-2.5, 2.5);
    for (int i = 0; i < 20; ++i) {
        const PhasePoint start{p.Y + off(gen), -p.Y + off(gen), 0.0};
        const Trajectory traj = integrate_pair(start, p.t0, default_settings(), p);
        REQUIRE(traj.status == TrajectoryStatus::completed);
        for (std::size_t k = 1; k < traj.samples.size(); ++k) {
            const auto& a = traj.samples[k - 1];
            const auto& b = traj.samples[k];
            const double dt = b.t - a.t;
            const double bound = b.max_step_speed * dt * (1.0 + 1e-9) + 1e-12;
            CHECK(std::abs(b.y1 - a.y1) <= bound);
            CHECK(std::abs(b.y2 - a.y2) <= bound);
        }
    }
}

TEST_CASE("repeated integration is bitwise reproducible") {
    const PhysicalParams p;
    const PhasePoint start{4.2, -6.1, 0.0};
    const Trajectory a = integrate_pair(start, p.t0, default_settings(), p);
    const Trajectory b = integrate_pair(start, p.t0, default_settings(), p);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.error_budget == b.error_budget);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].t == b.samples[i].t);
        CHECK(a.samples[i].y1 == b.samples[i].y1);
        CHECK(a.samples[i].y2 == b.samples[i].y2);
        CHECK(a.samples[i].v1 == b.samples[i].v1);
        CHECK(a.samples[i].v2 == b.samples[i].v2);
    }
}

TEST_CASE("halving the tolerance moves the endpoint less than the error budget") {
    const PhysicalParams p;
    IntegratorSettings loose = default_settings();
    IntegratorSettings tight = loose;
    tight.rel_tol *= 0.5;
    tight.abs_tol *= 0.5;
    std::mt19937 gen(67);
    std::uniform_real_distribution<double> off(-2.5, 2.5);
    for (int i = 0; i < 10; ++i) {
        const PhasePoint start{p.Y + off(gen), -p.Y + off(gen), 0.0};
        const Trajectory a = integrate_pair(start, p.t0, loose, p);
        const Trajectory b = integrate_pair(start, p.t0, tight, p);
        REQUIRE(a.status == TrajectoryStatus::completed);
        REQUIRE(b.status == TrajectoryStatus::completed);
        CHECK(std::abs(a.back().y1 - b.back().y1) <= a.error_budget + 1e-12);
        CHECK(std::abs(a.back().y2 - b.back().y2) <= a.error_budget + 1e-12);
    }
}

TEST_CASE("restarting from a midpoint reproduces the direct flow") {
    PhysicalParams p;
    p.ky = 0.3;
    const IntegratorSettings settings = default_settings();
    const PhasePoint start{5.4, -3.7, 0.0};
    const Trajectory direct = integrate_pair(start, p.t0, settings, p);
    const Trajectory half = integrate_pair(start, 0.5 * p.t0, settings, p);
    REQUIRE(half.status == TrajectoryStatus::completed);
    const Trajectory rest = integrate_pair(half.final_point(), p.t0, settings, p);
    REQUIRE(rest.status == TrajectoryStatus::completed);
    CHECK(std::abs(rest.back().y1 - direct.back().y1) < 1e-6);
    CHECK(std::abs(rest.back().y2 - direct.back().y2) < 1e-6);
}

TEST_CASE("a step ceiling caps every accepted step") {
    const PhysicalParams p;
    IntegratorSettings settings = default_settings();
    settings.max_step = 0.05;
    const Trajectory traj = integrate_pair({6.0, -4.0, 0.0}, p.t0, settings, p);
    REQUIRE(traj.status == TrajectoryStatus::completed);
    CHECK(traj.samples.size() >= 200);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].t - traj.samples[i - 1].t <= 0.05 + 1e-12);
    }
}

TEST_CASE("a start on a node line aborts before moving") {
    PhysicalParams merged;
    merged.Y = 0.0;
    merged.ky = 1.0;
    const PhasePoint on_node{M_PI / 4.0, -M_PI / 4.0, 0.0};
    const Trajectory traj = integrate_pair(on_node, merged.t0, default_settings(), merged);
    CHECK(traj.status == TrajectoryStatus::node_adjacent_abort);
    CHECK(traj.samples.size() == 1);
    CHECK(traj.back().y1 == on_node.y1);
    CHECK(traj.back().t == 0.0);
}

TEST_CASE("integrator settings are validated before use") {
    const PhysicalParams p;
    const PhasePoint start{1.0, -2.0, 0.0};
    IntegratorSettings s = default_settings();
    s.rel_tol = 0.0;
    CHECK_THROWS_AS(integrate_pair(start, p.t0, s, p), bad_value_error);
    s = default_settings();
    s.abs_tol = -1.0;
    CHECK_THROWS_AS(integrate_pair(start, p.t0, s, p), bad_value_error);
    s = default_settings();
    s.max_step = 0.0;
    CHECK_THROWS_AS(integrate_pair(start, p.t0, s, p), bad_value_error);
    s = default_settings();
    s.node_eps = 0.0;
    CHECK_THROWS_AS(integrate_pair(start, p.t0, s, p), bad_value_error);
}

} // TEST_SUITE
