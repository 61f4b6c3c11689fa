#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fbstefan/errors.hpp"
#include "fbstefan/fronttrack.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fbstefan;
using testing_support::sample;
using testing_support::sp1_state;
using testing_support::step_state;

namespace {

const AdhesionModel& model85() {
    static const AdhesionModel m = AdhesionModel::from_alpha(0.85);
    return m;
}

const double pi = std::numbers::pi;

}  // namespace

TEST_CASE("one-sided gradient") {
    auto lin = sample(10, [](double x) { return 0.3 + 2.0 * x; });
    CHECK(one_sided_gradient(lin, End::Left) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(one_sided_gradient(lin, End::Right) == doctest::Approx(2.0).epsilon(1e-13));
    auto quad = sample(10, [](double x) { return 1.0 - 3.0 * x + 2.0 * x * x; });
    CHECK(one_sided_gradient(quad, End::Left) == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(one_sided_gradient(quad, End::Right) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 0.0;
    for (int n : {10, 20, 40, 80}) {
        auto cube = sample(n, [](double x) { return x * x * x; });
        const double err = std::abs(one_sided_gradient(cube, End::Right) - 3.0);
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
    }
    std::vector<double> tiny{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(one_sided_gradient(tiny, End::Left), DomainError);
}

TEST_CASE("phase rhs: uniform phase is a fixed point") {
    const auto& m = model85();
    PhaseGrid p{Branch::Low, std::vector<double>(41, 0.2)};
    for (auto st : {Stencil::RandomWalk, Stencil::CenteredK}) {
        for (double r : phase_rhs(p, {0.0, 0.0, true}, {1.0, 0.0, true}, m, st)) CHECK(r == 0.0);
        for (double r : phase_rhs(p, {0.0, 0.0, true}, {0.6, 0.0, false}, m, st)) CHECK(r == 0.0);
    }
    CHECK_THROWS_AS(phase_rhs(p, {0.5, 0.0, false}, {0.5, 0.0, false}, m), StructuralError);
}

TEST_CASE("phase rhs: random-walk stencil is a second-order approximation of K_xx") {
    const auto& m = model85();
    double prev = 0.0;
    for (int n : {50, 100, 200}) {
        PhaseGrid p{Branch::Low, sample(n, [](double x) { return 0.2 + 0.1 * x * x; })};
        const auto rw = phase_rhs(p, {0.0, 0.0, true}, {1.0, 0.0, true}, m, Stencil::RandomWalk);
        const auto ck = phase_rhs(p, {0.0, 0.0, true}, {1.0, 0.0, true}, m, Stencil::CenteredK);
        double worst = 0.0;
        for (int j = n / 4; j <= 3 * n / 4; ++j) worst = std::max(worst, std::abs(rw[j] - ck[j]));
        if (prev > 0.0) CHECK(prev / worst == doctest::Approx(4.0).epsilon(0.1));
        prev = worst;
    }
}

TEST_CASE("phase rhs: upwinding reproduces linear advection") {
    const auto& m = model85();
    const int n = 20;
    PhaseGrid p{Branch::Low, sample(n, [](double x) { return 0.3 - 0.1 * x; })};
    for (double sl : {0.7, -0.7}) {
        for (double sr : {0.4, -0.2}) {
            const PhaseBoundary left{0.2, sl, false}, right{0.7, sr, false};
            const auto with = phase_rhs(p, left, right, m);
            const auto without = phase_rhs(p, {0.2, 0.0, false}, {0.7, 0.0, false}, m);
            for (int j = 1; j < n; ++j) {
                const double x = static_cast<double>(j) / n;
                const double a = (sl + x * (sr - sl)) / 0.5;
                CHECK(with[j] - without[j] == doctest::Approx(a * -0.1).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("interface velocity") {
    const auto& m = model85();
    const auto steady = step_state(m, 0.4, 30);
    CHECK(interface_velocity(steady)[0] == 0.0);

    // Manufactured: slope g in x_hat on the low side only.
    const double g = 0.1, s = 0.5;
    auto low = sample(30, [&](double x) { return m.rho1() - g * (1.0 - x); });
    auto st = make_state(m, {s}, {PhaseGrid{Branch::Low, low},
                                 PhaseGrid{Branch::High, std::vector<double>(31, m.rho2())}});
    const double expect = m.diffusivity(m.rho1()) * g / s / m.jump();
    CHECK(interface_velocity(st)[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("front velocity agrees with the mass identity along a run") {
    const auto& m = model85();
    auto st = sp1_state(m, 0.5, 200, 0.05, -0.02);
    const double mass = st.mass0;
    StepControl ctl;
    std::vector<double> t, s_mass, vel;
    const double dt = 0.5 * stable_dt(st, ctl).dt;
    for (int k = 0; k < 400; ++k) {
        t.push_back(st.t);
        s_mass.push_back(front_from_mass(st, mass));
        vel.push_back(st.fronts.velocities[0]);
        st = advance(st, dt, ctl).state;
    }
    for (std::size_t k = 100; k + 1 < t.size(); k += 50) {
        const double fd = (s_mass[k + 1] - s_mass[k - 1]) / (t[k + 1] - t[k - 1]);
        CAPTURE(k);
        CHECK(std::abs(fd - vel[k]) < 0.02 * std::abs(vel[k]) + 1e-4);
    }
}

TEST_CASE("stable dt") {
    const auto& m = model85();
    StepControl ctl;
    ctl.dt_max = 1.0;
    ctl.dt_min = 1e-300;
    const auto a = step_state(m, 0.5, 40);
    const auto b = step_state(m, 0.25, 40);
    CHECK(stable_dt(b, ctl).dt == doctest::Approx(stable_dt(a, ctl).dt / 4).epsilon(1e-12));
    // No motion: only the diffusion limit applies.
    const double h = 1.0 / 40 * 0.5;
    const double bound = std::max(m.diffusivity(m.rho1()), 1.0 - 0.85 * m.rho1() * m.rho1());
    CHECK(stable_dt(a, ctl).raw == doctest::Approx(ctl.cfl_safety * h * h / (2 * bound)));
}

TEST_CASE("resolved run stays in band with bounded dt") {
    const auto& m = model85();
    auto st = sp1_state(m, 0.45, 100, 0.1, -0.03);
    StepControl ctl;
    while (st.t < 0.05) {
        const auto est = stable_dt(st, ctl);
        CHECK(est.dt >= 1e-9);
        CHECK(est.dt <= 1e-3);
        st = advance(st, est.dt, ctl).state;
        for (const auto& p : st.phases) {
            for (double v : p.values) CHECK_FALSE((v > m.rho_flat() && v < m.rho_sharp()));
        }
    }
}

TEST_CASE("exact step is a fixed point of the step") {
    const auto& m = model85();
    const auto st = step_state(m, 0.37, 50);
    const auto next = try_step(st, 1e-4, Stencil::RandomWalk);
    REQUIRE(next);
    CHECK(next->fronts.positions[0] == st.fronts.positions[0]);
    for (std::size_t i = 0; i < st.phases.size(); ++i) {
        for (std::size_t j = 0; j < st.phases[i].values.size(); ++j) {
            CHECK(std::abs(next->phases[i].values[j] - st.phases[i].values[j]) <= 1e-15);
        }
    }
}

namespace {

double drift_over(int n, double t_end) {
    const auto& m = model85();
    auto st = sp1_state(m, 0.5, n, 0.05, -0.02);
    StepControl ctl;
    while (st.t < t_end) {
        const double dt = std::min(stable_dt(st, ctl).dt, t_end - st.t);
        st = advance(st, dt, ctl).state;
    }
    return std::abs(total_mass(st) - st.mass0) / st.mass0;
}

}  // namespace

TEST_CASE("mass drift is small and shrinks under refinement") {
    const double coarse = drift_over(100, 0.1);
    const double fine = drift_over(200, 0.1);
    MESSAGE("relative drift N=100: " << coarse << ", N=200: " << fine);
    CHECK(fine < 1e-5);
    CHECK(fine < coarse);
}

TEST_CASE("mirror symmetry of the arrangement") {
    const auto& m = model85();
    auto a = sp1_state(m, 0.45, 60, 0.08, -0.03);
    std::vector<PhaseGrid> mirrored;
    for (auto it = a.phases.rbegin(); it != a.phases.rend(); ++it) {
        mirrored.push_back({it->kind, std::vector<double>(it->values.rbegin(), it->values.rend())});
    }
    auto b = make_state(m, {1.0 - 0.45}, mirrored);
    StepControl ctl;
    for (int k = 0; k < 300; ++k) {
        const double dt = stable_dt(a, ctl).dt;
        a = advance(a, dt, ctl).state;
        b = advance(b, dt, ctl).state;
    }
    CHECK(std::abs(a.fronts.positions[0] - (1.0 - b.fronts.positions[0])) < 1e-12);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& va = a.phases[i].values;
        const auto& vb = b.phases[1 - i].values;
        for (std::size_t j = 0; j < va.size(); ++j) CHECK(std::abs(va[j] - vb[va.size() - 1 - j]) < 1e-12);
    }
}

TEST_CASE("neumann step") {
    const auto& m = model85();
    std::vector<double> flat(51, 0.2);
    CHECK(neumann_step(flat, 1e-5, m, Branch::Low) == flat);

    const double mean = 0.2, amp = 1e-3;
    const int n = 100;
    auto v = sample(n, [&](double x) { return mean + amp * std::cos(pi * x); });
    auto trap = [](const std::vector<double>& u) {
        double s = 0.5 * (u.front() + u.back());
        for (std::size_t j = 1; j + 1 < u.size(); ++j) s += u[j];
        return s / static_cast<double>(u.size() - 1);
    };
    const double m0 = trap(v);
    const double h = 1.0 / n;
    const double dt = 0.4 * h * h / 2.0;
    std::vector<double> t, l2;
    for (int k = 0; k < 20000; ++k) {
        v = neumann_step(v, dt, m, Branch::Low);
        CHECK(std::abs(trap(v) - m0) < 1e-14);
        if (k % 500 == 0) {
            double s = 0;
            for (double x : v) s += (x - mean) * (x - mean);
            t.push_back((k + 1) * dt);
            l2.push_back(std::sqrt(s * h));
        }
    }
    const double rate = -oracle::log_slope(t, l2);
    const double expect = m.diffusivity(mean) * pi * pi;
    CHECK(rate == doctest::Approx(expect).epsilon(0.1));
    CHECK_THROWS_AS(neumann_step(std::vector<double>(11, 0.6), 1e-6, m, Branch::Low), DomainError);
}

TEST_CASE("compatibility check") {
    const auto& m = model85();
    const auto steady = check_compatibility(step_state(m, 0.5, 20));
    CHECK(steady.pass);
    CHECK(steady.fronts[0].residual_minus == 0.0);
    CHECK(steady.fronts[0].residual_plus == 0.0);

    // Kinked datum: sigma flat on the left, slope 1 in x on the right. The
    // high branch only reaches K(1), so the right phase is short.
    const double s = 0.997;
    auto high = sample(10, [&](double x) {
        return m.branch_inverse(m.sigma_bar() + (1.0 - s) * x, Branch::High);
    });
    const auto kinked = make_state(m, {s}, {PhaseGrid{Branch::Low, std::vector<double>(11, m.rho1())},
                                            PhaseGrid{Branch::High, high}});
    const auto rep = check_compatibility(kinked);
    CHECK_FALSE(rep.pass);
    CHECK(rep.fronts[0].residual_plus == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(rep.fronts[0].residual_minus) < 1e-12);

    // Matching slopes with zero curvature on both sides.
    auto low = sample(10, [&](double x) { return m.branch_inverse(m.sigma_bar() - 0.1 * s * (1 - x), Branch::Low); });
    auto high2 = sample(10, [&](double x) { return m.branch_inverse(m.sigma_bar() + 0.1 * (1 - s) * x, Branch::High); });
    const auto smooth = make_state(m, {s}, {PhaseGrid{Branch::Low, low}, PhaseGrid{Branch::High, high2}});
    const auto rs = check_compatibility(smooth);
    CHECK(std::abs(rs.fronts[0].residual_minus) < 1e-9);
    CHECK(std::abs(rs.fronts[0].residual_plus) < 1e-9);
}

TEST_CASE("total mass") {
    const auto& m = model85();
    const double s = 0.3141;
    CHECK(total_mass(step_state(m, s, 17)) ==
          doctest::Approx(m.rho1() * s + m.rho2() * (1 - s)).epsilon(1e-15));
    auto st = sp1_state(m, 0.6, 64, 0.05, -0.02);
    CHECK(front_from_mass(st, st.mass0) == doctest::Approx(0.6).epsilon(1e-14));
    // Quadrature error against the closed-form integral.
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        auto x = sp1_state(m, 0.6, n, 0.05, -0.02);
        const double exact = 0.6 * (m.rho1() + 0.05 * 2 / pi) + 0.4 * (m.rho2() - 0.02 * 2 / pi);
        const double err = std::abs(total_mass(x) - exact);
        if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("state validation") {
    const auto& m = model85();
    CHECK_THROWS_AS(make_state(m, {0.5}, {PhaseGrid{Branch::Low, std::vector<double>(11, 0.5)},
                                          PhaseGrid{Branch::High, std::vector<double>(11, 0.95)}}),
                    StructuralError);
    CHECK_THROWS_AS(make_state(m, {0.5, 0.5},
                               {PhaseGrid{Branch::Low, std::vector<double>(11, 0.2)},
                                PhaseGrid{Branch::High, std::vector<double>(11, 0.95)},
                                PhaseGrid{Branch::Low, std::vector<double>(11, 0.2)}}),
                    StructuralError);
    CHECK_THROWS_AS(make_state(m, {0.5}, {PhaseGrid{Branch::Low, std::vector<double>(11, 0.2)},
                                          PhaseGrid{Branch::Low, std::vector<double>(11, 0.2)}}),
                    StructuralError);
}

TEST_CASE("profile integral") {
    const auto& m = model85();
    auto st = sp1_state(m, 0.6, 32, 0.05, -0.02);
    CHECK(profile_integral(st, 0.0, 1.0) == doctest::Approx(total_mass(st)).epsilon(1e-14));
    CHECK(profile_integral(st, 0.0, 0.6) + profile_integral(st, 0.6, 1.0) ==
          doctest::Approx(total_mass(st)).epsilon(1e-14));
    const auto step = step_state(m, 0.5, 8);
    CHECK(profile_integral(step, 0.25, 0.75) == doctest::Approx(0.25 * (m.rho1() + m.rho2())));
}
