#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fbstefan/analysis.hpp"
#include "fbstefan/events.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fbstefan;
using testing_support::sample;
using testing_support::sp1_state;

namespace {

const AdhesionModel& model85() {
    static const AdhesionModel m = AdhesionModel::from_alpha(0.85);
    return m;
}

const double pi = std::numbers::pi;

}  // namespace

TEST_CASE("discontinuous steady state") {
    const auto& m = model85();
    auto mid = discontinuous_steady_state(0.5 * (m.rho1() + m.rho2()), m);
    REQUIRE(mid);
    CHECK(mid->s_star == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mid->rho_left == m.rho1());
    CHECK(mid->rho_right == m.rho2());

    auto near_high = discontinuous_steady_state(m.rho2() - 1e-9, m);
    auto near_low = discontinuous_steady_state(m.rho1() + 1e-9, m);
    REQUIRE(near_high);
    REQUIRE(near_low);
    CHECK(near_high->s_star > 0.0);
    CHECK(near_high->s_star < 1e-8);
    CHECK(near_low->s_star < 1.0);
    CHECK(near_low->s_star > 1.0 - 1e-8);

    CHECK_FALSE(discontinuous_steady_state(m.rho2() + 0.01, m));
    CHECK_FALSE(discontinuous_steady_state(m.rho1() - 0.01, m));
}

TEST_CASE("steady step is a projection through total mass") {
    const auto& m = model85();
    for (double mass : {0.25, 0.4, 0.6, 0.9}) {
        auto step = discontinuous_steady_state(mass, m);
        REQUIRE(step);
        auto state = steady_step_state(m, step->s_star, 64);
        auto again = discontinuous_steady_state(total_mass(state), m);
        REQUIRE(again);
        CHECK(again->s_star == doctest::Approx(step->s_star).epsilon(1e-14));
    }
}

TEST_CASE("uniform steady state") {
    const auto& m = model85();
    auto [flat, sharp] = oracle::interval(0.85L);
    CHECK(uniform_steady_state(m.rho_flat(), m));
    CHECK(uniform_steady_state(m.rho_sharp(), m));
    CHECK_FALSE(uniform_steady_state(0.5 * (m.rho_flat() + m.rho_sharp()), m));
    // 0.95 lies above the upper edge of the unstable interval
    CHECK(0.95 > static_cast<double>(sharp));
    auto u = uniform_steady_state(0.95, m);
    REQUIRE(u);
    CHECK(*u == 0.95);
    CHECK(static_cast<double>(flat) < 0.44);
}

TEST_CASE("front bounds") {
    const auto& m = model85();
    auto [flat, sharp] = oracle::interval(0.85L);
    auto b = front_bounds(0.6, m);
    CHECK(b.in_regime);
    CHECK(b.s_min == doctest::Approx(static_cast<double>((sharp - 0.6L) / sharp)).epsilon(1e-13));
    CHECK(b.s_max == doctest::Approx(static_cast<double>((1 - 0.6L) / (1 - flat))).epsilon(1e-13));
    CHECK(b.s_min == doctest::Approx(0.3299).epsilon(2e-4));
    CHECK(b.s_max == doctest::Approx(0.7117).epsilon(2e-4));

    CHECK(front_bounds(m.rho_sharp(), m).s_min == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(front_bounds(1.0, m).s_max == 0.0);
    CHECK_FALSE(front_bounds(0.3, m).in_regime);
}

TEST_CASE("regime classification") {
    const auto& m = model85();
    const RegimePredicates yes{};
    const RegimePredicates no{false, false};

    auto i = classify_regime(0.6, yes, m);
    CHECK(i.tag == Regime::Thm21_i);
    REQUIRE(i.attractors.size() == 1);
    CHECK(i.attractors[0].kind == Attractor::Kind::Discontinuous);
    CHECK(i.attractors[0].value == doctest::Approx((m.rho2() - 0.6) / m.jump()));
    CHECK(i.bounds);

    auto iii = classify_regime(0.1, yes, m);
    CHECK(iii.tag == Regime::Thm21_iii);
    CHECK(iii.finite_time_hit);
    REQUIRE(iii.wall);
    CHECK(*iii.wall == End::Right);
    CHECK(iii.attractors.at(0).kind == Attractor::Kind::Uniform);
    CHECK(*classify_regime(0.99, yes, m).wall == End::Left);

    CHECK(classify_regime(m.rho1(), yes, m).tag == Regime::Thm21_iv);
    CHECK(classify_regime(m.rho2(), yes, m).tag == Regime::Thm21_iv);

    CHECK(classify_regime(0.3184, yes, m).tag == Regime::Thm21_ii);
    auto u1 = classify_regime(0.3184, no, m);
    CHECK(u1.tag == Regime::Uncovered1);
    CHECK(u1.attractors.size() == 2);
    auto u2 = classify_regime(0.92, no, m);
    CHECK(u2.tag == Regime::Uncovered2);
    CHECK(u2.attractors.size() == 2);
    CHECK(classify_regime(0.92, yes, m).tag == Regime::Thm21_ii);
}

TEST_CASE("regime tag is consistent along the mass axis") {
    const auto& m = model85();
    const RegimePredicates no{false, false};
    for (int k = 1; k < 1000; ++k) {
        const double mass = k / 1000.0;
        const auto tag = classify_regime(mass, no, m).tag;
        if (mass < m.rho1() || mass > m.rho2()) {
            CHECK(tag == Regime::Thm21_iii);
        } else if (mass <= m.rho_flat()) {
            CHECK(tag == Regime::Uncovered1);
        } else if (mass < m.rho_sharp()) {
            CHECK(tag == Regime::Thm21_i);
        } else {
            CHECK(tag == Regime::Uncovered2);
        }
    }
}

TEST_CASE("regime predicates from a state") {
    const auto& m = model85();
    auto st = sp1_state(m, 0.86, 40, 0.02, 0.0);
    auto p = regime_predicates(st);
    CHECK(p.low_phase_below_mass);
    CHECK(p.high_phase_above_mass);
    auto far = sp1_state(m, 0.9, 40, 0.2, 0.0);
    CHECK_FALSE(regime_predicates(far).low_phase_below_mass);
}

TEST_CASE("exponential tail fit") {
    std::vector<double> t, y;
    for (int k = 0; k <= 100; ++k) {
        t.push_back(0.01 * k);
        y.push_back(std::exp(-3.0 * t.back()));
    }
    auto f = fit_exponential_tail(t, y);
    REQUIRE(f.fitted);
    CHECK(f.rate == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(f.r_squared > 0.999999);
    CHECK(f.tail_size >= 50);

    // a dip in the second half is cut out of the window
    y[80] = y[81] * 0.5;
    auto g = fit_exponential_tail(t, y);
    REQUIRE(g.fitted);
    CHECK(g.tail_begin > 80);
    CHECK(g.rate == doctest::Approx(3.0).epsilon(1e-6));

    std::vector<double> flat(30, 1.0), ts(30);
    for (int k = 0; k < 30; ++k) ts[k] = k;
    CHECK_FALSE(fit_exponential_tail(ts, flat).fitted);
}

TEST_CASE("sigma sup gradient") {
    const auto& m = model85();
    auto step = steady_step_state(m, 0.4, 32);
    CHECK(sigma_sup_gradient(step) == 0.0);

    // low phase with sigma linear in the rescaled coordinate, slope c
    const double c = 0.1, len = 0.4;
    const double top = m.sigma_bar();
    auto low = sample(64, [&](double x) { return m.branch_inverse(top - c + c * x, Branch::Low); });
    auto high = std::vector<double>(65, m.rho2());
    auto st = make_state(m, {len}, {PhaseGrid{Branch::Low, low}, PhaseGrid{Branch::High, high}});
    CHECK(sigma_sup_gradient(st) == doctest::Approx(c / len).epsilon(1e-9));
}

TEST_CASE("gradient sign condition") {
    const auto& m = model85();
    auto step = steady_step_state(m, 0.5, 32);
    auto r = gradient_sign_condition(step);
    CHECK(r.all());
    CHECK(r.data_condition);

    // data below the low plateau and above the high one
    auto good = sp1_state(m, 0.5, 40, -0.05, 0.01);
    CHECK(gradient_sign_condition(good).data_condition);
    auto bad = sp1_state(m, 0.5, 40, 0.05, 0.0);
    CHECK_FALSE(gradient_sign_condition(bad).data_condition);

    // low | high with [rho] > 0, sigma_x = g on the left and -2g on the right
    const double g = 1e-3, s = 0.5;
    const double top = m.sigma_bar();
    auto low = sample(64, [&](double x) { return m.branch_inverse(top - g * s * (1 - x), Branch::Low); });
    auto high = sample(64, [&](double x) { return m.branch_inverse(top - 2 * g * (1 - s) * x, Branch::High); });
    auto st = make_state(m, {s}, {PhaseGrid{Branch::Low, low}, PhaseGrid{Branch::High, high}});
    auto rep = gradient_sign_condition(st, 1e-12);
    REQUIRE(rep.fronts.size() == 1);
    CHECK_FALSE(rep.fronts[0]);
    CHECK(rep.values[0] == doctest::Approx(-g).epsilon(1e-6));
    CHECK_FALSE(rep.all());
}

TEST_CASE("neumann decay rate") {
    const auto& m = model85();
    CHECK(neumann_decay_rate(0.3, m) == doctest::Approx(m.diffusivity(0.3) * pi * pi));
}

TEST_CASE("single-front convergence in the proved regime") {
    const auto& m = model85();
    const double mass = 0.6, la = 0.05, ha = -0.004;
    const double ml = m.rho1() + la * 2 / pi, mh = m.rho2() + ha * 2 / pi;
    auto st = sp1_state(m, (mass - mh) / (ml - mh), 60, la, ha);
    CHECK(st.mass0 == doctest::Approx(mass).epsilon(1e-4));

    RunOptions opt;
    opt.t_end = 1.5;
    opt.thresholds = EventThresholds::for_resolution(60);
    auto tr = run(st, opt);
    CHECK(tr.events.empty());
    CHECK(tr.termination == "t_end");

    const double s_star = (m.rho2() - st.mass0) / m.jump();
    const auto b = front_bounds(st.mass0, m);
    for (const auto& smp : tr.samples) {
        CHECK(smp.fronts[0] >= b.s_min);
        CHECK(smp.fronts[0] <= b.s_max);
    }
    CHECK(std::abs(tr.samples.back().fronts[0] - s_star) < 3e-3);

    for (std::size_t p = 0; p < 2; ++p) {
        auto f = fit_decay_rate(tr, p, m, tr.initial_min_diffusivity[p]);
        REQUIRE(f.fitted);
        CHECK(f.rate >= f.floor_rate);
    }
    auto low = fit_decay_rate(tr, 0, m, tr.initial_min_diffusivity[0]);
    CHECK(low.rate == doctest::Approx(low.linearized_rate).epsilon(0.1));
}

TEST_CASE("mass below the low plateau ends at the right wall and relaxes to uniform") {
    const auto& m = model85();
    auto st = sp1_state(m, 0.97, 50, -0.1, 0.0);
    REQUIRE(st.mass0 < m.rho1());
    RunOptions opt;
    opt.t_end = 2.0;
    opt.thresholds = EventThresholds::for_resolution(50);
    auto tr = run(st, opt);
    REQUIRE(tr.events.size() >= 1);
    CHECK(tr.events[0].kind == EventKind::BoundaryHitRight);
    REQUIRE(tr.final_state);
    CHECK(tr.final_state->neumann_only());
    CHECK(tr.samples.back().l2[0] < 1e-3);
}
