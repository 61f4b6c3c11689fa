#include "fbstefan/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "fbstefan/errors.hpp"

namespace fbstefan {

namespace {

constexpr double kMassTie = 1e-12;

double sigma_gradient_at(const SimState& state, std::size_t phase, End end) {
    const auto& m = state.model;
    const auto& v = state.phases[phase].values;
    std::vector<double> s(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) s[j] = m.temperature(v[j]);
    return one_sided_gradient(s, end) / state.length(phase);
}

}  // namespace

std::optional<SteadyStep> discontinuous_steady_state(double mass, const AdhesionModel& model) {
    if (!(mass > model.rho1() && mass < model.rho2())) return std::nullopt;
    return SteadyStep{(model.rho2() - mass) / model.jump(), model.rho1(), model.rho2()};
}

SimState steady_step_state(const AdhesionModel& model, double s, int n_cells) {
    const auto n = static_cast<std::size_t>(n_cells) + 1;
    return make_state(model, {s},
                      {PhaseGrid{Branch::Low, std::vector<double>(n, model.rho1())},
                       PhaseGrid{Branch::High, std::vector<double>(n, model.rho2())}});
}

std::optional<double> uniform_steady_state(double mass, const AdhesionModel& model) {
    if (mass <= model.rho_flat() || mass >= model.rho_sharp()) return mass;
    return std::nullopt;
}

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::Thm21_i: return "Thm21_i";
        case Regime::Thm21_ii: return "Thm21_ii";
        case Regime::Thm21_iii: return "Thm21_iii";
        case Regime::Thm21_iv: return "Thm21_iv";
        case Regime::Uncovered1: return "Uncovered1";
        case Regime::Uncovered2: return "Uncovered2";
    }
    return "unknown";
}

FrontBounds front_bounds(double mass, const AdhesionModel& model) {
    FrontBounds b;
    b.s_min = (model.rho_sharp() - mass) / model.rho_sharp();
    b.s_max = (1.0 - mass) / (1.0 - model.rho_flat());
    b.in_regime = mass > model.rho_flat() && mass < model.rho_sharp();
    return b;
}

RegimeReport classify_regime(double mass, const RegimePredicates& predicates,
                             const AdhesionModel& model) {
    RegimeReport r;
    r.mass = mass;
    const double r1 = model.rho1(), r2 = model.rho2();
    const auto step = discontinuous_steady_state(mass, model);
    const Attractor uniform{Attractor::Kind::Uniform, mass};

    if (std::abs(mass - r1) <= kMassTie || std::abs(mass - r2) <= kMassTie) {
        r.tag = Regime::Thm21_iv;
        r.attractors.push_back(uniform);
        r.wall = std::abs(mass - r1) <= kMassTie ? End::Right : End::Left;
        return r;
    }
    if (mass < r1 || mass > r2) {
        r.tag = Regime::Thm21_iii;
        r.attractors.push_back(uniform);
        // Low mass: the high phase empties, so the front runs into x = 1.
        r.wall = mass < r1 ? End::Right : End::Left;
        r.finite_time_hit = true;
        return r;
    }
    const Attractor disc{Attractor::Kind::Discontinuous, step->s_star};
    if (mass > model.rho_flat() && mass < model.rho_sharp()) {
        r.tag = Regime::Thm21_i;
        r.attractors.push_back(disc);
        r.bounds = front_bounds(mass, model);
        return r;
    }
    const bool low_side = mass <= model.rho_flat();
    const bool holds = low_side ? predicates.low_phase_below_mass : predicates.high_phase_above_mass;
    if (holds) {
        r.tag = Regime::Thm21_ii;
        r.attractors.push_back(disc);
    } else {
        r.tag = low_side ? Regime::Uncovered1 : Regime::Uncovered2;
        r.attractors.push_back(disc);
        r.attractors.push_back(uniform);
        r.wall = low_side ? End::Right : End::Left;
    }
    return r;
}

RegimePredicates regime_predicates(const SimState& state) {
    if (state.n_fronts() != 1) throw StructuralError("regime predicates need one front");
    const double mass = total_mass(state);
    RegimePredicates p;
    for (const auto& phase : state.phases) {
        for (double v : phase.values) {
            if (phase.kind == Branch::Low && v > mass) p.low_phase_below_mass = false;
            if (phase.kind == Branch::High && v < mass) p.high_phase_above_mass = false;
        }
    }
    return p;
}

DecayFit fit_exponential_tail(const std::vector<double>& t, const std::vector<double>& y,
                              std::size_t min_samples) {
    DecayFit fit;
    const std::size_t n = std::min(t.size(), y.size());
    if (n < min_samples) {
        fit.reason = "fewer samples than the minimum tail";
        return fit;
    }
    // Longest strictly decreasing suffix of positive finite values.
    std::size_t start = n - 1;
    if (!(std::isfinite(y[start]) && y[start] > 0.0)) {
        fit.reason = "last sample is not positive";
        return fit;
    }
    while (start > 0 && std::isfinite(y[start - 1]) && y[start - 1] > y[start]) --start;
    start = std::max(start, n / 2);
    const std::size_t m = n - start;
    if (m < min_samples) {
        fit.reason = "monotone tail shorter than the minimum";
        fit.tail_begin = start;
        fit.tail_size = m;
        return fit;
    }
    double st = 0, sy = 0;
    for (std::size_t i = start; i < n; ++i) {
        st += t[i];
        sy += std::log(y[i]);
    }
    const double tm = st / m, ym = sy / m;
    double stt = 0, sty = 0, syy = 0;
    for (std::size_t i = start; i < n; ++i) {
        const double dt = t[i] - tm, dy = std::log(y[i]) - ym;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    const double slope = sty / stt;
    fit.fitted = true;
    fit.rate = -slope;
    fit.intercept = ym - slope * tm;
    fit.r_squared = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
    fit.tail_begin = start;
    fit.tail_size = m;
    return fit;
}

DecayFit fit_decay_rate(const Trajectory& trajectory, std::size_t phase_index,
                        const AdhesionModel& model, double eps, std::size_t min_samples) {
    auto fit = fit_exponential_tail(trajectory.times(), trajectory.l2_series(phase_index),
                                    min_samples);
    if (trajectory.initial_fronts == 1 && phase_index < trajectory.initial_kinds.size()) {
        const double quarter = std::numbers::pi * std::numbers::pi / 4.0;
        const auto bounds = front_bounds(trajectory.mass0, model);
        const bool low = trajectory.initial_kinds[phase_index] == Branch::Low;
        // Length bounds of the low phase are s_max, of the high phase 1 - s_min,
        // whichever side each one sits on.
        const double l_max = low ? bounds.s_max : 1.0 - bounds.s_min;
        fit.floor_rate = eps / (l_max * l_max);
        if (auto step = discontinuous_steady_state(trajectory.mass0, model)) {
            const double l_star = low ? step->s_star : 1.0 - step->s_star;
            fit.linearized_rate =
                model.diffusivity(low ? model.rho1() : model.rho2()) * quarter / (l_star * l_star);
        }
    }
    return fit;
}

double min_phase_diffusivity(const SimState& state, std::size_t phase) {
    double lo = std::numeric_limits<double>::infinity();
    for (double v : state.phases.at(phase).values) lo = std::min(lo, state.model.diffusivity(v));
    return lo;
}

double sigma_sup_gradient(const SimState& state) {
    const auto& m = state.model;
    double sup = 0.0;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        const auto& v = state.phases[i].values;
        const double hl = state.phases[i].spacing() * state.length(i);
        double prev = m.temperature(v[0]);
        for (std::size_t j = 1; j < v.size(); ++j) {
            const double cur = m.temperature(v[j]);
            sup = std::max(sup, std::abs(cur - prev) / hl);
            prev = cur;
        }
    }
    return sup;
}

bool GradientSignReport::all() const {
    return std::all_of(fronts.begin(), fronts.end(), [](bool b) { return b; });
}

GradientSignReport gradient_sign_condition(const SimState& state, double tolerance) {
    const auto& m = state.model;
    GradientSignReport rep;
    for (std::size_t i = 0; i < state.n_fronts(); ++i) {
        const double minus = sigma_gradient_at(state, i, End::Right);
        const double plus = sigma_gradient_at(state, i + 1, End::Left);
        const double sign = m.plateau(state.phases[i + 1].kind) > m.plateau(state.phases[i].kind)
                                ? 1.0
                                : -1.0;
        const double value = sign * (plus + minus);
        rep.values.push_back(value);
        rep.fronts.push_back(value >= -tolerance);
    }
    rep.data_condition = true;
    for (const auto& p : state.phases) {
        for (double v : p.values) {
            if (p.kind == Branch::Low ? v > m.rho1() : v < m.rho2()) rep.data_condition = false;
        }
    }
    return rep;
}

double neumann_decay_rate(double mass, const AdhesionModel& model) {
    return model.diffusivity(mass) * std::numbers::pi * std::numbers::pi;
}

}  // namespace fbstefan
