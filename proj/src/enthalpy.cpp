#include "fbstefan/enthalpy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbstefan/errors.hpp"

namespace fbstefan {

namespace {

constexpr double kTiny = 1e-12;

double weight(std::size_t j, std::size_t n, double h) {
    return (j == 0 || j == n) ? 0.5 * h : h;
}

// Largest D on [lo, hi], D being convex.
double max_d(const AdhesionModel& m, double lo, double hi) {
    return std::max(m.diffusivity(lo), m.diffusivity(hi));
}

// Advances `state` to t_end with steps from `dt_of`, calling `sample` on the
// grid k * interval (and at t_end).
template <class State, class DtFn, class StepFn, class SampleFn>
long march(State& state, double t_end, double interval, DtFn dt_of, StepFn step, SampleFn sample) {
    if (!(interval > 0.0)) throw DomainError("sample interval must be positive");
    const double origin = state.t;
    auto next_after = [&](double t) {
        auto k = static_cast<long>(std::floor((t - origin) / interval + kTiny)) + 1;
        return origin + static_cast<double>(k) * interval;
    };
    long steps = 0;
    sample(state);
    double next = next_after(state.t);
    while (state.t < t_end - kTiny) {
        const double target = std::min(next, t_end);
        double dt = std::min(dt_of(state), target - state.t);
        const bool lands = dt >= target - state.t;
        state = step(state, dt);
        if (lands) state.t = target;
        ++steps;
        if (state.t >= next - kTiny || state.t >= t_end - kTiny) {
            sample(state);
            next = next_after(state.t);
        }
    }
    return steps;
}

}  // namespace

EnthalpyGrid enthalpy_from_state(const SimState& state, int n_cells) {
    if (n_cells < 2) throw DomainError("enthalpy grid needs at least 2 cells");
    EnthalpyGrid g;
    g.t = state.t;
    const auto n = static_cast<std::size_t>(n_cells);
    g.rho.resize(n + 1);
    const double h = 1.0 / static_cast<double>(n_cells);
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = static_cast<double>(j) * h;
        const double a = j == 0 ? 0.0 : x - 0.5 * h;
        const double b = j == n ? 1.0 : x + 0.5 * h;
        g.rho[j] = profile_integral(state, a, b) / (b - a);
    }
    return g;
}

double enthalpy_mass(const EnthalpyGrid& grid) {
    const std::size_t n = grid.n_cells();
    const double h = grid.spacing();
    double sum = 0.0;
    for (std::size_t j = 0; j <= n; ++j) sum += weight(j, n, h) * grid.rho[j];
    return sum;
}

bool is_mushy(double rho, const AdhesionModel& model) noexcept {
    return rho >= model.rho1() && rho <= model.rho2();
}

double enthalpy_stable_dt(const EnthalpyGrid& grid, const AdhesionModel& m) {
    const auto [lo_it, hi_it] = std::minmax_element(grid.rho.begin(), grid.rho.end());
    const double lo = *lo_it, hi = *hi_it;
    double sup = 0.0;
    if (lo < m.rho1()) sup = std::max(sup, max_d(m, lo, std::min(hi, m.rho1())));
    if (hi > m.rho2()) sup = std::max(sup, max_d(m, std::max(lo, m.rho2()), hi));
    if (sup <= 0.0) return std::numeric_limits<double>::infinity();
    const double h = grid.spacing();
    return h * h / (2.0 * sup);
}

EnthalpyGrid enthalpy_step(const EnthalpyGrid& grid, double dt, const AdhesionModel& m) {
    const std::size_t n = grid.n_cells();
    if (n < 2) throw DomainError("enthalpy grid needs at least 2 cells");
    const double limit = enthalpy_stable_dt(grid, m);
    if (dt > limit * (1.0 + 1e-12)) {
        throw CflViolation("enthalpy step dt = " + std::to_string(dt) + " exceeds " +
                           std::to_string(limit));
    }
    std::vector<double> k(n + 1);
    for (std::size_t j = 0; j <= n; ++j) k[j] = m.flattened_temperature(grid.rho[j]);
    const double h = grid.spacing();
    const double r = dt / (h * h);

    EnthalpyGrid out;
    out.t = grid.t + dt;
    out.rho.resize(n + 1);
    out.rho[0] = grid.rho[0] + 2.0 * r * (k[1] - k[0]);
    out.rho[n] = grid.rho[n] + 2.0 * r * (k[n - 1] - k[n]);
    for (std::size_t j = 1; j < n; ++j) {
        out.rho[j] = grid.rho[j] + r * ((k[j + 1] - k[j]) - (k[j] - k[j - 1]));
    }
    return out;
}

std::vector<double> extract_fronts(const EnthalpyGrid& grid, const AdhesionModel& m) {
    const std::size_t n = grid.n_cells();
    const double h = grid.spacing();
    const double mid = 0.5 * (m.rho1() + m.rho2());
    auto kind_of = [&](double rho) { return rho <= mid ? Branch::Low : Branch::High; };

    // Mushy nodes p..q (possibly none, p = q + 1) between a `left` and a
    // `right` side; the run owns [a, b].
    std::vector<double> fronts;
    auto place = [&](std::size_t p, std::size_t q, Branch left, Branch right) {
        if (left == right) return;
        const double a = p == 0 ? 0.0 : grid.x(p) - 0.5 * h;
        const double b = q + 1 > n ? 1.0 : grid.x(q + 1) - 0.5 * h;
        double mass = 0.0;
        for (std::size_t i = p; i <= q && i <= n; ++i) mass += weight(i, n, h) * grid.rho[i];
        if (p > q) {
            fronts.push_back(a);
            return;
        }
        const double rl = m.plateau(left), rr = m.plateau(right);
        fronts.push_back(std::clamp(a + (mass - rr * (b - a)) / (rl - rr), a, b));
    };

    std::vector<std::size_t> sharp;
    for (std::size_t j = 0; j <= n; ++j) {
        if (!is_mushy(grid.rho[j], m)) sharp.push_back(j);
    }
    if (sharp.empty()) {
        place(0, n, kind_of(grid.rho.front()), kind_of(grid.rho.back()));
        return fronts;
    }
    if (sharp.front() > 0) {
        place(0, sharp.front() - 1, kind_of(grid.rho.front()), kind_of(grid.rho[sharp.front()]));
    }
    for (std::size_t k = 1; k < sharp.size(); ++k) {
        const std::size_t i = sharp[k - 1], j = sharp[k];
        place(i + 1, j - 1, kind_of(grid.rho[i]), kind_of(grid.rho[j]));
    }
    if (sharp.back() < n) {
        place(sharp.back() + 1, n, kind_of(grid.rho[sharp.back()]), kind_of(grid.rho.back()));
    }
    return fronts;
}

EnthalpyRun run_enthalpy(const EnthalpyGrid& initial, const AdhesionModel& m, double t_end,
                         double sample_interval, double cfl_safety) {
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw DomainError("cfl_safety must lie in (0, 1]");
    EnthalpyRun run;
    EnthalpyGrid g = initial;
    double prev_mass = enthalpy_mass(g);
    run.steps = march(
        g, t_end, sample_interval,
        [&](const EnthalpyGrid& s) { return cfl_safety * enthalpy_stable_dt(s, m); },
        [&](const EnthalpyGrid& s, double dt) {
            auto next = enthalpy_step(s, dt, m);
            const double mass = enthalpy_mass(next);
            run.max_step_mass_change = std::max(run.max_step_mass_change, std::abs(mass - prev_mass));
            prev_mass = mass;
            return next;
        },
        [&](const EnthalpyGrid& s) {
            run.samples.push_back({s.t, extract_fronts(s, m), enthalpy_mass(s)});
        });
    run.final_grid = std::move(g);
    return run;
}

LagrangeField lagrange_transform(const std::vector<double>& low, double s, const AdhesionModel& m,
                                 int n_cells) {
    if (low.size() < 3) throw DomainError("low-phase profile needs at least 3 nodes");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("front must lie in (0, 1)");
    if (n_cells < 2) throw DomainError("Lagrange grid needs at least 2 cells");
    for (double v : low) {
        if (!(v >= 0.0 && v < m.rho_flat())) {
            throw DomainError("low-phase value " + std::to_string(v) + " outside [0, rho_flat)");
        }
    }
    // y at the profile nodes, accumulated from the front (last node) leftward
    const std::size_t n = low.size() - 1;
    const double dx = s / static_cast<double>(n);
    std::vector<double> y(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        y[i] = y[i + 1] + 0.5 * dx * ((m.rho2() - low[i]) + (m.rho2() - low[i + 1]));
        if (!(y[i] > y[i + 1])) throw DomainError("mass coordinate is not monotone");
    }

    LagrangeField f;
    f.y0 = y[0];
    const auto mc = static_cast<std::size_t>(n_cells);
    f.v.resize(mc + 1);
    std::size_t i = n;  // y[i] <= target <= y[i-1]
    for (std::size_t k = 0; k <= mc; ++k) {
        const double target = f.y0 * static_cast<double>(k) / static_cast<double>(mc);
        while (i > 1 && y[i - 1] < target) --i;
        const double w = (target - y[i]) / (y[i - 1] - y[i]);
        const double wc = std::clamp(w, 0.0, 1.0);
        f.v[k] = (1.0 - wc) * m.temperature(low[i]) + wc * m.temperature(low[i - 1]);
    }
    f.v.front() = m.sigma_bar();
    return f;
}

Profile lagrange_inverse(const LagrangeField& f, const AdhesionModel& m) {
    const std::size_t mc = f.n_cells();
    const double dy = f.spacing();
    std::vector<double> inv(mc + 1), rho(mc + 1);
    for (std::size_t k = 0; k <= mc; ++k) {
        rho[k] = m.branch_inverse(f.v[k], Branch::Low);
        inv[k] = 1.0 / (m.rho2() - rho[k]);
    }
    Profile p;
    p.x.assign(mc + 1, 0.0);
    p.rho.assign(mc + 1, 0.0);
    double x = 0.0;
    for (std::size_t k = mc + 1; k-- > 0;) {
        if (k < mc) x += 0.5 * dy * (inv[k] + inv[k + 1]);
        p.x[mc - k] = x;
        p.rho[mc - k] = rho[k];
    }
    return p;
}

double lagrange_diffusivity(double v, const AdhesionModel& m) {
    const double b = m.branch_inverse(v, Branch::Low);
    const double d = m.diffusivity(b);
    if (!(d > 0.0)) throw DomainError("b'(v) is not positive at v = " + std::to_string(v));
    const double gap = m.rho2() - b;
    return gap * gap * d;
}

double lagrange_stable_dt(const LagrangeField& f, const AdhesionModel& m) {
    double sup = 0.0;
    for (double v : f.v) sup = std::max(sup, lagrange_diffusivity(v, m));
    const double dy = f.spacing();
    return dy * dy / (2.0 * sup);
}

LagrangeField lagrange_step(const LagrangeField& f, double dt, const AdhesionModel& m) {
    const std::size_t mc = f.n_cells();
    if (mc < 2) throw DomainError("Lagrange grid needs at least 2 cells");
    const double dy = f.spacing();
    std::vector<double> a(mc + 1);
    double sup = 0.0;
    for (std::size_t k = 0; k <= mc; ++k) {
        a[k] = lagrange_diffusivity(f.v[k], m);
        sup = std::max(sup, a[k]);
    }
    const double limit = dy * dy / (2.0 * sup);
    if (dt > limit * (1.0 + 1e-12)) {
        throw CflViolation("Lagrange step dt = " + std::to_string(dt) + " exceeds " +
                           std::to_string(limit));
    }
    const double r = dt / (dy * dy);
    LagrangeField out = f;
    out.t = f.t + dt;
    for (std::size_t k = 1; k < mc; ++k) {
        out.v[k] = f.v[k] + r * a[k] * ((f.v[k + 1] - f.v[k]) - (f.v[k] - f.v[k - 1]));
    }
    out.v[mc] = f.v[mc] + 2.0 * r * a[mc] * (f.v[mc - 1] - f.v[mc]);
    out.v[0] = m.sigma_bar();
    return out;
}

ReconstructedFront reconstruct_front(const LagrangeField& f, const AdhesionModel& m) {
    const std::size_t mc = f.n_cells();
    const double dy = f.spacing();
    double s = 0.0;
    double prev = 1.0 / (m.rho2() - m.branch_inverse(f.v[0], Branch::Low));
    for (std::size_t k = 1; k <= mc; ++k) {
        const double cur = 1.0 / (m.rho2() - m.branch_inverse(f.v[k], Branch::Low));
        s += 0.5 * dy * (prev + cur);
        prev = cur;
    }
    if (s >= 1.0) return {1.0, true};
    return {s, false};
}

LagrangeRun run_lagrange(const LagrangeField& initial, const AdhesionModel& m, double t_end,
                         double sample_interval, double cfl_safety) {
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw DomainError("cfl_safety must lie in (0, 1]");
    LagrangeRun run;
    LagrangeField f = initial;
    run.steps = march(
        f, t_end, sample_interval,
        [&](const LagrangeField& s) { return cfl_safety * lagrange_stable_dt(s, m); },
        [&](const LagrangeField& s, double dt) { return lagrange_step(s, dt, m); },
        [&](const LagrangeField& s) {
            const auto front = reconstruct_front(s, m);
            const auto [lo, hi] = std::minmax_element(s.v.begin(), s.v.end());
            run.samples.push_back({s.t, front.s, front.hit_wall, *lo, *hi});
        });
    run.final_field = std::move(f);
    return run;
}

}  // namespace fbstefan
