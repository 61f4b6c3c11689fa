#include "fbstefan/fronttrack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fbstefan/errors.hpp"

namespace fbstefan {

namespace {

double trapezoid(std::span<const double> v) {
    const std::size_t n = v.size() - 1;
    double sum = 0.5 * (v.front() + v.back());
    for (std::size_t j = 1; j < n; ++j) sum += v[j];
    return sum / static_cast<double>(n);
}

const char* kind_name(Branch b) { return b == Branch::Low ? "low" : "high"; }

// Node values padded with two ghosts per side. Walls reflect evenly (zero
// flux); fronts reflect oddly about the pinned value (linear extrapolation).
std::vector<double> with_ghosts(std::span<const double> v, bool left_wall, bool right_wall) {
    const std::size_t n = v.size() - 1;
    std::vector<double> e(n + 5);
    for (std::size_t j = 0; j <= n; ++j) e[j + 2] = v[j];
    if (left_wall) {
        e[1] = v[1];
        e[0] = v[2];
    } else {
        e[1] = 2.0 * v[0] - v[1];
        e[0] = 2.0 * v[0] - v[2];
    }
    if (right_wall) {
        e[n + 3] = v[n - 1];
        e[n + 4] = v[n - 2];
    } else {
        e[n + 3] = 2.0 * v[n] - v[n - 1];
        e[n + 4] = 2.0 * v[n] - v[n - 2];
    }
    return e;
}

}  // namespace

double SimState::left_edge(std::size_t phase) const {
    return phase == 0 ? 0.0 : fronts.positions.at(phase - 1);
}

double SimState::right_edge(std::size_t phase) const {
    return phase == fronts.positions.size() ? 1.0 : fronts.positions.at(phase);
}

PhaseBoundary SimState::left_boundary(std::size_t phase) const {
    if (phase == 0) return {0.0, 0.0, true};
    const double v = fronts.velocities.empty() ? 0.0 : fronts.velocities[phase - 1];
    return {fronts.positions[phase - 1], v, false};
}

PhaseBoundary SimState::right_boundary(std::size_t phase) const {
    if (phase == fronts.positions.size()) return {1.0, 0.0, true};
    const double v = fronts.velocities.empty() ? 0.0 : fronts.velocities[phase];
    return {fronts.positions[phase], v, false};
}

void validate_state(const SimState& state) {
    const auto& s = state.fronts.positions;
    if (state.phases.size() != s.size() + 1) {
        throw StructuralError("phase count must be front count + 1");
    }
    if (state.front_ids.size() != s.size()) throw StructuralError("front id count mismatch");
    if (state.phase_ids.size() != state.phases.size()) {
        throw StructuralError("phase id count mismatch");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0.0 && s[i] < 1.0)) throw StructuralError("front outside (0, 1)");
        if (i > 0 && !(s[i] > s[i - 1])) throw StructuralError("fronts not strictly ordered");
    }
    const auto& m = state.model;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        const auto& p = state.phases[i];
        if (p.values.size() < 4) throw StructuralError("phase needs at least 3 cells");
        if (i > 0 && p.kind == state.phases[i - 1].kind) {
            throw StructuralError("phases must alternate between low and high");
        }
        for (std::size_t j = 0; j < p.values.size(); ++j) {
            const double v = p.values[j];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0 || !m.in_band(v, p.kind)) {
                std::ostringstream msg;
                msg << kind_name(p.kind) << " phase " << i << " node " << j << " value " << v
                    << " outside its band";
                throw StructuralError(msg.str());
            }
        }
        const double plateau = m.plateau(p.kind);
        if (i > 0 && p.values.front() != plateau) throw StructuralError("unpinned left end");
        if (i + 1 < state.phases.size() && p.values.back() != plateau) {
            throw StructuralError("unpinned right end");
        }
    }
}

SimState make_state(const AdhesionModel& model, std::vector<double> fronts,
                    std::vector<PhaseGrid> phases, double t) {
    SimState state{t, FrontState{std::move(fronts), {}}, {}, std::move(phases), {}, model, 0.0};
    const std::size_t n = state.fronts.positions.size();
    state.fronts.velocities.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) state.front_ids.push_back(static_cast<int>(i) + 1);
    for (std::size_t i = 0; i <= n; ++i) state.phase_ids.push_back(static_cast<int>(i) + 1);
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        auto& p = state.phases[i];
        if (p.values.empty()) throw StructuralError("empty phase");
        const double plateau = model.plateau(p.kind);
        if (i > 0) p.values.front() = plateau;
        if (i < n) p.values.back() = plateau;
    }
    validate_state(state);
    state.fronts.velocities = interface_velocity(state);
    state.mass0 = total_mass(state);
    return state;
}

double one_sided_gradient(std::span<const double> v, End end) {
    if (v.size() < 4) throw DomainError("one-sided gradient needs N >= 3");
    const double n = static_cast<double>(v.size() - 1);
    // Differences against the end value keep constant data exactly flat.
    if (end == End::Left) return n * (4.0 * (v[1] - v[0]) - (v[2] - v[0])) / 2.0;
    const std::size_t k = v.size() - 1;
    return n * (4.0 * (v[k] - v[k - 1]) - (v[k] - v[k - 2])) / 2.0;
}

std::vector<double> phase_rhs(const PhaseGrid& phase, const PhaseBoundary& left,
                              const PhaseBoundary& right, const AdhesionModel& model,
                              Stencil stencil) {
    const double len = right.position - left.position;
    if (!(len > 0.0)) throw StructuralError("non-positive phase length");
    const std::size_t n = phase.n_cells();
    if (n < 3) throw StructuralError("phase needs at least 3 cells");
    const double h = phase.spacing();
    const double alpha = model.alpha();
    const auto& v = phase.values;
    const auto e = with_ghosts(v, left.wall, right.wall);
    auto at = [&](std::ptrdiff_t j) { return e[static_cast<std::size_t>(j + 2)]; };

    // flux[j] is the flux through the face between nodes j-1 and j.
    std::vector<double> flux(n + 2);
    for (std::ptrdiff_t j = -1; j <= static_cast<std::ptrdiff_t>(n); ++j) {
        double f = 0.0;
        if (stencil == Stencil::RandomWalk) {
            // Biased random walk: T+_j rho_j - T-_{j+1} rho_{j+1}, with
            // T+-_i = (1 - rho_{i+-1})(1 - alpha rho_{i-+1}).
            f = at(j) * (1.0 - at(j + 1)) * (1.0 - alpha * at(j - 1)) -
                at(j + 1) * (1.0 - at(j)) * (1.0 - alpha * at(j + 2));
        } else {
            f = temperature_unchecked(at(j), alpha) - temperature_unchecked(at(j + 1), alpha);
        }
        flux[static_cast<std::size_t>(j + 1)] = f;
    }

    const double diff_scale = 1.0 / (h * h * len * len);
    const double sl = left.wall ? 0.0 : left.velocity;
    const double sr = right.wall ? 0.0 : right.velocity;
    std::vector<double> rate(n + 1, 0.0);
    const std::size_t first = left.wall ? 0 : 1;
    const std::size_t last = right.wall ? n : n - 1;
    for (std::size_t j = first; j <= last; ++j) {
        double r = (flux[j] - flux[j + 1]) * diff_scale;
        const double xh = static_cast<double>(j) * h;
        const double a = (sl + xh * (sr - sl)) / len;
        if (a > 0.0 && j < n) {
            r += a * (v[j + 1] - v[j]) / h;
        } else if (a < 0.0 && j > 0) {
            r += a * (v[j] - v[j - 1]) / h;
        }
        rate[j] = r;
    }
    return rate;
}

std::vector<double> interface_velocity(const SimState& state) {
    const std::size_t n = state.n_fronts();
    const auto& m = state.model;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& lp = state.phases[i];
        const auto& rp = state.phases[i + 1];
        const double ll = state.length(i);
        const double lr = state.length(i + 1);
        if (!(ll > 0.0 && lr > 0.0)) throw StructuralError("degenerate phase length");
        const double p_minus = m.plateau(lp.kind);
        const double p_plus = m.plateau(rp.kind);
        const double j_minus = -m.diffusivity(p_minus) * one_sided_gradient(lp.values, End::Right) / ll;
        const double j_plus = -m.diffusivity(p_plus) * one_sided_gradient(rp.values, End::Left) / lr;
        out[i] = (j_plus - j_minus) / (p_plus - p_minus);
    }
    return out;
}

DtEstimate stable_dt(const SimState& state, const StepControl& control) {
    const auto& m = state.model;
    const double alpha = m.alpha();
    const auto vel = interface_velocity(state);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        const auto& p = state.phases[i];
        const double hl = p.spacing() * state.length(i);
        double dmax = 0.0;
        for (double v : p.values) {
            double b = std::abs(diffusivity_unchecked(v, alpha));
            // Highest-wavenumber growth factor of the random-walk stencil
            // linearised about v is 4 (1 - alpha v^2) / h^2, which exceeds
            // 4 D(v) / h^2.
            if (control.stencil == Stencil::RandomWalk) b = std::max(b, 1.0 - alpha * v * v);
            dmax = std::max(dmax, b);
        }
        if (dmax > 0.0) best = std::min(best, hl * hl / (2.0 * dmax));
        double amax = 0.0;
        if (i > 0) amax = std::max(amax, std::abs(vel[i - 1]));
        if (i < vel.size()) amax = std::max(amax, std::abs(vel[i]));
        if (amax > 0.0) best = std::min(best, hl / amax);
    }
    DtEstimate out;
    out.raw = control.cfl_safety * best;
    out.below_floor = out.raw < control.dt_min;
    out.dt = std::clamp(out.raw, control.dt_min, control.dt_max);
    return out;
}

std::optional<SimState> try_step(const SimState& state, double dt, Stencil stencil,
                                 std::string* why) {
    auto fail = [&](const std::string& reason) -> std::optional<SimState> {
        if (why) *why = reason;
        return std::nullopt;
    };
    const auto& m = state.model;
    const auto vel = interface_velocity(state);
    SimState next = state;
    next.fronts.velocities = vel;

    // Rates use the pre-step geometry and velocities.
    SimState frame = state;
    frame.fronts.velocities = vel;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        const auto rate = phase_rhs(state.phases[i], frame.left_boundary(i),
                                    frame.right_boundary(i), m, stencil);
        auto& v = next.phases[i].values;
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += dt * rate[j];
    }
    for (std::size_t i = 0; i < vel.size(); ++i) next.fronts.positions[i] += dt * vel[i];
    next.t = state.t + dt;

    const auto& s = next.fronts.positions;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i]) || !(s[i] > 0.0 && s[i] < 1.0)) return fail("front left (0, 1)");
        if (i > 0 && !(s[i] > s[i - 1])) return fail("fronts crossed");
    }
    for (std::size_t i = 0; i < next.phases.size(); ++i) {
        auto& p = next.phases[i];
        const double plateau = m.plateau(p.kind);
        if (i > 0) p.values.front() = plateau;
        if (i < s.size()) p.values.back() = plateau;
        for (std::size_t j = 0; j < p.values.size(); ++j) {
            const double v = p.values[j];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0 || !m.in_band(v, p.kind)) {
                std::ostringstream msg;
                msg << kind_name(p.kind) << " phase " << i << " node " << j << " -> " << v;
                return fail(msg.str());
            }
        }
    }
    return next;
}

AdvanceResult advance(const SimState& state, double dt, const StepControl& control) {
    std::string why;
    for (int attempt = 0; attempt <= control.max_rejections; ++attempt) {
        if (dt < control.dt_min) break;
        if (auto next = try_step(state, dt, control.stencil, &why)) {
            return {std::move(*next), dt, attempt};
        }
        dt *= 0.5;
    }
    std::ostringstream msg;
    msg << "step rejected at t = " << state.t << " down to dt = " << dt << " (" << why << ")";
    throw BlowupError(msg.str());
}

std::vector<double> neumann_step(std::span<const double> profile, double dt,
                                 const AdhesionModel& model, Branch band, Stencil stencil) {
    PhaseGrid p{band, std::vector<double>(profile.begin(), profile.end())};
    for (double v : p.values) {
        if (!(v >= 0.0 && v <= 1.0) || !model.in_band(v, band)) {
            throw DomainError("Neumann profile leaves its band");
        }
    }
    const auto rate = phase_rhs(p, {0.0, 0.0, true}, {1.0, 0.0, true}, model, stencil);
    for (std::size_t j = 0; j < p.values.size(); ++j) p.values[j] += dt * rate[j];
    for (double v : p.values) {
        if (!(v >= 0.0 && v <= 1.0) || !model.in_band(v, band)) {
            throw DomainError("Neumann step left the band");
        }
    }
    return p.values;
}

double total_mass(const SimState& state) {
    double mass = 0.0;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        mass += state.length(i) * trapezoid(state.phases[i].values);
    }
    return mass;
}

double front_from_mass(const SimState& state, double mass) {
    if (state.n_fronts() != 1) throw StructuralError("front_from_mass needs exactly one front");
    const double left = trapezoid(state.phases[0].values);
    const double right = trapezoid(state.phases[1].values);
    return (mass - right) / (left - right);
}

CompatibilityReport check_compatibility(const SimState& state, double tolerance) {
    const auto& m = state.model;
    CompatibilityReport report;
    report.tolerance = tolerance;
    for (std::size_t i = 0; i < state.n_fronts(); ++i) {
        const auto& lp = state.phases[i];
        const auto& rp = state.phases[i + 1];
        std::vector<double> sl(lp.values.size());
        std::vector<double> sr(rp.values.size());
        for (std::size_t j = 0; j < sl.size(); ++j) sl[j] = m.temperature(lp.values[j]);
        for (std::size_t j = 0; j < sr.size(); ++j) sr[j] = m.temperature(rp.values[j]);
        const double hl = lp.spacing() * state.length(i);
        const double hr = rp.spacing() * state.length(i + 1);
        const std::size_t k = sl.size() - 1;
        const double gx_minus = one_sided_gradient(sl, End::Right) / state.length(i);
        const double gx_plus = one_sided_gradient(sr, End::Left) / state.length(i + 1);
        // Four-point one-sided second differences (second order).
        auto second = [](double e, double a, double b, double c) {
            return (-5.0 * (a - e) + 4.0 * (b - e) - (c - e));
        };
        const double gxx_minus = second(sl[k], sl[k - 1], sl[k - 2], sl[k - 3]) / (hl * hl);
        const double gxx_plus = second(sr[0], sr[1], sr[2], sr[3]) / (hr * hr);
        const double p_minus = m.plateau(lp.kind);
        const double p_plus = m.plateau(rp.kind);
        const double jump = p_plus - p_minus;
        const double dgrad = gx_plus - gx_minus;
        FrontCompatibility f;
        f.residual_minus = gx_minus * dgrad - jump * m.diffusivity(p_minus) * gxx_minus;
        f.residual_plus = gx_plus * dgrad - jump * m.diffusivity(p_plus) * gxx_plus;
        f.pass = std::abs(f.residual_minus) <= tolerance && std::abs(f.residual_plus) <= tolerance;
        report.pass = report.pass && f.pass;
        report.fronts.push_back(f);
    }
    return report;
}

Profile physical_profile(const SimState& state) {
    Profile out;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        const auto& v = state.phases[i].values;
        const double a = state.left_edge(i);
        const double len = state.length(i);
        const double n = static_cast<double>(v.size() - 1);
        for (std::size_t j = 0; j < v.size(); ++j) {
            out.x.push_back(j + 1 == v.size() ? state.right_edge(i)
                                              : a + len * static_cast<double>(j) / n);
            out.rho.push_back(v[j]);
        }
    }
    return out;
}

double profile_integral(const SimState& state, double a, double b) {
    if (b <= a) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        const double lo = state.left_edge(i);
        const double hi = state.right_edge(i);
        const double ca = std::max(a, lo);
        const double cb = std::min(b, hi);
        if (cb <= ca) continue;
        const auto& v = state.phases[i].values;
        const double n = static_cast<double>(v.size() - 1);
        const double len = hi - lo;
        auto value_at = [&](double x) {
            const double u = std::clamp((x - lo) / len * n, 0.0, n);
            const std::size_t j = std::min(static_cast<std::size_t>(u), v.size() - 2);
            const double w = u - static_cast<double>(j);
            return (1.0 - w) * v[j] + w * v[j + 1];
        };
        // Integrate piecewise: break at every node inside [ca, cb].
        const double ua = (ca - lo) / len * n;
        const double ub = (cb - lo) / len * n;
        double x0 = ca;
        double f0 = value_at(ca);
        for (auto k = static_cast<std::size_t>(std::floor(ua)) + 1;
             static_cast<double>(k) < ub; ++k) {
            const double x1 = lo + len * static_cast<double>(k) / n;
            const double f1 = v[k];
            total += 0.5 * (f0 + f1) * (x1 - x0);
            x0 = x1;
            f0 = f1;
        }
        total += 0.5 * (f0 + value_at(cb)) * (cb - x0);
    }
    return total;
}

double phase_l2_distance(const SimState& state, std::size_t phase, double target) {
    const auto& v = state.phases.at(phase).values;
    std::vector<double> sq(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) sq[j] = (v[j] - target) * (v[j] - target);
    return std::sqrt(state.length(phase) * trapezoid(sq));
}

}  // namespace fbstefan
