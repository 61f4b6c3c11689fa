#include "fbstefan/events.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fbstefan/analysis.hpp"
#include "fbstefan/errors.hpp"

namespace fbstefan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Point {
    double x;
    double rho;
};

double interpolate(const std::vector<Point>& pts, double x) {
    auto it = std::upper_bound(pts.begin(), pts.end(), x,
                               [](double v, const Point& p) { return v < p.x; });
    if (it == pts.begin()) return pts.front().rho;
    if (it == pts.end()) return pts.back().rho;
    const Point& b = *it;
    const Point& a = *(it - 1);
    if (b.x == a.x) return b.rho;
    const double w = (x - a.x) / (b.x - a.x);
    return (1.0 - w) * a.rho + w * b.rho;
}

double integral(const std::vector<Point>& pts) {
    double sum = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        sum += 0.5 * (pts[k].rho + pts[k - 1].rho) * (pts[k].x - pts[k - 1].x);
    }
    return sum;
}

// Replaces phases [first, last] by one phase of the kind of `keep`. Phases of
// the other kind inside the range become that plateau.
SimState merge_range(const SimState& s, std::size_t first, std::size_t last, std::size_t keep) {
    const auto& m = s.model;
    const Branch kind = s.phases[keep].kind;
    const double plateau = m.plateau(kind);
    const double a = s.left_edge(first);
    const double b = s.right_edge(last);

    std::vector<Point> pts;
    std::size_t n_cells = 0;
    for (std::size_t i = first; i <= last; ++i) {
        const auto& p = s.phases[i];
        const double lo = s.left_edge(i);
        const double len = s.length(i);
        if (p.kind == kind) {
            n_cells = std::max(n_cells, p.n_cells());
            const double n = static_cast<double>(p.n_cells());
            for (std::size_t j = 0; j < p.values.size(); ++j) {
                const double x = j + 1 == p.values.size() ? s.right_edge(i)
                                                          : lo + len * static_cast<double>(j) / n;
                pts.push_back({x, p.values[j]});
            }
        } else {
            pts.push_back({lo, plateau});
            pts.push_back({s.right_edge(i), plateau});
        }
    }

    const bool left_pinned = first > 0;
    const bool right_pinned = last + 1 < s.phases.size();
    std::vector<double> v(n_cells + 1);
    const double nd = static_cast<double>(n_cells);
    for (std::size_t j = 0; j <= n_cells; ++j) {
        v[j] = interpolate(pts, a + (b - a) * static_cast<double>(j) / nd);
    }
    if (left_pinned) v.front() = plateau;
    if (right_pinned) v.back() = plateau;

    // Uniform shift of the free nodes so the trapezoid mass of the new grid
    // equals the integral of the filled profile.
    double trap = 0.5 * (v.front() + v.back());
    for (std::size_t j = 1; j < n_cells; ++j) trap += v[j];
    trap *= (b - a) / nd;
    double free_weight = static_cast<double>(n_cells - 1);
    if (!left_pinned) free_weight += 0.5;
    if (!right_pinned) free_weight += 0.5;
    const double shift = (integral(pts) - trap) / ((b - a) / nd * free_weight);
    for (std::size_t j = 0; j <= n_cells; ++j) {
        if ((j == 0 && left_pinned) || (j == n_cells && right_pinned)) continue;
        v[j] += shift;
    }

    SimState out = s;
    out.phases.erase(out.phases.begin() + static_cast<std::ptrdiff_t>(first),
                     out.phases.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    out.phases.insert(out.phases.begin() + static_cast<std::ptrdiff_t>(first),
                      PhaseGrid{kind, std::move(v)});
    const int kept_id = s.phase_ids[keep];
    out.phase_ids.erase(out.phase_ids.begin() + static_cast<std::ptrdiff_t>(first),
                        out.phase_ids.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    out.phase_ids.insert(out.phase_ids.begin() + static_cast<std::ptrdiff_t>(first), kept_id);
    // Fronts first .. last-1 sit inside the merged range.
    auto erase_fronts = [&](auto& vec) {
        vec.erase(vec.begin() + static_cast<std::ptrdiff_t>(first),
                  vec.begin() + static_cast<std::ptrdiff_t>(last));
    };
    erase_fronts(out.fronts.positions);
    erase_fronts(out.fronts.velocities);
    erase_fronts(out.front_ids);
    validate_state(out);
    out.fronts.velocities = interface_velocity(out);
    return out;
}

std::vector<int> removed_ids(const SimState& s, std::size_t first, std::size_t last) {
    return {s.front_ids.begin() + static_cast<std::ptrdiff_t>(first),
            s.front_ids.begin() + static_cast<std::ptrdiff_t>(last)};
}

}  // namespace

EventThresholds EventThresholds::for_resolution(int n_cells) {
    EventThresholds t;
    const double eps = std::max(2.0 / n_cells, 1e-3);
    t.eps_boundary = eps;
    t.eps_collide = eps;
    return t;
}

void EventThresholds::validate() const {
    if (!(eps_boundary > 0 && eps_collide > 0 && steady_tol > 0 && steady_interval > 0 &&
          t_safeguard > 0)) {
        throw DomainError("event thresholds must be strictly positive");
    }
}

std::optional<Event> detect(const SimState& state, const EventThresholds& thresholds,
                            std::optional<double> rate) {
    bool finite = true;
    for (double s : state.fronts.positions) finite = finite && std::isfinite(s);
    for (const auto& p : state.phases) {
        for (double v : p.values) finite = finite && std::isfinite(v);
    }
    if (!finite) {
        Event e;
        e.kind = EventKind::Blowup;
        e.time = state.t;
        e.diagnostics = "non-finite state";
        return e;
    }

    const std::size_t np = state.phases.size();
    if (np >= 3) {
        std::optional<std::size_t> worst;
        for (std::size_t p = 1; p + 1 < np; ++p) {
            if (state.length(p) < thresholds.eps_collide &&
                (!worst || state.length(p) < state.length(*worst))) {
                worst = p;
            }
        }
        if (worst) {
            Event e;
            e.kind = EventKind::Coalescence;
            e.time = state.t;
            e.location = 0.5 * (state.left_edge(*worst) + state.right_edge(*worst));
            e.front_ids = {state.front_ids[*worst - 1], state.front_ids[*worst]};
            return e;
        }
    }
    if (np >= 2) {
        if (state.length(0) < thresholds.eps_boundary) {
            return Event{EventKind::BoundaryHitLeft, state.t, 0.0, 0.0, {state.front_ids.front()}, {}};
        }
        if (state.length(np - 1) < thresholds.eps_boundary) {
            return Event{EventKind::BoundaryHitRight, state.t, 1.0, 0.0, {state.front_ids.back()}, {}};
        }
    }
    if (rate && *rate < thresholds.steady_tol) {
        Event e;
        e.kind = EventKind::SteadyStateReached;
        e.time = state.t;
        return e;
    }
    return std::nullopt;
}

SurgeryResult apply_coalescence(const SimState& state, std::size_t sliver) {
    const std::size_t np = state.phases.size();
    if (sliver == 0 || sliver + 1 >= np) throw StructuralError("coalescence needs an internal phase");
    if (state.phases[sliver - 1].kind != state.phases[sliver + 1].kind) {
        throw StructuralError("phases flanking the sliver differ in kind");
    }
    Event e;
    e.kind = EventKind::Coalescence;
    e.time = state.t;
    e.location = 0.5 * (state.left_edge(sliver) + state.right_edge(sliver));
    e.front_ids = removed_ids(state, sliver - 1, sliver + 1);
    SimState next = merge_range(state, sliver - 1, sliver + 1, sliver - 1);
    e.mass_defect = total_mass(state) - total_mass(next);
    return {std::move(next), e};
}

SurgeryResult apply_boundary_hit(const SimState& state, End side) {
    const std::size_t np = state.phases.size();
    if (np < 2) throw StructuralError("boundary hit needs a front");
    Event e;
    e.time = state.t;
    std::size_t first = 0, last = 1, keep = 1;
    if (side == End::Left) {
        e.kind = EventKind::BoundaryHitLeft;
        e.location = 0.0;
    } else {
        e.kind = EventKind::BoundaryHitRight;
        e.location = 1.0;
        first = np - 2;
        last = np - 1;
        keep = np - 2;
    }
    e.front_ids = removed_ids(state, first, last);
    SimState next = merge_range(state, first, last, keep);
    e.mass_defect = total_mass(state) - total_mass(next);
    return {std::move(next), e};
}

double steady_rate(const SimState& previous, const SimState& current) {
    const double dt = current.t - previous.t;
    if (!(dt > 0.0)) throw DomainError("steady rate needs increasing times");
    if (previous.phases.size() != current.phases.size()) {
        throw StructuralError("steady rate across a topology change");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < current.phases.size(); ++i) {
        const auto& a = previous.phases[i].values;
        const auto& b = current.phases[i].values;
        if (a.size() != b.size()) throw StructuralError("steady rate across a regrid");
        const std::size_t n = b.size() - 1;
        double s = 0.5 * ((b[0] - a[0]) * (b[0] - a[0]) + (b[n] - a[n]) * (b[n] - a[n]));
        for (std::size_t j = 1; j < n; ++j) s += (b[j] - a[j]) * (b[j] - a[j]);
        sq += current.length(i) * s / static_cast<double>(n);
    }
    double moved = 0.0;
    for (std::size_t i = 0; i < current.n_fronts(); ++i) {
        moved += std::abs(current.fronts.positions[i] - previous.fronts.positions[i]);
    }
    return (std::sqrt(sq) + moved * current.model.jump()) / dt;
}

Sample make_sample(const SimState& state, std::size_t initial_fronts, std::size_t initial_phases) {
    Sample s;
    s.t = state.t;
    s.fronts.assign(initial_fronts, kNaN);
    for (std::size_t i = 0; i < state.n_fronts(); ++i) {
        s.fronts.at(static_cast<std::size_t>(state.front_ids[i] - 1)) = state.fronts.positions[i];
    }
    s.mass = total_mass(state);
    s.sigma_grad_sup = sigma_sup_gradient(state);
    s.l2.assign(initial_phases, kNaN);
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        // Without fronts the target is the uniform state at the current mass.
        const double target = state.neumann_only() ? s.mass : state.model.plateau(state.phases[i].kind);
        s.l2.at(static_cast<std::size_t>(state.phase_ids[i] - 1)) = phase_l2_distance(state, i, target);
    }
    return s;
}

Trajectory run(const SimState& initial, const RunOptions& opt) {
    opt.thresholds.validate();
    if (!(opt.sample_interval > 0.0)) throw DomainError("sample interval must be positive");
    if (!(opt.control.cfl_safety > 0.0 && opt.control.cfl_safety < 1.0)) {
        throw DomainError("cfl_safety must lie in (0, 1)");
    }
    if (!(opt.control.dt_min <= opt.control.dt_max)) throw DomainError("dt_min exceeds dt_max");

    Trajectory traj;
    traj.initial_fronts = initial.n_fronts();
    traj.initial_phases = initial.phases.size();
    traj.mass0 = initial.mass0;
    for (std::size_t i = 0; i < initial.phases.size(); ++i) {
        traj.initial_kinds.push_back(initial.phases[i].kind);
        traj.initial_min_diffusivity.push_back(min_phase_diffusivity(initial, i));
    }

    if (opt.require_compatibility && initial.n_fronts() > 0) {
        const auto rep = check_compatibility(initial, opt.compatibility_tol);
        if (!rep.pass) throw DomainError("initial data fail the first-order compatibility check");
    }

    const double t_end = std::min(opt.t_end, opt.thresholds.t_safeguard);
    std::vector<double> snaps = opt.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    SimState state = initial;
    auto record = [&](const SimState& s) {
        if (!traj.samples.empty() && s.t <= traj.samples.back().t) return;
        traj.samples.push_back(make_sample(s, traj.initial_fronts, traj.initial_phases));
    };
    auto take_snapshots = [&](const SimState& s) {
        while (next_snap < snaps.size() && snaps[next_snap] <= s.t + 1e-12) {
            traj.snapshots.push_back({s.t, physical_profile(s)});
            ++next_snap;
        }
    };
    auto blowup = [&](const std::string& why) {
        Event e;
        e.kind = EventKind::Blowup;
        e.time = state.t;
        e.diagnostics = why;
        traj.events.push_back(e);
        traj.termination = "blowup";
    };

    // Sample and check times live on fixed grids; times within kTiny of a
    // grid point count as on it.
    constexpr double kTiny = 1e-12;
    auto grid_after = [&](double origin, double step, double t) {
        auto k = static_cast<long>(std::floor((t - origin) / step + kTiny)) + 1;
        return origin + static_cast<double>(k) * step;
    };
    record(state);
    take_snapshots(state);
    double next_sample = grid_after(initial.t, opt.sample_interval, state.t);
    SimState checkpoint = state;
    double next_check = state.t + opt.thresholds.steady_interval;

    while (true) {
        if (auto ev = detect(state, opt.thresholds)) {
            if (ev->kind == EventKind::Blowup) {
                blowup(ev->diagnostics);
                break;
            }
            SurgeryResult r = [&] {
                if (ev->kind == EventKind::Coalescence) {
                    std::size_t sliver = 1;
                    while (state.front_ids[sliver - 1] != ev->front_ids[0]) ++sliver;
                    return apply_coalescence(state, sliver);
                }
                return apply_boundary_hit(state, ev->kind == EventKind::BoundaryHitLeft ? End::Left
                                                                                       : End::Right);
            }();
            state = std::move(r.state);
            traj.events.push_back(r.event);
            checkpoint = state;
            next_check = state.t + opt.thresholds.steady_interval;
            continue;
        }
        if (state.t >= t_end - kTiny) {
            traj.termination = "t_end";
            break;
        }

        const auto est = stable_dt(state, opt.control);
        if (est.below_floor) {
            std::ostringstream msg;
            msg << "stable dt " << est.raw << " below dt_min " << opt.control.dt_min;
            blowup(msg.str());
            break;
        }
        double target = std::min({t_end, next_sample, next_check});
        if (next_snap < snaps.size() && snaps[next_snap] > state.t + kTiny) {
            target = std::min(target, snaps[next_snap]);
        }
        const double dt = std::min(est.dt, target - state.t);
        const bool lands = dt >= target - state.t;

        try {
            auto adv = advance(state, dt, opt.control);
            traj.rejections += adv.rejections;
            const bool halved = adv.dt_used < dt;
            state = std::move(adv.state);
            if (lands && !halved) state.t = target;
        } catch (const BlowupError& err) {
            blowup(err.what());
            break;
        }
        ++traj.steps;

        if (state.t >= next_sample - kTiny) {
            record(state);
            next_sample = grid_after(initial.t, opt.sample_interval, state.t);
        }
        take_snapshots(state);

        if (state.t >= next_check - kTiny) {
            const double rate = steady_rate(checkpoint, state);
            checkpoint = state;
            next_check = state.t + opt.thresholds.steady_interval;
            if (auto ev = detect(state, opt.thresholds, rate);
                ev && ev->kind == EventKind::SteadyStateReached &&
                traj.count(EventKind::SteadyStateReached) == 0) {
                traj.events.push_back(*ev);
                if (opt.stop_at_steady) {
                    traj.termination = "steady";
                    break;
                }
            }
        }
    }
    record(state);
    traj.final_state = state;
    return traj;
}

}  // namespace fbstefan
