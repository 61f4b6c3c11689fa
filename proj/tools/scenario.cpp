#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "fbstefan/analysis.hpp"
#include "fbstefan/errors.hpp"
#include "presets.hpp"

namespace fbstefan::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Typed access to one JSON object, remembering which keys were read so that
// anything left over can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "(top level)" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        if (!has(key)) throw ConfigError(field(key), "required");
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(field(key), "required");
        }
        return as_number(raw(key), field(key));
    }

    std::optional<double> maybe_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(field(key), "required");
        }
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(as_number(v[i], field(key) + "[" + std::to_string(i) + "]"));
        }
        return out;
    }

    Level level(const std::string& key, std::optional<Level> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(field(key), "required");
        }
        return as_level(raw(key), field(key));
    }

    Section section(const std::string& key) { return Section(raw(key), field(key)); }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (item.key().starts_with("_") || used_.count(item.key())) continue;
            throw ConfigError(field(item.key()), "unknown key");
        }
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(where, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where, "expected a finite number");
        return d;
    }

    static Level as_level(const json& v, const std::string& where) {
        if (v.is_string()) {
            if (v.get<std::string>() != "plateau") {
                throw ConfigError(where, "expected a number or \"plateau\"");
            }
            return {true, 0.0};
        }
        return {false, as_number(v, where)};
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

ProfileSpec parse_profile(Section s) {
    ProfileSpec p;
    const std::string family = s.string("family");
    if (family == "constant") {
        p.family = ProfileSpec::Family::Constant;
        p.value = s.level("value");
    } else if (family == "linear") {
        p.family = ProfileSpec::Family::Linear;
        p.left = s.level("left");
        p.right = s.level("right");
    } else if (family == "cosine") {
        p.family = ProfileSpec::Family::Cosine;
        p.base = s.level("base", Level{true, 0.0});
        p.amplitude = s.number("amplitude");
        p.frequency = s.number("frequency", 0.5);
        p.phase = s.number("phase", 0.0);
    } else if (family == "table") {
        p.family = ProfileSpec::Family::Table;
        const auto& pts = s.raw("points");
        const std::string where = s.field("points");
        if (!pts.is_array() || pts.size() < 2) throw ConfigError(where, "expected at least two [x, value] pairs");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string at = where + "[" + std::to_string(i) + "]";
            if (!pts[i].is_array() || pts[i].size() != 2) throw ConfigError(at, "expected [x, value]");
            const double x = Section::as_number(pts[i][0], at + "[0]");
            if (x < 0.0 || x > 1.0) throw ConfigError(at + "[0]", "x must lie in [0, 1]");
            if (!p.table.empty() && !(x > p.table.back().first)) {
                throw ConfigError(at + "[0]", "x must increase strictly");
            }
            p.table.emplace_back(x, Section::as_level(pts[i][1], at + "[1]"));
        }
    } else {
        throw ConfigError(s.field("family"), "unknown family '" + family +
                                                 "' (constant, linear, cosine, table)");
    }
    s.finish();
    return p;
}

Branch parse_kind(Section& s) {
    const std::string k = s.string("kind");
    if (k == "low") return Branch::Low;
    if (k == "high") return Branch::High;
    throw ConfigError(s.field("kind"), "expected \"low\" or \"high\"");
}

std::string kind_label(Branch b) { return b == Branch::Low ? "low" : "high"; }

std::string num(double v) {
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
}

std::vector<double> sample_phase(const ProfileSpec& p, const AdhesionModel& m, Branch kind, int n) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) v[static_cast<std::size_t>(j)] = p(static_cast<double>(j) / n, m, kind);
    return v;
}

double trapezoid_mean(const std::vector<double>& v) {
    const std::size_t n = v.size() - 1;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t j = 1; j < n; ++j) s += v[j];
    return s / static_cast<double>(n);
}

bool one_phase(const SimState& s) {
    if (s.n_fronts() != 1 || s.phases[0].kind != Branch::Low) return false;
    const double r2 = s.model.rho2();
    return std::all_of(s.phases[1].values.begin(), s.phases[1].values.end(),
                       [&](double v) { return v == r2; });
}

json regime_json(const RegimeReport& r) {
    json a = json::array();
    for (const auto& at : r.attractors) {
        a.push_back({{"kind", at.kind == Attractor::Kind::Uniform ? "uniform" : "discontinuous"},
                     {at.kind == Attractor::Kind::Uniform ? "rho" : "s_star", at.value}});
    }
    json out{{"tag", to_string(r.tag)}, {"mass", r.mass}, {"attractors", a},
             {"finite_time_hit", r.finite_time_hit}};
    out["bounds"] = r.bounds ? json{{"s_min", r.bounds->s_min}, {"s_max", r.bounds->s_max}}
                             : json(nullptr);
    out["wall"] = r.wall ? json(*r.wall == End::Left ? "x=0" : "x=1") : json(nullptr);
    return out;
}

json fit_json(const DecayFit& f) {
    json j{{"fitted", f.fitted}, {"rate", f.rate}, {"r_squared", f.r_squared},
           {"tail_size", f.tail_size}};
    if (!f.fitted) j["reason"] = f.reason;
    return j;
}

// Worst |s_a - s_b| over sample times both series share, comparing the live
// fronts in order when the counts agree.
struct Discrepancy {
    double worst = 0.0;
    std::size_t compared = 0;
    std::size_t count_mismatches = 0;
};

template <class GetFronts>
Discrepancy compare_fronts(const Trajectory& tr, std::size_t n_samples, GetFronts other) {
    Discrepancy d;
    std::size_t k = 0;
    for (const auto& smp : tr.samples) {
        while (k < n_samples && other(k).first < smp.t - 1e-9) ++k;
        if (k >= n_samples) break;
        if (std::abs(other(k).first - smp.t) > 1e-9) continue;
        std::vector<double> live;
        for (double s : smp.fronts) {
            if (!std::isnan(s)) live.push_back(s);
        }
        const auto& theirs = other(k).second;
        if (theirs.size() != live.size()) {
            ++d.count_mismatches;
            continue;
        }
        for (std::size_t i = 0; i < live.size(); ++i) d.worst = std::max(d.worst, std::abs(live[i] - theirs[i]));
        ++d.compared;
    }
    return d;
}

std::size_t annihilations(const Trajectory& tr) {
    return tr.count(EventKind::Coalescence) + tr.count(EventKind::BoundaryHitLeft) +
           tr.count(EventKind::BoundaryHitRight);
}

std::optional<double> first_annihilation(const Trajectory& tr) {
    for (const auto& e : tr.events) {
        if (e.kind == EventKind::Coalescence || e.kind == EventKind::BoundaryHitLeft ||
            e.kind == EventKind::BoundaryHitRight) {
            return e.time;
        }
    }
    return std::nullopt;
}

json build_report(const ScenarioResult& r) {
    const auto& cfg = r.config;
    const auto& st = r.initial;
    const auto& m = st.model;
    json rep;
    rep["scenario"] = cfg.name;
    rep["description"] = cfg.description;
    rep["solver"] = to_string(cfg.solver);
    rep["model"] = {{"alpha", m.alpha()}, {"rho1", m.rho1()}, {"rho2", m.rho2()},
                    {"rho_flat", m.rho_flat()}, {"rho_sharp", m.rho_sharp()},
                    {"sigma_bar", m.sigma_bar()}};

    json init{{"fronts", st.fronts.positions}, {"mass", st.mass0},
              {"cells_per_phase", cfg.cells_per_phase}};
    if (st.n_fronts() > 0) {
        const auto comp = check_compatibility(st, cfg.compatibility_tol);
        json cf = json::array();
        for (const auto& f : comp.fronts) {
            cf.push_back({{"residual_minus", f.residual_minus}, {"residual_plus", f.residual_plus},
                          {"pass", f.pass}});
        }
        init["compatibility"] = {{"pass", comp.pass}, {"tolerance", comp.tolerance}, {"fronts", cf}};
        const auto gs = gradient_sign_condition(st);
        init["gradient_sign"] = {{"fronts", gs.fronts}, {"values", gs.values},
                                 {"data_condition", gs.data_condition}};
    }
    rep["initial"] = init;

    const double mass = st.mass0;
    if (st.n_fronts() == 1) {
        rep["regime"] = regime_json(classify_regime(mass, regime_predicates(st), m));
    } else {
        rep["regime"] = nullptr;
    }
    const auto step = discontinuous_steady_state(mass, m);
    const auto uni = uniform_steady_state(mass, m);
    rep["steady_targets"] = {{"s_star", step ? json(step->s_star) : json(nullptr)},
                             {"uniform", uni ? json(*uni) : json(nullptr)}};

    if (r.trajectory) {
        const auto& tr = *r.trajectory;
        json run{{"termination", tr.termination},
                 {"t_final", tr.samples.empty() ? 0.0 : tr.samples.back().t},
                 {"steps", tr.steps},
                 {"rejections", tr.rejections},
                 {"samples", tr.samples.size()}};
        run["steady_time"] = nullptr;
        for (const auto& e : tr.events) {
            if (e.kind == EventKind::SteadyStateReached) run["steady_time"] = e.time;
        }
        rep["run"] = run;

        double defect = 0.0;
        for (const auto& e : tr.events) defect += std::abs(e.mass_defect);
        const auto first = first_annihilation(tr);
        rep["events"] = {{"coalescence", tr.count(EventKind::Coalescence)},
                         {"boundary_hit_left", tr.count(EventKind::BoundaryHitLeft)},
                         {"boundary_hit_right", tr.count(EventKind::BoundaryHitRight)},
                         {"blowup", tr.count(EventKind::Blowup)},
                         {"annihilation_time", first ? json(*first) : json(nullptr)},
                         {"total_abs_mass_defect", defect}};

        json fin;
        if (tr.final_state) {
            fin["fronts"] = tr.final_state->fronts.positions;
            fin["mass"] = total_mass(*tr.final_state);
        }
        fin["outcome"] = final_outcome(tr);
        if (step && tr.final_state && tr.final_state->n_fronts() == 1) {
            fin["distance_to_s_star"] = std::abs(tr.final_state->fronts.positions[0] - step->s_star);
        }
        rep["final"] = fin;

        // Rates: single-front fits when no front vanished, the Neumann fit
        // over the tail after full annihilation.
        json decay = json::array();
        if (tr.initial_fronts == 1 && tr.initial_kinds[0] == Branch::Low && annihilations(tr) == 0) {
            for (std::size_t p = 0; p < 2; ++p) {
                const auto f = fit_decay_rate(tr, p, m, tr.initial_min_diffusivity[p]);
                json j = fit_json(f);
                j["phase"] = p + 1;
                j["floor_rate"] = f.floor_rate;
                j["linearized_rate"] = f.linearized_rate;
                j["linearized_reference"] = "slowest mixed Neumann/Dirichlet mode";
                decay.push_back(j);
            }
        }
        rep["decay"] = decay;
        if (tr.final_state && tr.final_state->neumann_only() && annihilations(tr) > 0) {
            const double t0 = tr.events.back().time;
            const int id = tr.final_state->phase_ids[0];
            std::vector<double> t, y;
            for (const auto& smp : tr.samples) {
                if (smp.t > t0) {
                    t.push_back(smp.t);
                    y.push_back(smp.l2[static_cast<std::size_t>(id - 1)]);
                }
            }
            const double mf = total_mass(*tr.final_state);
            json j = fit_json(fit_exponential_tail(t, y));
            j["mass"] = mf;
            j["reference_rate"] = neumann_decay_rate(mf, m);
            // mirror-symmetric data carries no cos(pi x) component
            j["reference_rate_second_mode"] = 4.0 * neumann_decay_rate(mf, m);
            rep["neumann_decay"] = j;
        }

        double worst_rise = 0.0;
        for (std::size_t k = 1; k < tr.samples.size(); ++k) {
            bool crossed = false;
            for (const auto& e : tr.events) {
                crossed = crossed || (e.time > tr.samples[k - 1].t - 1e-12 && e.time <= tr.samples[k].t);
            }
            if (crossed) continue;
            worst_rise = std::max(worst_rise, tr.samples[k].sigma_grad_sup - tr.samples[k - 1].sigma_grad_sup);
        }
        json mon{{"sigma_grad_sup_initial", tr.samples.front().sigma_grad_sup},
                 {"sigma_grad_sup_max_rise", worst_rise}};
        if (st.n_fronts() == 1) {
            const auto b = front_bounds(mass, m);
            if (b.in_regime) {
                bool inside = true;
                for (const auto& smp : tr.samples) {
                    const double s = smp.fronts[0];
                    if (!std::isnan(s)) inside = inside && s >= b.s_min && s <= b.s_max;
                }
                mon["front_within_bounds"] = inside;
            }
        }
        rep["monitors"] = mon;
    }

    json cross = json::object();
    if (r.enthalpy) {
        const auto& er = *r.enthalpy;
        const double h = 1.0 / static_cast<double>(er.final_grid.n_cells());
        json e{{"cells", er.final_grid.n_cells()}, {"max_step_mass_change", er.max_step_mass_change},
               {"final_fronts", er.samples.back().fronts}};
        if (r.trajectory) {
            const auto d = compare_fronts(*r.trajectory, er.samples.size(), [&](std::size_t k) {
                return std::pair<double, const std::vector<double>&>(er.samples[k].t, er.samples[k].fronts);
            });
            e["max_front_discrepancy"] = d.worst;
            e["discrepancy_in_cells"] = d.worst / h;
            e["compared_samples"] = d.compared;
            e["front_count_mismatches"] = d.count_mismatches;
        }
        cross["enthalpy"] = e;
    }
    if (r.lagrange) {
        const auto& lr = *r.lagrange;
        bool hit = false;
        for (const auto& s : lr.samples) hit = hit || s.hit_wall;
        json l{{"cells", lr.final_field.n_cells()}, {"y0", lr.final_field.y0},
               {"final_front", lr.samples.back().s}, {"hit_wall", hit}};
        if (r.trajectory) {
            std::vector<std::vector<double>> fr;
            for (const auto& s : lr.samples) fr.push_back({s.s});
            const auto d = compare_fronts(*r.trajectory, lr.samples.size(), [&](std::size_t k) {
                return std::pair<double, const std::vector<double>&>(lr.samples[k].t, fr[k]);
            });
            const double cell = st.fronts.positions[0] / cfg.cells_per_phase;
            l["max_front_discrepancy"] = d.worst;
            l["discrepancy_in_cells"] = d.worst / cell;
            l["compared_samples"] = d.compared;
        }
        cross["lagrange"] = l;
    }
    if (cfg.solver == Solver::Paired) {
        if (!r.enthalpy) cross["enthalpy_skipped"] = "initial data outside [0, rho1] / [rho2, 1]";
        if (!r.lagrange) cross["lagrange_skipped"] = "not a one-phase problem";
    }
    rep["cross_validation"] = cross;
    return rep;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string front_header(std::size_t n) {
    std::string h = "t";
    for (std::size_t i = 1; i <= n; ++i) h += ",s_" + std::to_string(i);
    return h + "\n";
}

}  // namespace

std::string to_string(Solver s) {
    switch (s) {
        case Solver::FrontTrack: return "fronttrack";
        case Solver::Enthalpy: return "enthalpy";
        case Solver::Lagrange: return "lagrange";
        case Solver::Paired: return "paired";
    }
    return "?";
}

Solver solver_from_string(const std::string& name, const std::string& field) {
    if (name == "fronttrack") return Solver::FrontTrack;
    if (name == "enthalpy") return Solver::Enthalpy;
    if (name == "lagrange") return Solver::Lagrange;
    if (name == "paired") return Solver::Paired;
    throw ConfigError(field, "unknown solver '" + name + "' (fronttrack, enthalpy, lagrange, paired)");
}

double ProfileSpec::operator()(double x, const AdhesionModel& m, Branch kind) const {
    switch (family) {
        case Family::Constant: return value.resolve(m, kind);
        case Family::Linear: {
            const double a = left.resolve(m, kind), b = right.resolve(m, kind);
            return a + (b - a) * x;
        }
        case Family::Cosine:
            return base.resolve(m, kind) +
                   amplitude * std::cos(std::numbers::pi * (frequency * x + phase));
        case Family::Table: {
            if (x <= table.front().first) return table.front().second.resolve(m, kind);
            for (std::size_t k = 1; k < table.size(); ++k) {
                if (x <= table[k].first) {
                    const double w = (x - table[k - 1].first) / (table[k].first - table[k - 1].first);
                    return (1.0 - w) * table[k - 1].second.resolve(m, kind) +
                           w * table[k].second.resolve(m, kind);
                }
            }
            return table.back().second.resolve(m, kind);
        }
    }
    return kNaN;
}

json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col),
                          "parse error: " + std::string(e.what()));
    }
}

ScenarioConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(parse_text(buf.str(), path.string()));
}

AdhesionModel make_model(const ScenarioConfig& c) {
    try {
        if (c.rho1 || c.rho2) {
            if (!(c.rho1 && c.rho2)) throw DomainError("rho1 and rho2 must be given together");
            return AdhesionModel::with_plateaus(c.alpha, *c.rho1, *c.rho2);
        }
        return AdhesionModel::from_alpha(c.alpha);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("model", e.what());
    }
}

ScenarioConfig parse_config(const json& doc) {
    ScenarioConfig c;
    c.source = doc;
    Section top(doc, "");
    if (top.has("sweep")) throw ConfigError("sweep", "this is a sweep document; use the sweep verb");
    c.name = top.string("name", std::string("scenario"));
    c.description = top.string("description", std::string());

    {
        Section s = top.section("model");
        c.alpha = s.number("alpha");
        c.rho1 = s.maybe_number("rho1");
        c.rho2 = s.maybe_number("rho2");
        s.finish();
    }
    {
        Section s = top.section("initial");
        c.fronts = s.numbers("fronts", {});
        c.target_mass = s.maybe_number("target_mass");
        const auto& ph = s.raw("phases");
        if (!ph.is_array()) throw ConfigError(s.field("phases"), "expected an array");
        for (std::size_t i = 0; i < ph.size(); ++i) {
            Section p(ph[i], s.field("phases") + "[" + std::to_string(i) + "]");
            PhaseSpec spec;
            spec.kind = parse_kind(p);
            spec.profile = parse_profile(p.section("profile"));
            p.finish();
            c.phases.push_back(spec);
        }
        s.finish();
    }
    if (top.has("numerics")) {
        Section s = top.section("numerics");
        c.cells_per_phase = s.integer("cells_per_phase", c.cells_per_phase);
        if (c.cells_per_phase < 3) throw ConfigError(s.field("cells_per_phase"), "must be at least 3");
        c.control.cfl_safety = s.number("cfl_safety", c.control.cfl_safety);
        c.control.dt_max = s.number("dt_max", c.control.dt_max);
        c.control.dt_min = s.number("dt_min", c.control.dt_min);
        c.control.max_rejections = s.integer("max_rejections", c.control.max_rejections);
        const std::string stencil = s.string("stencil", std::string("random_walk"));
        if (stencil == "random_walk") {
            c.control.stencil = Stencil::RandomWalk;
        } else if (stencil == "centered") {
            c.control.stencil = Stencil::CenteredK;
        } else {
            throw ConfigError(s.field("stencil"), "expected \"random_walk\" or \"centered\"");
        }
        c.enthalpy_cells = s.integer("enthalpy_cells", 0);
        c.lagrange_cells = s.integer("lagrange_cells", 0);
        if (c.enthalpy_cells < 0 || c.enthalpy_cells == 1) {
            throw ConfigError(s.field("enthalpy_cells"), "must be 0 (automatic) or at least 2");
        }
        if (c.lagrange_cells < 0 || c.lagrange_cells == 1) {
            throw ConfigError(s.field("lagrange_cells"), "must be 0 (automatic) or at least 2");
        }
        if (!(c.control.cfl_safety > 0.0 && c.control.cfl_safety < 1.0)) {
            throw ConfigError(s.field("cfl_safety"), "must lie in (0, 1)");
        }
        if (!(c.control.dt_min > 0.0 && c.control.dt_min <= c.control.dt_max)) {
            throw ConfigError(s.field("dt_min"), "need 0 < dt_min <= dt_max");
        }
        s.finish();
    }
    c.thresholds = EventThresholds::for_resolution(c.cells_per_phase);
    if (top.has("events")) {
        Section s = top.section("events");
        c.thresholds.eps_boundary = s.number("eps_boundary", c.thresholds.eps_boundary);
        c.thresholds.eps_collide = s.number("eps_collide", c.thresholds.eps_collide);
        c.thresholds.steady_tol = s.number("steady_tol", c.thresholds.steady_tol);
        c.thresholds.steady_interval = s.number("steady_interval", c.thresholds.steady_interval);
        c.thresholds.t_safeguard = s.number("t_safeguard", c.thresholds.t_safeguard);
        try {
            c.thresholds.validate();
        } catch (const std::exception& e) {
            throw ConfigError("events", e.what());
        }
        s.finish();
    }
    if (top.has("run")) {
        Section s = top.section("run");
        c.t_end = s.number("t_end", c.t_end);
        c.sample_interval = s.number("sample_interval", c.sample_interval);
        c.snapshot_times = s.numbers("snapshot_times", {});
        c.solver = solver_from_string(s.string("solver", std::string("fronttrack")), s.field("solver"));
        c.stop_at_steady = s.boolean("stop_at_steady", c.stop_at_steady);
        c.require_compatibility = s.boolean("require_compatibility", c.require_compatibility);
        c.compatibility_tol = s.number("compatibility_tol", c.compatibility_tol);
        if (!(c.t_end > 0.0)) throw ConfigError(s.field("t_end"), "must be positive");
        if (!(c.sample_interval > 0.0)) throw ConfigError(s.field("sample_interval"), "must be positive");
        for (double t : c.snapshot_times) {
            if (t < 0.0 || t > c.t_end) throw ConfigError(s.field("snapshot_times"), "times must lie in [0, t_end]");
        }
        s.finish();
    }
    if (top.has("output")) {
        Section s = top.section("output");
        c.output_dir = s.string("directory", c.output_dir);
        c.write_snapshots = s.boolean("snapshots", c.write_snapshots);
        s.finish();
    }
    top.finish();

    build_state(c);  // band, order and mass checks
    return c;
}

SimState build_state(const ScenarioConfig& c) {
    const AdhesionModel m = make_model(c);
    const std::size_t nf = c.fronts.size();
    if (c.phases.size() != nf + 1) {
        throw ConfigError("initial.phases", "expected " + std::to_string(nf + 1) + " phases for " +
                                                std::to_string(nf) + " fronts, got " +
                                                std::to_string(c.phases.size()));
    }
    for (std::size_t i = 1; i < c.phases.size(); ++i) {
        if (c.phases[i].kind == c.phases[i - 1].kind) {
            throw ConfigError("initial.phases[" + std::to_string(i) + "].kind",
                              "phases must alternate between low and high");
        }
    }
    for (std::size_t i = 0; i < nf; ++i) {
        const double s = c.fronts[i];
        if (!(s > 0.0 && s < 1.0)) {
            throw ConfigError("initial.fronts[" + std::to_string(i) + "]", "front " + num(s) + " outside (0, 1)");
        }
        if (i > 0 && !(s > c.fronts[i - 1])) {
            throw ConfigError("initial.fronts[" + std::to_string(i) + "]",
                              "fronts must increase strictly (" + num(c.fronts[i - 1]) + " then " + num(s) + ")");
        }
    }

    std::vector<PhaseGrid> grids;
    for (std::size_t i = 0; i < c.phases.size(); ++i) {
        const auto& spec = c.phases[i];
        auto v = sample_phase(spec.profile, m, spec.kind, c.cells_per_phase);
        const double plateau = m.plateau(spec.kind);
        if (i > 0) v.front() = plateau;
        if (i < nf) v.back() = plateau;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (!(v[j] >= 0.0 && v[j] <= 1.0 && m.in_band(v[j], spec.kind))) {
                const std::string band = spec.kind == Branch::Low
                                             ? "[0, rho_flat = " + num(m.rho_flat()) + ")"
                                             : "(rho_sharp = " + num(m.rho_sharp()) + ", 1]";
                throw ConfigError("initial.phases[" + std::to_string(i) + "].profile",
                                  kind_label(spec.kind) + " phase value " + num(v[j]) + " at x_hat = " +
                                      num(static_cast<double>(j) / c.cells_per_phase) +
                                      " outside its band " + band);
            }
        }
        grids.push_back(PhaseGrid{spec.kind, std::move(v)});
    }

    std::vector<double> fronts = c.fronts;
    if (c.target_mass) {
        if (nf != 1) throw ConfigError("initial.target_mass", "needs exactly one front");
        const double ml = trapezoid_mean(grids[0].values), mr = trapezoid_mean(grids[1].values);
        const double s = (*c.target_mass - mr) / (ml - mr);
        if (!(s > 0.0 && s < 1.0)) {
            throw ConfigError("initial.target_mass",
                              "no front position in (0, 1) gives mass " + num(*c.target_mass) +
                                  " with these profiles (reachable: between " + num(std::min(ml, mr)) +
                                  " and " + num(std::max(ml, mr)) + ")");
        }
        fronts[0] = s;
    }
    try {
        return make_state(m, fronts, std::move(grids));
    } catch (const StructuralError& e) {
        throw ConfigError("initial", e.what());
    }
}

std::string final_outcome(const Trajectory& tr) {
    if (!tr.final_state) return "running";
    if (tr.final_state->neumann_only()) return "uniform";
    if (tr.termination == "steady") return "discontinuous";
    if (tr.termination != "t_end") return "running";
    // Still decaying towards the plateaus over the second half of the run
    // since the last topology change.
    double t0 = tr.samples.front().t;
    for (const auto& e : tr.events) {
        if (e.kind != EventKind::SteadyStateReached) t0 = std::max(t0, e.time);
    }
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        if (tr.samples[k].t > t0) idx.push_back(k);
    }
    if (idx.size() < 4) return "running";
    const auto& first = tr.samples[idx[idx.size() / 2]];
    const auto& last = tr.samples[idx.back()];
    for (int id : tr.final_state->phase_ids) {
        const auto p = static_cast<std::size_t>(id - 1);
        const double a = first.l2[p], b = last.l2[p];
        if (!(b < 1e-8 || b <= 0.95 * a)) return "running";
    }
    return "discontinuous";
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    ScenarioResult r{cfg, build_state(cfg), {}, {}, {}, {}, false};
    const auto& m = r.initial.model;

    if (cfg.solver == Solver::FrontTrack || cfg.solver == Solver::Paired) {
        RunOptions opt;
        opt.control = cfg.control;
        opt.thresholds = cfg.thresholds;
        opt.t_end = cfg.t_end;
        opt.sample_interval = cfg.sample_interval;
        opt.snapshot_times = cfg.snapshot_times;
        opt.require_compatibility = cfg.require_compatibility;
        opt.compatibility_tol = cfg.compatibility_tol;
        opt.stop_at_steady = cfg.stop_at_steady;
        r.trajectory = run(r.initial, opt);
        r.blowup = r.trajectory->termination == "blowup";
    }
    // The enthalpy form only matches front tracking when low phases sit at
    // or below rho1 and high phases at or above rho2.
    const bool enthalpy_ok = r.initial.n_fronts() == 0 || gradient_sign_condition(r.initial).data_condition;
    if (cfg.solver == Solver::Enthalpy || (cfg.solver == Solver::Paired && enthalpy_ok)) {
        const int n = cfg.enthalpy_cells > 0
                          ? cfg.enthalpy_cells
                          : cfg.cells_per_phase * static_cast<int>(r.initial.phases.size());
        r.enthalpy = run_enthalpy(enthalpy_from_state(r.initial, n), m, cfg.t_end, cfg.sample_interval);
    }
    const bool lagrange_ok = one_phase(r.initial);
    if (cfg.solver == Solver::Lagrange && !lagrange_ok) {
        throw ConfigError("run.solver", "lagrange needs one front, low phase on the left and a high "
                                        "phase held at rho2");
    }
    if (cfg.solver == Solver::Lagrange || (cfg.solver == Solver::Paired && lagrange_ok)) {
        const int n = cfg.lagrange_cells > 0 ? cfg.lagrange_cells : cfg.cells_per_phase;
        const auto field = lagrange_transform(r.initial.phases[0].values, r.initial.fronts.positions[0], m, n);
        r.lagrange = run_lagrange(field, m, cfg.t_end, cfg.sample_interval);
    }
    r.report = build_report(r);
    return r;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<fs::path> emit_outputs(const ScenarioResult& r, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    std::vector<fs::path> written;
    auto put = [&](const fs::path& p, const std::string& text) {
        write_text(p, text);
        written.push_back(p);
    };
    const std::size_t nf = r.initial.n_fronts();

    if (r.trajectory) {
        const auto& tr = *r.trajectory;
        std::string fronts = front_header(tr.initial_fronts);
        std::string diag = "t,mass,sigma_grad_sup";
        for (std::size_t p = 1; p <= tr.initial_phases; ++p) diag += ",l2_phase_" + std::to_string(p);
        diag += "\n";
        for (const auto& smp : tr.samples) {
            fronts += format_number(smp.t);
            for (double s : smp.fronts) fronts += "," + format_number(s);
            fronts += "\n";
            diag += format_number(smp.t) + "," + format_number(smp.mass) + "," + format_number(smp.sigma_grad_sup);
            for (double l : smp.l2) diag += "," + format_number(l);
            diag += "\n";
        }
        put(dir / "fronts.csv", fronts);
        put(dir / "diagnostics.csv", diag);

        std::string events;
        for (const auto& e : tr.events) {
            if (e.kind == EventKind::SteadyStateReached) continue;  // reported as termination
            json j{{"kind", to_string(e.kind)}, {"time", e.time},
                   {"location", e.location ? json(*e.location) : json(nullptr)},
                   {"mass_defect", e.mass_defect}, {"front_ids", e.front_ids}};
            if (e.kind == EventKind::Blowup) j["diagnostics"] = e.diagnostics;
            events += j.dump() + "\n";
        }
        put(dir / "events.jsonl", events);

        if (r.config.write_snapshots && !tr.snapshots.empty()) {
            const fs::path sdir = dir / "snapshots";
            fs::create_directories(sdir, ec);
            if (ec) throw std::runtime_error("cannot create " + sdir.string() + ": " + ec.message());
            std::string index = "index,t,file\n";
            for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
                std::string text = "x,rho\n";
                const auto& p = tr.snapshots[k].profile;
                for (std::size_t j = 0; j < p.x.size(); ++j) {
                    text += format_number(p.x[j]) + "," + format_number(p.rho[j]) + "\n";
                }
                put(sdir / name, text);
                index += std::to_string(k) + "," + format_number(tr.snapshots[k].t) + "," + name + "\n";
            }
            put(sdir / "index.csv", index);
        }
    }

    auto enthalpy_fronts = [&](const EnthalpyRun& er) {
        std::size_t cols = nf;
        for (const auto& s : er.samples) cols = std::max(cols, s.fronts.size());
        std::string text = front_header(cols);
        for (const auto& s : er.samples) {
            text += format_number(s.t);
            for (std::size_t i = 0; i < cols; ++i) {
                text += "," + format_number(i < s.fronts.size() ? s.fronts[i] : kNaN);
            }
            text += "\n";
        }
        return text;
    };
    auto lagrange_fronts = [&](const LagrangeRun& lr) {
        std::string text = front_header(1);
        for (const auto& s : lr.samples) text += format_number(s.t) + "," + format_number(s.s) + "\n";
        return text;
    };

    if (r.enthalpy) {
        const auto& er = *r.enthalpy;
        if (r.trajectory) {
            put(dir / "enthalpy_fronts.csv", enthalpy_fronts(er));
        } else {
            put(dir / "fronts.csv", enthalpy_fronts(er));
            std::string diag = "t,mass\n";
            for (const auto& s : er.samples) diag += format_number(s.t) + "," + format_number(s.mass) + "\n";
            put(dir / "diagnostics.csv", diag);
            put(dir / "events.jsonl", "");
        }
    }
    if (r.lagrange) {
        const auto& lr = *r.lagrange;
        if (r.trajectory || r.enthalpy) {
            put(dir / "lagrange_fronts.csv", lagrange_fronts(lr));
        } else {
            put(dir / "fronts.csv", lagrange_fronts(lr));
            std::string diag = "t,v_min,v_max,hit_wall\n";
            std::string events;
            bool hit = false;
            for (const auto& s : lr.samples) {
                diag += format_number(s.t) + "," + format_number(s.v_min) + "," + format_number(s.v_max) +
                        "," + (s.hit_wall ? "1" : "0") + "\n";
                if (s.hit_wall && !hit) {
                    hit = true;
                    events += json{{"kind", "BoundaryHitRight"}, {"time", s.t}, {"location", 1.0},
                                   {"mass_defect", 0.0}, {"front_ids", {1}}}
                                  .dump() +
                              "\n";
                }
            }
            put(dir / "diagnostics.csv", diag);
            put(dir / "events.jsonl", events);
        }
    }
    put(dir / "report.json", r.report.dump(2) + "\n");
    return written;
}

std::vector<SweepRow> run_sweep(const json& doc, unsigned threads) {
    Section top(doc, "");
    top.string("name", std::string());
    top.string("description", std::string());
    Section sw = top.section("sweep");
    top.finish();

    json base;
    const auto& b = sw.raw("base");
    if (b.is_string()) {
        const Preset* p = find_preset(b.get<std::string>());
        if (!p) throw ConfigError(sw.field("base"), "no preset named '" + b.get<std::string>() + "'");
        base = p->doc;
    } else if (b.is_object()) {
        base = b;
    } else {
        throw ConfigError(sw.field("base"), "expected a preset name or a scenario object");
    }

    auto check_overrides = [&](const json& o, const std::string& where) {
        if (!o.is_object()) throw ConfigError(where, "expected an object of JSON pointer -> value");
        for (const auto& item : o.items()) {
            try {
                (void)json::json_pointer(item.key());
            } catch (const json::exception& e) {
                throw ConfigError(where + "." + item.key(), e.what());
            }
        }
    };
    json common = json::object();
    if (sw.has("overrides")) {
        common = sw.raw("overrides");
        check_overrides(common, sw.field("overrides"));
    }
    std::vector<json> cases;
    if (sw.has("cases")) {
        const auto& cs = sw.raw("cases");
        if (!cs.is_array()) throw ConfigError(sw.field("cases"), "expected an array");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            check_overrides(cs[i], sw.field("cases") + "[" + std::to_string(i) + "]");
            cases.push_back(cs[i]);
        }
    }
    if (cases.empty()) cases.push_back(json::object());

    std::vector<std::pair<std::string, std::vector<json>>> axes;
    if (sw.has("grid")) {
        const auto& g = sw.raw("grid");
        if (!g.is_array()) throw ConfigError(sw.field("grid"), "expected an array of {pointer, values}");
        for (std::size_t i = 0; i < g.size(); ++i) {
            Section ax(g[i], sw.field("grid") + "[" + std::to_string(i) + "]");
            const std::string ptr = ax.string("pointer");
            const auto& vals = ax.raw("values");
            if (!vals.is_array() || vals.empty()) throw ConfigError(ax.field("values"), "expected a non-empty array");
            ax.finish();
            check_overrides(json{{ptr, 0}}, ax.field("pointer"));
            axes.emplace_back(ptr, std::vector<json>(vals.begin(), vals.end()));
        }
    }
    sw.finish();

    // rows: cases x cartesian product of the axes, last axis fastest
    std::vector<json> rows;
    for (const auto& c : cases) {
        std::vector<std::size_t> pos(axes.size(), 0);
        while (true) {
            json o = c;
            for (std::size_t a = 0; a < axes.size(); ++a) o[axes[a].first] = axes[a].second[pos[a]];
            rows.push_back(o);
            // odometer step; done once the first axis wraps
            bool done = true;
            for (std::size_t a = axes.size(); a-- > 0;) {
                if (++pos[a] < axes[a].second.size()) {
                    done = false;
                    break;
                }
                pos[a] = 0;
            }
            if (done) break;
        }
    }

    auto run_row = [&](std::size_t index, const json& overrides) {
        SweepRow row;
        row.index = index;
        row.overrides = overrides;
        try {
            json d = base;
            for (const auto& item : common.items()) d[json::json_pointer(item.key())] = item.value();
            for (const auto& item : overrides.items()) d[json::json_pointer(item.key())] = item.value();
            const auto cfg = parse_config(d);
            const auto res = run_scenario(cfg);
            row.regime = res.report["regime"].is_null() ? "n/a" : res.report["regime"]["tag"].get<std::string>();
            if (res.trajectory) {
                const auto& tr = *res.trajectory;
                row.outcome = final_outcome(tr);
                for (const auto& e : tr.events) {
                    if (e.kind != EventKind::SteadyStateReached) ++row.events;
                }
                row.coalescences = tr.count(EventKind::Coalescence);
                row.boundary_hits = tr.count(EventKind::BoundaryHitLeft) + tr.count(EventKind::BoundaryHitRight);
                row.annihilation_time = first_annihilation(tr);
            } else {
                row.outcome = "n/a";
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        return row;
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepRow> out(rows.size());
    for (std::size_t start = 0; start < rows.size(); start += threads) {
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t k = start; k < std::min(rows.size(), start + threads); ++k) {
            batch.push_back(std::async(std::launch::async, run_row, k, rows[k]));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) out[start + k] = batch[k].get();
    }
    return out;
}

void write_sweep(const std::vector<SweepRow>& rows, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    std::string csv = "row,overrides,regime,outcome,events,coalescences,boundary_hits,annihilation_time,error\n";
    json all = json::array();
    for (const auto& r : rows) {
        std::string ov = r.overrides.dump();
        std::string quoted = "\"";
        for (char ch : ov) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        quoted += "\"";
        std::string err = "\"";
        for (char ch : r.error) err += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        err += "\"";
        csv += std::to_string(r.index) + "," + quoted + "," + r.regime + "," + r.outcome + "," +
               std::to_string(r.events) + "," + std::to_string(r.coalescences) + "," +
               std::to_string(r.boundary_hits) + "," +
               (r.annihilation_time ? format_number(*r.annihilation_time) : std::string("NaN")) + "," + err +
               "\n";
        all.push_back({{"row", r.index},
                       {"overrides", r.overrides},
                       {"regime", r.regime},
                       {"outcome", r.outcome},
                       {"events", r.events},
                       {"coalescences", r.coalescences},
                       {"boundary_hits", r.boundary_hits},
                       {"annihilation_time", r.annihilation_time ? json(*r.annihilation_time) : json(nullptr)},
                       {"error", r.error.empty() ? json(nullptr) : json(r.error)}});
    }
    write_text(dir / "sweep.csv", csv);
    write_text(dir / "sweep.json", all.dump(2) + "\n");
}

}  // namespace fbstefan::cli
