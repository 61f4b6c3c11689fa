#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbstefan/fronttrack.hpp"
#include "fbstefan/model.hpp"
#include "fbstefan/trajectory.hpp"

namespace fbstefan {

/// Step steady state: rho1 on [0, s*), rho2 on (s*, 1].
struct SteadyStep {
    double s_star = 0.0;
    double rho_left = 0.0;
    double rho_right = 0.0;
};

/// Present exactly when rho1 < M < rho2, with s* = (rho2 - M) / (rho2 - rho1).
std::optional<SteadyStep> discontinuous_steady_state(double mass, const AdhesionModel& model);

/// The step as a front-tracking state with n_cells per phase.
SimState steady_step_state(const AdhesionModel& model, double s, int n_cells);

/// rho = M, present exactly when M <= rho_flat or M >= rho_sharp.
std::optional<double> uniform_steady_state(double mass, const AdhesionModel& model);

enum class Regime { Thm21_i, Thm21_ii, Thm21_iii, Thm21_iv, Uncovered1, Uncovered2 };
std::string to_string(Regime regime);

struct Attractor {
    enum class Kind { Uniform, Discontinuous } kind;
    double value;  // M for Uniform, s* for Discontinuous
};

struct FrontBounds {
    double s_min = 0.0;
    double s_max = 1.0;
    bool in_regime = false;  // rho_flat < M < rho_sharp, where the bounds are proved
};

/// Whether the single-front data stay on the mass side of M in each phase:
/// rho0 <= M throughout the low phase, rho0 >= M throughout the high phase.
struct RegimePredicates {
    bool low_phase_below_mass = true;
    bool high_phase_above_mass = true;
};

struct RegimeReport {
    double mass = 0.0;
    Regime tag = Regime::Thm21_i;
    std::vector<Attractor> attractors;
    std::optional<FrontBounds> bounds;
    /// Wall the front is driven into (low phase on the left) for iii / iv.
    std::optional<End> wall;
    bool finite_time_hit = false;  // guaranteed (iii) rather than possible (iv)
};

RegimeReport classify_regime(double mass, const RegimePredicates& predicates,
                             const AdhesionModel& model);

/// Predicates read off a single-front state.
RegimePredicates regime_predicates(const SimState& state);

/// s_min = (rho_sharp - M) / rho_sharp, s_max = (1 - M) / (1 - rho_flat).
/// Evaluated for any M; in_regime marks where they are guaranteed.
FrontBounds front_bounds(double mass, const AdhesionModel& model);

struct DecayFit {
    bool fitted = false;
    std::string reason;  // why not, when fitted is false
    double rate = 0.0;   // positive for decay
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t tail_begin = 0;
    std::size_t tail_size = 0;
    double floor_rate = 0.0;       // eps / L_max^2
    double linearized_rate = 0.0;  // D(plateau) (pi/2)^2 / L*^2
};

/// Least-squares fit of log y against t on the tail window: the last half of
/// the samples intersected with the longest strictly decreasing suffix.
DecayFit fit_exponential_tail(const std::vector<double>& t, const std::vector<double>& y,
                              std::size_t min_samples = 20);

/// Fit of the L2 distance to the plateau of one initial phase (0-based id),
/// with the reference rates for the single-front problem with the low phase
/// on the left. eps is the smallest diffusivity of the initial phase data.
DecayFit fit_decay_rate(const Trajectory& trajectory, std::size_t phase_index,
                        const AdhesionModel& model, double eps,
                        std::size_t min_samples = 20);

/// Smallest D over the nodes of a phase.
double min_phase_diffusivity(const SimState& state, std::size_t phase);

/// max over phases and interior nodes of |d sigma / dx| in physical units.
double sigma_sup_gradient(const SimState& state);

struct GradientSignReport {
    std::vector<bool> fronts;  // sign[rho]_i (sigma_x(s_i+) + sigma_x(s_i-)) >= 0
    std::vector<double> values;
    bool data_condition = false;  // rho <= rho1 in low phases, rho >= rho2 in high phases
    bool all() const;
};

GradientSignReport gradient_sign_condition(const SimState& state, double tolerance = 0.0);

/// Linearized decay rate of the slowest Neumann mode about the mean M.
double neumann_decay_rate(double mass, const AdhesionModel& model);

}  // namespace fbstefan
