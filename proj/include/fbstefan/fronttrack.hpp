#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbstefan/model.hpp"

namespace fbstefan {

enum class Stencil {
    RandomWalk,  // flux form of the biased random walk, lattice spacing = grid spacing
    CenteredK,   // centred second difference of K(rho); cross-check only
};

enum class End { Left, Right };

/// Density of one phase sampled at x_hat_j = j / N on the phase's rescaled
/// unit interval.
struct PhaseGrid {
    Branch kind = Branch::Low;
    std::vector<double> values;

    std::size_t n_cells() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    double spacing() const noexcept { return 1.0 / static_cast<double>(n_cells()); }
};

struct FrontState {
    std::vector<double> positions;
    std::vector<double> velocities;
};

/// One side of a phase: a front (Dirichlet, pinned to the plateau) or a wall
/// (homogeneous Neumann).
struct PhaseBoundary {
    double position = 0.0;
    double velocity = 0.0;
    bool wall = true;
};

/// Full state of the n-front problem. Phase i occupies [s_i, s_{i+1}] with the
/// virtual entries s_0 = 0 and s_{n+1} = 1. With no fronts the single phase is
/// the whole domain and evolves as the plain Neumann problem.
struct SimState {
    double t = 0.0;
    FrontState fronts;
    std::vector<int> front_ids;  // 1-based labels fixed at t = 0
    std::vector<PhaseGrid> phases;
    std::vector<int> phase_ids;  // 1-based labels fixed at t = 0; merges keep the left label
    AdhesionModel model;
    double mass0 = 0.0;

    std::size_t n_fronts() const noexcept { return fronts.positions.size(); }
    bool neumann_only() const noexcept { return fronts.positions.empty(); }
    double left_edge(std::size_t phase) const;
    double right_edge(std::size_t phase) const;
    double length(std::size_t phase) const { return right_edge(phase) - left_edge(phase); }
    PhaseBoundary left_boundary(std::size_t phase) const;
    PhaseBoundary right_boundary(std::size_t phase) const;
};

struct StepControl {
    double cfl_safety = 0.4;
    double dt_max = 1e-3;
    double dt_min = 1e-12;
    int max_rejections = 30;
    Stencil stencil = Stencil::RandomWalk;
};

/// Validates alternation, ordering, pinning and bands, pins the front-adjacent
/// nodes, and records the initial mass. Throws StructuralError / DomainError.
SimState make_state(const AdhesionModel& model, std::vector<double> fronts,
                    std::vector<PhaseGrid> phases, double t = 0.0);

/// Throws StructuralError describing the first violated invariant.
void validate_state(const SimState& state);

/// Second-order three-point one-sided difference in rescaled coordinates.
double one_sided_gradient(std::span<const double> values, End end);

/// Rate of change of every node of one phase. Pinned nodes get zero.
std::vector<double> phase_rhs(const PhaseGrid& phase, const PhaseBoundary& left,
                              const PhaseBoundary& right, const AdhesionModel& model,
                              Stencil stencil = Stencil::RandomWalk);

/// Rankine-Hugoniot velocity of every front from one-sided fluxes.
std::vector<double> interface_velocity(const SimState& state);

struct DtEstimate {
    double dt = 0.0;        // clamped to [dt_min, dt_max]
    double raw = 0.0;       // before clamping
    bool below_floor = false;
};

DtEstimate stable_dt(const SimState& state, const StepControl& control);

/// Explicit Euler step of all fields and fronts from the current velocities.
/// Returns nullopt (with `why` filled) when an invariant would be violated.
std::optional<SimState> try_step(const SimState& state, double dt, Stencil stencil,
                                 std::string* why = nullptr);

class BlowupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AdvanceResult {
    SimState state;
    double dt_used;
    int rejections;
};

/// try_step with dt halving on rejection. Throws BlowupError once dt drops
/// below control.dt_min or the rejection budget is spent.
AdvanceResult advance(const SimState& state, double dt, const StepControl& control);

/// One explicit conservative step of the Neumann problem on [0, 1].
std::vector<double> neumann_step(std::span<const double> profile, double dt,
                                 const AdhesionModel& model, Branch band,
                                 Stencil stencil = Stencil::RandomWalk);

/// Composite trapezoid over every phase, weighted by phase length.
double total_mass(const SimState& state);

/// Front position implied by mass conservation for a single-front state.
double front_from_mass(const SimState& state, double mass);

struct FrontCompatibility {
    double residual_minus = 0.0;
    double residual_plus = 0.0;
    bool pass = true;
};

struct CompatibilityReport {
    std::vector<FrontCompatibility> fronts;
    double tolerance = 0.0;
    bool pass = true;
};

/// First-order compatibility at each front, in temperature form:
///   sigma_x^pm (sigma_x^+ - sigma_x^-) = [rho] D(rho^pm) sigma_xx^pm.
CompatibilityReport check_compatibility(const SimState& state, double tolerance = 1e-6);

/// Physical coordinates and densities of every node, phase by phase. Nodes
/// shared by two phases appear twice (once per side of the jump).
struct Profile {
    std::vector<double> x;
    std::vector<double> rho;
};
Profile physical_profile(const SimState& state);

/// Exact integral of the piecewise-linear profile over [a, b].
double profile_integral(const SimState& state, double a, double b);

/// sqrt(L * int (v - target)^2 dx_hat) over one phase.
double phase_l2_distance(const SimState& state, std::size_t phase, double target);

}  // namespace fbstefan
