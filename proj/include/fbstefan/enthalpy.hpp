#pragma once

#include <vector>

#include "fbstefan/fronttrack.hpp"
#include "fbstefan/model.hpp"

namespace fbstefan {

// Density on the nodes x_j = j / N of [0, 1]. Node j owns the control volume
// [x_j - h/2, x_j + h/2] clipped to the domain.
struct EnthalpyGrid {
    double t = 0.0;
    std::vector<double> rho;

    std::size_t n_cells() const noexcept { return rho.empty() ? 0 : rho.size() - 1; }
    double spacing() const noexcept { return 1.0 / static_cast<double>(n_cells()); }
    double x(std::size_t j) const noexcept { return static_cast<double>(j) * spacing(); }
};

/// Control-volume averages of a front-tracking state, so both carry the same mass.
EnthalpyGrid enthalpy_from_state(const SimState& state, int n_cells);

/// Trapezoid mass, which the zero-flux update conserves exactly.
double enthalpy_mass(const EnthalpyGrid& grid);

bool is_mushy(double rho, const AdhesionModel& model) noexcept;

/// h^2 / (2 sup K~') over the density range the grid attains.
double enthalpy_stable_dt(const EnthalpyGrid& grid, const AdhesionModel& model);

/// rho_j += dt/h^2 (K~(rho_{j+1}) - 2 K~(rho_j) + K~(rho_{j-1})), mirrored ends.
/// Throws CflViolation when dt exceeds enthalpy_stable_dt.
EnthalpyGrid enthalpy_step(const EnthalpyGrid& grid, double dt, const AdhesionModel& model);

/// One front per run of mushy nodes separating a low side from a high side,
/// placed where a sharp rho1 | rho2 jump carries the run's mass.
std::vector<double> extract_fronts(const EnthalpyGrid& grid, const AdhesionModel& model);

struct EnthalpySample {
    double t = 0.0;
    std::vector<double> fronts;
    double mass = 0.0;
};

struct EnthalpyRun {
    std::vector<EnthalpySample> samples;
    EnthalpyGrid final_grid;
    long steps = 0;
    double max_step_mass_change = 0.0;
};

/// Samples on the grid k * sample_interval, plus t_end.
EnthalpyRun run_enthalpy(const EnthalpyGrid& initial, const AdhesionModel& model, double t_end,
                         double sample_interval, double cfl_safety = 0.45);

// Temperature on the mass coordinate y in [0, y0], y_k = k y0 / M. y = 0 is
// the front, y = y0 the wall x = 0.
struct LagrangeField {
    double t = 0.0;
    double y0 = 0.0;
    std::vector<double> v;

    std::size_t n_cells() const noexcept { return v.empty() ? 0 : v.size() - 1; }
    double spacing() const noexcept { return y0 / static_cast<double>(n_cells()); }
};

/// Low phase on [0, s] given at uniform x_hat nodes; the high phase is rho2.
/// Throws DomainError for values outside the low band or a degenerate y map.
LagrangeField lagrange_transform(const std::vector<double>& low_profile, double s,
                                 const AdhesionModel& model, int n_cells);

/// Back to physical nodes: x_k and rho_k = b(v_k) for every y node, x ascending.
Profile lagrange_inverse(const LagrangeField& field, const AdhesionModel& model);

/// (rho2 - b(v))^2 / b'(v) = (rho2 - b)^2 D(b) with b the low-branch inverse.
double lagrange_diffusivity(double v, const AdhesionModel& model);

double lagrange_stable_dt(const LagrangeField& field, const AdhesionModel& model);

/// Explicit v_t = a(v) v_yy with v(0) = K(rho1) and zero gradient at y0.
LagrangeField lagrange_step(const LagrangeField& field, double dt, const AdhesionModel& model);

struct ReconstructedFront {
    double s = 0.0;
    bool hit_wall = false;  // s reached 1; s is clamped there
};

/// s = int_0^y0 dy / (rho2 - b(v(y))), trapezoid rule on the field nodes.
ReconstructedFront reconstruct_front(const LagrangeField& field, const AdhesionModel& model);

struct LagrangeSample {
    double t = 0.0;
    double s = 0.0;
    bool hit_wall = false;
    double v_min = 0.0;
    double v_max = 0.0;
};

struct LagrangeRun {
    std::vector<LagrangeSample> samples;
    LagrangeField final_field;
    long steps = 0;
};

LagrangeRun run_lagrange(const LagrangeField& initial, const AdhesionModel& model, double t_end,
                         double sample_interval, double cfl_safety = 0.45);

}  // namespace fbstefan
