#pragma once

#include <optional>
#include <vector>

#include "fbstefan/fronttrack.hpp"
#include "fbstefan/trajectory.hpp"

namespace fbstefan {

struct EventThresholds {
    double eps_boundary = 1e-3;     // smallest extremal phase length
    double eps_collide = 1e-3;      // smallest internal phase length
    double steady_tol = 1e-8;       // L2 rate-of-change proxy
    double steady_interval = 1e-2;  // detection interval delta
    double t_safeguard = 1e6;       // hard stop regardless of t_end

    /// max(2 / N, 1e-3) for both lengths, N cells per phase.
    static EventThresholds for_resolution(int n_cells);

    /// Throws DomainError when any field is non-positive.
    void validate() const;
};

/// First triggered event by priority Blowup > Coalescence > BoundaryHit >
/// SteadyStateReached. The steady check only runs when a rate is supplied.
std::optional<Event> detect(const SimState& state, const EventThresholds& thresholds,
                            std::optional<double> steady_rate = std::nullopt);

struct SurgeryResult {
    SimState state;
    Event event;
};

/// Removes internal phase `sliver` (0 < sliver < n_phases - 1) and its two
/// fronts, filling it with the flanking plateau and merging the three pieces
/// onto one grid. A uniform shift of the free nodes restores the mass of the
/// filled piecewise-linear profile; the event records what the fill changed.
SurgeryResult apply_coalescence(const SimState& state, std::size_t sliver);

/// Removes the extremal front on `side` and its phase, extending the
/// neighbouring phase to the wall with its plateau value. With no fronts left
/// the result is a single-phase state evolved as the Neumann problem.
SurgeryResult apply_boundary_hit(const SimState& state, End side);

/// Discrete L2 time-derivative proxy between two states of equal topology:
/// (||rho - rho_prev||_2 + sum |s - s_prev| (rho2 - rho1)) / (t - t_prev).
double steady_rate(const SimState& previous, const SimState& current);

struct RunOptions {
    StepControl control;
    EventThresholds thresholds;
    double t_end = 1.0;
    double sample_interval = 1e-2;
    std::vector<double> snapshot_times;
    bool require_compatibility = false;
    double compatibility_tol = 1e-6;
    bool stop_at_steady = true;
};

/// Steps until t_end, a steady state or blow-up, applying event surgery as
/// fronts vanish. Blowup never throws: it ends the run and is logged.
Trajectory run(const SimState& initial, const RunOptions& options);

/// Diagnostics row for one state, laid out by initial front and phase ids.
Sample make_sample(const SimState& state, std::size_t initial_fronts,
                   std::size_t initial_phases);

}  // namespace fbstefan
