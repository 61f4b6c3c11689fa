#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbstefan/fronttrack.hpp"

namespace fbstefan {

enum class EventKind { BoundaryHitLeft, BoundaryHitRight, Coalescence, SteadyStateReached, Blowup };

std::string to_string(EventKind kind);

struct Event {
    EventKind kind = EventKind::SteadyStateReached;
    double time = 0.0;
    std::optional<double> location;  // empty for Blowup
    double mass_defect = 0.0;        // mass before surgery minus mass after
    std::vector<int> front_ids;      // fronts removed by the surgery
    std::string diagnostics;         // Blowup only
};

struct Sample {
    double t = 0.0;
    std::vector<double> fronts;  // indexed by initial front id - 1; NaN once removed
    double mass = 0.0;
    double sigma_grad_sup = 0.0;
    std::vector<double> l2;  // indexed by initial phase id - 1; NaN once removed
};

struct Snapshot {
    double t = 0.0;
    Profile profile;
};

struct Trajectory {
    std::size_t initial_fronts = 0;
    std::size_t initial_phases = 0;
    double mass0 = 0.0;
    std::vector<Branch> initial_kinds;  // kind of each initial phase
    std::vector<double> initial_min_diffusivity;  // per initial phase
    std::vector<Sample> samples;
    std::vector<Snapshot> snapshots;
    std::vector<Event> events;
    std::optional<SimState> final_state;
    std::string termination;  // "t_end", "steady", "blowup"
    long steps = 0;
    long rejections = 0;

    std::vector<double> times() const;
    std::vector<double> front_series(std::size_t front_index) const;
    std::vector<double> l2_series(std::size_t phase_index) const;
    std::size_t count(EventKind kind) const;
    bool annihilated() const;  // any coalescence or boundary hit
};

}  // namespace fbstefan
