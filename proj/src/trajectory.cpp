#include "fbstefan/trajectory.hpp"

#include <algorithm>

namespace fbstefan {

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::BoundaryHitLeft: return "BoundaryHitLeft";
        case EventKind::BoundaryHitRight: return "BoundaryHitRight";
        case EventKind::Coalescence: return "Coalescence";
        case EventKind::SteadyStateReached: return "SteadyStateReached";
        case EventKind::Blowup: return "Blowup";
    }
    return "unknown";
}

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.t);
    return out;
}

std::vector<double> Trajectory::front_series(std::size_t front_index) const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.fronts.at(front_index));
    return out;
}

std::vector<double> Trajectory::l2_series(std::size_t phase_index) const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.l2.at(phase_index));
    return out;
}

std::size_t Trajectory::count(EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; }));
}

bool Trajectory::annihilated() const {
    return count(EventKind::Coalescence) + count(EventKind::BoundaryHitLeft) +
               count(EventKind::BoundaryHitRight) >
           0;
}

}  // namespace fbstefan
