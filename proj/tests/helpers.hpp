#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fbstefan/fronttrack.hpp"

namespace testing_support {

using namespace fbstefan;

inline std::vector<double> sample(int n, auto f) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) v[static_cast<std::size_t>(j)] = f(static_cast<double>(j) / n);
    return v;
}

// Low phase on [0, s] and high phase on [s, 1], each the plateau plus a
// smooth bump that respects the wall (zero slope) and the pin at the front.
inline SimState sp1_state(const AdhesionModel& m, double s, int n, double low_amp,
                          double high_amp) {
    const double pi = std::numbers::pi;
    auto low = sample(n, [&](double x) { return m.rho1() + low_amp * std::cos(pi * x / 2); });
    auto high = sample(n, [&](double x) { return m.rho2() + high_amp * std::sin(pi * x / 2); });
    return make_state(m, {s}, {PhaseGrid{Branch::Low, low}, PhaseGrid{Branch::High, high}});
}

inline SimState step_state(const AdhesionModel& m, double s, int n) {
    return make_state(m, {s},
                      {PhaseGrid{Branch::Low, std::vector<double>(n + 1, m.rho1())},
                       PhaseGrid{Branch::High, std::vector<double>(n + 1, m.rho2())}});
}

}  // namespace testing_support
