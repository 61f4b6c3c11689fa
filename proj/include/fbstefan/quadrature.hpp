#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace fbstefan::quadrature {

// Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton iteration
// on the Legendre recurrence.
template <std::size_t Order>
struct GaussLegendre {
    std::array<double, Order> nodes{};
    std::array<double, Order> weights{};

    GaussLegendre() {
        constexpr int n = static_cast<int>(Order);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }

    template <typename F>
    double integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double sum = 0.0;
        for (std::size_t k = 0; k < Order; ++k) sum += weights[k] * f(mid + half * nodes[k]);
        return half * sum;
    }
};

struct AdaptiveResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

// Composite 10-point Gauss rule on `initial_panels` equal panels; each panel is
// bisected until the two-half estimate agrees with the whole-panel estimate.
// The tolerance is rel_tol * int |f| shared out in proportion to panel width,
// with a floor at a few ulps of the panel value so rounding noise cannot force
// endless refinement.
template <typename F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, int initial_panels = 8,
                                  double rel_tol = 1e-12, int max_depth = 30) {
    static const GaussLegendre<10> rule;
    AdaptiveResult out;

    // Magnitude scale for the relative criterion.
    double scale = 0.0;
    const double width = (b - a) / initial_panels;
    for (int p = 0; p < initial_panels; ++p) {
        scale += std::abs(rule.integrate([&](double x) { return std::abs(f(x)); },
                                         a + p * width, a + (p + 1) * width));
    }
    const double abs_tol = rel_tol * (scale > 0.0 ? scale : 1.0);

    const double density = abs_tol / (b - a);
    auto recurse = [&](auto&& self, double lo, double hi, double whole, int depth) -> void {
        const double mid = 0.5 * (lo + hi);
        const double left = rule.integrate(f, lo, mid);
        const double right = rule.integrate(f, mid, hi);
        const double err = std::abs(left + right - whole);
        const double tol = std::max(density * (hi - lo), 256.0 * 2.2e-16 * (std::abs(left) + std::abs(right)));
        if (err <= tol || depth >= max_depth) {
            out.value += left + right;
            out.error_estimate += err;
            out.panels += 2;
            return;
        }
        self(self, lo, mid, left, depth + 1);
        self(self, mid, hi, right, depth + 1);
    };

    for (int p = 0; p < initial_panels; ++p) {
        const double lo = a + p * width;
        const double hi = (p + 1 == initial_panels) ? b : a + (p + 1) * width;
        recurse(recurse, lo, hi, rule.integrate(f, lo, hi), 0);
    }
    return out;
}

}  // namespace fbstefan::quadrature
