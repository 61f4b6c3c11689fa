#include "fbstefan/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "fbstefan/errors.hpp"
#include "fbstefan/quadrature.hpp"

namespace fbstefan {

namespace {

void check_unit(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        std::ostringstream msg;
        msg << name << " = " << value << " lies outside [0, 1]";
        throw DomainError(msg.str());
    }
}

double K_raw(double rho, double alpha) { return temperature_unchecked(rho, alpha); }

double D_raw(double rho, double alpha) { return diffusivity_unchecked(rho, alpha); }

// Branch endpoints that match sigma to within rounding count as roots.
constexpr double kEndpointSlack = 1e-14;

// Root of K(r) = sigma on [lo, hi] where K is monotone (increasing). Newton
// with a bisection safeguard; the bracket always shrinks.
double solve_branch(double sigma, double alpha, double lo, double hi) {
    double f_lo = K_raw(lo, alpha) - sigma;
    double f_hi = K_raw(hi, alpha) - sigma;
    if (f_lo == 0.0 || (f_lo > 0.0 && f_lo <= kEndpointSlack)) return lo;
    if (f_hi == 0.0 || (f_hi < 0.0 && f_hi >= -kEndpointSlack)) return hi;
    if (f_lo > 0.0 || f_hi < 0.0) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "temperature " << sigma << " outside branch range [" << K_raw(lo, alpha) << ", "
            << K_raw(hi, alpha) << "]";
        throw DomainError(msg.str());
    }
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = K_raw(x, alpha) - sigma;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double df = D_raw(x, alpha);
        double next = (df > 0.0) ? x - f / df : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x) ||
            hi - lo <= 2.0 * std::numeric_limits<double>::epsilon()) {
            return next;
        }
        x = next;
    }
    return x;
}

// Closed-form primitive of 1 / (r (1 - r)^3).
double weight_primitive(double r) {
    const double q = 1.0 - r;
    return std::log(r / q) + 1.0 / q + 0.5 / (q * q);
}

}  // namespace

double diffusivity(double rho, double alpha) {
    check_unit(rho, "rho");
    check_unit(alpha, "alpha");
    return D_raw(rho, alpha);
}

double temperature(double rho, double alpha) {
    check_unit(rho, "rho");
    check_unit(alpha, "alpha");
    return K_raw(rho, alpha);
}

UnstableInterval unstable_interval(double alpha) {
    check_unit(alpha, "alpha");
    if (alpha < 0.75) {
        std::ostringstream msg;
        msg << "alpha = " << alpha << " < 3/4: diffusivity is positive everywhere";
        throw NoUnstableInterval(msg.str());
    }
    const double root = std::sqrt(alpha * (4.0 * alpha - 3.0));
    return {(2.0 * alpha - root) / (3.0 * alpha), (2.0 * alpha + root) / (3.0 * alpha)};
}

double equal_area_residual(double sigma_bar, double alpha, const PlateauOptions& options) {
    const auto band = unstable_interval(alpha);
    const double r1 = solve_branch(sigma_bar, alpha, 0.0, band.rho_flat);
    const double r2 = solve_branch(sigma_bar, alpha, band.rho_sharp, 1.0);
    // sigma_bar - K(r) = K(r2) - K(r), factored so no cancellation occurs
    // near either root.
    auto integrand = [&](double r) {
        const double q = 1.0 + alpha * (r2 * r2 + r2 * r + r * r - 2.0 * (r2 + r));
        const double c = 1.0 - r;
        return (r2 - r) * q / (r * c * c * c);
    };
    return quadrature::integrate_adaptive(integrand, r1, r2, options.quadrature_panels,
                                          options.quadrature_rel_tol)
        .value;
}

PlateauValues plateau_values(double alpha, const PlateauOptions& options) {
    check_unit(alpha, "alpha");
    if (!(alpha > 0.75)) {
        throw NoUnstableInterval("plateau values need alpha > 3/4");
    }
    if (alpha >= 1.0) {
        // At alpha = 1 the high branch collapses (rho_sharp = 1, D(1) = 0) and
        // the only temperature match is the degenerate pair (0, 1).
        throw DomainError("plateau values are degenerate at alpha = 1; supply an override");
    }
    const auto band = unstable_interval(alpha);

    // Admissible sigma_bar: both branch roots exist strictly inside their
    // branches.
    double lo = std::max(K_raw(band.rho_sharp, alpha), 0.0);
    double hi = std::min(K_raw(band.rho_flat, alpha), K_raw(1.0, alpha));
    if (!(hi > lo)) throw ConvergenceError("empty temperature bracket for the plateau solve");

    auto residual = [&](double s) { return equal_area_residual(s, alpha, options); };
    const double shrink = 1e-9 * (hi - lo);
    const double f_lo = residual(lo + shrink);
    const double f_hi = residual(hi - shrink);
    if (!(f_lo < 0.0 && f_hi > 0.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "equal-area residual does not change sign on the bracket: F(lo) = " << f_lo
            << ", F(hi) = " << f_hi;
        throw ConvergenceError(msg.str());
    }
    lo += shrink;
    hi -= shrink;

    double s = 0.5 * (lo + hi);
    double f = residual(s);
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (f == 0.0) break;
        if (f < 0.0) lo = s; else hi = s;
        const double r1 = solve_branch(s, alpha, 0.0, band.rho_flat);
        const double r2 = solve_branch(s, alpha, band.rho_sharp, 1.0);
        // dF/dsigma_bar: the endpoint terms vanish because the integrand is
        // zero at both roots.
        const double slope = weight_primitive(r2) - weight_primitive(r1);
        double next = s - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - s);
        s = next;
        f = residual(s);
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) break;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) break;
    }
    if (iter >= options.max_iterations) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "plateau solve did not converge: sigma_bar = " << s << ", residual = " << f
            << ", bracket width = " << hi - lo;
        throw ConvergenceError(msg.str());
    }

    PlateauValues out;
    out.rho1 = solve_branch(s, alpha, 0.0, band.rho_flat);
    out.rho2 = solve_branch(s, alpha, band.rho_sharp, 1.0);
    out.sigma_bar = s;
    out.iterations = iter;
    out.residual = f;
    return out;
}

AdhesionModel::AdhesionModel(double alpha, double rho1, double rho2)
    : alpha_(alpha), rho1_(rho1), rho2_(rho2) {
    const auto band = unstable_interval(alpha);
    rho_flat_ = band.rho_flat;
    rho_sharp_ = band.rho_sharp;
    sigma_bar_ = K_raw(rho1, alpha);
}

AdhesionModel AdhesionModel::from_alpha(double alpha, const PlateauOptions& options) {
    const auto p = plateau_values(alpha, options);
    return AdhesionModel(alpha, p.rho1, p.rho2);
}

AdhesionModel AdhesionModel::with_plateaus(double alpha, double rho1, std::optional<double> rho2,
                                           double k_match_tol) {
    check_unit(alpha, "alpha");
    if (!(alpha > 0.75)) throw DomainError("alpha must exceed 3/4");
    const auto band = unstable_interval(alpha);
    if (!(rho1 > 0.0 && rho1 < band.rho_flat)) {
        std::ostringstream msg;
        msg << "rho1 = " << rho1 << " must lie in (0, rho_flat = " << band.rho_flat << ")";
        throw DomainError(msg.str());
    }
    double r2 = 0.0;
    if (rho2) {
        r2 = *rho2;
    } else {
        r2 = solve_branch(K_raw(rho1, alpha), alpha, band.rho_sharp, 1.0);
    }
    if (!(r2 > band.rho_sharp && r2 <= 1.0)) {
        std::ostringstream msg;
        msg << "rho2 = " << r2 << " must lie in (rho_sharp = " << band.rho_sharp << ", 1]";
        throw DomainError(msg.str());
    }
    const double mismatch = std::abs(K_raw(rho1, alpha) - K_raw(r2, alpha));
    if (mismatch > k_match_tol) {
        std::ostringstream msg;
        msg << "|K(rho1) - K(rho2)| = " << mismatch << " exceeds " << k_match_tol;
        throw DomainError(msg.str());
    }
    return AdhesionModel(alpha, rho1, r2);
}

double AdhesionModel::diffusivity(double rho) const {
    check_unit(rho, "rho");
    return D_raw(rho, alpha_);
}

double AdhesionModel::temperature(double rho) const {
    check_unit(rho, "rho");
    return K_raw(rho, alpha_);
}

double AdhesionModel::flattened_temperature(double rho) const {
    check_unit(rho, "rho");
    if (rho >= rho1_ && rho <= rho2_) return sigma_bar_;
    return K_raw(rho, alpha_);
}

double AdhesionModel::enthalpy_inverse(double sigma, std::optional<Branch> hint) const {
    if (sigma == sigma_bar_) {
        if (!hint) throw DomainError("enthalpy_inverse at sigma_bar needs a branch hint");
        return plateau(*hint);
    }
    if (sigma < sigma_bar_) return solve_branch(sigma, alpha_, 0.0, rho1_);
    return solve_branch(sigma, alpha_, rho2_, 1.0);
}

double AdhesionModel::branch_inverse(double sigma, Branch branch) const {
    return branch == Branch::Low ? solve_branch(sigma, alpha_, 0.0, rho_flat_)
                                 : solve_branch(sigma, alpha_, rho_sharp_, 1.0);
}

}  // namespace fbstefan
