#pragma once

#include <optional>
#include <utility>

namespace fbstefan {

/// Which side of the unstable interval a density belongs to.
enum class Branch { Low, High };

/// Unstable interval (rho_flat, rho_sharp) where the diffusivity is negative.
struct UnstableInterval {
    double rho_flat;
    double rho_sharp;
};

/// Plateau pair selected by the heteroclinic connection of the regularised
/// steady-state problem.
struct PlateauValues {
    double rho1;
    double rho2;
    double sigma_bar;
    int iterations = 0;
    double residual = 0.0;  ///< weighted equal-area integral at the returned root
};

struct PlateauOptions {
    int quadrature_panels = 8;
    double quadrature_rel_tol = 1e-12;
    int max_iterations = 200;
};

/// Constitutive constants of the adhesion/diffusion model. Immutable once
/// built; every member function is a pure function of the stored constants.
class AdhesionModel {
public:
    /// Plateaus from the equal-area rule.
    static AdhesionModel from_alpha(double alpha, const PlateauOptions& options = {});

    /// User-supplied plateaus. With only rho1 given, rho2 is the high-branch
    /// root of K(rho2) = K(rho1). Throws DomainError when the ordering
    /// rho1 < rho_flat < rho_sharp < rho2 <= 1 or the temperature match
    /// |K(rho1) - K(rho2)| <= k_match_tol fails.
    static AdhesionModel with_plateaus(double alpha, double rho1,
                                       std::optional<double> rho2 = std::nullopt,
                                       double k_match_tol = 1e-12);

    double alpha() const noexcept { return alpha_; }
    double rho_flat() const noexcept { return rho_flat_; }
    double rho_sharp() const noexcept { return rho_sharp_; }
    double rho1() const noexcept { return rho1_; }
    double rho2() const noexcept { return rho2_; }
    double sigma_bar() const noexcept { return sigma_bar_; }
    double jump() const noexcept { return rho2_ - rho1_; }

    double plateau(Branch b) const noexcept { return b == Branch::Low ? rho1_ : rho2_; }

    double diffusivity(double rho) const;
    double temperature(double rho) const;
    double flattened_temperature(double rho) const;

    /// Inverse of the flattened temperature. At sigma == sigma_bar the hint
    /// picks rho1 (Low) or rho2 (High); elsewhere the hint is ignored.
    double enthalpy_inverse(double sigma, std::optional<Branch> hint = std::nullopt) const;

    /// Inverse of K restricted to [0, rho_flat] (Low) or [rho_sharp, 1] (High).
    double branch_inverse(double sigma, Branch branch) const;

    bool in_band(double rho, Branch b) const noexcept {
        return b == Branch::Low ? rho < rho_flat_ : rho > rho_sharp_;
    }

private:
    AdhesionModel(double alpha, double rho1, double rho2);

    double alpha_;
    double rho_flat_;
    double rho_sharp_;
    double rho1_;
    double rho2_;
    double sigma_bar_;
};

// Unchecked kernels for inner loops; callers guarantee the arguments.
// Expanded forms of 3a(r - 2/3)^2 + 1 - 4a/3 and its primitive; they are exact
// at r = 0 and r = 1.
inline double diffusivity_unchecked(double rho, double alpha) noexcept {
    return 1.0 + alpha * rho * (3.0 * rho - 4.0);
}

inline double temperature_unchecked(double rho, double alpha) noexcept {
    return rho * (1.0 + alpha * rho * (rho - 2.0));
}

// Free-function forms of the constitutive laws. K is normalised by K(0) = 0.
double diffusivity(double rho, double alpha);
double temperature(double rho, double alpha);
UnstableInterval unstable_interval(double alpha);

/// Roots rho1 < rho_flat < rho_sharp < rho2 of K(rho1) = K(rho2) = sigma_bar
/// together with
///     int_{rho1}^{rho2} (sigma_bar - K(r)) / (r (1 - r)^3) dr = 0,
/// the zero-energy condition for a heteroclinic orbit of the steady states of
/// the fourth-order regularisation (obtained with u = (rho')^2 and integrating
/// factor (1 - rho)^-2). The problem is reduced to one unknown, sigma_bar,
/// in which the weighted integral is strictly increasing.
PlateauValues plateau_values(double alpha, const PlateauOptions& options = {});

/// The weighted equal-area integral for a trial sigma_bar (zero at the plateau).
double equal_area_residual(double sigma_bar, double alpha, const PlateauOptions& options = {});

}  // namespace fbstefan
