#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace isoflow {

using ScalarFunction = std::function<double(double)>;

/// theta(rho) ~ c (R - rho)^d at the inner radius.
struct VanishingOrder {
    int d = 1;
};

/// Density stays positive at the inner radius; the profile is one side of a
/// tube whose other side is its mirror image across the soul.
struct TwoSidedSoul {};

using FocalType = std::variant<VanishingOrder, TwoSidedSoul>;

/**
 * One-dimensional density of a tube, measured from the boundary.
 *
 * rho is the distance to the boundary, rho in [0, R]; theta(0) = 1 and
 * theta > 0 on [0, R). The derivative is the analytic one when supplied,
 * otherwise a central difference with step R * 1e-5 (one-sided near the
 * ends of the interval).
 */
class TubeProfile {
public:
    TubeProfile(int dimension, double inner_radius, ScalarFunction theta,
                std::optional<ScalarFunction> theta_prime, FocalType focal_type,
                std::string label);

    int dimension() const { return dimension_; }
    double inner_radius() const { return inner_radius_; }
    double theta(double rho) const { return theta_(rho); }
    double theta_prime(double rho) const;
    bool has_analytic_derivative() const { return theta_prime_.has_value(); }
    const FocalType& focal_type() const { return focal_type_; }
    std::optional<int> vanishing_order() const;
    bool has_two_sided_soul() const { return std::holds_alternative<TwoSidedSoul>(focal_type_); }
    const std::string& label() const { return label_; }
    const ScalarFunction& density() const { return theta_; }

private:
    int dimension_;
    double inner_radius_;
    ScalarFunction theta_;
    std::optional<ScalarFunction> theta_prime_;
    FocalType focal_type_;
    std::string label_;
};

// Catalog.

/// theta = (1 - rho/R)^(n-1). n = 1 is the interval of half-width R.
TubeProfile make_euclidean_ball_profile(int n, double R);

/// Geodesic ball of radius R0 in the unit sphere S^n.
TubeProfile make_spherical_cap_profile(int n, double R0);

/// One side of the tube of radius R around the Clifford torus in S^3.
TubeProfile make_clifford_tube_profile(double R);

enum class AnnulusSide { Outward, Inward };

/**
 * One side of the planar annulus inner < |x| < outer viewed as a tube around
 * the middle circle. This is NOT an isoparametric tube: the two sides have
 * different densities and theta'(R) != 0, so the even-reflection invariant of
 * TwoSidedSoul fails. It is the catalog's non-minimal-soul counterexample.
 */
TubeProfile make_annulus_side_profile(double inner, double outer, AnnulusSide side);

/// Human-readable violations of the TubeProfile invariants; empty if none.
std::vector<std::string> check_profile_invariants(const TubeProfile& p);

/// eta = -theta'/theta, i.e. (n-1) times the mean curvature of the
/// equidistant at distance rho.
double profile_eta(const TubeProfile& p, double rho);

struct FocalOrderFit {
    double d_estimate = 0.0;
    double c_estimate = 0.0;
    int d_rounded = 0;
    double residual = 0.0;  // rms of the log-log fit
};

/// Log-log least squares of theta against (R - rho) on (R - w, R - w/10),
/// w = R/10, 32 log-spaced samples.
FocalOrderFit estimate_focal_order(const TubeProfile& p);

/// Coefficient of s in theta_soul(s) = 1 + coeff * s + O(s^2), where s is the
/// distance to the soul. Zero is necessary for the soul to be minimal.
double soul_minimality_check(const TubeProfile& p);

// Two-dimensional revolution charts: metric dr^2 + theta(r, phi)^2 dphi^2.

struct BoundarySpec {
    bool dirichlet_inner = false;
    bool dirichlet_outer = true;
};

struct RadialWarp {
    ScalarFunction theta0;
    std::optional<ScalarFunction> theta0_prime;
};

/// theta = theta0(r) * (1 + eps * cos(mode * phi) * b(r)),
/// b(r) = sin^2(pi (r - r_min) / (r_max - r_min)).
struct PerturbedWarp {
    ScalarFunction theta0;
    std::optional<ScalarFunction> theta0_prime;
    double eps = 0.0;
    int mode = 1;
};

using MetricKind = std::variant<RadialWarp, PerturbedWarp>;

class RevolutionMetric {
public:
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    bool is_radial() const { return eps_ == 0.0; }
    double eps() const { return eps_; }
    int mode() const { return mode_; }
    const BoundarySpec& boundary_spec() const { return boundary_; }
    const std::string& label() const { return label_; }

    double theta(double r, double phi) const;
    double dtheta_dr(double r, double phi) const;
    /// theta at phi = 2 pi j / nphi with j reduced modulo nphi.
    double theta_at_index(double r, long j, long nphi) const;

private:
    friend RevolutionMetric make_revolution_metric(const MetricKind&, double, double,
                                                   BoundarySpec, std::string);
    RevolutionMetric() = default;

    double bump(double r) const;
    double bump_prime(double r) const;
    double theta0_prime(double r) const;

    double r_min_ = 0.0;
    double r_max_ = 1.0;
    ScalarFunction theta0_;
    std::optional<ScalarFunction> theta0_prime_;
    double eps_ = 0.0;
    int mode_ = 0;
    BoundarySpec boundary_;
    std::string label_;
};

RevolutionMetric make_revolution_metric(const MetricKind& kind, double r_min, double r_max,
                                        BoundarySpec boundary, std::string label = "revolution");

/// theta = r on [inner, outer], Dirichlet on both circles.
RevolutionMetric make_flat_annulus_chart(double inner = 1.0, double outer = 2.0);

/// Round hemisphere, theta = sin r on [pole_cut, pi/2]; the excised pole is a
/// zero-flux ring and the equator is Dirichlet.
inline constexpr double kDefaultPoleCut = 1e-3;
RevolutionMetric make_cap_chart(double pole_cut = kDefaultPoleCut);

/// make_cap_chart with theta0 = sin r perturbed by eps cos(mode phi) b(r).
RevolutionMetric make_perturbed_cap_chart(double eps, int mode, double pole_cut = kDefaultPoleCut);

}  // namespace isoflow
