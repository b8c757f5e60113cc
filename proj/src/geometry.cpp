#include "isoflow/geometry.hpp"

#include "isoflow/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace isoflow {

namespace {

constexpr double kPi = std::numbers::pi;

// Least squares for a small design matrix.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    return a.colPivHouseholderQr().solve(b);
}

}  // namespace

TubeProfile::TubeProfile(int dimension, double inner_radius, ScalarFunction theta,
                         std::optional<ScalarFunction> theta_prime, FocalType focal_type,
                         std::string label)
    : dimension_(dimension),
      inner_radius_(inner_radius),
      theta_(std::move(theta)),
      theta_prime_(std::move(theta_prime)),
      focal_type_(focal_type),
      label_(std::move(label)) {
    if (dimension_ < 1) throw std::invalid_argument("TubeProfile: dimension must be >= 1");
    if (!(inner_radius_ > 0.0) || !std::isfinite(inner_radius_))
        throw std::invalid_argument("TubeProfile: inner radius must be positive");
    if (!theta_) throw std::invalid_argument("TubeProfile: missing density");
    if (auto* v = std::get_if<VanishingOrder>(&focal_type_); v && v->d < 1)
        throw std::invalid_argument("TubeProfile: vanishing order must be >= 1");

    if (std::abs(theta_(0.0) - 1.0) > 1e-12)
        throw std::invalid_argument("TubeProfile: density must be normalized, theta(0) = 1");
    constexpr int kSamples = 256;
    for (int i = 0; i < kSamples; ++i) {
        const double rho = inner_radius_ * i / kSamples;
        const double t = theta_(rho);
        if (!(t > 0.0) || !std::isfinite(t)) {
            std::ostringstream os;
            os << "TubeProfile: density not positive at rho = " << rho;
            throw std::invalid_argument(os.str());
        }
    }
    const double end = theta_(inner_radius_);
    if (vanishing_order()) {
        if (std::abs(end) > 1e-12)
            throw std::invalid_argument("TubeProfile: focal profile must vanish at the inner radius");
    } else if (!(end > 0.0)) {
        throw std::invalid_argument("TubeProfile: two-sided soul needs theta(R) > 0");
    }
}

double TubeProfile::theta_prime(double rho) const {
    if (theta_prime_) return (*theta_prime_)(rho);
    const double h = inner_radius_ * 1e-5;
    if (rho - h < 0.0)
        return (-3.0 * theta_(rho) + 4.0 * theta_(rho + h) - theta_(rho + 2.0 * h)) / (2.0 * h);
    if (rho + h > inner_radius_)
        return (3.0 * theta_(rho) - 4.0 * theta_(rho - h) + theta_(rho - 2.0 * h)) / (2.0 * h);
    return (theta_(rho + h) - theta_(rho - h)) / (2.0 * h);
}

std::optional<int> TubeProfile::vanishing_order() const {
    if (auto* v = std::get_if<VanishingOrder>(&focal_type_)) return v->d;
    return std::nullopt;
}

TubeProfile make_euclidean_ball_profile(int n, double R) {
    if (n < 1) throw std::invalid_argument("ball: n must be >= 1");
    if (!(R > 0.0)) throw std::invalid_argument("ball: R must be positive");
    const double m = n - 1;
    auto theta = [R, m](double rho) { return std::pow(1.0 - rho / R, m); };
    auto prime = [R, m](double rho) {
        return m == 0.0 ? 0.0 : -(m / R) * std::pow(1.0 - rho / R, m - 1.0);
    };
    FocalType focal = n == 1 ? FocalType{TwoSidedSoul{}} : FocalType{VanishingOrder{n - 1}};
    return TubeProfile(n, R, theta, prime, focal, n == 1 ? "interval" : "ball");
}

TubeProfile make_spherical_cap_profile(int n, double R0) {
    if (n < 2) throw std::invalid_argument("cap: n must be >= 2");
    if (!(R0 > 0.0 && R0 < kPi)) throw std::invalid_argument("cap: R0 must lie in (0, pi)");
    const double m = n - 1;
    const double s0 = std::sin(R0);
    auto theta = [R0, m, s0](double rho) { return std::pow(std::sin(R0 - rho) / s0, m); };
    auto prime = [R0, m, s0](double rho) {
        return -m * std::pow(std::sin(R0 - rho) / s0, m - 1.0) * std::cos(R0 - rho) / s0;
    };
    return TubeProfile(n, R0, theta, prime, VanishingOrder{n - 1}, "cap");
}

TubeProfile make_clifford_tube_profile(double R) {
    if (!(R > 0.0 && R < kPi / 4.0))
        throw std::invalid_argument("clifford: R must lie in (0, pi/4)");
    const double c = std::cos(2.0 * R);
    auto theta = [R, c](double rho) { return std::cos(2.0 * (R - rho)) / c; };
    auto prime = [R, c](double rho) { return 2.0 * std::sin(2.0 * (R - rho)) / c; };
    return TubeProfile(3, R, theta, prime, TwoSidedSoul{}, "clifford");
}

TubeProfile make_annulus_side_profile(double inner, double outer, AnnulusSide side) {
    if (!(inner > 0.0 && outer > inner))
        throw std::invalid_argument("annulus: need 0 < inner < outer");
    const double R = 0.5 * (outer - inner);
    if (side == AnnulusSide::Outward) {
        auto theta = [outer](double rho) { return (outer - rho) / outer; };
        auto prime = [outer](double) { return -1.0 / outer; };
        return TubeProfile(2, R, theta, prime, TwoSidedSoul{}, "annulus-outward");
    }
    auto theta = [inner](double rho) { return (inner + rho) / inner; };
    auto prime = [inner](double) { return 1.0 / inner; };
    return TubeProfile(2, R, theta, prime, TwoSidedSoul{}, "annulus-inward");
}

std::vector<std::string> check_profile_invariants(const TubeProfile& p) {
    std::vector<std::string> out;
    if (p.theta(0.0) != 1.0) out.push_back("theta(0) != 1");
    const double R = p.inner_radius();
    if (auto d = p.vanishing_order()) {
        const auto fit = estimate_focal_order(p);
        if (std::abs(fit.d_estimate - *d) > 0.05) {
            std::ostringstream os;
            os << "log-log slope " << fit.d_estimate << " differs from vanishing order " << *d;
            out.push_back(os.str());
        }
    } else {
        const double slope = p.theta_prime(R);
        if (std::abs(slope) > 1e-10 * std::max(1.0, std::abs(p.theta(R)) / R)) {
            std::ostringstream os;
            os << "theta'(R) = " << slope << " != 0: even reflection across the soul fails";
            out.push_back(os.str());
        }
    }
    return out;
}

double profile_eta(const TubeProfile& p, double rho) {
    const double R = p.inner_radius();
    if (!(rho >= 0.0 && rho <= R)) throw std::invalid_argument("profile_eta: rho outside [0, R]");
    if (p.vanishing_order() && rho >= R)
        throw std::invalid_argument("profile_eta: density vanishes at the focal endpoint");
    const double t = p.theta(rho);
    if (!(t > 0.0)) throw std::invalid_argument("profile_eta: density vanishes");
    return -p.theta_prime(rho) / t;
}

FocalOrderFit estimate_focal_order(const TubeProfile& p) {
    const double R = p.inner_radius();
    FocalOrderFit fit;
    if (p.has_two_sided_soul()) {
        fit.c_estimate = p.theta(R);
        return fit;
    }
    constexpr int kSamples = 32;
    const double w = R / 10.0;
    const double lo = w / 10.0;
    Eigen::MatrixXd a(kSamples, 2);
    Eigen::VectorXd b(kSamples);
    for (int k = 0; k < kSamples; ++k) {
        const double s = lo * std::pow(w / lo, static_cast<double>(k) / (kSamples - 1));
        const double t = p.theta(R - s);
        if (!(t > 0.0) || !std::isfinite(t))
            throw SolverError("estimate_focal_order: non-positive density in the fit window");
        a(k, 0) = 1.0;
        a(k, 1) = std::log(s);
        b(k) = std::log(t);
    }
    const Eigen::VectorXd x = least_squares(a, b);
    fit.c_estimate = std::exp(x(0));
    fit.d_estimate = x(1);
    fit.d_rounded = static_cast<int>(std::lround(fit.d_estimate));
    fit.residual = std::sqrt((a * x - b).squaredNorm() / kSamples);
    return fit;
}

double soul_minimality_check(const TubeProfile& p) {
    const double R = p.inner_radius();
    double c = p.theta(R);
    int d = 0;
    if (p.vanishing_order()) {
        const auto fit = estimate_focal_order(p);
        c = fit.c_estimate;
        d = fit.d_rounded;
    }
    constexpr int kSamples = 32;
    constexpr int kDegree = 4;
    const double w = R / 10.0;
    std::vector<double> t_used;
    std::vector<double> y_used;
    for (int k = 1; k <= kSamples; ++k) {
        const double s = w * k / kSamples;
        const double value = p.theta(R - s) / (c * std::pow(s, d));
        if (!std::isfinite(value) || !(value > 0.0)) continue;
        t_used.push_back(s / w);
        y_used.push_back(value);
    }
    const auto m = static_cast<Eigen::Index>(t_used.size());
    if (m < 4) throw SolverError("soul_minimality_check: fewer than 4 usable samples");
    const int cols = static_cast<int>(std::min<Eigen::Index>(kDegree + 1, m));
    Eigen::MatrixXd a(m, cols);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double pw = 1.0;
        for (int j = 0; j < cols; ++j) {
            a(i, j) = pw;
            pw *= t_used[i];
        }
        b(i) = y_used[i];
    }
    const Eigen::VectorXd x = least_squares(a, b);
    return x(1) / (w * x(0));
}

// RevolutionMetric

double RevolutionMetric::bump(double r) const {
    const double s = std::sin(kPi * (r - r_min_) / (r_max_ - r_min_));
    return s * s;
}

double RevolutionMetric::bump_prime(double r) const {
    const double L = r_max_ - r_min_;
    return std::sin(2.0 * kPi * (r - r_min_) / L) * kPi / L;
}

double RevolutionMetric::theta0_prime(double r) const {
    if (theta0_prime_) return (*theta0_prime_)(r);
    const double h = (r_max_ - r_min_) * 1e-5;
    return (theta0_(r + h) - theta0_(r - h)) / (2.0 * h);
}

double RevolutionMetric::theta(double r, double phi) const {
    if (eps_ == 0.0) return theta0_(r);
    return theta0_(r) * (1.0 + eps_ * std::cos(mode_ * phi) * bump(r));
}

double RevolutionMetric::dtheta_dr(double r, double phi) const {
    if (eps_ == 0.0) return theta0_prime(r);
    const double angular = eps_ * std::cos(mode_ * phi);
    return theta0_prime(r) * (1.0 + angular * bump(r)) + theta0_(r) * angular * bump_prime(r);
}

double RevolutionMetric::theta_at_index(double r, long j, long nphi) const {
    long jj = j % nphi;
    if (jj < 0) jj += nphi;
    return theta(r, 2.0 * kPi * static_cast<double>(jj) / static_cast<double>(nphi));
}

RevolutionMetric make_revolution_metric(const MetricKind& kind, double r_min, double r_max,
                                        BoundarySpec boundary, std::string label) {
    if (!(r_min >= 0.0 && r_max > r_min))
        throw std::invalid_argument("revolution metric: need 0 <= r_min < r_max");
    RevolutionMetric g;
    g.r_min_ = r_min;
    g.r_max_ = r_max;
    g.boundary_ = boundary;
    g.label_ = std::move(label);
    if (const auto* radial = std::get_if<RadialWarp>(&kind)) {
        g.theta0_ = radial->theta0;
        g.theta0_prime_ = radial->theta0_prime;
    } else {
        const auto& pert = std::get<PerturbedWarp>(kind);
        // theta >= theta0 (1 - |eps|) since |cos| <= 1 and 0 <= b <= 1.
        if (!(std::abs(pert.eps) < 1.0))
            throw std::invalid_argument("revolution metric: |eps| must be < 1 for positivity");
        if (pert.mode < 0) throw std::invalid_argument("revolution metric: mode must be >= 0");
        g.theta0_ = pert.theta0;
        g.theta0_prime_ = pert.theta0_prime;
        g.eps_ = pert.eps;
        g.mode_ = pert.mode;
    }
    if (!g.theta0_) throw std::invalid_argument("revolution metric: missing warp function");
    constexpr int kSamples = 1024;
    for (int i = 0; i <= kSamples; ++i) {
        const double r = r_min + (r_max - r_min) * i / kSamples;
        const double t = g.theta0_(r);
        if (!(t > 0.0) || !std::isfinite(t))
            throw std::invalid_argument("revolution metric: warp must be positive on the chart");
    }
    return g;
}

RevolutionMetric make_flat_annulus_chart(double inner, double outer) {
    return make_revolution_metric(
        RadialWarp{[](double r) { return r; }, [](double) { return 1.0; }}, inner, outer,
        BoundarySpec{true, true}, "annulus");
}

RevolutionMetric make_cap_chart(double pole_cut) {
    return make_revolution_metric(
        RadialWarp{[](double r) { return std::sin(r); }, [](double r) { return std::cos(r); }},
        pole_cut, kPi / 2.0, BoundarySpec{false, true}, "revolution");
}

RevolutionMetric make_perturbed_cap_chart(double eps, int mode, double pole_cut) {
    return make_revolution_metric(
        PerturbedWarp{[](double r) { return std::sin(r); }, [](double r) { return std::cos(r); },
                      eps, mode},
        pole_cut, kPi / 2.0, BoundarySpec{false, true}, "revolution-perturbed");
}

}  // namespace isoflow
