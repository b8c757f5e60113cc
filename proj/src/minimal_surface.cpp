#include "isoflow/minimal_surface.hpp"

#include "isoflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace isoflow {

namespace {

constexpr double kPi = std::numbers::pi;

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Node values on (nu+1) x nv, row-major.
using NodeField = std::vector<double>;

NodeField sample(const ParametricSurface& s, const std::function<double(const Vec3&)>& f) {
    NodeField out(static_cast<std::size_t>(s.nu + 1) * s.nv);
    for (int i = 0; i <= s.nu; ++i)
        for (int j = 0; j < s.nv; ++j)
            out[static_cast<std::size_t>(i) * s.nv + j] = f(s.position(s.u(i), s.v(j)));
    return out;
}

// Conservative discrete Laplace-Beltrami (geometer's sign) at interior node (i, j):
//   -(1/sqrt g) [ d_u(sqrt g (g^uu f_u + g^uv f_v)) + d_v(sqrt g (g^uv f_u + g^vv f_v)) ].
class Laplacian {
public:
    explicit Laplacian(const ParametricSurface& s) : s_(s) {}

    double at(const NodeField& f, int i, int j) const {
        const double hu = s_.hu();
        const double hv = s_.hv();
        const double u = s_.u(i);
        const double v = s_.v(j);
        const double v_half_up = v + 0.5 * hv;
        const double v_half_down = v - 0.5 * hv;

        auto flux_u = [&](int lo) {  // across the face between rows lo and lo+1
            const double uf = s_.u(lo) + 0.5 * hu;
            const auto ff = first_fundamental_form(s_, uf, v);
            const double a = ff.area_element();
            const double fu = (val(f, lo + 1, j) - val(f, lo, j)) / hu;
            const double fv = 0.5 * (dv(f, lo, j) + dv(f, lo + 1, j));
            return (ff.G * fu - ff.F * fv) / a;
        };
        auto flux_v = [&](double vf, int jl) {  // across the face between columns jl and jl+1
            const auto ff = first_fundamental_form(s_, u, vf);
            const double a = ff.area_element();
            const double fv = (val(f, i, jl + 1) - val(f, i, jl)) / hv;
            const double fu = 0.5 * (du(f, i, jl) + du(f, i, jl + 1));
            return (ff.E * fv - ff.F * fu) / a;
        };
        const double area = first_fundamental_form(s_, u, v).area_element();
        const double div = (flux_u(i) - flux_u(i - 1)) / hu + (flux_v(v_half_up, j) - flux_v(v_half_down, j - 1)) / hv;
        return -div / area;
    }

private:
    double val(const NodeField& f, int i, int j) const {
        const int jj = ((j % s_.nv) + s_.nv) % s_.nv;
        return f[static_cast<std::size_t>(i) * s_.nv + jj];
    }
    double dv(const NodeField& f, int i, int j) const {
        if (i == 0 && s_.pole_at_u_min) return 0.0;
        return (val(f, i, j + 1) - val(f, i, j - 1)) / (2.0 * s_.hv());
    }
    double du(const NodeField& f, int i, int j) const {
        return (val(f, i + 1, j) - val(f, i - 1, j)) / (2.0 * s_.hu());
    }

    const ParametricSurface& s_;
};

// Inward conormal (unit, in R^3) and the matching derivative of f at a boundary row.
struct Conormal {
    Vec3 direction;
    double derivative;
};

Conormal boundary_conormal(const ParametricSurface& s, const NodeField& f, int i, int j) {
    const double u = s.u(i);
    const double v = s.v(j);
    const auto ff = first_fundamental_form(s, u, v);
    const double det = ff.E * ff.G - ff.F * ff.F;
    const double guu = ff.G / det;
    const double guv = -ff.F / det;
    const double sign = (i == 0) ? 1.0 : -1.0;
    const double norm = std::sqrt(guu);

    const Vec3 xu = s.tangent_u(u, v);
    const Vec3 xv = s.tangent_v(u, v);
    Vec3 dir{};
    for (int c = 0; c < 3; ++c) dir[c] = sign * (guu * xu[c] + guv * xv[c]) / norm;

    const double h = s.hu();
    const int nv = s.nv;
    auto at = [&](int ii, int jj) { return f[static_cast<std::size_t>(ii) * nv + ((jj % nv) + nv) % nv]; };
    const double fu = (i == 0) ? (-3.0 * at(0, j) + 4.0 * at(1, j) - at(2, j)) / (2.0 * h)
                               : (3.0 * at(i, j) - 4.0 * at(i - 1, j) + at(i - 2, j)) / (2.0 * h);
    const double fv = (at(i, j + 1) - at(i, j - 1)) / (2.0 * s.hv());
    return {dir, sign * (guu * fu + guv * fv) / norm};
}

}  // namespace

double ParametricSurface::hv() const { return 2.0 * kPi / nv; }
double ParametricSurface::v(int j) const { return 2.0 * kPi * j / nv; }

double FirstFundamentalForm::area_element() const { return std::sqrt(E * G - F * F); }

FirstFundamentalForm first_fundamental_form(const ParametricSurface& s, double u, double v) {
    const Vec3 xu = s.tangent_u(u, v);
    const Vec3 xv = s.tangent_v(u, v);
    return {dot3(xu, xu), dot3(xu, xv), dot3(xv, xv)};
}

void validate_surface(const ParametricSurface& s, double tol) {
    if (s.nu < 4 || s.nv < 4) throw std::invalid_argument("surface: grid too small");
    if (!(s.u_max > s.u_min)) throw std::invalid_argument("surface: empty parameter range");
    for (int i = s.pole_at_u_min ? 1 : 0; i <= s.nu; ++i)
        for (int j = 0; j < s.nv; ++j) {
            const auto ff = first_fundamental_form(s, s.u(i), s.v(j));
            if (!(ff.E * ff.G - ff.F * ff.F > 0.0))
                throw std::invalid_argument("surface: degenerate metric at a grid node");
        }
    auto check_row = [&](int i) {
        for (int j = 0; j < s.nv; ++j)
            if (std::abs(norm3(s.position(s.u(i), s.v(j))) - 1.0) > tol)
                throw std::invalid_argument("surface: boundary row is not on the unit sphere");
    };
    if (s.sphere_boundary_at_u_min) check_row(0);
    if (s.sphere_boundary_at_u_max) check_row(s.nu);
}

ParametricSurface make_flat_disk(int nu, int nv) {
    ParametricSurface s;
    s.label = "flat-disk";
    s.position = [](double u, double v) { return Vec3{u * std::cos(v), u * std::sin(v), 0.0}; };
    s.tangent_u = [](double, double v) { return Vec3{std::cos(v), std::sin(v), 0.0}; };
    s.tangent_v = [](double u, double v) { return Vec3{-u * std::sin(v), u * std::cos(v), 0.0}; };
    s.u_min = 0.0;
    s.u_max = 1.0;
    s.nu = nu;
    s.nv = nv;
    s.pole_at_u_min = true;
    s.sphere_boundary_at_u_max = true;
    validate_surface(s);
    return s;
}

double critical_catenoid_neck_parameter() {
    double lo = 0.5;  // t tanh t - 1 < 0
    double hi = 2.0;  // > 0
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid * std::tanh(mid) - 1.0 < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double t0 = 0.5 * (lo + hi);
    if (std::abs(t0 * std::tanh(t0) - 1.0) > 1e-14) throw SolverError("catenoid: root find failed");
    return t0;
}

ParametricSurface make_critical_catenoid(int nu, int nv) {
    const double t0 = critical_catenoid_neck_parameter();
    const double a = 1.0 / (t0 * std::cosh(t0));
    ParametricSurface s;
    s.label = "catenoid";
    s.position = [a](double u, double v) {
        return Vec3{a * std::cosh(u) * std::cos(v), a * std::cosh(u) * std::sin(v), a * u};
    };
    s.tangent_u = [a](double u, double v) {
        return Vec3{a * std::sinh(u) * std::cos(v), a * std::sinh(u) * std::sin(v), a};
    };
    s.tangent_v = [a](double u, double v) {
        return Vec3{-a * std::cosh(u) * std::sin(v), a * std::cosh(u) * std::cos(v), 0.0};
    };
    s.u_min = -t0;
    s.u_max = t0;
    s.nu = nu;
    s.nv = nv;
    s.sphere_boundary_at_u_min = true;
    s.sphere_boundary_at_u_max = true;
    validate_surface(s);
    return s;
}

ParametricSurface make_spherical_cap_control(int nu, int nv) {
    constexpr double c = 1.0;
    const double rad = std::sqrt(1.0 + c * c);
    ParametricSurface s;
    s.label = "spherical-cap";
    s.position = [rad](double u, double v) {
        return Vec3{rad * std::sin(u) * std::cos(v), rad * std::sin(u) * std::sin(v), rad * std::cos(u) - c};
    };
    s.tangent_u = [rad](double u, double v) {
        return Vec3{rad * std::cos(u) * std::cos(v), rad * std::cos(u) * std::sin(v), -rad * std::sin(u)};
    };
    s.tangent_v = [rad](double u, double v) {
        return Vec3{-rad * std::sin(u) * std::sin(v), rad * std::sin(u) * std::cos(v), 0.0};
    };
    s.u_min = 0.0;
    s.u_max = std::acos(c / rad);
    s.nu = nu;
    s.nv = nv;
    s.pole_at_u_min = true;
    s.sphere_boundary_at_u_max = true;
    validate_surface(s);
    return s;
}

HarmonicResiduals harmonic_identity_check(const ParametricSurface& s) {
    validate_surface(s, 1e-8);
    constexpr double n = 2.0;
    const NodeField f = sample(s, [n](const Vec3& x) { return (1.0 - dot3(x, x)) / (2.0 * n); });
    const Laplacian lap(s);
    HarmonicResiduals out;
    for (int i = 1; i < s.nu; ++i)
        for (int j = 0; j < s.nv; ++j) out.interior = std::max(out.interior, std::abs(lap.at(f, i, j) - 1.0));
    auto boundary_row = [&](int i) {
        for (int j = 0; j < s.nv; ++j)
            out.boundary = std::max(out.boundary, std::abs(boundary_conormal(s, f, i, j).derivative - 1.0 / n));
    };
    if (s.sphere_boundary_at_u_min) boundary_row(0);
    if (s.sphere_boundary_at_u_max) boundary_row(s.nu);
    return out;
}

double mean_curvature_residual(const ParametricSurface& s) {
    validate_surface(s, 1e-8);
    std::array<NodeField, 3> coords;
    for (int c = 0; c < 3; ++c) coords[c] = sample(s, [c](const Vec3& x) { return x[c]; });
    const Laplacian lap(s);
    double worst = 0.0;
    for (int i = 1; i < s.nu; ++i)
        for (int j = 0; j < s.nv; ++j) {
            const Vec3 h{lap.at(coords[0], i, j), lap.at(coords[1], i, j), lap.at(coords[2], i, j)};
            worst = std::max(worst, norm3(h));
        }
    return worst;
}

double boundary_orthogonality_angle(const ParametricSurface& s) {
    const NodeField zero(static_cast<std::size_t>(s.nu + 1) * s.nv, 0.0);
    double worst = 0.0;
    auto row = [&](int i) {
        for (int j = 0; j < s.nv; ++j) {
            const Vec3 nu = boundary_conormal(s, zero, i, j).direction;
            Vec3 inward = s.position(s.u(i), s.v(j));
            const double r = norm3(inward);
            for (auto& c : inward) c = -c / r;
            const double angle = std::atan2(norm3(cross3(nu, inward)), dot3(nu, inward));
            worst = std::max(worst, angle);
        }
    };
    if (s.sphere_boundary_at_u_min) row(0);
    if (s.sphere_boundary_at_u_max) row(s.nu);
    return worst;
}

}  // namespace isoflow
