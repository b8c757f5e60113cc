#pragma once

#include <array>
#include <functional>
#include <string>

namespace isoflow {

using Vec3 = std::array<double, 3>;
using ChartMap = std::function<Vec3(double, double)>;

/**
 * Surface x(u, v) in R^3 on [u_min, u_max] x [0, 2 pi), periodic in v, with
 * analytic tangents. Nodes are u_i = u_min + i h_u (i = 0..nu) and
 * v_j = 2 pi j / nv.
 *
 * A chart with a pole collapses the row u = u_min to a point (polar
 * coordinates); that row is only used as a neighbour value.
 */
struct ParametricSurface {
    std::string label;
    ChartMap position;
    ChartMap tangent_u;
    ChartMap tangent_v;
    double u_min = 0.0;
    double u_max = 1.0;
    int nu = 32;
    int nv = 32;
    bool pole_at_u_min = false;
    bool sphere_boundary_at_u_min = false;
    bool sphere_boundary_at_u_max = false;

    double hu() const { return (u_max - u_min) / nu; }
    double hv() const;
    double u(int i) const { return u_min + i * hu(); }
    double v(int j) const;
};

struct FirstFundamentalForm {
    double E = 0.0;
    double F = 0.0;
    double G = 0.0;
    double area_element() const;  // sqrt(EG - F^2)
};

FirstFundamentalForm first_fundamental_form(const ParametricSurface& s, double u, double v);

/// Throws std::invalid_argument if EG - F^2 <= 0 at a non-pole node, or if a
/// sphere-boundary row is off the unit sphere by more than tol.
void validate_surface(const ParametricSurface& s, double tol = 1e-10);

/// Equatorial unit disk in polar coordinates, u = radius.
ParametricSurface make_flat_disk(int nu, int nv);

/// Root of t tanh t = 1 by bisection.
double critical_catenoid_neck_parameter();

/**
 * x = a (cosh u cos v, cosh u sin v, u), u in [-t0, t0], t0 tanh t0 = 1,
 * a = 1 / (t0 cosh t0): meets the unit sphere orthogonally along both circles.
 */
ParametricSurface make_critical_catenoid(int nu, int nv);

/// Negative control: cap of the sphere of radius sqrt(2) centred at (0,0,-1),
/// bounded by the equator of the unit sphere, which it meets at 45 degrees.
ParametricSurface make_spherical_cap_control(int nu, int nv);

struct HarmonicResiduals {
    double interior = 0.0;  // max |Delta f - 1|
    double boundary = 0.0;  // max |df/dnu - 1/2| over sphere-boundary rows
};

/// f = (1 - |x|^2)/4, discrete Laplace-Beltrami from the first fundamental form.
HarmonicResiduals harmonic_identity_check(const ParametricSurface& s);

/// max over interior nodes of |Delta x| (the mean curvature vector).
double mean_curvature_residual(const ParametricSurface& s);

/// Largest angle (radians) between the inward conormal and -x over
/// sphere-boundary nodes.
double boundary_orthogonality_angle(const ParametricSurface& s);

}  // namespace isoflow
