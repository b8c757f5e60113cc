#include "isoflow/minimal_surface.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace isoflow;
using doctest::Approx;

namespace {
double norm(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }
}  // namespace

TEST_CASE("flat disk") {
    const auto s = make_flat_disk(16, 32);
    validate_surface(s);
    for (int j = 0; j < s.nv; ++j) CHECK(norm(s.position(s.u_max, s.v(j))) == Approx(1.0).epsilon(1e-15));
    for (double u : {0.1, 0.5, 1.0}) {
        const auto I = first_fundamental_form(s, u, 0.3);
        CHECK(I.E == Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(I.F) < 1e-15);
        CHECK(I.G == Approx(u * u).epsilon(1e-15));
    }
    // Radial differences are exact on x = u cos v; the angular second difference
    // scales cos v by 2 (1 - cos h) / h^2, an error largest on the first ring.
    const double hv = s.hv();
    const double expected = (1.0 - 2.0 * (1.0 - std::cos(hv)) / (hv * hv)) / s.hu();
    CHECK(mean_curvature_residual(s) == Approx(expected).epsilon(1e-8));
}

TEST_CASE("critical catenoid construction") {
    const double t0 = critical_catenoid_neck_parameter();
    CHECK(t0 == Approx(oracle::catenoid_neck()).epsilon(1e-12));
    CHECK(t0 == Approx(oracle::kCatenoidNeck).epsilon(1e-12));
    CHECK(t0 == Approx(1.19968).epsilon(1e-5));
    const auto s = make_critical_catenoid(16, 32);
    validate_surface(s);
    for (int j = 0; j < s.nv; ++j) {
        CHECK(std::abs(norm(s.position(s.u_min, s.v(j))) - 1.0) < 1e-10);
        CHECK(std::abs(norm(s.position(s.u_max, s.v(j))) - 1.0) < 1e-10);
    }
    CHECK(boundary_orthogonality_angle(s) < 1e-6);
}

TEST_CASE("catenoid mean curvature residual decays at second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const double r = mean_curvature_residual(make_critical_catenoid(n, n));
        if (prev > 0.0) CHECK(oracle::rate(prev, r) > 1.8);
        prev = r;
    }
}

TEST_CASE("harmonic identity: flat disk is exact for the quadratic") {
    const auto r = harmonic_identity_check(make_flat_disk(32, 32));
    CHECK(r.interior < 1e-10);
    CHECK(r.boundary < 1e-12);
}

TEST_CASE("harmonic identity: catenoid converges at second order") {
    HarmonicResiduals prev{};
    for (int n : {16, 32, 64}) {
        const auto r = harmonic_identity_check(make_critical_catenoid(n, n));
        if (prev.interior > 0.0) {
            CHECK(oracle::rate(prev.interior, r.interior) >= 1.8);
            CHECK(oracle::rate(prev.boundary, r.boundary) >= 1.8);
        }
        prev = r;
    }
}

TEST_CASE("harmonic identity: spherical cap control stays away from zero") {
    const auto s = make_spherical_cap_control(32, 32);
    validate_surface(s);
    CHECK(boundary_orthogonality_angle(s) == Approx(oracle::pi / 4).epsilon(1e-10));
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const double r = harmonic_identity_check(make_spherical_cap_control(n, n)).interior;
        CHECK(r > 0.4);
        if (prev > 0.0) CHECK(std::abs(r - prev) < 0.05);
        prev = r;
    }
}

TEST_CASE("validate_surface rejects a degenerate chart") {
    ParametricSurface s = make_flat_disk(8, 8);
    s.tangent_v = [](double, double) { return Vec3{0.0, 0.0, 0.0}; };
    CHECK_THROWS_AS(validate_surface(s), std::invalid_argument);
    ParametricSurface t = make_flat_disk(8, 8);
    t.position = [](double u, double v) { return Vec3{0.9 * u * std::cos(v), 0.9 * u * std::sin(v), 0.0}; };
    CHECK_THROWS_AS(validate_surface(t), std::invalid_argument);
}
