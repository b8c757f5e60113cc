#pragma once

#include "isoflow/geometry.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isoflow {

enum class GeometryKind { Ball, Cap, Clifford, Annulus, Revolution, RevolutionPerturbed };

enum class ExperimentKind {
    HeatFlow,
    ExitTime,
    Spectrum,
    Commute,
    LevelIdentity,
    FocalOrder,
    SoulMinimality,
    FreeBoundary,
};

/// Whether the property under test should hold ("constant") or fail ("nonconstant").
enum class Expectation { Constant, Nonconstant };

enum class SolverPath { Radial, Surface };

enum class SurfaceKind { FlatDisk, Catenoid, SphericalCap };

enum class TestField { RCosPhi, Radial, One, R, CosPhi };

struct GeometryConfig {
    GeometryKind kind = GeometryKind::Ball;
    int n = 3;
    double R = 1.0;  // clifford: pi/8 unless given
    double R0 = 1.5707963267948966;
    double inner = 1.0;
    double outer = 2.0;
    AnnulusSide side = AnnulusSide::Outward;
    double eps = 0.1;
    int mode = 1;
    double pole_cut = kDefaultPoleCut;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::HeatFlow;
    Expectation expect = Expectation::Constant;
    SurfaceKind surface = SurfaceKind::Catenoid;
    TestField field = TestField::RCosPhi;
};

struct NumericConfig {
    int N = 512;
    int Nr = 64;
    int Nphi = 64;
    int nu = 32;  // free-boundary surface grid
    int nv = 32;
    std::optional<double> dt;  // default T / 2000
    double T = 0.1;
    int k = 5;
    int levels = 3;  // refinement levels for convergence experiments
    SolverPath solver = SolverPath::Radial;
    bool richardson = true;  // spectrum: extrapolate from N, N/2 and N/4
    std::vector<int> sweep;  // extra refinement offsets run concurrently
};

/// Verdict thresholds; every default is listed in the README.
struct CheckConfig {
    double spread_tol = 1e-8;
    double nonconstant_min = 1e-4;
    double serrin_tol = 1e-8;
    double serrin_min = 0.1;
    double mu_tol = 1e-3;
    double d_tol = 0.05;
    double coeff_tol = 1e-6;
    double rate_min = 1.8;
    double roundoff_floor = 1e-13;  // scaled by 1/h^2 of the level
    double residual_min = 1e-2;
    double closed_form_tol = 1e-8;
    double flux_tol = 1e-4;
    double witness_min = 1e-3;
    double angle_tol = 1e-6;
    double stability_ratio = 2.0;  // max ratio between successive-level residuals
};

struct RunConfig {
    GeometryConfig geometry;
    ExperimentConfig experiment;
    NumericConfig numeric;
    CheckConfig checks;
    std::string output_dir = "out";
};

struct ConfigError {
    int line = 0;  // 0: not tied to a line (missing key)
    std::string message;
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<ConfigError> errors;
};

/**
 * Parses the line-oriented `key = value` grammar:
 *
 *   # comment
 *   [geometry]    kind, n, R, R0, inner, outer, side, eps, mode, pole_cut
 *   [experiment]  kind (required), expect, surface, field
 *   [numeric]     N, Nr, Nphi, nu, nv, dt, T, k, levels, solver, richardson, sweep
 *   [checks]      spread_tol, nonconstant_min, serrin_tol, serrin_min, mu_tol,
 *                 d_tol, coeff_tol, rate_min, roundoff_floor, residual_min,
 *                 closed_form_tol, flux_tol, witness_min, angle_tol, stability_ratio
 *   [output]      dir
 *
 * Unknown sections and keys, keys that the chosen geometry kind does not use,
 * and values outside the targeted operation's preconditions are errors.
 */
ParseResult parse_config(std::string_view text);

std::string_view to_string(GeometryKind kind);
std::string_view to_string(ExperimentKind kind);
std::string_view to_string(Expectation e);

/// Doubles every grid resolution `times` times.
RunConfig refined(const RunConfig& config, int times);

}  // namespace isoflow
