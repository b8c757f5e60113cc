#pragma once

#include "isoflow/geometry.hpp"
#include "isoflow/tridiagonal.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace isoflow {

/// Boundary behaviour at one end of a weighted interval.
enum class EndCondition {
    Dirichlet,        // u = 0
    WeightedNeumann,  // weight * u' -> 0 (even reflection across a soul)
    SingularRegular,  // weight vanishes; zero flux, no condition needed
};

/**
 * The operator u -> -(1/w) (w u')' on (x0, x1) with per-end conditions.
 *
 * This is the radial part of the geometer's (positive) Laplacian on a tube
 * with density w; the heat equation reads u_t = (1/w) (w u')'.
 */
struct WeightedIntervalProblem {
    double x0 = 0.0;
    double x1 = 1.0;
    ScalarFunction weight;
    EndCondition bc0 = EndCondition::Dirichlet;
    EndCondition bc1 = EndCondition::Dirichlet;
};

/// Validates: x0 < x1, w > 0 inside, SingularRegular only where w vanishes.
WeightedIntervalProblem make_interval_problem(double x0, double x1, ScalarFunction weight,
                                              EndCondition bc0, EndCondition bc1);

/// Dirichlet at the boundary (rho = 0); SingularRegular at a focal inner radius,
/// WeightedNeumann at a two-sided soul.
WeightedIntervalProblem problem_from_profile(const TubeProfile& p);

/// Cell-centred partition of [x0, x1].
struct RadialGrid {
    double x0 = 0.0;
    double x1 = 1.0;
    int cells = 8;

    double h() const { return (x1 - x0) / cells; }
    double center(int i) const { return x0 + (i + 0.5) * h(); }
    double face(int i) const { return x0 + i * h(); }
};

inline constexpr int kMinCells = 8;

struct RadialField {
    RadialGrid grid;
    std::vector<double> values;
    double time = 0.0;
};

RadialField constant_field(const RadialGrid& grid, double value);

/// Inner normal derivative at a Dirichlet end of a cell-centred grid with
/// ghost reflection: (9 u_1 - u_2) / (3h), exact for quadratics vanishing at
/// the boundary. u_1 is the boundary cell, u_2 its neighbour.
inline double dirichlet_flux(double u_first, double u_second, double h) {
    return (9.0 * u_first - u_second) / (3.0 * h);
}

/**
 * Conservative finite-volume form of -(1/w) (w u')'.
 *
 * (L u)_i = -(1/(m_i h^2)) [w_{i+1/2} (u_{i+1} - u_i) - w_{i-1/2} (u_i - u_{i-1})]
 *
 * with m_i the cell average of w (16-point Gauss-Legendre) and w at the faces.
 * A Dirichlet face carries the flux w (9 u_1 - u_2) / (3h) of the quadratic
 * through zero at the face (quadratic ghost); the other conditions zero the
 * outer face flux. L is self-adjoint in sum_i u_i v_i mu_i, where mu_i = m_i h
 * except on Dirichlet boundary cells, which carry m h w_in / (w_in + w_face/3).
 */
class RadialOperator {
public:
    const RadialGrid& grid() const { return grid_; }
    const Tridiagonal& matrix() const { return matrix_; }
    std::span<const double> cell_weights() const { return cell_weights_; }
    /// mu_i, the masses in which L is self-adjoint.
    std::span<const double> masses() const { return masses_; }
    std::span<const double> face_weights() const { return face_weights_; }
    EndCondition bc0() const { return bc0_; }
    EndCondition bc1() const { return bc1_; }

    std::vector<double> apply(std::span<const double> u) const;
    /// sum_i u_i m_i h
    double weighted_integral(std::span<const double> u) const;
    /// Diagonal and off-diagonal of M^{1/2} L M^{-1/2}, M = diag(mu_i).
    std::vector<double> symmetric_diagonal() const { return matrix_.diag; }
    std::vector<double> symmetric_offdiagonal() const;

private:
    friend RadialOperator discretize(const WeightedIntervalProblem&, int);
    RadialGrid grid_;
    Tridiagonal matrix_;
    std::vector<double> cell_weights_;
    std::vector<double> masses_;
    std::vector<double> face_weights_;
    EndCondition bc0_ = EndCondition::Dirichlet;
    EndCondition bc1_ = EndCondition::Dirichlet;
};

RadialOperator discretize(const WeightedIntervalProblem& p, int cells);

/**
 * Boundary normal derivatives over time.
 *
 * One-dimensional solves fill flux_x0 / flux_x1 (one value per step and
 * Dirichlet end). Two-dimensional solves additionally keep the per-angle
 * samples of each Dirichlet ring, with flux_x0 / flux_x1 holding the
 * boundary-measure weighted ring averages. spread[m] is max - min over all
 * boundary samples at step m (both ends, all angles).
 */
struct FluxTrace {
    std::vector<double> times;
    std::optional<std::vector<double>> flux_x0;
    std::optional<std::vector<double>> flux_x1;
    std::vector<std::vector<double>> samples_x0;
    std::vector<std::vector<double>> samples_x1;
    std::vector<double> spread;

    double max_spread() const;
    /// Index of the recorded time closest to t.
    std::size_t index_near(double t) const;
};

struct HeatOptions {
    /// Backward-Euler half steps replacing the first Crank-Nicolson steps
    /// (Rannacher start-up); damps the boundary-layer oscillation from
    /// incompatible initial data. Must be even.
    int startup_half_steps = 4;
};

struct RadialHeatResult {
    RadialField field;
    FluxTrace trace;
};

/// Crank-Nicolson (I + dt/2 L) u^{m+1} = (I - dt/2 L) u^m with Thomas solves.
/// The step is adjusted to T / ceil(T / dt).
RadialHeatResult solve_radial_heat(const WeightedIntervalProblem& p, const RadialField& u0,
                                   double dt, double T, const HeatOptions& options = {});

/**
 * Mean exit time psi of a tube, v = psi(rho), from
 *   psi'(rho) = int_rho^R theta / theta(rho),  psi(0) = 0,
 * by composite 16-point Gauss-Legendre quadrature on `cells` cells. On the
 * last cell of a focal profile psi' uses the leading term (R - rho)/(d + 1).
 */
class ExitTimeProfile {
public:
    double value(double rho) const;
    double derivative(double rho) const;
    /// psi'' = -1 + eta psi', evaluated from the density and tail integral.
    double second_derivative(double rho) const;
    /// int_rho^R theta
    double tail_integral(double rho) const;
    double maximum() const { return psi_faces_.back(); }
    RadialField field(int cells) const;
    const TubeProfile& profile() const { return profile_; }

private:
    friend ExitTimeProfile solve_exit_time(const TubeProfile&, int);
    explicit ExitTimeProfile(TubeProfile p) : profile_(std::move(p)) {}
    int cell_of(double rho) const;

    TubeProfile profile_;
    int cells_ = 0;
    double h_ = 0.0;
    std::optional<int> leading_order_;
    std::vector<double> tail_faces_;
    std::vector<double> psi_faces_;
};

ExitTimeProfile solve_exit_time(const TubeProfile& p, int cells = 512);

/// Finite-volume solve of L v = 1 with boundary normal derivatives at the
/// Dirichlet ends (inner normal, positive for v >= 0).
struct DirichletExitTime {
    RadialField v;
    std::optional<double> flux_x0;
    std::optional<double> flux_x1;
};

DirichletExitTime solve_exit_time_fv(const WeightedIntervalProblem& p, int cells);

/// psi'' near the inner radius, Richardson-extrapolated from R - {4e, 2e, e},
/// e = R/64, assuming an error expansion in powers of e.
struct CurvatureLimit {
    double mu_estimate = 0.0;
    std::array<double, 3> samples{};  // psi'' at R - 4e, R - 2e, R - e
    double residual = 0.0;            // gap between the two first-level extrapolants
    bool converged = true;
};

CurvatureLimit exit_time_curvature_limit(const ExitTimeProfile& psi);
CurvatureLimit exit_time_curvature_limit(const TubeProfile& p);

struct SpectrumOptions {
    /// Extrapolate from N, N/2 and N/4: R(N) = (4 l_N - l_{N/2}) / 3 removes h^2,
    /// then (8 R(N) - R(N/2)) / 7 removes h^3.
    bool richardson = false;
    double bisection_rel_tol = 1e-12;
    double cluster_tol = 1e-10;
};

struct SpectrumResult {
    std::vector<double> eigenvalues;
    std::vector<RadialField> eigenfunctions;  // normalized: sum phi^2 mu = 1
    std::vector<double> boundary_fluxes;      // phi_k'(x0), sign chosen positive
    std::vector<std::string> warnings;
};

/// Lowest k Dirichlet eigenpairs of L (requires Dirichlet at x0).
SpectrumResult radial_dirichlet_spectrum(const WeightedIntervalProblem& p, int cells, int k,
                                         const SpectrumOptions& options = {});

}  // namespace isoflow
