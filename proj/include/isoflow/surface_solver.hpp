#pragma once

#include "isoflow/geometry.hpp"
#include "isoflow/radial_solver.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace isoflow {

/**
 * Tensor grid on a revolution chart: Nr cells in r (cell-centred, same
 * convention as RadialGrid), Nphi uniform periodic nodes in phi.
 *
 * Cell measure is m_ij * h_r * h_phi where m_ij is the r-cell average of
 * theta(., phi_j). Radial face weights are theta at the r-faces, angular
 * face weights are 1/theta at (r_i, phi_{j+1/2}); together they give the
 * conservative, self-adjoint form of
 *   Delta f = -(1/theta) [ d_r(theta d_r f) + d_phi((1/theta) d_phi f) ].
 */
class SurfaceGrid {
public:
    SurfaceGrid(RevolutionMetric metric, int nr, int nphi);

    const RevolutionMetric& metric() const { return metric_; }
    int nr() const { return nr_; }
    int nphi() const { return nphi_; }
    double hr() const { return hr_; }
    double hphi() const { return hphi_; }
    double r(int i) const { return metric_.r_min() + (i + 0.5) * hr_; }
    double r_face(int i) const { return metric_.r_min() + i * hr_; }
    double phi(int j) const;
    std::size_t size() const { return static_cast<std::size_t>(nr_) * nphi_; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nphi_ + j; }

    double cell_mass(int i, int j) const { return mass_[index(i, j)]; }
    /// theta at r-face i (0..nr) and angle j; zero on zero-flux ends.
    double r_face_weight(int i, int j) const { return r_face_[static_cast<std::size_t>(i) * nphi_ + j]; }
    /// 1/theta between angles j and j+1 on ring i.
    double phi_face_weight(int i, int j) const { return phi_face_[index(i, j)]; }
    /// theta at the ring centre (r_i, phi_j).
    double ring_theta(int i, int j) const { return ring_theta_[index(i, j)]; }
    double total_measure() const;

    bool dirichlet_inner() const { return metric_.boundary_spec().dirichlet_inner; }
    bool dirichlet_outer() const { return metric_.boundary_spec().dirichlet_outer; }

private:
    RevolutionMetric metric_;
    int nr_;
    int nphi_;
    double hr_;
    double hphi_;
    std::vector<double> mass_;
    std::vector<double> r_face_;
    std::vector<double> phi_face_;
    std::vector<double> ring_theta_;
};

inline constexpr int kMinSurfaceCells = 16;

struct SurfaceField {
    std::vector<double> values;  // index i * nphi + j
    double time = 0.0;
};

SurfaceField sample_field(const SurfaceGrid& g, const std::function<double(double, double)>& f);

SurfaceField laplace_beltrami_apply(const SurfaceGrid& g, const SurfaceField& f);

/// Theta-weighted ring averages; exact on phi-independent fields.
SurfaceField radialize(const SurfaceGrid& g, const SurfaceField& f);

/// sum_ij f m_ij h_r h_phi
double weighted_integral(const SurfaceGrid& g, const SurfaceField& f);

/// max over interior rings of |Delta(A f) - A(Delta f)|.
double commutation_residual(const SurfaceGrid& g, const SurfaceField& f);

struct LevelDerivative {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

/**
 * d/dr of I(r) = sum_j f theta h_phi (central difference across rings i-1, i+1)
 * against sum_j (d_r f - f Delta rho) theta h_phi with Delta rho = -theta_r/theta.
 * Radial metrics only; ring must be interior.
 */
LevelDerivative level_derivative_check(const SurfaceGrid& g, const SurfaceField& f, int ring);

/// Largest residual over all interior rings.
double level_derivative_max_residual(const SurfaceGrid& g, const SurfaceField& f);

struct CgOptions {
    double rel_tol = 1e-10;
    int max_iterations = 0;  // 0: 20 * (nr + nphi) + 200
};

struct Heat2DOptions {
    int startup_half_steps = 4;
    CgOptions cg;
};

struct Heat2DResult {
    SurfaceField field;
    /// flux_x0 / samples_x0 belong to the inner ring, flux_x1 / samples_x1 to the outer.
    FluxTrace trace;
    int max_cg_iterations = 0;
};

/// Crank-Nicolson (M + dt/2 S) u^{m+1} = (M - dt/2 S) u^m, Jacobi-preconditioned CG.
Heat2DResult solve_heat_2d(const SurfaceGrid& g, const SurfaceField& u0, double dt, double T,
                           const Heat2DOptions& options = {});

struct ExitTime2DResult {
    SurfaceField v;
    double serrin_deviation = 0.0;  // max - min of dv/dnu over all boundary samples
    int argmax_i = 0;
    int argmax_j = 0;
    double argmax_r = 0.0;
    double argmax_phi = 0.0;
    std::optional<double> mean_flux_inner;
    std::optional<double> mean_flux_outer;
    std::vector<double> flux_inner;  // per angle
    std::vector<double> flux_outer;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Solves Delta v = 1 with v = 0 on the Dirichlet rings.
ExitTime2DResult exit_time_2d(const SurfaceGrid& g, const CgOptions& options = {});

}  // namespace isoflow
