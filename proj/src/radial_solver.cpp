#include "isoflow/radial_solver.hpp"

#include "isoflow/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace isoflow {

namespace {

using Gauss16 = boost::math::quadrature::gauss<double, 16>;

template <class F>
double gauss16(F&& f, double a, double b) {
    if (a == b) return 0.0;
    return Gauss16::integrate(f, a, b);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

WeightedIntervalProblem make_interval_problem(double x0, double x1, ScalarFunction weight,
                                              EndCondition bc0, EndCondition bc1) {
    if (!(x0 < x1)) throw std::invalid_argument("interval problem: need x0 < x1");
    if (!weight) throw std::invalid_argument("interval problem: missing weight");
    constexpr int kSamples = 256;
    for (int i = 1; i < kSamples; ++i) {
        const double w = weight(x0 + (x1 - x0) * i / kSamples);
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("interval problem: weight must be positive inside");
    }
    const double scale = std::abs(weight(0.5 * (x0 + x1)));
    if (bc0 == EndCondition::SingularRegular && std::abs(weight(x0)) > 1e-12 * scale)
        throw std::invalid_argument("interval problem: SingularRegular at x0 needs a vanishing weight");
    if (bc1 == EndCondition::SingularRegular && std::abs(weight(x1)) > 1e-12 * scale)
        throw std::invalid_argument("interval problem: SingularRegular at x1 needs a vanishing weight");
    return WeightedIntervalProblem{x0, x1, std::move(weight), bc0, bc1};
}

WeightedIntervalProblem problem_from_profile(const TubeProfile& p) {
    const EndCondition inner =
        p.vanishing_order() ? EndCondition::SingularRegular : EndCondition::WeightedNeumann;
    return make_interval_problem(0.0, p.inner_radius(), p.density(), EndCondition::Dirichlet, inner);
}

RadialField constant_field(const RadialGrid& grid, double value) {
    return RadialField{grid, std::vector<double>(grid.cells, value), 0.0};
}

// RadialOperator

RadialOperator discretize(const WeightedIntervalProblem& p, int cells) {
    if (cells < kMinCells) throw std::invalid_argument("discretize: need at least 8 cells");
    RadialOperator op;
    op.grid_ = RadialGrid{p.x0, p.x1, cells};
    op.bc0_ = p.bc0;
    op.bc1_ = p.bc1;
    const double h = op.grid_.h();

    op.face_weights_.resize(cells + 1);
    for (int i = 0; i <= cells; ++i) op.face_weights_[i] = p.weight(op.grid_.face(i));
    // A zero-flux end has no face flux, whatever the weight does there.
    if (p.bc0 != EndCondition::Dirichlet) op.face_weights_.front() = 0.0;
    if (p.bc1 != EndCondition::Dirichlet) op.face_weights_.back() = 0.0;

    op.cell_weights_.resize(cells);
    for (int i = 0; i < cells; ++i) {
        const double m = gauss16(p.weight, op.grid_.face(i), op.grid_.face(i + 1)) / h;
        if (!(m > 0.0) || !std::isfinite(m)) throw SolverError("discretize: weight evaluation failed");
        op.cell_weights_[i] = m;
    }
    for (double w : op.face_weights_)
        if (!std::isfinite(w)) throw SolverError("discretize: weight evaluation failed");

    // Dirichlet faces carry the flux w (9 u_1 - u_2) / (3h) of the quadratic
    // through zero at the face, so the boundary row gains a u_2 coupling.
    op.matrix_ = Tridiagonal(cells);
    const double h2 = h * h;
    for (int i = 0; i < cells; ++i) {
        const double west = op.face_weights_[i];
        const double east = op.face_weights_[i + 1];
        const double scale = 1.0 / (op.cell_weights_[i] * h2);
        double diag = 0.0;
        double lower = 0.0;
        double upper = 0.0;
        if (i > 0) {
            lower -= west;
            diag += west;
        }
        if (i + 1 < cells) {
            upper -= east;
            diag += east;
        }
        if (i == 0 && p.bc0 == EndCondition::Dirichlet) {
            diag += 3.0 * west;
            upper -= west / 3.0;
        }
        if (i + 1 == cells && p.bc1 == EndCondition::Dirichlet) {
            diag += 3.0 * east;
            lower -= east / 3.0;
        }
        op.matrix_.lower[i] = lower * scale;
        op.matrix_.upper[i] = upper * scale;
        op.matrix_.diag[i] = diag * scale;
    }

    // L is self-adjoint for these masses: m_i h, scaled on Dirichlet boundary cells.
    op.masses_.resize(cells);
    for (int i = 0; i < cells; ++i) op.masses_[i] = op.cell_weights_[i] * h;
    if (p.bc0 == EndCondition::Dirichlet) {
        const double w1 = op.face_weights_[1];
        op.masses_.front() *= w1 / (w1 + op.face_weights_.front() / 3.0);
    }
    if (p.bc1 == EndCondition::Dirichlet) {
        const double w1 = op.face_weights_[cells - 1];
        op.masses_.back() *= w1 / (w1 + op.face_weights_.back() / 3.0);
    }
    return op;
}

std::vector<double> RadialOperator::apply(std::span<const double> u) const {
    std::vector<double> out(u.size());
    matrix_.apply(u, out);
    return out;
}

double RadialOperator::weighted_integral(std::span<const double> u) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * cell_weights_[i];
    return sum * grid_.h();
}

std::vector<double> RadialOperator::symmetric_offdiagonal() const {
    const int n = grid_.cells;
    std::vector<double> off(n - 1);
    for (int i = 0; i + 1 < n; ++i) off[i] = -std::sqrt(matrix_.upper[i] * matrix_.lower[i + 1]);
    return off;
}

// FluxTrace

double FluxTrace::max_spread() const {
    double m = 0.0;
    for (double s : spread) m = std::max(m, s);
    return m;
}

std::size_t FluxTrace::index_near(double t) const {
    if (times.empty()) throw std::out_of_range("FluxTrace: empty trace");
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    const auto i = static_cast<std::size_t>(it - times.begin());
    return (t - times[i - 1] <= times[i] - t) ? i - 1 : i;
}

// Heat flow

RadialHeatResult solve_radial_heat(const WeightedIntervalProblem& p, const RadialField& u0,
                                   double dt, double T, const HeatOptions& options) {
    if (!(dt > 0.0)) throw std::invalid_argument("solve_radial_heat: dt must be positive");
    if (!(T >= dt)) throw std::invalid_argument("solve_radial_heat: need T >= dt");
    const double length = p.x1 - p.x0;
    if (dt > 0.25 * length * length)
        throw std::invalid_argument("solve_radial_heat: dt exceeds the accuracy guard (x1-x0)^2/4");
    if (u0.grid.x0 != p.x0 || u0.grid.x1 != p.x1 ||
        u0.values.size() != static_cast<std::size_t>(u0.grid.cells))
        throw std::invalid_argument("solve_radial_heat: initial field does not match the problem");
    if (!all_finite(u0.values)) throw std::invalid_argument("solve_radial_heat: non-finite initial data");
    if (options.startup_half_steps < 0 || options.startup_half_steps % 2 != 0)
        throw std::invalid_argument("solve_radial_heat: startup_half_steps must be even and >= 0");

    const RadialOperator op = discretize(p, u0.grid.cells);
    const int n = u0.grid.cells;
    const double h = op.grid().h();
    const auto steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double k = T / static_cast<double>(steps);

    // I + k/2 L serves both the implicit CN half and the backward-Euler half step.
    Tridiagonal implicit = op.matrix();
    Tridiagonal explicit_part = op.matrix();
    for (int i = 0; i < n; ++i) {
        implicit.lower[i] *= 0.5 * k;
        implicit.upper[i] *= 0.5 * k;
        implicit.diag[i] = 1.0 + 0.5 * k * implicit.diag[i];
        explicit_part.lower[i] *= -0.5 * k;
        explicit_part.upper[i] *= -0.5 * k;
        explicit_part.diag[i] = 1.0 - 0.5 * k * explicit_part.diag[i];
    }

    RadialHeatResult result{u0, {}};
    FluxTrace& trace = result.trace;
    const bool left = p.bc0 == EndCondition::Dirichlet;
    const bool right = p.bc1 == EndCondition::Dirichlet;
    if (left) trace.flux_x0.emplace();
    if (right) trace.flux_x1.emplace();
    trace.times.reserve(steps);

    std::vector<double> u = u0.values;
    std::vector<double> rhs(n);
    for (long m = 1; m <= steps; ++m) {
        if (2 * m <= options.startup_half_steps) {
            u = thomas_solve(implicit, u);
            u = thomas_solve(implicit, u);
        } else {
            explicit_part.apply(u, rhs);
            u = thomas_solve(implicit, rhs);
        }
        if (!all_finite(u)) {
            std::ostringstream os;
            os << "solve_radial_heat: non-finite values at step " << m << " (t = " << m * k << ")";
            throw SolverError(os.str());
        }
        trace.times.push_back(static_cast<double>(m) * k);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        if (left) {
            const double f = dirichlet_flux(u[0], u[1], h);
            trace.flux_x0->push_back(f);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        if (right) {
            const double f = dirichlet_flux(u[n - 1], u[n - 2], h);
            trace.flux_x1->push_back(f);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        trace.spread.push_back(left || right ? hi - lo : 0.0);
    }
    result.field.values = std::move(u);
    result.field.time = T;
    return result;
}

// Exit time

ExitTimeProfile solve_exit_time(const TubeProfile& p, int cells) {
    if (cells < kMinCells) throw std::invalid_argument("solve_exit_time: need at least 8 cells");
    ExitTimeProfile psi(p);
    const double R = p.inner_radius();
    psi.cells_ = cells;
    psi.h_ = R / cells;
    if (p.vanishing_order()) {
        const auto fit = estimate_focal_order(p);  // throws SolverError on failure
        if (fit.d_rounded < 1) throw SolverError("solve_exit_time: focal order fit failed");
        psi.leading_order_ = fit.d_rounded;
    }

    const auto& theta = p.density();
    psi.tail_faces_.assign(cells + 1, 0.0);
    for (int i = cells - 1; i >= 0; --i)
        psi.tail_faces_[i] = psi.tail_faces_[i + 1] + gauss16(theta, i * psi.h_, (i + 1) * psi.h_);

    psi.psi_faces_.assign(cells + 1, 0.0);
    auto dpsi = [&psi](double rho) { return psi.derivative(rho); };
    for (int i = 0; i < cells; ++i)
        psi.psi_faces_[i + 1] = psi.psi_faces_[i] + gauss16(dpsi, i * psi.h_, (i + 1) * psi.h_);
    for (double v : psi.psi_faces_)
        if (!std::isfinite(v)) throw SolverError("solve_exit_time: quadrature produced non-finite values");
    return psi;
}

int ExitTimeProfile::cell_of(double rho) const {
    const double R = profile_.inner_radius();
    if (!(rho >= 0.0 && rho <= R)) throw std::invalid_argument("exit time: rho outside [0, R]");
    return std::min(cells_ - 1, static_cast<int>(rho / h_));
}

double ExitTimeProfile::tail_integral(double rho) const {
    const int i = cell_of(rho);
    return tail_faces_[i + 1] + gauss16(profile_.density(), rho, (i + 1) * h_);
}

double ExitTimeProfile::derivative(double rho) const {
    const int i = cell_of(rho);
    const double R = profile_.inner_radius();
    if (leading_order_ && i == cells_ - 1) return (R - rho) / (*leading_order_ + 1);
    return tail_integral(rho) / profile_.theta(rho);
}

double ExitTimeProfile::value(double rho) const {
    const int i = cell_of(rho);
    auto dpsi = [this](double s) { return derivative(s); };
    return psi_faces_[i] + gauss16(dpsi, i * h_, rho);
}

double ExitTimeProfile::second_derivative(double rho) const {
    const double t = profile_.theta(rho);
    if (!(t > 0.0)) throw std::invalid_argument("exit time: psi'' undefined where theta vanishes");
    return -1.0 - profile_.theta_prime(rho) * tail_integral(rho) / (t * t);
}

RadialField ExitTimeProfile::field(int cells) const {
    RadialGrid grid{0.0, profile_.inner_radius(), cells};
    RadialField f = constant_field(grid, 0.0);
    for (int i = 0; i < cells; ++i) f.values[i] = value(grid.center(i));
    return f;
}

DirichletExitTime solve_exit_time_fv(const WeightedIntervalProblem& p, int cells) {
    if (p.bc0 != EndCondition::Dirichlet && p.bc1 != EndCondition::Dirichlet)
        throw std::invalid_argument("solve_exit_time_fv: needs at least one Dirichlet end");
    const RadialOperator op = discretize(p, cells);
    const std::vector<double> ones(cells, 1.0);
    DirichletExitTime out;
    out.v = RadialField{op.grid(), thomas_solve(op.matrix(), ones), 0.0};
    if (!all_finite(out.v.values)) throw SolverError("solve_exit_time_fv: non-finite solution");
    const double h = op.grid().h();
    const auto& v = out.v.values;
    if (p.bc0 == EndCondition::Dirichlet) out.flux_x0 = dirichlet_flux(v[0], v[1], h);
    if (p.bc1 == EndCondition::Dirichlet) out.flux_x1 = dirichlet_flux(v[cells - 1], v[cells - 2], h);
    return out;
}

CurvatureLimit exit_time_curvature_limit(const ExitTimeProfile& psi) {
    const double R = psi.profile().inner_radius();
    const double e = R / 64.0;
    CurvatureLimit out;
    out.samples = {psi.second_derivative(R - 4.0 * e), psi.second_derivative(R - 2.0 * e),
                   psi.second_derivative(R - e)};
    const auto& f = out.samples;
    const double coarse = 2.0 * f[1] - f[0];
    const double fine = 2.0 * f[2] - f[1];
    out.mu_estimate = (4.0 * fine - coarse) / 3.0;
    out.residual = std::abs(fine - coarse);
    // The samples must approach the limit monotonically in e.
    out.converged = std::isfinite(out.mu_estimate) &&
                    std::abs(f[2] - f[1]) <= std::abs(f[1] - f[0]) + 1e-12;
    return out;
}

CurvatureLimit exit_time_curvature_limit(const TubeProfile& p) {
    return exit_time_curvature_limit(solve_exit_time(p));
}

// Spectrum

namespace {

struct Eigenpairs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // in the M^{1/2} basis
};

Eigenpairs lowest_eigenpairs(const RadialOperator& op, int k, double rel_tol, bool vectors) {
    const auto diag = op.symmetric_diagonal();
    const auto off = op.symmetric_offdiagonal();
    Eigenpairs out;
    out.values = symmetric_tridiagonal_eigenvalues(diag, off, k, rel_tol);
    if (vectors)
        for (double lambda : out.values)
            out.vectors.push_back(symmetric_tridiagonal_eigenvector(diag, off, lambda));
    return out;
}

}  // namespace

SpectrumResult radial_dirichlet_spectrum(const WeightedIntervalProblem& p, int cells, int k,
                                         const SpectrumOptions& options) {
    if (k < 1) throw std::invalid_argument("radial_dirichlet_spectrum: k must be >= 1");
    if (p.bc0 != EndCondition::Dirichlet)
        throw std::invalid_argument("radial_dirichlet_spectrum: needs Dirichlet at x0");
    if (k > cells) throw std::invalid_argument("radial_dirichlet_spectrum: k exceeds the number of cells");

    const RadialOperator op = discretize(p, cells);
    const Eigenpairs fine = lowest_eigenpairs(op, k, options.bisection_rel_tol, true);

    SpectrumResult out;
    out.eigenvalues = fine.values;
    if (options.richardson) {
        if (cells % 4 != 0 || cells / 4 < kMinCells || k > cells / 4)
            throw std::invalid_argument("radial_dirichlet_spectrum: Richardson needs a cell count divisible by 4, >= 32");
        const auto half = lowest_eigenpairs(discretize(p, cells / 2), k, options.bisection_rel_tol, false).values;
        const auto quarter = lowest_eigenpairs(discretize(p, cells / 4), k, options.bisection_rel_tol, false).values;
        for (int i = 0; i < k; ++i) {
            // Eliminate h^2, then the h^3 term left by the boundary closure.
            const double r_fine = (4.0 * fine.values[i] - half[i]) / 3.0;
            const double r_coarse = (4.0 * half[i] - quarter[i]) / 3.0;
            out.eigenvalues[i] = (8.0 * r_fine - r_coarse) / 7.0;
        }
    }

    const double h = op.grid().h();
    const auto mu = op.masses();
    for (int i = 0; i < k; ++i) {
        RadialField phi = constant_field(op.grid(), 0.0);
        for (int j = 0; j < cells; ++j) phi.values[j] = fine.vectors[i][j] / std::sqrt(mu[j]);
        double flux = dirichlet_flux(phi.values[0], phi.values[1], h);
        if (flux < 0.0) {
            for (double& v : phi.values) v = -v;
            flux = -flux;
        }
        if (!(flux > 1e-8)) {
            std::ostringstream os;
            os << "eigenfunction " << i + 1 << " has vanishing boundary flux " << flux;
            out.warnings.push_back(os.str());
        }
        out.eigenfunctions.push_back(std::move(phi));
        out.boundary_fluxes.push_back(flux);
    }
    for (int i = 0; i + 1 < k; ++i) {
        const double gap = out.eigenvalues[i + 1] - out.eigenvalues[i];
        if (gap <= options.cluster_tol * std::max(1.0, std::abs(out.eigenvalues[i + 1]))) {
            std::ostringstream os;
            os << "eigenvalues " << i + 1 << " and " << i + 2 << " are clustered (gap " << gap << ")";
            out.warnings.push_back(os.str());
        }
    }
    return out;
}

}  // namespace isoflow
