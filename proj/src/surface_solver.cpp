#include "isoflow/surface_solver.hpp"

#include "isoflow/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace isoflow {

namespace {

using Gauss16 = boost::math::quadrature::gauss<double, 16>;

// Five-point operator y = diag x - west x_{i-1} - east x_{i+1} - south x_{j-1} - north x_{j+1},
// periodic in j. Boundary ghosts are folded into diag (and east/west on
// Dirichlet rings). mass is the diagonal in which the operator is symmetric.
struct Stencil {
    int nr = 0;
    int nphi = 0;
    std::vector<double> diag, west, east, south, north, mass;

    void apply(std::span<const double> x, std::span<double> y) const {
        for (int i = 0; i < nr; ++i) {
            const std::size_t base = static_cast<std::size_t>(i) * nphi;
            for (int j = 0; j < nphi; ++j) {
                const std::size_t k = base + j;
                const std::size_t km = base + (j == 0 ? nphi - 1 : j - 1);
                const std::size_t kp = base + (j == nphi - 1 ? 0 : j + 1);
                double v = diag[k] * x[k] - south[k] * x[km] - north[k] * x[kp];
                if (i > 0) v -= west[k] * x[k - nphi];
                if (i + 1 < nr) v -= east[k] * x[k + nphi];
                y[k] = v;
            }
        }
    }
};

// A Dirichlet ring carries the face flux theta (9 u_1 - u_2) / (3 h_r) of the
// quadratic through zero, as in the radial solver. Its rows are scaled by
// s = E / (E + W/3) (E, W the interior and boundary face weights) to restore
// symmetry; angular couplings on that ring use sqrt(s_j s_{j+1}).
Stencil symmetric_laplacian(const SurfaceGrid& g) {
    Stencil s;
    s.nr = g.nr();
    s.nphi = g.nphi();
    const int nr = g.nr();
    const int nphi = g.nphi();
    const std::size_t n = g.size();
    s.diag.assign(n, 0.0);
    s.west.assign(n, 0.0);
    s.east.assign(n, 0.0);
    s.south.assign(n, 0.0);
    s.north.assign(n, 0.0);
    s.mass.assign(n, 0.0);
    const double ir2 = 1.0 / (g.hr() * g.hr());
    const double ip2 = 1.0 / (g.hphi() * g.hphi());

    std::vector<double> row_scale(n, 1.0);
    for (int j = 0; j < nphi; ++j) {
        if (g.dirichlet_inner()) {
            const double e = g.r_face_weight(1, j);
            row_scale[g.index(0, j)] = e / (e + g.r_face_weight(0, j) / 3.0);
        }
        if (g.dirichlet_outer()) {
            const double w = g.r_face_weight(nr - 1, j);
            row_scale[g.index(nr - 1, j)] = w / (w + g.r_face_weight(nr, j) / 3.0);
        }
    }

    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nphi; ++j) {
            const std::size_t k = g.index(i, j);
            const int jm = j == 0 ? nphi - 1 : j - 1;
            const int jp = j == nphi - 1 ? 0 : j + 1;
            const double sc = row_scale[k];
            const double w = g.r_face_weight(i, j) * ir2;
            const double e = g.r_face_weight(i + 1, j) * ir2;
            double so = g.phi_face_weight(i, jm) * ip2;
            double no = g.phi_face_weight(i, j) * ip2;
            if (sc != 1.0) {
                so *= std::sqrt(sc * row_scale[g.index(i, jm)]);
                no *= std::sqrt(sc * row_scale[g.index(i, jp)]);
            }
            double d = so + no;
            double west = 0.0;
            double east = 0.0;
            if (i > 0) {
                west += w;
                d += sc * w;
            }
            if (i + 1 < nr) {
                east += e;
                d += sc * e;
            }
            if (i == 0 && g.dirichlet_inner()) {
                d += sc * 3.0 * w;
                east = sc * (e + w / 3.0);
            }
            if (i + 1 == nr && g.dirichlet_outer()) {
                d += sc * 3.0 * e;
                west = sc * (w + e / 3.0);
            }
            s.west[k] = west;
            s.east[k] = east;
            s.south[k] = so;
            s.north[k] = no;
            s.diag[k] = d;
            s.mass[k] = sc * g.cell_mass(i, j);
        }
    }
    return s;
}

// mass_coef * M + c * S
Stencil combine(const Stencil& s, double mass_coef, double c) {
    Stencil out = s;
    for (std::size_t k = 0; k < out.diag.size(); ++k) {
        out.west[k] *= c;
        out.east[k] *= c;
        out.south[k] *= c;
        out.north[k] *= c;
        out.diag[k] = c * s.diag[k];
    }
    for (std::size_t k = 0; k < out.diag.size(); ++k) out.diag[k] += mass_coef * s.mass[k];
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct CgStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

CgStats pcg(const Stencil& a, std::span<const double> b, std::span<double> x, double rel_tol,
            int max_iterations) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), ap(n);
    a.apply(x, ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
    const double bnorm = std::sqrt(dot(b, b));
    CgStats stats;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        stats.converged = true;
        return stats;
    }
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / a.diag[k];
    p = z;
    double rz = dot(r, z);
    double rnorm = std::sqrt(dot(r, r));
    while (rnorm > rel_tol * bnorm && stats.iterations < max_iterations) {
        a.apply(p, ap);
        const double alpha = rz / dot(p, ap);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / a.diag[k];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        rnorm = std::sqrt(dot(r, r));
        ++stats.iterations;
        if (!std::isfinite(rnorm)) break;
    }
    stats.relative_residual = rnorm / bnorm;
    stats.converged = rnorm <= rel_tol * bnorm;
    return stats;
}

int max_iterations_for(const SurfaceGrid& g, const CgOptions& options) {
    return options.max_iterations > 0 ? options.max_iterations : 20 * (g.nr() + g.nphi()) + 200;
}

void check_field(const SurfaceGrid& g, const SurfaceField& f) {
    if (f.values.size() != g.size()) throw std::invalid_argument("surface field does not match the grid");
}

}  // namespace

// SurfaceGrid

SurfaceGrid::SurfaceGrid(RevolutionMetric metric, int nr, int nphi)
    : metric_(std::move(metric)), nr_(nr), nphi_(nphi) {
    if (nr_ < kMinSurfaceCells || nphi_ < kMinSurfaceCells)
        throw std::invalid_argument("SurfaceGrid: need Nr >= 16 and Nphi >= 16");
    hr_ = (metric_.r_max() - metric_.r_min()) / nr_;
    hphi_ = 2.0 * std::numbers::pi / nphi_;

    mass_.resize(size());
    ring_theta_.resize(size());
    phi_face_.resize(size());
    r_face_.resize(static_cast<std::size_t>(nr_ + 1) * nphi_);
    for (int j = 0; j < nphi_; ++j) {
        const double ph = phi(j);
        const double ph_half = (j + 0.5) * hphi_;
        for (int i = 0; i < nr_; ++i) {
            auto theta_r = [&](double r) { return metric_.theta(r, ph); };
            const double m = Gauss16::integrate(theta_r, r_face(i), r_face(i + 1)) / hr_;
            if (!(m > 0.0) || !std::isfinite(m)) throw SolverError("SurfaceGrid: non-positive cell measure");
            mass_[index(i, j)] = m;
            ring_theta_[index(i, j)] = metric_.theta_at_index(r(i), j, nphi_);
            phi_face_[index(i, j)] = 1.0 / metric_.theta(r(i), ph_half);
        }
        for (int i = 0; i <= nr_; ++i) r_face_[static_cast<std::size_t>(i) * nphi_ + j] = metric_.theta(r_face(i), ph);
        if (!dirichlet_inner()) r_face_[j] = 0.0;
        if (!dirichlet_outer()) r_face_[static_cast<std::size_t>(nr_) * nphi_ + j] = 0.0;
    }
}

double SurfaceGrid::phi(int j) const { return 2.0 * std::numbers::pi * j / nphi_; }

double SurfaceGrid::total_measure() const {
    double s = 0.0;
    for (double m : mass_) s += m;
    return s * hr_ * hphi_;
}

SurfaceField sample_field(const SurfaceGrid& g, const std::function<double(double, double)>& f) {
    SurfaceField out{std::vector<double>(g.size()), 0.0};
    for (int i = 0; i < g.nr(); ++i)
        for (int j = 0; j < g.nphi(); ++j) out.values[g.index(i, j)] = f(g.r(i), g.phi(j));
    return out;
}

SurfaceField laplace_beltrami_apply(const SurfaceGrid& g, const SurfaceField& f) {
    check_field(g, f);
    const Stencil s = symmetric_laplacian(g);
    SurfaceField out{std::vector<double>(g.size()), f.time};
    s.apply(f.values, out.values);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] /= s.mass[k];
    return out;
}

SurfaceField radialize(const SurfaceGrid& g, const SurfaceField& f) {
    check_field(g, f);
    SurfaceField out{std::vector<double>(g.size()), f.time};
    for (int i = 0; i < g.nr(); ++i) {
        // Shifted by the first sample so that phi-independent rings come back bit-exact.
        const double base = f.values[g.index(i, 0)];
        double num = 0.0;
        double den = 0.0;
        for (int j = 0; j < g.nphi(); ++j) {
            const double m = g.cell_mass(i, j);
            num += (f.values[g.index(i, j)] - base) * m;
            den += m;
        }
        const double avg = base + num / den;
        for (int j = 0; j < g.nphi(); ++j) out.values[g.index(i, j)] = avg;
    }
    return out;
}

double weighted_integral(const SurfaceGrid& g, const SurfaceField& f) {
    check_field(g, f);
    double s = 0.0;
    for (int i = 0; i < g.nr(); ++i)
        for (int j = 0; j < g.nphi(); ++j) s += f.values[g.index(i, j)] * g.cell_mass(i, j);
    return s * g.hr() * g.hphi();
}

double commutation_residual(const SurfaceGrid& g, const SurfaceField& f) {
    const SurfaceField a = laplace_beltrami_apply(g, radialize(g, f));
    const SurfaceField b = radialize(g, laplace_beltrami_apply(g, f));
    double worst = 0.0;
    for (int i = 1; i + 1 < g.nr(); ++i)
        for (int j = 0; j < g.nphi(); ++j) {
            const std::size_t k = g.index(i, j);
            worst = std::max(worst, std::abs(a.values[k] - b.values[k]));
        }
    return worst;
}

LevelDerivative level_derivative_check(const SurfaceGrid& g, const SurfaceField& f, int ring) {
    check_field(g, f);
    if (!g.metric().is_radial())
        throw std::invalid_argument("level_derivative_check: r is a distance only on radial metrics");
    if (ring < 1 || ring + 1 >= g.nr())
        throw std::invalid_argument("level_derivative_check: ring must be interior");
    auto ring_integral = [&](int i) {
        double s = 0.0;
        for (int j = 0; j < g.nphi(); ++j) s += f.values[g.index(i, j)] * g.ring_theta(i, j);
        return s * g.hphi();
    };
    LevelDerivative out;
    out.lhs = (ring_integral(ring + 1) - ring_integral(ring - 1)) / (2.0 * g.hr());
    const double r = g.r(ring);
    double s = 0.0;
    for (int j = 0; j < g.nphi(); ++j) {
        const double fr = (f.values[g.index(ring + 1, j)] - f.values[g.index(ring - 1, j)]) / (2.0 * g.hr());
        const double theta = g.ring_theta(ring, j);
        const double laplace_rho = -g.metric().dtheta_dr(r, g.phi(j)) / theta;
        s += (fr - f.values[g.index(ring, j)] * laplace_rho) * theta;
    }
    out.rhs = s * g.hphi();
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

double level_derivative_max_residual(const SurfaceGrid& g, const SurfaceField& f) {
    double worst = 0.0;
    for (int i = 1; i + 1 < g.nr(); ++i) worst = std::max(worst, level_derivative_check(g, f, i).residual);
    return worst;
}

// Heat flow

namespace {

struct RingFluxes {
    std::vector<double> inner;
    std::vector<double> outer;
};

RingFluxes boundary_fluxes(const SurfaceGrid& g, std::span<const double> u) {
    RingFluxes out;
    const int nr = g.nr();
    if (g.dirichlet_inner()) {
        out.inner.resize(g.nphi());
        for (int j = 0; j < g.nphi(); ++j)
            out.inner[j] = dirichlet_flux(u[g.index(0, j)], u[g.index(1, j)], g.hr());
    }
    if (g.dirichlet_outer()) {
        out.outer.resize(g.nphi());
        for (int j = 0; j < g.nphi(); ++j)
            out.outer[j] = dirichlet_flux(u[g.index(nr - 1, j)], u[g.index(nr - 2, j)], g.hr());
    }
    return out;
}

double ring_mean(const SurfaceGrid& g, int face, std::span<const double> samples) {
    double num = 0.0;
    double den = 0.0;
    for (int j = 0; j < g.nphi(); ++j) {
        const double w = g.metric().theta(g.r_face(face), g.phi(j));
        num += samples[j] * w;
        den += w;
    }
    return num / den;
}

double spread_of(const RingFluxes& f) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* ring : {&f.inner, &f.outer})
        for (double v : *ring) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    return hi >= lo ? hi - lo : 0.0;
}

}  // namespace

Heat2DResult solve_heat_2d(const SurfaceGrid& g, const SurfaceField& u0, double dt, double T,
                           const Heat2DOptions& options) {
    check_field(g, u0);
    if (!(dt > 0.0)) throw std::invalid_argument("solve_heat_2d: dt must be positive");
    if (!(T >= dt)) throw std::invalid_argument("solve_heat_2d: need T >= dt");
    if (options.startup_half_steps < 0 || options.startup_half_steps % 2 != 0)
        throw std::invalid_argument("solve_heat_2d: startup_half_steps must be even and >= 0");
    for (double v : u0.values)
        if (!std::isfinite(v)) throw std::invalid_argument("solve_heat_2d: non-finite initial data");

    const auto steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double k = T / static_cast<double>(steps);
    const Stencil s = symmetric_laplacian(g);
    const Stencil implicit = combine(s, 1.0, 0.5 * k);
    const Stencil explicit_part = combine(s, 1.0, -0.5 * k);
    const int max_iter = max_iterations_for(g, options.cg);

    Heat2DResult result;
    FluxTrace& trace = result.trace;
    if (g.dirichlet_inner()) trace.flux_x0.emplace();
    if (g.dirichlet_outer()) trace.flux_x1.emplace();

    std::vector<double> u = u0.values;
    std::vector<double> rhs(g.size());
    auto solve = [&](long step) {
        const CgStats st = pcg(implicit, rhs, u, options.cg.rel_tol, max_iter);
        result.max_cg_iterations = std::max(result.max_cg_iterations, st.iterations);
        if (!st.converged) {
            std::ostringstream os;
            os << "solve_heat_2d: CG did not converge at step " << step << " (t = " << step * k
               << ", relative residual " << st.relative_residual << ", " << st.iterations << " iterations)";
            throw SolverError(os.str());
        }
    };
    for (long m = 1; m <= steps; ++m) {
        if (2 * m <= options.startup_half_steps) {
            for (int half = 0; half < 2; ++half) {
                for (std::size_t q = 0; q < rhs.size(); ++q) rhs[q] = s.mass[q] * u[q];
                solve(m);
            }
        } else {
            explicit_part.apply(u, rhs);
            solve(m);
        }
        for (double v : u)
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "solve_heat_2d: non-finite values at step " << m;
                throw SolverError(os.str());
            }
        trace.times.push_back(static_cast<double>(m) * k);
        RingFluxes f = boundary_fluxes(g, u);
        if (g.dirichlet_inner()) trace.flux_x0->push_back(ring_mean(g, 0, f.inner));
        if (g.dirichlet_outer()) trace.flux_x1->push_back(ring_mean(g, g.nr(), f.outer));
        trace.spread.push_back(spread_of(f));
        if (g.dirichlet_inner()) trace.samples_x0.push_back(std::move(f.inner));
        if (g.dirichlet_outer()) trace.samples_x1.push_back(std::move(f.outer));
    }
    result.field = SurfaceField{std::move(u), T};
    return result;
}

ExitTime2DResult exit_time_2d(const SurfaceGrid& g, const CgOptions& options) {
    if (!g.dirichlet_inner() && !g.dirichlet_outer())
        throw std::invalid_argument("exit_time_2d: needs at least one Dirichlet ring");
    const Stencil s = symmetric_laplacian(g);
    const std::vector<double> rhs = s.mass;

    ExitTime2DResult out;
    out.v.values.assign(g.size(), 0.0);
    const CgStats st = pcg(s, rhs, out.v.values, options.rel_tol, max_iterations_for(g, options));
    out.iterations = st.iterations;
    out.relative_residual = st.relative_residual;
    out.converged = st.converged;

    const auto best = std::max_element(out.v.values.begin(), out.v.values.end());
    const auto k = static_cast<int>(best - out.v.values.begin());
    out.argmax_i = k / g.nphi();
    out.argmax_j = k % g.nphi();
    out.argmax_r = g.r(out.argmax_i);
    out.argmax_phi = g.phi(out.argmax_j);

    RingFluxes f = boundary_fluxes(g, out.v.values);
    out.serrin_deviation = spread_of(f);
    if (g.dirichlet_inner()) out.mean_flux_inner = ring_mean(g, 0, f.inner);
    if (g.dirichlet_outer()) out.mean_flux_outer = ring_mean(g, g.nr(), f.outer);
    out.flux_inner = std::move(f.inner);
    out.flux_outer = std::move(f.outer);
    return out;
}

}  // namespace isoflow
