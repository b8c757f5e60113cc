#include "isoflow/run.hpp"

#include "isoflow/errors.hpp"
#include "isoflow/minimal_surface.hpp"
#include "isoflow/radial_solver.hpp"
#include "isoflow/surface_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace isoflow {

std::string format_real(double x) {
    if (x == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool RunReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
}

std::string RunReport::summary_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : summary) os << k << " = " << v << "\n";
    for (const auto& c : checks) {
        os << "check." << c.name << " = " << (c.passed ? "pass" : "fail") << "\n";
        if (!c.detail.empty()) os << "check." << c.name << ".detail = " << c.detail << "\n";
    }
    os << "status = " << (passed() ? "pass" : "fail") << "\n";
    return os.str();
}

namespace {

constexpr double kPi = std::numbers::pi;

class Report {
public:
    RunReport out;

    void put(const std::string& key, double v) { out.summary.emplace_back(key, format_real(v)); }
    void put(const std::string& key, const std::string& v) { out.summary.emplace_back(key, v); }
    void check(const std::string& name, bool ok, const std::string& detail = {}) {
        out.checks.push_back({name, ok, detail});
    }
    void file(std::string name, std::string contents) { out.artifacts.push_back({std::move(name), std::move(contents)}); }
};

bool is_chart(GeometryKind k) { return k == GeometryKind::Revolution || k == GeometryKind::RevolutionPerturbed; }

TubeProfile make_profile(const GeometryConfig& g) {
    switch (g.kind) {
        case GeometryKind::Ball: return make_euclidean_ball_profile(g.n, g.R);
        case GeometryKind::Cap: return make_spherical_cap_profile(g.n, g.R0);
        case GeometryKind::Clifford: return make_clifford_tube_profile(g.R);
        case GeometryKind::Annulus: return make_annulus_side_profile(g.inner, g.outer, g.side);
        default: throw std::invalid_argument("geometry has no tube profile");
    }
}

RevolutionMetric make_chart(const GeometryConfig& g) {
    switch (g.kind) {
        case GeometryKind::Annulus: return make_flat_annulus_chart(g.inner, g.outer);
        case GeometryKind::Revolution: return make_cap_chart(g.pole_cut);
        case GeometryKind::RevolutionPerturbed: return make_perturbed_cap_chart(g.eps, g.mode, g.pole_cut);
        default: throw std::invalid_argument("geometry has no revolution chart");
    }
}

/// Full annulus as one radial problem: both circles Dirichlet, weight |x|.
WeightedIntervalProblem annulus_problem(const GeometryConfig& g) {
    const double a = g.inner;
    return make_interval_problem(
        g.inner, g.outer, [a](double x) { return x / a; }, EndCondition::Dirichlet, EndCondition::Dirichlet);
}

WeightedIntervalProblem radial_problem(const GeometryConfig& g) {
    if (g.kind == GeometryKind::Annulus) return annulus_problem(g);
    return problem_from_profile(make_profile(g));
}

/// Annulus exit time v = (a^2 - x^2)/4 + C ln(x/a): inner-normal derivatives.
std::pair<double, double> annulus_exit_fluxes(double a, double b) {
    const double C = (b * b - a * a) / (4.0 * std::log(b / a));
    return {-a / 2.0 + C / a, b / 2.0 - C / b};
}

std::function<double(double, double)> test_field(TestField f) {
    switch (f) {
        case TestField::RCosPhi: return [](double r, double phi) { return r * std::cos(phi); };
        case TestField::Radial: return [](double r, double) { return r * r; };
        case TestField::One: return [](double, double) { return 1.0; };
        case TestField::R: return [](double r, double) { return r; };
        case TestField::CosPhi: return [](double, double phi) { return std::cos(phi); };
    }
    return {};
}

bool field_is_radial(TestField f) { return f == TestField::Radial || f == TestField::One || f == TestField::R; }

struct Level {
    double h = 0.0;
    double residual = 0.0;
};

/// Every pair of successive levels either decays at rate >= rate_min or
/// ends at the roundoff floor (roundoff_floor / h^2).
std::pair<bool, std::string> convergence_verdict(const std::vector<Level>& levels, const CheckConfig& c,
                                                 std::vector<double>* rates = nullptr) {
    bool ok = true;
    std::ostringstream detail;
    auto at_floor = [&](const Level& l) { return l.residual <= c.roundoff_floor / (l.h * l.h); };
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        const Level& a = levels[i];
        const Level& b = levels[i + 1];
        const double rate = (b.residual > 0.0 && a.residual > 0.0) ? std::log(a.residual / b.residual) / std::log(a.h / b.h)
                                                                   : std::numeric_limits<double>::infinity();
        if (rates) rates->push_back(rate);
        const bool pair_ok = at_floor(b) || rate >= c.rate_min;
        if (!pair_ok) {
            ok = false;
            detail << "rate " << format_real(rate) << " < " << format_real(c.rate_min) << " at h = " << format_real(b.h)
                   << "; ";
        }
    }
    return {ok, detail.str()};
}

/// Residuals bounded below by residual_min with successive ratios within stability_ratio.
std::pair<bool, std::string> stability_verdict(const std::vector<Level>& levels, const CheckConfig& c) {
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i].residual >= c.residual_min)) {
            ok = false;
            detail << "residual " << format_real(levels[i].residual) << " < " << format_real(c.residual_min) << "; ";
        }
        if (i > 0) {
            const double ratio = std::max(levels[i].residual, levels[i - 1].residual) /
                                 std::min(levels[i].residual, levels[i - 1].residual);
            if (!(ratio <= c.stability_ratio)) {
                ok = false;
                detail << "level ratio " << format_real(ratio) << " > " << format_real(c.stability_ratio) << "; ";
            }
        }
    }
    return {ok, detail.str()};
}

std::string levels_csv(const std::vector<Level>& levels) {
    std::ostringstream os;
    os << "grid_h,residual\n";
    for (const auto& l : levels) os << format_real(l.h) << "," << format_real(l.residual) << "\n";
    return os.str();
}

std::string surface_field_csv(const SurfaceGrid& g, const SurfaceField& f) {
    std::ostringstream os;
    os << "r,phi,value\n";
    for (int i = 0; i < g.nr(); ++i)
        for (int j = 0; j < g.nphi(); ++j)
            os << format_real(g.r(i)) << "," << format_real(g.phi(j)) << "," << format_real(f.values[g.index(i, j)])
               << "\n";
    return os.str();
}

double time_step(const RunConfig& c) { return c.numeric.dt.value_or(c.numeric.T / 2000.0); }

void spread_verdict(Report& r, const RunConfig& c, const FluxTrace& trace) {
    const double spread_max = trace.max_spread();
    const double probe_t = c.numeric.T / 2.0;
    const double spread_probe = trace.spread.empty() ? 0.0 : trace.spread[trace.index_near(probe_t)];
    r.put("spread_max", spread_max);
    r.put("spread_probe_t", trace.times.empty() ? 0.0 : trace.times[trace.index_near(probe_t)]);
    r.put("spread_probe", spread_probe);
    if (c.experiment.expect == Expectation::Constant) {
        r.check("constant_flux", spread_max <= c.checks.spread_tol,
                "spread_max " + format_real(spread_max) + " vs spread_tol " + format_real(c.checks.spread_tol));
    } else {
        r.check("nonconstant_flux", spread_probe >= c.checks.nonconstant_min,
                "spread_probe " + format_real(spread_probe) + " vs nonconstant_min " +
                    format_real(c.checks.nonconstant_min));
    }
}

void serrin_verdict(Report& r, const RunConfig& c, double deviation) {
    r.put("serrin_deviation", deviation);
    if (c.experiment.expect == Expectation::Constant)
        r.check("serrin_constant", deviation <= c.checks.serrin_tol,
                format_real(deviation) + " vs serrin_tol " + format_real(c.checks.serrin_tol));
    else
        r.check("serrin_nonconstant", deviation >= c.checks.serrin_min,
                format_real(deviation) + " vs serrin_min " + format_real(c.checks.serrin_min));
}

// ---------------------------------------------------------------------------

void heat_flow(Report& r, const RunConfig& c) {
    const auto& g = c.geometry;
    const double dt = time_step(c);
    const bool surface = is_chart(g.kind) || c.numeric.solver == SolverPath::Surface;
    if (!surface) {
        const auto problem = radial_problem(g);
        const RadialGrid grid{problem.x0, problem.x1, c.numeric.N};
        const auto result = solve_radial_heat(problem, constant_field(grid, 1.0), dt, c.numeric.T);
        const auto& tr = result.trace;
        std::ostringstream os;
        os << "t" << (tr.flux_x0 ? ",flux_x0" : "") << (tr.flux_x1 ? ",flux_x1" : "") << "\n";
        for (std::size_t m = 0; m < tr.times.size(); ++m) {
            os << format_real(tr.times[m]);
            if (tr.flux_x0) os << "," << format_real((*tr.flux_x0)[m]);
            if (tr.flux_x1) os << "," << format_real((*tr.flux_x1)[m]);
            os << "\n";
        }
        r.file("flux.csv", os.str());
        r.put("solver", "radial");
        r.put("steps", static_cast<double>(tr.times.size() - 1));
        if (tr.flux_x0) r.put("flux_x0_final", tr.flux_x0->back());
        if (tr.flux_x1) r.put("flux_x1_final", tr.flux_x1->back());
        spread_verdict(r, c, tr);
        return;
    }
    const SurfaceGrid grid(make_chart(g), c.numeric.Nr, c.numeric.Nphi);
    const auto u0 = sample_field(grid, [](double, double) { return 1.0; });
    const auto result = solve_heat_2d(grid, u0, dt, c.numeric.T);
    const auto& tr = result.trace;
    auto ring_csv = [&](const std::vector<std::vector<double>>& samples) {
        std::ostringstream os;
        os << "t,phi_index,flux\n";
        for (std::size_t m = 0; m < samples.size(); ++m)
            for (std::size_t j = 0; j < samples[m].size(); ++j)
                os << format_real(tr.times[m]) << "," << j << "," << format_real(samples[m][j]) << "\n";
        return os.str();
    };
    if (tr.flux_x0) r.file("flux_inner.csv", ring_csv(tr.samples_x0));
    if (tr.flux_x1) r.file("flux_outer.csv", ring_csv(tr.samples_x1));
    r.file("field.csv", surface_field_csv(grid, result.field));
    r.put("solver", "surface");
    r.put("steps", static_cast<double>(tr.times.size() - 1));
    r.put("max_cg_iterations", static_cast<double>(result.max_cg_iterations));
    if (tr.flux_x0) r.put("mean_flux_inner_final", tr.flux_x0->back());
    if (tr.flux_x1) r.put("mean_flux_outer_final", tr.flux_x1->back());
    spread_verdict(r, c, tr);
}

void exit_time(Report& r, const RunConfig& c) {
    const auto& g = c.geometry;
    const bool surface = is_chart(g.kind) || c.numeric.solver == SolverPath::Surface;
    if (surface) {
        const SurfaceGrid grid(make_chart(g), c.numeric.Nr, c.numeric.Nphi);
        const auto res = exit_time_2d(grid);
        r.file("field.csv", surface_field_csv(grid, res.v));
        auto ring_csv = [](const std::vector<double>& flux) {
            std::ostringstream os;
            os << "phi_index,flux\n";
            for (std::size_t j = 0; j < flux.size(); ++j) os << j << "," << format_real(flux[j]) << "\n";
            return os.str();
        };
        if (!res.flux_inner.empty()) r.file("flux_inner.csv", ring_csv(res.flux_inner));
        if (!res.flux_outer.empty()) r.file("flux_outer.csv", ring_csv(res.flux_outer));
        r.put("solver", "surface");
        r.put("cg_iterations", static_cast<double>(res.iterations));
        r.put("relative_residual", res.relative_residual);
        if (res.mean_flux_inner) r.put("flux_inner", *res.mean_flux_inner);
        if (res.mean_flux_outer) r.put("flux_outer", *res.mean_flux_outer);
        r.put("argmax_r", res.argmax_r);
        r.put("argmax_phi", res.argmax_phi);
        r.check("cg_converged", res.converged, "relative residual " + format_real(res.relative_residual));
        if (g.kind == GeometryKind::Annulus) {
            const auto [in, out] = annulus_exit_fluxes(g.inner, g.outer);
            r.put("flux_inner_exact", in);
            r.put("flux_outer_exact", out);
            const double err = std::max(std::abs(*res.mean_flux_inner - in), std::abs(*res.mean_flux_outer - out));
            r.check("closed_form_fluxes", err <= c.checks.flux_tol,
                    "error " + format_real(err) + " vs flux_tol " + format_real(c.checks.flux_tol));
        }
        serrin_verdict(r, c, res.serrin_deviation);
        return;
    }
    r.put("solver", "radial");
    if (g.kind == GeometryKind::Annulus) {
        const auto res = solve_exit_time_fv(annulus_problem(g), c.numeric.N);
        const auto [in, out] = annulus_exit_fluxes(g.inner, g.outer);
        std::ostringstream os;
        os << "r,value\n";
        const auto& v = res.v.values;
        for (std::size_t i = 0; i < v.size(); ++i) os << format_real(res.v.grid.center(static_cast<int>(i))) << "," << format_real(v[i]) << "\n";
        r.file("exit_time.csv", os.str());
        const auto imax = std::max_element(v.begin(), v.end()) - v.begin();
        r.put("flux_inner", *res.flux_x0);
        r.put("flux_outer", *res.flux_x1);
        r.put("flux_inner_exact", in);
        r.put("flux_outer_exact", out);
        r.put("argmax_r", res.v.grid.center(static_cast<int>(imax)));
        const double err = std::max(std::abs(*res.flux_x0 - in), std::abs(*res.flux_x1 - out));
        r.check("closed_form_fluxes", err <= c.checks.flux_tol,
                "error " + format_real(err) + " vs flux_tol " + format_real(c.checks.flux_tol));
        serrin_verdict(r, c, std::abs(*res.flux_x0 - *res.flux_x1));
        return;
    }
    const TubeProfile p = make_profile(g);
    const ExitTimeProfile psi = solve_exit_time(p, c.numeric.N);
    const double R = p.inner_radius();
    std::ostringstream os;
    os << "rho,psi,dpsi\n";
    for (int i = 0; i <= c.numeric.N; ++i) {
        const double rho = std::min(R, R * i / c.numeric.N);
        os << format_real(rho) << "," << format_real(psi.value(rho)) << "," << format_real(psi.derivative(rho)) << "\n";
    }
    r.file("exit_time.csv", os.str());
    r.put("psi_max", psi.maximum());
    r.put("argmax_r", R);
    if (g.kind == GeometryKind::Ball) {
        const double exact = R * R / (2.0 * g.n);
        r.put("psi_max_exact", exact);
        r.check("closed_form_maximum", std::abs(psi.maximum() - exact) <= c.checks.closed_form_tol,
                "error " + format_real(std::abs(psi.maximum() - exact)));
    }
    const int d = p.vanishing_order().value_or(0);
    const double mu_expected = -1.0 / (d + 1);
    const auto limit = exit_time_curvature_limit(psi);
    r.put("mu_estimate", limit.mu_estimate);
    r.put("mu_expected", mu_expected);
    r.check("curvature_limit", std::abs(limit.mu_estimate - mu_expected) <= c.checks.mu_tol,
            "error " + format_real(std::abs(limit.mu_estimate - mu_expected)) + " vs mu_tol " +
                format_real(c.checks.mu_tol));
    // A single equidistant boundary: the normal derivative is psi'(0) everywhere.
    serrin_verdict(r, c, 0.0);
}

void spectrum(Report& r, const RunConfig& c) {
    const auto problem = radial_problem(c.geometry);
    SpectrumOptions opts;
    opts.richardson = c.numeric.richardson;
    const auto res = radial_dirichlet_spectrum(problem, c.numeric.N, c.numeric.k, opts);
    std::ostringstream os;
    os << "k,lambda,flux0\n";
    bool witnesses = true;
    bool increasing = true;
    for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
        os << i + 1 << "," << format_real(res.eigenvalues[i]) << "," << format_real(res.boundary_fluxes[i]) << "\n";
        r.put("lambda_" + std::to_string(i + 1), res.eigenvalues[i]);
        r.put("flux0_" + std::to_string(i + 1), res.boundary_fluxes[i]);
        witnesses = witnesses && std::abs(res.boundary_fluxes[i]) >= c.checks.witness_min;
        if (i > 0) increasing = increasing && res.eigenvalues[i] > res.eigenvalues[i - 1];
    }
    r.file("spectrum.csv", os.str());
    for (std::size_t i = 0; i < res.warnings.size(); ++i) r.put("warning_" + std::to_string(i + 1), res.warnings[i]);
    r.check("eigenvalues_increasing", increasing && !res.eigenvalues.empty() && res.eigenvalues.front() > 0.0);
    r.check("boundary_flux_witnesses", witnesses, "witness_min " + format_real(c.checks.witness_min));
}

template <class Measure>
std::vector<Level> chart_levels(const RunConfig& c, Measure measure) {
    const auto metric = make_chart(c.geometry);
    const auto f = test_field(c.experiment.field);
    std::vector<Level> levels;
    for (int l = 0; l < c.numeric.levels; ++l) {
        const SurfaceGrid grid(metric, c.numeric.Nr << l, c.numeric.Nphi << l);
        levels.push_back({grid.hr(), measure(grid, sample_field(grid, f))});
    }
    return levels;
}

void put_levels(Report& r, const std::vector<Level>& levels, const std::vector<double>& rates) {
    for (std::size_t i = 0; i < levels.size(); ++i) r.put("residual_" + std::to_string(i), levels[i].residual);
    for (std::size_t i = 0; i < rates.size(); ++i) r.put("rate_" + std::to_string(i + 1), rates[i]);
}

void commute(Report& r, const RunConfig& c) {
    const auto levels = chart_levels(c, [](const SurfaceGrid& g, const SurfaceField& f) {
        return commutation_residual(g, f);
    });
    r.file("commute.csv", levels_csv(levels));
    std::vector<double> rates;
    if (c.experiment.expect == Expectation::Constant) {
        const auto [ok, detail] = convergence_verdict(levels, c.checks, &rates);
        put_levels(r, levels, rates);
        r.check(field_is_radial(c.experiment.field) ? "commutes_exactly" : "commutes_to_order", ok, detail);
    } else {
        put_levels(r, levels, rates);
        const auto [ok, detail] = stability_verdict(levels, c.checks);
        r.check("commutation_fails", ok, detail);
    }
}

void level_identity(Report& r, const RunConfig& c) {
    const auto levels = chart_levels(c, [](const SurfaceGrid& g, const SurfaceField& f) {
        return level_derivative_max_residual(g, f);
    });
    r.file("level_identity.csv", levels_csv(levels));
    std::vector<double> rates;
    const auto [ok, detail] = convergence_verdict(levels, c.checks, &rates);
    put_levels(r, levels, rates);
    r.check("level_identity_converges", ok, detail);
}

void focal_order(Report& r, const RunConfig& c) {
    const TubeProfile p = make_profile(c.geometry);
    const auto fit = estimate_focal_order(p);
    const int d = p.vanishing_order().value_or(0);
    r.put("d_estimate", fit.d_estimate);
    r.put("c_estimate", fit.c_estimate);
    r.put("d_rounded", static_cast<double>(fit.d_rounded));
    r.put("fit_residual", fit.residual);
    r.put("d_expected", static_cast<double>(d));
    r.check("focal_order", std::abs(fit.d_estimate - d) <= c.checks.d_tol && fit.d_rounded == d,
            "error " + format_real(std::abs(fit.d_estimate - d)) + " vs d_tol " + format_real(c.checks.d_tol));
}

void soul_minimality(Report& r, const RunConfig& c) {
    const auto& g = c.geometry;
    const TubeProfile p = make_profile(g);
    const double coeff = soul_minimality_check(p);
    double expected = 0.0;
    if (g.kind == GeometryKind::Annulus) {
        const double soul = 0.5 * (g.inner + g.outer);
        expected = g.side == AnnulusSide::Outward ? 1.0 / soul : -1.0 / soul;
    }
    r.put("coeff", coeff);
    r.put("coeff_expected", expected);
    r.check("coeff_matches_model", std::abs(coeff - expected) <= c.checks.coeff_tol,
            "error " + format_real(std::abs(coeff - expected)) + " vs coeff_tol " + format_real(c.checks.coeff_tol));
    if (c.experiment.expect == Expectation::Constant)
        r.check("soul_minimal", std::abs(coeff) <= c.checks.coeff_tol);
    else
        r.check("soul_not_minimal", std::abs(coeff) > c.checks.coeff_tol);
}

void free_boundary(Report& r, const RunConfig& c) {
    std::vector<Level> interior;
    std::vector<Level> boundary;
    double angle = 0.0;
    std::ostringstream os;
    os << "grid_h,max_interior_residual,max_boundary_residual\n";
    for (int l = 0; l < c.numeric.levels; ++l) {
        const int nu = c.numeric.nu << l;
        const int nv = c.numeric.nv << l;
        ParametricSurface s;
        switch (c.experiment.surface) {
            case SurfaceKind::FlatDisk: s = make_flat_disk(nu, nv); break;
            case SurfaceKind::Catenoid: s = make_critical_catenoid(nu, nv); break;
            case SurfaceKind::SphericalCap: s = make_spherical_cap_control(nu, nv); break;
        }
        validate_surface(s);
        const auto res = harmonic_identity_check(s);
        interior.push_back({s.hu(), res.interior});
        boundary.push_back({s.hu(), res.boundary});
        angle = std::max(angle, boundary_orthogonality_angle(s));
        os << format_real(s.hu()) << "," << format_real(res.interior) << "," << format_real(res.boundary) << "\n";
    }
    r.file("residuals.csv", os.str());
    r.put("orthogonality_angle", angle);
    std::vector<double> rates_i;
    std::vector<double> rates_b;
    if (c.experiment.expect == Expectation::Constant) {
        const auto [ok_i, det_i] = convergence_verdict(interior, c.checks, &rates_i);
        const auto [ok_b, det_b] = convergence_verdict(boundary, c.checks, &rates_b);
        for (std::size_t i = 0; i < interior.size(); ++i) {
            r.put("interior_residual_" + std::to_string(i), interior[i].residual);
            r.put("boundary_residual_" + std::to_string(i), boundary[i].residual);
        }
        for (std::size_t i = 0; i < rates_i.size(); ++i) {
            r.put("interior_rate_" + std::to_string(i + 1), rates_i[i]);
            r.put("boundary_rate_" + std::to_string(i + 1), rates_b[i]);
        }
        r.check("interior_converges", ok_i, det_i);
        r.check("boundary_converges", ok_b, det_b);
        r.check("meets_sphere_orthogonally", angle <= c.checks.angle_tol,
                format_real(angle) + " vs angle_tol " + format_real(c.checks.angle_tol));
    } else {
        for (std::size_t i = 0; i < interior.size(); ++i)
            r.put("interior_residual_" + std::to_string(i), interior[i].residual);
        const auto [ok, detail] = stability_verdict(interior, c.checks);
        r.check("harmonicity_fails", ok, detail);
    }
}

}  // namespace

RunReport run_experiment(const RunConfig& c) {
    Report r;
    r.put("experiment", std::string(to_string(c.experiment.kind)));
    if (c.experiment.kind != ExperimentKind::FreeBoundary) r.put("geometry", std::string(to_string(c.geometry.kind)));
    r.put("expect", std::string(to_string(c.experiment.expect)));
    switch (c.experiment.kind) {
        case ExperimentKind::HeatFlow: heat_flow(r, c); break;
        case ExperimentKind::ExitTime: exit_time(r, c); break;
        case ExperimentKind::Spectrum: spectrum(r, c); break;
        case ExperimentKind::Commute: commute(r, c); break;
        case ExperimentKind::LevelIdentity: level_identity(r, c); break;
        case ExperimentKind::FocalOrder: focal_order(r, c); break;
        case ExperimentKind::SoulMinimality: soul_minimality(r, c); break;
        case ExperimentKind::FreeBoundary: free_boundary(r, c); break;
    }
    return std::move(r.out);
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    };
    for (const auto& a : report.artifacts) write(a.filename, a.contents);
    write("summary.txt", report.summary_text());
}

namespace {

struct Outcome {
    int status = 0;
    std::string message;
};

Outcome run_one(const RunConfig& config, const std::filesystem::path& dir) {
    try {
        const RunReport report = run_experiment(config);
        write_report(report, dir);
        std::ostringstream os;
        for (const auto& c : report.checks)
            os << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
        return {report.passed() ? 0 : 1, os.str()};
    } catch (const std::exception& e) {
        return {2, std::string("error: ") + e.what() + "\n"};
    }
}

}  // namespace

int run(const RunConfig& config, std::ostream& log) {
    const std::filesystem::path root = config.output_dir;
    if (config.numeric.sweep.empty()) {
        const auto o = run_one(config, root);
        log << o.message << "summary: " << (root / "summary.txt").string() << "\n";
        return o.status;
    }
    std::vector<std::future<Outcome>> jobs;
    for (int k : config.numeric.sweep) {
        jobs.push_back(std::async(std::launch::async, [&config, root, k] {
            return run_one(refined(config, k), root / ("refine_" + std::to_string(k)));
        }));
    }
    int status = 0;
    std::ostringstream summary;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto o = jobs[i].get();
        const int k = config.numeric.sweep[i];
        log << "[refine_" << k << "]\n" << o.message;
        summary << "run.refine_" << k << " = " << (o.status == 0 ? "pass" : o.status == 1 ? "fail" : "error") << "\n";
        status = std::max(status, o.status);
    }
    summary << "status = " << (status == 0 ? "pass" : "fail") << "\n";
    std::filesystem::create_directories(root);
    std::ofstream(root / "summary.txt", std::ios::binary) << summary.str();
    return status;
}

}  // namespace isoflow
