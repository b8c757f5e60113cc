#include "isoflow/tridiagonal.hpp"

#include "isoflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isoflow {

void Tridiagonal::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    if (x.size() != n || y.size() != n) throw std::invalid_argument("Tridiagonal::apply: size mismatch");
    if (n == 0) return;
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + upper[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        y[i] = lower[i] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
    y[n - 1] = lower[n - 1] * x[n - 2] + diag[n - 1] * x[n - 1];
}

std::vector<double> thomas_solve(const Tridiagonal& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != n) throw std::invalid_argument("thomas_solve: size mismatch");
    std::vector<double> c_star(n, 0.0);
    std::vector<double> x(rhs.begin(), rhs.end());
    if (n == 0) return x;

    double pivot = a.diag[0];
    if (pivot == 0.0) throw SolverError("thomas_solve: zero pivot");
    c_star[0] = n > 1 ? a.upper[0] / pivot : 0.0;
    x[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = a.diag[i] - a.lower[i] * c_star[i - 1];
        if (pivot == 0.0) throw SolverError("thomas_solve: zero pivot");
        c_star[i] = i + 1 < n ? a.upper[i] / pivot : 0.0;
        x[i] = (x[i] - a.lower[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_star[i] * x[i + 1];
    return x;
}

int sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
    const std::size_t n = diag.size();
    constexpr double tiny = std::numeric_limits<double>::min() * 1e8;
    int count = 0;
    double q = diag[0] - x;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
    }
    return count;
}

std::vector<double> symmetric_tridiagonal_eigenvalues(std::span<const double> diag,
                                                      std::span<const double> off, int k,
                                                      double rel_tol) {
    const std::size_t n = diag.size();
    if (off.size() + 1 != n) throw std::invalid_argument("eigenvalues: off-diagonal size must be n-1");
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("eigenvalues: k out of range");

    // Gershgorin enclosure.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));
    const double abs_floor = scale * std::numeric_limits<double>::epsilon();

    std::vector<double> values(k);
    double left = lo;
    for (int index = 0; index < k; ++index) {
        double a = left;
        double b = hi;
        // Invariant: count(a) <= index < count(b).
        while (b - a > std::max(rel_tol * std::max(std::abs(a), std::abs(b)), abs_floor)) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (sturm_count(diag, off, mid) > index)
                b = mid;
            else
                a = mid;
        }
        values[index] = 0.5 * (a + b);
        left = a;
    }
    return values;
}

std::vector<double> symmetric_tridiagonal_eigenvector(std::span<const double> diag,
                                                      std::span<const double> off,
                                                      double eigenvalue) {
    const std::size_t n = diag.size();
    Tridiagonal shifted(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        shifted.diag[i] = diag[i] - eigenvalue;
        if (i + 1 < n) {
            shifted.upper[i] = off[i];
            shifted.lower[i + 1] = off[i];
        }
        scale = std::max(scale, std::abs(diag[i]) + (i + 1 < n ? std::abs(off[i]) : 0.0));
    }
    // Nudge the shift so the factorization never meets an exact zero pivot.
    const double nudge = scale * 1e-14;
    for (auto& d : shifted.diag) d -= nudge;

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
    for (int iter = 0; iter < 4; ++iter) {
        std::vector<double> y;
        try {
            y = thomas_solve(shifted, x);
        } catch (const SolverError&) {
            for (auto& d : shifted.diag) d -= nudge;
            continue;
        }
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm)) throw SolverError("inverse iteration diverged");
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    }
    return x;
}

}  // namespace isoflow
