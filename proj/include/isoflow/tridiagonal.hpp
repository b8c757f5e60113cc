#pragma once

#include <span>
#include <vector>

namespace isoflow {

/// Tridiagonal matrix. lower[0] and upper[n-1] are unused.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }

    void apply(std::span<const double> x, std::span<double> y) const;
};

/// Thomas algorithm without pivoting; intended for diagonally dominant systems.
/// Throws SolverError on a zero pivot.
std::vector<double> thomas_solve(const Tridiagonal& a, std::span<const double> rhs);

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly below x.
/// off[i] couples rows i and i+1 (size n-1).
int sturm_count(std::span<const double> diag, std::span<const double> off, double x);

/// Lowest k eigenvalues by Sturm-sequence bisection to relative width rel_tol.
std::vector<double> symmetric_tridiagonal_eigenvalues(std::span<const double> diag,
                                                      std::span<const double> off, int k,
                                                      double rel_tol = 1e-12);

/// Unit-norm eigenvector for a computed eigenvalue, by inverse iteration.
std::vector<double> symmetric_tridiagonal_eigenvector(std::span<const double> diag,
                                                      std::span<const double> off,
                                                      double eigenvalue);

}  // namespace isoflow
