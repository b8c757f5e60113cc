#include "isoflow/tridiagonal.hpp"
#include "isoflow/errors.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace isoflow;
using doctest::Approx;

TEST_CASE("thomas_solve inverts apply") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const int n = 50;
    Tridiagonal a(n);
    for (int i = 0; i < n; ++i) {
        a.lower[i] = i > 0 ? U(rng) : 0.0;
        a.upper[i] = i + 1 < n ? U(rng) : 0.0;
        a.diag[i] = 3.0 + U(rng);
    }
    std::vector<double> x(n), b(n);
    for (auto& v : x) v = U(rng);
    a.apply(x, b);
    const auto y = thomas_solve(a, b);
    for (int i = 0; i < n; ++i) CHECK(y[i] == Approx(x[i]).epsilon(1e-13));
}

TEST_CASE("thomas_solve reports a zero pivot") {
    Tridiagonal a(3);
    a.diag = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(thomas_solve(a, std::vector<double>{1.0, 1.0, 1.0}), SolverError);
}

TEST_CASE("sturm_count and bisection agree with a dense eigen-solve") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const int n = 40;
    std::vector<double> d(n), e(n - 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = d[i] = 2.0 * U(rng);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = e[i] = U(rng);
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues();

    CHECK(sturm_count(d, e, ref(0) - 1e-9) == 0);
    CHECK(sturm_count(d, e, ref(n - 1) + 1e-9) == n);
    CHECK(sturm_count(d, e, 0.5 * (ref(9) + ref(10))) == 10);

    const auto vals = symmetric_tridiagonal_eigenvalues(d, e, 8);
    REQUIRE(vals.size() == 8);
    for (int k = 0; k < 8; ++k) CHECK(vals[k] == Approx(ref(k)).epsilon(1e-11));

    for (int k = 0; k < 3; ++k) {
        const auto v = symmetric_tridiagonal_eigenvector(d, e, vals[k]);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        CHECK(norm == Approx(1.0).epsilon(1e-12));
        // Residual of A v - lambda v.
        for (int i = 0; i < n; ++i) {
            double r = d[i] * v[i] - vals[k] * v[i];
            if (i > 0) r += e[i - 1] * v[i - 1];
            if (i + 1 < n) r += e[i] * v[i + 1];
            CHECK(std::abs(r) < 1e-9);
        }
    }
}

TEST_CASE("discrete Laplacian eigenvalues") {
    const int n = 64;
    std::vector<double> d(n, 2.0), e(n - 1, -1.0);
    const auto vals = symmetric_tridiagonal_eigenvalues(d, e, 5);
    for (int k = 1; k <= 5; ++k) {
        const double exact = 4.0 * std::pow(std::sin(k * std::numbers::pi / (2.0 * (n + 1))), 2);
        CHECK(vals[k - 1] == Approx(exact).epsilon(1e-12));
    }
}
