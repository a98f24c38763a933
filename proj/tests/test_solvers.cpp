#include "hohom/solvers.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace hohom;

namespace {

constexpr double pi = std::numbers::pi;
using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double cosine_a(double y) { return 2.0 + std::cos(2.0 * pi * y); }

CoefficientField constant_field(int d, int m, double c, int N) {
    CoefficientPreset p;
    p.d = d;
    p.m = m;
    p.c = c;
    return sample(p, N);
}

CoefficientField cosine_field(int m, int N) {
    CoefficientPreset p;
    p.kind = "cosine_1d";
    p.m = m;
    return sample(p, N);
}

GridFunction sin_x1(const Grid& g) {
    return sample_function(g, [](const std::vector<double>& x) { return std::sin(2.0 * pi * x[0]); });
}

double integrate(const std::function<double(double)>& f, double a, double b) { return GK::integrate(f, a, b, 15, 1e-14); }

}  // namespace

TEST(SolvePeriodic, ConstantSingleModeSecondOrder) {
    const auto A = constant_field(1, 1, 2.0, 16);
    const auto f = sin_x1(Grid::torus(1, 16));
    const auto u = solve_periodic({&A, 1, f});
    for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(u.values()[k], f.values()[k] / (2.0 * 4.0 * pi * pi), 1e-12);
}

TEST(SolvePeriodic, ConstantSingleModeFourthOrder) {
    const auto A = constant_field(1, 2, 1.5, 16);
    const auto f = sin_x1(Grid::torus(1, 32));
    const auto u = solve_periodic({&A, 2, f});
    const double s = 1.0 / (1.5 * std::pow(2.0 * pi, 4));
    for (std::size_t k = 0; k < 32; ++k) EXPECT_NEAR(u.values()[k], s * f.values()[k], 1e-13);
}

TEST(SolvePeriodic, OscillatingFirstOrderMatchesQuadrature) {
    // -(a(x/eps) u')' = sin 2 pi x: a u' = cos(2 pi x)/(2 pi) + C, C from periodicity of u.
    const int reps = 8, Nc = 32, N = Nc * reps;
    const double eps = 1.0 / reps;
    const auto A = cosine_field(1, Nc);
    const auto u = solve_periodic({&A, reps, sin_x1(Grid::torus(1, N))}, {1e-12, 0, false});
    const double inv = integrate([&](double x) { return 1.0 / cosine_a(x / eps); }, 0.0, 1.0);
    const double cs = integrate([&](double x) { return std::cos(2.0 * pi * x) / (2.0 * pi * cosine_a(x / eps)); }, 0.0, 1.0);
    const double C = -cs / inv;
    auto du = [&](double x) { return (std::cos(2.0 * pi * x) / (2.0 * pi) + C) / cosine_a(x / eps); };
    std::vector<double> ref(N);
    double mean = 0.0;
    for (int k = 0; k < N; ++k) {
        const double x = static_cast<double>(k) / N;
        ref[static_cast<std::size_t>(k)] = k == 0 ? 0.0 : ref[static_cast<std::size_t>(k - 1)] + integrate(du, x - 1.0 / N, x);
        mean += ref[static_cast<std::size_t>(k)] / N;
    }
    double err = 0.0;
    for (int k = 0; k < N; ++k) err = std::max(err, std::abs(u.values()[static_cast<std::size_t>(k)] - (ref[static_cast<std::size_t>(k)] - mean)));
    EXPECT_LT(err, 1e-6);
}

TEST(SolvePeriodic, ConstantCoefficientAgreesWithFourierSolve) {
    const auto A = constant_field(2, 2, 1.3, 16);
    const Grid g = Grid::torus(2, 32);
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    double c[4][4];
    for (auto& row : c)
        for (double& v : row) v = nd(rng);
    auto f = sample_function(g, [&](const std::vector<double>& x) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s += c[i][j] * std::cos(2.0 * pi * (i * x[0] + j * x[1]) + 0.3 * i - 0.7 * j);
        return s;
    });
    const double mean = f.mean(0);
    for (double& v : f.values()) v -= mean;
    PcgReport rep;
    const auto u = solve_periodic({&A, 2, f}, {1e-13, 0, false}, &rep);
    std::vector<double> Abar(9, 0.0);
    for (int a = 0; a < 3; ++a) Abar[static_cast<std::size_t>(a * 3 + a)] = 1.3;
    const auto u0 = solve_homogenized(Abar, 2, f);
    EXPECT_LE((u - u0).max_abs(), 1e-10 * u0.max_abs());
    EXPECT_LE(rep.relative_residual, 1e-13);
}

TEST(SolvePeriodic, Guards) {
    const auto A = cosine_field(1, 16);
    EXPECT_THROW(solve_periodic({&A, 2, sin_x1(Grid::torus(1, 16))}), ResolutionError);
    GridFunction f(Grid::torus(1, 32), 1);
    for (double& v : f.values()) v = 1.0;
    EXPECT_THROW(solve_periodic({&A, 2, f}), std::invalid_argument);
}

TEST(SolveHomogenized, FourthOrderSingleMode) {
    const auto f = sin_x1(Grid::torus(1, 16));
    const auto u = solve_homogenized({std::sqrt(3.0)}, 2, f);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(u.values()[k], f.values()[k] / (std::sqrt(3.0) * std::pow(2.0 * pi, 4)), 1e-15);
}

TEST(SolveHomogenized, LaminateAlignedMode) {
    const auto f = sin_x1(Grid::torus(2, 16));
    const auto u = solve_homogenized({std::sqrt(3.0), 0.0, 0.0, 2.0}, 1, f);
    for (std::size_t k = 0; k < f.points(); ++k) EXPECT_NEAR(u.values()[k], f.values()[k] / (std::sqrt(3.0) * 4.0 * pi * pi), 1e-15);
}

TEST(SolveHomogenized, ZeroAndNonCoercive) {
    const GridFunction zero(Grid::torus(2, 8), 1);
    EXPECT_EQ(solve_homogenized({1.0, 0.0, 0.0, 1.0}, 1, zero).max_abs(), 0.0);
    EXPECT_THROW(solve_homogenized({1.0, 0.0, 0.0, -1.0}, 1, sin_x1(Grid::torus(2, 8))), CoercivityLoss);
}

TEST(Dirichlet, ClampedBeamUniformLoad) {
    Dirichlet1D p;
    p.a = [](double) { return 2.0; };
    p.m = 2;
    p.f = [](double) { return 1.0; };
    p.cells = 16;
    p.enforce_resolution = false;
    FemReport rep;
    const auto u = solve_dirichlet_1d(p, &rep);
    // a u'''' = 1, u = u' = 0 at both ends: u = x^2 (1 - x)^2 / (24 a).
    auto exact = [](double x) { return x * x * (1 - x) * (1 - x) / 48.0; };
    for (int k = 0; k <= 16; ++k) EXPECT_NEAR(u.nodal_values()[static_cast<std::size_t>(k)], exact(k / 16.0), 1e-15);
    for (double x = 0.013; x < 1.0; x += 0.031) EXPECT_NEAR(u.evaluate(x), exact(x), 1e-7);
    EXPECT_LT(rep.relative_residual, 1e-15);
}

TEST(Dirichlet, ReproducesKernelPolynomials) {
    for (int m : {1, 2}) {
        Dirichlet1D p;
        p.a = cosine_a;
        p.eps = 1.0 / 8;
        p.m = m;
        p.cells = 256;
        // P(x) = 0.4 - 1.1 x (degree <= m-1 for m = 2; constant 0.4 for m = 1)
        const double slope = m == 2 ? -1.1 : 0.0;
        p.value = {0.4, 0.4 + slope};
        p.slope = {slope, slope};
        const auto u = solve_dirichlet_1d(p);
        for (double x = 0.0; x <= 1.0; x += 0.01) EXPECT_NEAR(u.evaluate(x), 0.4 + slope * x, 1e-12);
    }
}

TEST(Dirichlet, FirstOrderOscillatingMatchesQuadrature) {
    const double eps = 1.0 / 16;
    Dirichlet1D p;
    p.a = cosine_a;
    p.eps = eps;
    p.m = 1;
    p.f = [](double) { return 1.0; };
    p.cells = 1024;
    const auto u = solve_dirichlet_1d(p);
    // -(a u')' = 1: a u' = C - x with u(0) = u(1) = 0.
    auto ia = [&](double s) { return 1.0 / cosine_a(s / eps); };
    const double C = integrate([&](double s) { return s * ia(s); }, 0, 1) / integrate(ia, 0, 1);
    double err = 0.0;
    for (int k = 1; k < 32; ++k) {
        const double x = k / 32.0;
        const double ref = integrate([&](double s) { return (C - s) * ia(s); }, 0.0, x);
        err = std::max(err, std::abs(u.evaluate(x) - ref));
    }
    EXPECT_LT(err, 1e-6);
}

TEST(Dirichlet, FourthOrderOscillatingMatchesQuadrature) {
    const double eps = 1.0 / 16;
    Dirichlet1D p;
    p.a = cosine_a;
    p.eps = eps;
    p.m = 2;
    p.f = [](double) { return 1.0; };
    p.cells = 512;
    const auto u = solve_dirichlet_1d(p);
    // (a u'')'' = 1 clamped: a u'' = x^2/2 + c1 + c2 x with int u'' = int (1-s) u'' = 0.
    auto ia = [&](double s) { return 1.0 / cosine_a(s / eps); };
    auto mom = [&](int k, bool weight) {
        return integrate([&](double s) { return std::pow(s, k) * ia(s) * (weight ? 1.0 - s : 1.0); }, 0, 1);
    };
    Eigen::Matrix2d M;
    M << mom(0, false), mom(1, false), mom(0, true), mom(1, true);
    const Eigen::Vector2d rhs(-0.5 * mom(2, false), -0.5 * mom(2, true));
    const Eigen::Vector2d c = M.lu().solve(rhs);
    auto d2 = [&](double s) { return (0.5 * s * s + c(0) + c(1) * s) * ia(s); };
    double err = 0.0, scale = 0.0;
    for (int k = 1; k < 32; ++k) {
        const double x = k / 32.0;
        const double ref = integrate([&](double s) { return (x - s) * d2(s); }, 0.0, x);
        err = std::max(err, std::abs(u.evaluate(x) - ref));
        scale = std::max(scale, std::abs(ref));
        EXPECT_NEAR(u.evaluate(x, 2), d2(x), 1e-3 * std::abs(d2(0.5)) + 1e-3);
    }
    EXPECT_LT(err, 1e-6 * scale);
}

TEST(Dirichlet, ResolutionGuard) {
    Dirichlet1D p;
    p.a = cosine_a;
    p.eps = 1.0 / 16;
    p.m = 2;
    p.cells = 128;
    EXPECT_THROW(solve_dirichlet_1d(p), ResolutionError);
    p.a = [](double y) { return std::cos(2.0 * pi * y); };
    p.cells = 256;
    EXPECT_THROW(solve_dirichlet_1d(p), CoercivityLoss);
}

TEST(KernelSolution, ConstantCoefficientIsPolynomial) {
    const auto u = exact_kernel_solution_1d([](double) { return 4.0; }, 1.0 / 8, 2, {1.0, 0.5, 0.3, -0.2});
    for (double x = -0.9; x < 1.9; x += 0.173) {
        EXPECT_NEAR(u(x), 0.3 - 0.2 * x + (x * x / 2 + x * x * x / 12) / 4.0, 1e-13);
        EXPECT_NEAR(u.derivative(x, 1), -0.2 + (x + x * x / 4) / 4.0, 1e-13);
        EXPECT_NEAR(u.derivative(x, 2), (1.0 + 0.5 * x) / 4.0, 1e-15);
    }
}

TEST(KernelSolution, FirstOrderHarmonicMean) {
    for (int r : {4, 16, 64}) {
        const auto u = exact_kernel_solution_1d(cosine_a, 1.0 / r, 1, {1.0, 0.0});
        EXPECT_NEAR(u(1.0) - u(0.0), 1.0 / std::sqrt(3.0), 1e-10);
    }
    // off-period window: Riemann-Lebesgue limit
    const auto u = exact_kernel_solution_1d(cosine_a, 1.0 / 512, 1, {1.0, 0.0});
    EXPECT_NEAR(u(0.3) - u(0.0), 0.3 / std::sqrt(3.0), 1e-3);
}

TEST(KernelSolution, SecondDerivativePositive) {
    const auto u = exact_kernel_solution_1d(cosine_a, 1.0 / 32, 2, {1.0, 0.0, 0.0, 0.0});
    for (double x = -0.5; x < 1.5; x += 0.0007) EXPECT_GE(u.derivative(x, 2), 1.0 / 3.0 - 1e-15);
}

TEST(KernelSolution, DerivativesConsistent) {
    const double eps = 1.0 / 32;
    const auto u = exact_kernel_solution_1d(cosine_a, eps, 2, {1.0, 0.5, 0.3, -0.2});
    const double h = 1e-5;  // u'' oscillates at scale eps
    for (double x : {-0.31, 0.0, 0.123, 0.5, 0.77, 1.4}) {
        EXPECT_NEAR(u.derivative(x, 1), (u(x + h) - u(x - h)) / (2 * h), 1e-6);
        EXPECT_NEAR(u.derivative(x, 2), (u.derivative(x + h, 1) - u.derivative(x - h, 1)) / (2 * h), 1e-5);
        EXPECT_NEAR(cosine_a(x / eps) * u.derivative(x, 2), 1.0 + 0.5 * x, 1e-13);
    }
    // against direct adaptive quadrature
    const double x = 0.61;
    const double ref = 0.3 - 0.2 * x + integrate([&](double s) { return (x - s) * (1.0 + 0.5 * s) / cosine_a(s / eps); }, 0.0, x);
    EXPECT_NEAR(u(x), ref, 1e-11);
}

TEST(KernelSolution, Guards) {
    EXPECT_THROW(KernelSolution1D(cosine_a, 0.1, 2, {1, 0, 0, 0}, -1, 2, 32), ResolutionError);
    EXPECT_THROW(exact_kernel_solution_1d(cosine_a, 0.1, 2, {1, 0}), std::invalid_argument);
}
