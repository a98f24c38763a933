#include "hohom/smoothing.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/trapezoidal.hpp>

#include <cmath>
#include <numbers>

using namespace hohom;

namespace {

constexpr double pi = std::numbers::pi;

double l2(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().cell_volume());
}

GridFunction sine(const Grid& g, int k = 1) {
    return sample_function(g, [k](const std::vector<double>& x) { return std::sin(2.0 * pi * k * x[0]); });
}

}  // namespace

TEST(Bump, UnitIntegral) {
    const double raw = boost::math::quadrature::trapezoidal(bump::raw, -0.5, 0.5, 1e-14);
    EXPECT_NEAR(bump::normalization() * raw, 1.0, 1e-12);
    EXPECT_NEAR(bump::cdf(0.0), 0.5, 1e-13);
    EXPECT_EQ(bump::value(0.5), 0.0);
}

TEST(Bump, DerivativesMatchDifferences) {
    const double h = 1e-5;
    for (double t : {-0.3, -0.1, 0.05, 0.2, 0.4}) {
        EXPECT_NEAR(bump::derivative(t, 1), (bump::value(t + h) - bump::value(t - h)) / (2 * h), 1e-6);
        EXPECT_NEAR(bump::derivative(t, 2), (bump::derivative(t + h, 1) - bump::derivative(t - h, 1)) / (2 * h), 1e-4);
    }
}

TEST(Mollifier, NormalizedNonnegativeCompact) {
    for (int d : {1, 2}) {
        const Grid g = Grid::torus(d, 128);
        const double eps = 1.0 / 16;
        const Mollifier K(g, eps);
        EXPECT_NEAR(K.integral(), 1.0, 1e-12);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double v = K.samples()[k];
            EXPECT_GE(v, 0.0);
            if (v > 0.0) {
                double r2 = 0.0;
                for (double x : g.coordinates(k)) {
                    const double y = x > 0.5 ? x - 1.0 : x;
                    r2 += y * y;
                }
                EXPECT_LE(std::sqrt(r2), eps / 2 + g.spacing());
            }
        }
    }
}

TEST(Mollifier, RejectsUnresolvedKernel) {
    const Grid g = Grid::torus(1, 32);
    EXPECT_THROW(Mollifier(g, 1.0 / 32), std::invalid_argument);
    EXPECT_NO_THROW(Mollifier(g, 1.0 / 16));
}

TEST(Smooth, FixesConstants) {
    const Grid g = Grid::torus(2, 32);
    GridFunction f(g, 1);
    for (double& v : f.values()) v = 2.5;
    for (const auto& s : {smooth(f, 0.125), smooth_twice(f, 0.125)})
        for (double v : s.values()) EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(Smooth, SingleModeIsScaled) {
    const Grid g = Grid::torus(1, 256);
    const double eps = 1.0 / 8;
    const auto f = sample_function(g, [](const std::vector<double>& x) { return std::cos(2.0 * pi * x[0]); });
    // Oracle: discrete Fourier coefficient of the kernel by direct summation.
    const Mollifier K(g, eps);
    double hat = 0.0;
    for (int k = 0; k < 256; ++k) hat += K.samples()[static_cast<std::size_t>(k)] * std::cos(2.0 * pi * k / 256.0) / 256.0;
    EXPECT_GT(hat, 0.0);
    EXPECT_LE(hat, 1.0);
    const auto s1 = smooth(f, eps);
    const auto s2 = smooth_twice(f, eps);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(s1.values()[k], hat * f.values()[k], 1e-13);
        EXPECT_NEAR(s2.values()[k], hat * hat * f.values()[k], 1e-13);
    }
}

TEST(Smooth, ApproximationConstantStableUnderRefinement) {
    const double eps = 1.0 / 16;
    const double c1 = smoothing_constants::approximation(sine(Grid::torus(1, 256)), eps);
    const double c2 = smoothing_constants::approximation(sine(Grid::torus(1, 512)), eps);
    EXPECT_GT(c1, 0.0);
    EXPECT_LT(std::abs(c1 / c2 - 1.0), 0.01);
    // Continuum oracle: (1 - phi_hat(eps)) / (2 pi eps), with phi_hat by quadrature.
    auto integrand = [&](double t) { return bump::value(t) * std::cos(2.0 * pi * eps * t); };
    const double hat = boost::math::quadrature::trapezoidal(integrand, -0.5, 0.5, 1e-14);
    EXPECT_NEAR(c2, (1.0 - hat) / (2.0 * pi * eps), 1e-3 * c2);
}

TEST(Smooth, ApproximationConstantBoundedAcrossEps) {
    const Grid g = Grid::torus(1, 2048);
    const auto f = sample_function(g, [](const std::vector<double>& x) {
        return std::sin(2.0 * pi * x[0]) + 0.5 * std::cos(6.0 * pi * x[0]) + 0.25 * std::sin(10.0 * pi * x[0]);
    });
    for (int r = 8; r <= 128; r *= 2) EXPECT_LT(smoothing_constants::approximation(f, 1.0 / r), 0.5);
}

TEST(Smooth, TwiceWithinTriangleBound) {
    const Grid g = Grid::torus(1, 256);
    const auto f = sine(g);
    const double once = l2(smooth(f, 1.0 / 16) - f);
    const double twice = l2(smooth_twice(f, 1.0 / 16) - f);
    EXPECT_LE(twice, 2.0 * once);
    EXPECT_GT(twice, once);
}

TEST(Smooth, CommutesWithDerivatives) {
    const Grid g = Grid::torus(2, 64);
    const auto f = sample_function(g, [](const std::vector<double>& x) {
        return std::sin(2.0 * pi * x[0]) * std::cos(4.0 * pi * x[1]) + std::exp(std::sin(2.0 * pi * x[1]));
    });
    for (const auto& a : {MultiIndex{1, 0}, MultiIndex{1, 1}, MultiIndex{0, 2}}) {
        const auto lhs = spectral::derivative(smooth(f, 0.125), a);
        const auto rhs = smooth(spectral::derivative(f, a), 0.125);
        EXPECT_LE((lhs - rhs).max_abs(), 1e-10 * std::max(1.0, rhs.max_abs()));
    }
}

TEST(Smooth, OscillationConstantBounded) {
    auto gcell = [](const std::vector<double>& y) { return 1.0 + std::cos(2.0 * pi * y[0]); };
    double lo = 1e300, hi = 0.0;
    for (int r : {8, 16, 32}) {
        const Grid g = Grid::torus(1, 64 * r);
        const double c = smoothing_constants::oscillation(sine(g), gcell, 1.0 / r);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    EXPECT_LT(hi, 2.0);
    EXPECT_LT(hi / lo, 1.2);
}

TEST(Extend, ReproducesPolynomials) {
    const Grid g = Grid::interval(257);
    for (int m : {1, 2}) {
        for (int deg = 0; deg <= m + 1; ++deg) {
            auto p = [deg](double x) { return std::pow(x - 0.3, deg) + 0.5; };
            const auto f = sample_function(g, [&](const std::vector<double>& x) { return p(x[0]); });
            const auto e = extend(f, m);
            for (std::size_t k = 0; k < e.grid.size(); ++k) {
                const double x = e.grid.coordinates(k)[0];
                if (x >= -0.1 && x <= 1.1) {
                    EXPECT_NEAR(e.values.values()[k], p(x), 1e-11) << "m=" << m << " deg=" << deg << " x=" << x;
                }
                if (x < -0.2 || x > 1.2) {
                    EXPECT_EQ(e.values.values()[k], 0.0);
                }
            }
        }
    }
}

TEST(Extend, SecondDifferencesContinuousAcrossEndpoints) {
    double prev = 1e300;
    for (int n : {128, 256, 512}) {
        const Grid g = Grid::interval(n + 1);
        const auto e = extend(sine(g), 2);
        const auto v = e.values.values();
        const double h = g.spacing();
        double jump = 0.0;
        for (int end : {e.offset, e.offset + n}) {
            auto d2 = [&](int k) { return (v[static_cast<std::size_t>(k + 1)] - 2.0 * v[static_cast<std::size_t>(k)] + v[static_cast<std::size_t>(k - 1)]) / (h * h); };
            jump = std::max({jump, std::abs(d2(end) - d2(end - 1)), std::abs(d2(end + 1) - d2(end))});
        }
        // a smooth function already changes its second difference by h f''' per node
        EXPECT_LT(jump, 2.0 * std::pow(2.0 * pi, 3) * h);
        EXPECT_LT(jump, prev);
        prev = jump;
    }
}

TEST(Extend, RejectsBadInput) {
    GridFunction bad(Grid::interval(65), 1);
    bad.values()[3] = std::nan("");
    EXPECT_THROW(extend(bad, 2), std::invalid_argument);
    EXPECT_THROW(extend(GridFunction(Grid::interval(64), 1), 2), std::invalid_argument);
    EXPECT_THROW(extend(GridFunction(Grid::interval(9), 1), 2), std::invalid_argument);
    EXPECT_THROW(extend(GridFunction(Grid::torus(1, 8), 1), 2), std::invalid_argument);
}

TEST(Smooth, IntervalInputsUseExtension) {
    const Grid g = Grid::interval(513);
    const auto f = sample_function(g, [](const std::vector<double>& x) { return 1.0 + x[0] - 2.0 * x[0] * x[0]; });
    // Polynomials of degree 2: S_eps p = p + c eps^2 p'' with c the kernel's second moment.
    const double eps = 1.0 / 32;
    auto m2 = [](double t) { return t * t * bump::value(t); };
    const double second = boost::math::quadrature::trapezoidal(m2, -0.5, 0.5, 1e-14);
    const auto s = smooth(f, eps);
    for (int k = 0; k < 513; ++k) EXPECT_NEAR(s.values()[static_cast<std::size_t>(k)], f.values()[static_cast<std::size_t>(k)] - 2.0 * eps * eps * second, 1e-6);
}

TEST(Cutoff, TorusIsTrivial) {
    const auto rho = cutoff(Grid::torus(2, 16), 0.1);
    const auto s = rho.samples(Grid::torus(2, 16));
    for (double v : s.values()) EXPECT_EQ(v, 1.0);
}

TEST(Cutoff, IntervalBands) {
    const double eps = 1.0 / 32;
    const auto rho = cutoff(Grid::interval(2), eps);
    EXPECT_NEAR(rho(0.5), 1.0, 1e-14);
    EXPECT_EQ(rho(0.05), 0.0);
    for (int k = 0; k <= 4096; ++k) {
        const double x = k / 4096.0;
        const double dist = std::min(x, 1.0 - x);
        const double v = rho(x);
        EXPECT_GE(v, -1e-15);
        EXPECT_LE(v, 1.0 + 1e-15);
        if (dist < 3.0 * eps) {
            EXPECT_NEAR(v, 0.0, 1e-15);
        }
        if (dist >= 4.0 * eps) {
            EXPECT_NEAR(v, 1.0, 1e-13);
        }
    }
    EXPECT_THROW(cutoff(Grid::interval(2), 0.2), std::invalid_argument);
}

TEST(Cutoff, DerivativesScaleLikeInverseEps) {
    double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {0, 0, 0};
    for (int r = 16; r <= 256; r *= 2) {
        const double eps = 1.0 / r;
        const auto rho = cutoff(Grid::interval(2), eps);
        for (int k = 1; k <= 2; ++k) {
            double sup = 0.0;
            for (int i = 0; i <= 4000; ++i) sup = std::max(sup, std::abs(rho.derivative(3.0 * eps + i * eps / 4000.0, k)));
            const double scaled = sup * std::pow(eps, k);
            lo[k] = std::min(lo[k], scaled);
            hi[k] = std::max(hi[k], scaled);
        }
    }
    for (int k = 1; k <= 2; ++k) EXPECT_LT(hi[k] / lo[k], 1.01);
}

TEST(Cutoff, DerivativeMatchesDifferenceOfValues) {
    const auto rho = cutoff(Grid::interval(2), 1.0 / 16);
    const double h = 1e-6;
    for (double x : {0.21, 0.22, 0.23, 0.77, 0.78}) EXPECT_NEAR(rho.derivative(x, 1), (rho(x + h) - rho(x - h)) / (2 * h), 1e-4);
}

TEST(BoundaryLayer, ConstantsBoundedAndStable) {
    auto profile = [](const std::vector<double>& x) { return std::cos(3.0 * x[0]) + x[0] * x[0]; };
    for (int r : {16, 32, 64}) {
        const double eps = 1.0 / r;
        const double c1 = smoothing_constants::boundary_layer(sample_function(Grid::interval(16 * r + 1), profile), eps);
        const double c2 = smoothing_constants::boundary_layer(sample_function(Grid::interval(32 * r + 1), profile), eps);
        EXPECT_LT(c1, 10.0);
        EXPECT_LT(std::abs(c1 / c2 - 1.0), 0.2);
        const double i1 = smoothing_constants::interior(sample_function(Grid::interval(16 * r + 1), profile), eps);
        const double i2 = smoothing_constants::interior(sample_function(Grid::interval(32 * r + 1), profile), eps);
        EXPECT_LT(i1, 10.0);
        EXPECT_LT(std::abs(i1 / i2 - 1.0), 0.2);
    }
}
