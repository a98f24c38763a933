#include "hohom/excess.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hohom;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> eval(const BallRule& b, const std::function<double(std::span<const double>)>& f) {
    std::vector<double> v(b.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(b.point(k));
    return v;
}

double wiggle(std::span<const double> x) { return std::sin(3.0 * x[0]) + 0.3 * std::cos(7.0 * x[0] + 0.2); }

}  // namespace

TEST(BallRules, WeightsAndMoments) {
    const auto b1 = ball_rule_1d(0.3, 0.2, 0.01);
    double s = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < b1.size(); ++k) {
        s += b1.weights[k];
        m2 += b1.weights[k] * std::pow(b1.points[k] - 0.3, 2);
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    EXPECT_NEAR(m2, 0.04 / 3.0, 1e-15);

    const std::vector<double> c{0.1, -0.2};
    const auto b2 = ball_rule_2d(c, 0.5, 0.05);
    const auto x2 = eval(b2, [](std::span<const double> x) { return (x[0] - 0.1) * (x[0] - 0.1); });
    const auto one = eval(b2, [](std::span<const double>) { return 1.0; });
    EXPECT_NEAR(b2.average(one), 1.0, 1e-13);
    // average of x1^2 over a disc of radius r: r^2 / 4
    EXPECT_NEAR(b2.average(x2), 0.0625, 1e-13);
}

TEST(BallRules, GridBallWrapsPeriodically) {
    const auto g = Grid::torus(2, 32);
    const std::vector<double> c{0.0, 0.0};
    const auto b = ball_rule_grid(g, c, 0.1);
    // nodes (i, j)/32 with i^2 + j^2 <= 3.2^2
    int count = 0;
    for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j) count += i * i + j * j <= 10;
    EXPECT_EQ(b.size(), static_cast<std::size_t>(count));
    for (std::size_t k = 0; k < b.size(); ++k) {
        const auto x = b.point(k);
        EXPECT_LE(std::hypot(x[0], x[1]), 0.1 + 1e-12);
    }
    EXPECT_THROW(ball_rule_grid(g, c, 0.6), std::invalid_argument);
}

TEST(Excess, PolynomialsHaveZeroExcess) {
    const auto b = ball_rule_1d(0.5, 0.25, 0.05);
    const auto u = eval(b, [](std::span<const double> x) { return 1.0 + 2.0 * x[0] - x[0] * x[0]; });
    EXPECT_LT(excess_H(b, u, 2).value, 1e-12);
    EXPECT_LT(excess_I(b, eval(b, [](std::span<const double> x) { return 4.0 - x[0]; }), 2).value, 1e-12);
}

TEST(Excess, QuadraticAgainstAffineOracle) {
    for (double r : {0.5, 0.25, 0.125}) {
        const auto b = ball_rule_1d(0.0, r, 0.01);
        const auto u = eval(b, [](std::span<const double> x) { return x[0] * x[0]; });
        // ||x^2 - r^2/3||^2 averaged over (-r, r) = r^4/5 - r^4/9
        EXPECT_NEAR(excess_H(b, u, 1).value, 2.0 * r / std::sqrt(45.0), 1e-14);
    }
}

TEST(Excess, CoefficientOfLinearFit) {
    const auto b = ball_rule_1d(0.2, 0.3, 0.05);
    const auto u = eval(b, [](std::span<const double> x) { return x[0]; });
    EXPECT_NEAR(coeff_h(excess_H(b, u, 1).fit, 0.3, 1), 1.0, 1e-13);
    // x^2 / 2 with m = 2: h = |D^2 P| / 2! = 1/2
    const auto q = eval(b, [](std::span<const double> x) { return 0.5 * x[0] * x[0]; });
    EXPECT_NEAR(coeff_h(excess_H(b, q, 2).fit, 0.3, 2), 0.5, 1e-12);
}

TEST(Excess, ProjectionInvariance) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    const auto b = ball_rule_1d(0.4, 0.3, 0.02);
    const auto u = eval(b, wiggle);
    for (int m : {1, 2}) {
        const double c0 = U(rng), c1 = U(rng), c2 = U(rng);
        auto v = u;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double x = b.points[k];
            v[k] -= c0 + c1 * x + (m == 2 ? c2 * x * x : 0.0);
        }
        const double H = excess_H(b, u, m).value;
        EXPECT_NEAR(excess_H(b, v, m).value, H, 1e-10 * H);
    }
    const double I = excess_I(b, u, 2).value;
    auto v = u;
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += 5.0 - 2.0 * b.points[k];
    EXPECT_NEAR(excess_I(b, v, 2).value, I, 1e-10 * I);
}

TEST(Excess, Homogeneity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    const std::vector<double> c{0.3, 0.6};
    const auto b = ball_rule_2d(c, 0.2, 0.02);
    const auto u = eval(b, [](std::span<const double> x) { return std::sin(4.0 * x[0]) * std::exp(x[1]); });
    const double H = excess_H(b, u, 1).value;
    for (int t = 0; t < 5; ++t) {
        const double s = U(rng);
        auto v = u;
        for (double& a : v) a *= s;
        EXPECT_NEAR(excess_H(b, v, 1).value, std::abs(s) * H, 1e-12 * std::abs(s) * H);
    }
}

TEST(Excess, LargerSpaceNeverWorse) {
    const auto b = ball_rule_1d(0.5, 0.4, 0.02);
    const auto u = eval(b, wiggle);
    for (int m : {1, 2}) EXPECT_GE(excess_I(b, u, m).value, excess_H(b, u, m).value);
}

TEST(Excess, SourcesAddScaledNorms) {
    const auto b = ball_rule_1d(0.0, 0.5, 0.05);
    const std::vector<double> u(b.size(), 0.0);
    const std::vector<Source> f{{0, std::vector<double>(b.size(), 2.0)}};
    // r^{-m} r^{2m} |2| with m = 1
    EXPECT_NEAR(excess_H(b, u, 1, f).value, 0.5 * 2.0, 1e-14);
}

TEST(Excess, RankDeficientBallThrows) {
    const auto g = Grid::torus(1, 16);
    const std::vector<double> c{0.5};
    const auto b = ball_rule_grid(g, c, 0.03);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_THROW(excess_H(b, std::vector<double>{1.0}, 1), std::runtime_error);
}

TEST(Certificates, LowDegreeTriviallyPasses) {
    const auto u = probe_field_1d(1.0 / 16, 2, 0.5, [](double x, int k) { return k == 0 ? 1.0 - x : (k == 1 ? -1.0 : 0.0); }, 1.0 / 128);
    const auto rep = certify_excess_decay({u}, {1.0 / 8});
    ASSERT_FALSE(rep.rows.empty());
    EXPECT_EQ(rep.C_hat, 0.0);
    for (const auto& row : rep.rows) EXPECT_TRUE(row.pass);
}

TEST(Certificates, QuadraticHalves) {
    const auto u = probe_field_1d(1.0, 1, 0.0, [](double x, int k) { return k == 0 ? x * x : (k == 1 ? 2.0 * x : 2.0); }, 1.0 / 64);
    for (const auto& row : certify_halving(u, 0.125, {0.5, 0.25, 0.125})) {
        EXPECT_TRUE(row.pass);
        EXPECT_NEAR(row.H_delta_r / row.H_r, 0.125, 1e-12);
    }
    EXPECT_FALSE(certify_halving(u, 0.75, {0.5})[0].pass);
}

TEST(Certificates, SkipsRadiiOutsideWindow) {
    const auto u = probe_field_1d(0.25, 1, 0.0, [](double x, int k) { return k == 0 ? x * x : 2.0 * x; }, 1.0 / 64);
    const auto rep = certify_excess_decay({u}, {0.125}, {0.125, 0.5});
    EXPECT_EQ(rep.rows.size(), 1u);
    EXPECT_EQ(rep.notices.size(), 1u);
}

TEST(Probes, LipschitzMonomialClosedForm) {
    // u = x^m on B_1(0): |D^m u| = m!, (avg x^{2m})^{1/2} = (2m+1)^{-1/2}
    for (int m : {1, 2}) {
        const auto u = probe_field_1d(1.0 / 16, m, 0.0, [m](double x, int k) {
            if (k == 0) return std::pow(x, m);
            if (k == m) return m == 1 ? 1.0 : 2.0;
            return m * x;
        }, 1.0 / 64);
        const auto p = lipschitz_probe(u, {1.0 / 16, 1.0 / 4, 1.0 / 2});
        const double exact = (m == 1 ? 1.0 : 2.0) * std::sqrt(2.0 * m + 1.0);
        for (double r : p.ratios) EXPECT_NEAR(r, exact, 1e-12);
        EXPECT_NEAR(p.sup, exact, 1e-12);
    }
}

TEST(Probes, LipschitzGuards) {
    const auto u = probe_field_1d(1.0 / 16, 1, 0.0, [](double, int k) { return k == 0 ? 1.0 : 0.0; }, 1.0 / 64);
    EXPECT_EQ(lipschitz_probe(u, {0.25}).sup, 0.0);
    EXPECT_THROW(lipschitz_probe(u, {1.0 / 32}), std::invalid_argument);
    EXPECT_THROW(lipschitz_probe(u, {0.75}), std::invalid_argument);
}

TEST(Probes, ReverseHolder) {
    const auto mono = probe_field_1d(1.0 / 16, 2, 0.3, [](double x, int k) { return k == 0 ? x * x : (k == 1 ? 2 * x : 2.0); }, 1.0 / 64);
    for (double p : {3.0, 4.0, 8.0}) EXPECT_NEAR(reverse_holder_probe(mono, 0.2, p), 1.0, 1e-13);
    const auto flat = probe_field_1d(1.0 / 16, 2, 0.3, [](double x, int k) { return k == 0 ? x : (k == 1 ? 1.0 : 0.0); }, 1.0 / 64);
    EXPECT_EQ(reverse_holder_probe(flat, 0.2, 4.0), 0.0);
    EXPECT_THROW(reverse_holder_probe(mono, 0.2, 2.0), std::invalid_argument);
    // |u'| = |sin 2 pi x| on balls of radius 1/2 and 1: (3/8)^{1/4} / (1/2)^{1/2}
    const auto s = probe_field_1d(1.0 / 16, 1, 0.0, [](double x, int k) { return k == 0 ? -std::cos(2 * pi * x) / (2 * pi) : std::sin(2 * pi * x); }, 1.0 / 256);
    EXPECT_NEAR(reverse_holder_probe(s, 0.5, 4.0), std::pow(0.375, 0.25) / std::sqrt(0.5), 1e-10);
}
