#include "hohom/coeffs.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hohom;

namespace {

CoefficientPreset cosine(double a0, double a1, int m = 1) {
    CoefficientPreset p;
    p.kind = "cosine_1d";
    p.d = 1;
    p.m = m;
    p.a0 = a0;
    p.a1 = a1;
    return p;
}

// Scalar 1D m=1 tabulated coefficient: +1 on [0, 1/2), -1 on [1/2, 1).
CoefficientPreset sign_flip(int N) {
    CoefficientPreset p;
    p.kind = "tabulated";
    p.d = 1;
    p.m = 1;
    p.table_points = N;
    p.table_mu = 1.0;
    p.table.resize(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) p.table[static_cast<std::size_t>(k)] = k < N / 2 ? 1.0 : -1.0;
    return p;
}

}  // namespace

TEST(Sample, ConstantPreset) {
    CoefficientPreset p;
    p.c = 1.0;
    const auto A = sample(p, 16);
    EXPECT_DOUBLE_EQ(A.mu(), 1.0);
    for (double v : A.entry(0, 0, 0, 0)) EXPECT_EQ(v, 1.0);
    EXPECT_TRUE(A.is_constant());
    EXPECT_TRUE(A.satisfies_bound());
}

TEST(Sample, CosineNodes) {
    const auto A = sample(cosine(2.0, 1.0), 8);
    const auto e = A.entry(0, 0, 0, 0);
    EXPECT_DOUBLE_EQ(e[0], 3.0);
    EXPECT_NEAR(e[4], 1.0, 1e-15);
    EXPECT_NEAR(A.mu(), 1.0 / 3.0, 1e-15);
    EXPECT_TRUE(A.satisfies_bound());
}

TEST(Sample, RejectsVanishingCosine) {
    EXPECT_THROW(sample(cosine(1.0, 1.0), 8), std::invalid_argument);
    EXPECT_THROW(sample(cosine(1.0, 1.5), 8), std::invalid_argument);
    EXPECT_THROW(sample(cosine(2.0, 1.0), 7), std::invalid_argument);
    EXPECT_THROW(sample(cosine(2.0, 1.0), 2), std::invalid_argument);
}

TEST(Sample, LaminateIsConstantAlongSecondAxis) {
    CoefficientPreset p;
    p.kind = "laminate_2d";
    p.d = 2;
    const auto A = sample(p, 16);
    const auto e = A.entry(0, 0, 0, 0);
    for (int i = 0; i < 16; ++i)
        for (int j = 1; j < 16; ++j) EXPECT_EQ(e[static_cast<std::size_t>(i * 16 + j)], e[static_cast<std::size_t>(i * 16)]);
    for (double v : A.entry(0, 1, 0, 0)) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(A.is_symmetric());
}

TEST(Sample, SkewPartBreaksSymmetry) {
    CoefficientPreset p;
    p.kind = "smoothed_checkerboard_2d";
    p.d = 2;
    p.skew = 0.5;
    const auto A = sample(p, 16);
    EXPECT_FALSE(A.is_symmetric());
    EXPECT_TRUE(A.satisfies_bound());
    const auto As = A.adjoint();
    const auto a01 = A.entry(0, 1, 0, 0);
    const auto s10 = As.entry(1, 0, 0, 0);
    for (std::size_t k = 0; k < a01.size(); ++k) EXPECT_EQ(a01[k], s10[k]);
}

TEST(Sample, TabulatedBoundIsChecked) {
    auto p = sign_flip(8);
    p.table_mu = 2.0;  // claims max|A| <= 1/2
    EXPECT_THROW(sample(p, 8), std::invalid_argument);
}

TEST(CoercivityProbe, ConstantCoefficientGivesExactConstant) {
    CoefficientPreset p;
    p.c = 2.5;
    p.d = 2;
    p.m = 2;
    const auto A = sample(p, 16);
    const auto est = coercivity_probe(A, 20, 1);
    EXPECT_NEAR(est.mu_hat, 2.5, 1e-12);
}

TEST(CoercivityProbe, ConvergesToEssentialInfimum) {
    // a = 2 + cos(2 pi y): the infimum of the quotient is min a = 1.
    const auto A = sample(cosine(2.0, 1.0), 64);
    const auto est = coercivity_probe(A, 10000, 2024);
    EXPECT_GE(est.mu_hat, 1.0 - 1e-12);
    EXPECT_LE(est.mu_hat, 1.01);
}

TEST(CoercivityProbe, MonotoneInTrials) {
    const auto A = sample(cosine(2.0, 1.0), 32);
    double prev = std::numeric_limits<double>::infinity();
    for (int t : {1, 4, 16, 64, 256}) {
        const double v = coercivity_probe(A, t, 99).mu_hat;
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(CoercivityProbe, FlagsSignChange) {
    const auto A = sample(sign_flip(64), 64);
    // Oracle: a field whose derivative lives in the negative half has a
    // negative quotient; computed here by central differences.
    const int N = 64;
    std::vector<double> phi(N);
    for (int k = 0; k < N; ++k) {
        const double y = static_cast<double>(k) / N;
        phi[static_cast<std::size_t>(k)] = std::exp(-std::pow((y - 0.75) / 0.05, 2));
    }
    double num = 0.0, den = 0.0;
    for (int k = 0; k < N; ++k) {
        const double d = (phi[static_cast<std::size_t>((k + 1) % N)] - phi[static_cast<std::size_t>((k + N - 1) % N)]) * N / 2.0;
        num += (k < N / 2 ? 1.0 : -1.0) * d * d;
        den += d * d;
    }
    ASSERT_LT(num / den, -0.9);
    const auto est = coercivity_probe(A, 200, 5);
    EXPECT_LT(est.mu_hat, 0.0);
}

TEST(CoercivityProbe, RejectsZeroTrials) {
    const auto A = sample(cosine(2.0, 1.0), 8);
    EXPECT_THROW(coercivity_probe(A, 0, 1), std::invalid_argument);
}
