#include "hohom/multiindex.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using hohom::MultiIndex;

TEST(Enumerate, TwoDimSecondOrderIsDescendingLex) {
    const auto v = hohom::enumerate(2, 2);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[0], (MultiIndex{2, 0}));
    EXPECT_EQ(v[1], (MultiIndex{1, 1}));
    EXPECT_EQ(v[2], (MultiIndex{0, 2}));
}

TEST(Enumerate, CountsMatchBinomial) {
    EXPECT_EQ(hohom::enumerate(3, 2).size(), 6u);
    const auto one = hohom::enumerate(1, 5);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0], (MultiIndex{5}));
    for (int d = 1; d <= 4; ++d)
        for (int k = 0; k <= 6; ++k) EXPECT_EQ(hohom::enumerate(d, k).size(), hohom::binomial(k + d - 1, d - 1));
}

TEST(Enumerate, BijectionAndRoundTrip) {
    for (int d = 1; d <= 3; ++d)
        for (int k = 0; k <= 5; ++k) {
            const auto v = hohom::enumerate(d, k);
            std::set<std::vector<int>> seen;
            for (std::size_t i = 0; i < v.size(); ++i) {
                EXPECT_EQ(v[i].order(), k);
                EXPECT_EQ(v[i].dim(), d);
                seen.insert(std::vector<int>(v[i].components().begin(), v[i].components().end()));
                EXPECT_EQ(hohom::index_of(v[i]), i);
                if (i > 0) {
                    auto prev = v[i - 1].components();
                    auto cur = v[i].components();
                    EXPECT_TRUE(std::lexicographical_compare(cur.begin(), cur.end(), prev.begin(), prev.end()));
                }
            }
            EXPECT_EQ(seen.size(), v.size());
        }
}

TEST(Enumerate, RejectsBadArguments) {
    EXPECT_THROW(hohom::enumerate(0, 1), std::invalid_argument);
    EXPECT_THROW(hohom::enumerate(2, -1), std::invalid_argument);
}

TEST(Factorial, Values) {
    EXPECT_EQ(hohom::factorial(MultiIndex{2, 1}), 2u);
    EXPECT_EQ(hohom::factorial(MultiIndex{0, 0, 0}), 1u);
    EXPECT_EQ(hohom::factorial(MultiIndex{3, 2}), 12u);
}

TEST(Factorial, Overflow) {
    EXPECT_NO_THROW(hohom::factorial(MultiIndex{20}));
    EXPECT_THROW(hohom::factorial(MultiIndex{21}), std::overflow_error);
    EXPECT_THROW(hohom::factorial(MultiIndex{20, 4}), std::overflow_error);
}

TEST(FourierSymbol, Examples) {
    const double tp = 2.0 * std::numbers::pi;
    const int xi10[] = {1, 0};
    auto s = hohom::fourier_symbol(MultiIndex{1, 0}, xi10);
    EXPECT_NEAR(s.real(), 0.0, 1e-15);
    EXPECT_NEAR(s.imag(), tp, 1e-14);

    const int xi3[] = {3};
    s = hohom::fourier_symbol(MultiIndex{2}, xi3);
    // (2 pi i 3)^2 = -36 pi^2 = -9 (2 pi)^2
    EXPECT_NEAR(s.real(), -36.0 * std::numbers::pi * std::numbers::pi, 1e-9);
    EXPECT_NEAR(s.real(), -9.0 * tp * tp, 1e-9);
    EXPECT_NEAR(s.imag(), 0.0, 1e-12);

    const int any[] = {7, -4};
    s = hohom::fourier_symbol(MultiIndex{0, 0}, any);
    EXPECT_EQ(s, std::complex<double>(1.0, 0.0));

    EXPECT_THROW(hohom::fourier_symbol(MultiIndex{1, 0}, xi3), std::invalid_argument);
}

TEST(FourierSymbol, MultiplicativeProperty) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> comp(0, 3), freq(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        MultiIndex a{comp(rng), comp(rng)}, b{comp(rng), comp(rng)};
        const int xi[] = {freq(rng), freq(rng)};
        const auto lhs = hohom::fourier_symbol(a + b, xi);
        const auto rhs = hohom::fourier_symbol(a, xi) * hohom::fourier_symbol(b, xi);
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}
