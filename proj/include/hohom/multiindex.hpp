#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace hohom {

/// Multi-index alpha in N^d. Components are stored explicitly; the order |alpha|
/// is recomputed on demand so it can never go stale.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> components) : c_(std::move(components)) {
        for (int v : c_) {
            if (v < 0) throw std::invalid_argument("MultiIndex: negative component");
        }
    }
    MultiIndex(std::initializer_list<int> components) : MultiIndex(std::vector<int>(components)) {}

    int dim() const { return static_cast<int>(c_.size()); }
    int order() const { return std::accumulate(c_.begin(), c_.end(), 0); }
    int operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
    std::span<const int> components() const { return c_; }

    MultiIndex operator+(const MultiIndex& o) const {
        if (o.dim() != dim()) throw std::invalid_argument("MultiIndex: dimension mismatch");
        std::vector<int> s(c_);
        for (std::size_t k = 0; k < s.size(); ++k) s[k] += o.c_[k];
        return MultiIndex(std::move(s));
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> c_;
};

namespace detail {

inline void enumerate_rec(int d, int k, int pos, std::vector<int>& cur, std::vector<MultiIndex>& out) {
    if (pos == d - 1) {
        cur[static_cast<std::size_t>(pos)] = k;
        out.emplace_back(cur);
        return;
    }
    for (int v = k; v >= 0; --v) {
        cur[static_cast<std::size_t>(pos)] = v;
        enumerate_rec(d, k - v, pos + 1, cur, out);
    }
}

}  // namespace detail

/// All multi-indices of order exactly k in dimension d, lexicographically
/// descending: (2,0), (1,1), (0,2). Every tensor slot in the library uses
/// this ordering.
inline std::vector<MultiIndex> enumerate(int d, int k) {
    if (d < 1 || k < 0) throw std::invalid_argument("enumerate: need d >= 1 and k >= 0");
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    detail::enumerate_rec(d, k, 0, cur, out);
    return out;
}

/// Position of alpha within enumerate(alpha.dim(), alpha.order()).
inline std::size_t index_of(const MultiIndex& alpha) {
    const auto all = enumerate(alpha.dim(), alpha.order());
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i] == alpha) return i;
    }
    throw std::logic_error("index_of: multi-index not found");
}

/// Binomial coefficient C(n, k) with overflow detection.
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        const auto num = static_cast<std::uint64_t>(n - k + i);
        if (r > std::numeric_limits<std::uint64_t>::max() / num) throw std::overflow_error("binomial overflow");
        r = r * num / static_cast<std::uint64_t>(i);
    }
    return r;
}

/// alpha! = prod_k alpha_k!. Throws std::overflow_error past 64 bits.
inline std::uint64_t factorial(const MultiIndex& alpha) {
    std::uint64_t r = 1;
    for (int a : alpha.components()) {
        for (int v = 2; v <= a; ++v) {
            const auto uv = static_cast<std::uint64_t>(v);
            if (r > std::numeric_limits<std::uint64_t>::max() / uv) throw std::overflow_error("factorial overflow");
            r *= uv;
        }
    }
    return r;
}

/// Fourier symbol of D^alpha on the unit torus: prod_k (2 pi i xi_k)^alpha_k.
inline std::complex<double> fourier_symbol(const MultiIndex& alpha, std::span<const int> xi) {
    if (static_cast<int>(xi.size()) != alpha.dim()) throw std::invalid_argument("fourier_symbol: length mismatch");
    std::complex<double> s(1.0, 0.0);
    for (int k = 0; k < alpha.dim(); ++k) {
        const std::complex<double> f(0.0, 2.0 * std::numbers::pi * xi[static_cast<std::size_t>(k)]);
        for (int p = 0; p < alpha[k]; ++p) s *= f;
    }
    return s;
}

/// x^alpha for a point x in R^d.
inline double monomial(const MultiIndex& alpha, std::span<const double> x) {
    double v = 1.0;
    for (int k = 0; k < alpha.dim(); ++k) {
        for (int p = 0; p < alpha[k]; ++p) v *= x[static_cast<std::size_t>(k)];
    }
    return v;
}

}  // namespace hohom
