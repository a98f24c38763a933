#pragma once

#include "hohom/fem1d.hpp"
#include "hohom/grid.hpp"
#include "hohom/multiindex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hohom {

enum class NormKind { L2, Lq, HkSemi, Hk };

inline std::string to_string(NormKind k) {
    switch (k) {
        case NormKind::L2: return "L2";
        case NormKind::Lq: return "Lq";
        case NormKind::HkSemi: return "Hk_semi";
        case NormKind::Hk: return "Hk";
    }
    return "?";
}

/// q0 = 2d/(d-1), defined for d >= 2.
inline double q0(int d) {
    if (d < 2) throw std::domain_error("q0: undefined for d = 1");
    return 2.0 * d / (d - 1.0);
}

/// q1 = 2d/(d-2m+1) for d > 2m-1, infinity for d < 2m-1; for d = 2m-1 any
/// q in (2, inf) is admissible and `choice` is returned.
inline double q1(int d, int m, double choice = 4.0) {
    if (d > 2 * m - 1) return 2.0 * d / (d - 2.0 * m + 1.0);
    if (d < 2 * m - 1) return std::numeric_limits<double>::infinity();
    if (!(choice > 2.0) || std::isinf(choice)) throw std::domain_error("q1: choice must lie in (2, inf)");
    return choice;
}

namespace detail {

// Second-order difference quotient on a uniform interval grid, one-sided at the ends.
inline std::vector<double> difference(std::span<const double> v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n);
    if (n < 3) throw std::invalid_argument("difference: at least three nodes");
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
    return d;
}

inline double lq_sum(const Grid& g, std::span<const double> v, double q) {
    const auto w = quadrature_weights(g);
    double s = 0.0;
    if (std::isinf(q)) {
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    }
    for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * std::pow(std::abs(v[k]), q);
    return s;
}

// sum over |alpha| = k of (k!/alpha!) ||D^alpha f_c||_2^2 summed over components.
inline double seminorm_squared(const GridFunction& f, int k) {
    const Grid& g = f.grid();
    double total = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        if (g.periodic) {
            for (const auto& a : enumerate(g.dim, k)) {
                const auto d = spectral::derivative(g, f.component(c), a);
                const double mult = static_cast<double>(factorial(MultiIndex{k})) / static_cast<double>(factorial(a));
                total += mult * lq_sum(g, d, 2.0);
            }
        } else {
            std::vector<double> d(f.component(c).begin(), f.component(c).end());
            for (int j = 0; j < k; ++j) d = difference(d, g.spacing());
            total += lq_sum(g, d, 2.0);
        }
    }
    return total;
}

}  // namespace detail

/// Discrete norms: grid quadrature for Lebesgue norms; spectral derivatives on
/// a torus and second-order difference quotients on an interval for Sobolev norms.
inline double norm(const GridFunction& f, NormKind kind, double q = 2.0, int k = 0) {
    if (!(q >= 1.0)) throw std::invalid_argument("norm: q >= 1 required");
    if (k < 0) throw std::invalid_argument("norm: k >= 0 required");
    switch (kind) {
        case NormKind::L2: q = 2.0; [[fallthrough]];
        case NormKind::Lq: {
            if (std::isinf(q)) return f.max_abs();
            double s = 0.0;
            for (int c = 0; c < f.components(); ++c) s += detail::lq_sum(f.grid(), f.component(c), q);
            return std::pow(s, 1.0 / q);
        }
        case NormKind::HkSemi: return std::sqrt(detail::seminorm_squared(f, k));
        case NormKind::Hk: {
            double s = 0.0;
            for (int j = 0; j <= k; ++j) s += detail::seminorm_squared(f, j);
            return std::sqrt(s);
        }
    }
    return 0.0;
}

/// Values of a function and its derivatives at quadrature points of [0, 1].
struct Samples1D {
    std::vector<double> x, w;
    std::vector<std::vector<double>> d;  // d[k][i]: k-th derivative at x[i]

    /// (sum w |d_k|^q)^{1/q}
    double lq(int k, double q = 2.0) const {
        if (!(q >= 1.0)) throw std::invalid_argument("Samples1D::lq: q >= 1 required");
        const auto& v = d.at(static_cast<std::size_t>(k));
        if (std::isinf(q)) {
            double s = 0.0;
            for (double a : v) s = std::max(s, std::abs(a));
            return s;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v[i]), q);
        return std::pow(s, 1.0 / q);
    }
    /// W^{k,q} norm: (sum_{j<=k} ||d_j||_q^q)^{1/q}
    double sobolev(int k, double q) const {
        double s = 0.0;
        for (int j = 0; j <= k; ++j) s += std::pow(lq(j, q), q);
        return std::pow(s, 1.0 / q);
    }
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least squares of log(err) against log(eps). Refuses fewer than three points
/// and data within 10x of the solver tolerance floor.
inline RateFit rate_fit(const std::vector<std::pair<double, double>>& points, double floor_tol = 0.0) {
    if (points.size() < 3) throw FitError("rate_fit: fewer than 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& [eps, err] : points) {
        if (!(eps > 0.0) || !(err > 0.0)) throw FitError("rate_fit: nonpositive datum");
        if (err <= 10.0 * floor_tol) throw FitError("rate_fit: datum within 10x of the solver tolerance floor");
        const double x = std::log(eps), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double vxx = sxx - sx * sx / n, vxy = sxy - sx * sy / n, vyy = syy - sy * sy / n;
    if (!(vxx > 0.0)) throw FitError("rate_fit: eps values not distinct");
    RateFit f;
    f.slope = vxy / vxx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r2 = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
    return f;
}

/// Composite Gauss-Legendre points (P per cell) on a uniform partition of [a, b].
template <int P>
Samples1D gauss_points(int cells, double a = 0.0, double b = 1.0) {
    static const UnitGauss<P> q;
    Samples1D s;
    const double h = (b - a) / cells;
    s.x.reserve(static_cast<std::size_t>(cells * P));
    for (int e = 0; e < cells; ++e)
        for (int k = 0; k < P; ++k) {
            s.x.push_back(a + (e + q.x[static_cast<std::size_t>(k)]) * h);
            s.w.push_back(q.w[static_cast<std::size_t>(k)] * h);
        }
    return s;
}

}  // namespace hohom
