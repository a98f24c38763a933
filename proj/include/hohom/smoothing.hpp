#pragma once

#include "hohom/grid.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace hohom {

/// Standard bump phi(t) = c exp(-1/(1 - 4t^2)) on |t| < 1/2, with unit integral.
namespace bump {

inline double raw(double t) {
    const double q = 1.0 - 4.0 * t * t;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

inline double normalization() {
    static const double c = 1.0 / boost::math::quadrature::gauss_kronrod<double, 61>::integrate(raw, -0.5, 0.5, 15, 1e-15);
    return c;
}

/// k-th derivative of phi at t, k <= 2.
inline double derivative(double t, int k) {
    const double q = 1.0 - 4.0 * t * t;
    if (q <= 0.0) return 0.0;
    const double phi = normalization() * std::exp(-1.0 / q);
    const double g1 = -8.0 * t / (q * q);
    switch (k) {
        case 0: return phi;
        case 1: return phi * g1;
        case 2: return phi * (-8.0 / (q * q) - 128.0 * t * t / (q * q * q) + g1 * g1);
        default: throw std::invalid_argument("bump::derivative: order <= 2");
    }
}

inline double value(double t) { return derivative(t, 0); }

/// Phi(t) = integral of phi over (-1/2, t).
inline double cdf(double t) {
    if (t <= -0.5) return 0.0;
    if (t >= 0.5) return 1.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(value, -0.5, t, 10, 1e-14);
}

}  // namespace bump

/// phi_eps sampled on a periodic grid at minimum-image distance and
/// renormalized so that sum * cell volume = 1, with its DFT multiplier.
class Mollifier {
public:
    Mollifier(const Grid& g, double eps) : grid_(g), eps_(eps) {
        if (!g.periodic) throw std::invalid_argument("Mollifier: periodic grid required");
        if (!(eps >= 2.0 * g.spacing() * (1.0 - 1e-12))) throw std::invalid_argument("Mollifier: eps below two grid spacings (kernel unresolved)");
        if (eps > g.length) throw std::invalid_argument("Mollifier: eps exceeds the period");
        samples_.assign(g.size(), 0.0);
        const double h = g.spacing();
        double total = 0.0;
        spectral::for_each_index(g, [&](std::size_t flat, std::span<const int> idx) {
            double r2 = 0.0;
            for (int k = 0; k < g.dim; ++k) {
                int i = idx[static_cast<std::size_t>(k)];
                if (i > g.points / 2) i -= g.points;
                const double x = i * h / eps;
                r2 += x * x;
            }
            samples_[flat] = bump::value(std::sqrt(r2));
            total += samples_[flat];
        });
        const double scale = 1.0 / (total * g.cell_volume());
        for (double& v : samples_) v *= scale;
        auto c = spectral::forward(g, samples_);
        multiplier_.resize(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) multiplier_[k] = c[k].real() * g.cell_volume();
    }

    const Grid& grid() const { return grid_; }
    double eps() const { return eps_; }
    /// Kernel samples with the origin at index 0.
    const std::vector<double>& samples() const { return samples_; }
    double integral() const {
        double s = 0.0;
        for (double v : samples_) s += v;
        return s * grid_.cell_volume();
    }
    /// Discrete Fourier multiplier of the convolution.
    const std::vector<double>& multiplier() const { return multiplier_; }

    void apply(std::vector<std::complex<double>>& c, int times = 1) const {
        for (std::size_t k = 0; k < c.size(); ++k)
            for (int t = 0; t < times; ++t) c[k] *= multiplier_[k];
    }

private:
    Grid grid_;
    double eps_;
    std::vector<double> samples_;
    std::vector<double> multiplier_;
};

/// Outer taper: 1 on [-0.1, 1.1], 0 outside [-0.2, 1.2], smooth in between.
inline double taper(double x) {
    auto step = [](double t) {  // smooth 0 -> 1 on [0, 1]
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
        return a / (a + b);
    };
    return step((x + 0.2) / 0.1) * step((1.2 - x) / 0.1);
}

/// Coefficients c_j, j = 1..m+2, of the reflection f(-x) ~ sum_j c_j f(j x),
/// matching derivatives of order 0..m+1 at the reflection point.
inline std::vector<double> reflection_coefficients(int m) {
    const int n = m + 2;
    Eigen::MatrixXd V(n, n);
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) V(k, j) = std::pow(-(j + 1.0), k);
        rhs(k) = 1.0;
    }
    const Eigen::VectorXd c = V.fullPivLu().solve(rhs);
    return std::vector<double>(c.data(), c.data() + n);
}

/// Interval data carried onto the periodic grid of [-1/2, 3/2] with the same spacing.
struct Extension {
    Grid grid;
    GridFunction values;
    int offset = 0;  // extended index of the left endpoint
};

inline Grid extended_grid(const Grid& interval) {
    const int cells = interval.points - 1;
    if (cells % 2 != 0) throw std::invalid_argument("extend: interval cell count must be even");
    const double h = interval.spacing();
    return Grid{1, 2 * cells, interval.origin - 0.5 * interval.length, cells * 2 * h, true};
}

/// Higher-order reflection across both endpoints followed by the outer taper.
/// Exact on polynomials of degree <= m+1 inside [-0.1, 1.1] (unit interval).
inline Extension extend(const GridFunction& f, int m) {
    const Grid& g = f.grid();
    if (g.periodic || g.dim != 1) throw std::invalid_argument("extend: 1D interval grid required");
    if (m < 1) throw std::invalid_argument("extend: m >= 1 required");
    const int cells = g.points - 1;
    const int taper_cells = static_cast<int>(std::ceil(0.2 * cells)) + 1;
    if ((m + 2) * taper_cells > cells) throw std::invalid_argument("extend: interval too coarse for the reflection stencil");
    for (double v : f.values())
        if (!std::isfinite(v)) throw std::invalid_argument("extend: non-finite data, endpoint jet unavailable");
    const auto c = reflection_coefficients(m);
    Extension e{extended_grid(g), GridFunction(extended_grid(g), f.components()), cells / 2};
    for (int comp = 0; comp < f.components(); ++comp) {
        const auto v = f.component(comp);
        auto out = e.values.component(comp);
        for (int K = 0; K < e.grid.points; ++K) {
            const int k = K - e.offset;  // interval index, may be outside [0, cells]
            const double x = static_cast<double>(k) / cells;
            double val = 0.0;
            if (k >= 0 && k <= cells) {
                val = v[static_cast<std::size_t>(k)];
            } else if (k < 0 && -k <= taper_cells) {
                for (std::size_t j = 0; j < c.size(); ++j) val += c[j] * v[static_cast<std::size_t>(-(static_cast<int>(j) + 1) * k)];
            } else if (k > cells && k - cells <= taper_cells) {
                const int s = k - cells;
                for (std::size_t j = 0; j < c.size(); ++j) val += c[j] * v[static_cast<std::size_t>(cells - (static_cast<int>(j) + 1) * s)];
            }
            out[static_cast<std::size_t>(K)] = val * taper(x);
        }
    }
    return e;
}

/// Restrict an extended field back to the interval nodes.
inline GridFunction restrict_to(const Extension& e, const GridFunction& ext, const Grid& interval) {
    GridFunction out(interval, ext.components());
    for (int c = 0; c < ext.components(); ++c)
        for (int k = 0; k < interval.points; ++k) out.component(c)[static_cast<std::size_t>(k)] = ext.component(c)[static_cast<std::size_t>(k + e.offset)];
    return out;
}

namespace detail {

inline GridFunction convolve_periodic(const GridFunction& f, double eps, int times) {
    const Mollifier K(f.grid(), eps);
    GridFunction out(f.grid(), f.components());
    for (int c = 0; c < f.components(); ++c) {
        auto s = spectral::forward(f.grid(), f.component(c));
        K.apply(s, times);
        const auto v = spectral::inverse_real(f.grid(), std::move(s));
        std::copy(v.begin(), v.end(), out.component(c).begin());
    }
    return out;
}

inline GridFunction convolve(const GridFunction& f, double eps, int times, int m) {
    if (f.grid().periodic) return convolve_periodic(f, eps, times);
    const auto e = extend(f, m);
    return restrict_to(e, convolve_periodic(e.values, eps, times), f.grid());
}

}  // namespace detail

/// S_eps f. Interval inputs are extended (reflection order m) before convolving.
inline GridFunction smooth(const GridFunction& f, double eps, int m = 2) { return detail::convolve(f, eps, 1, m); }

/// S_eps^2 f = S_eps(S_eps f).
inline GridFunction smooth_twice(const GridFunction& f, double eps, int m = 2) { return detail::convolve(f, eps, 2, m); }

/// rho_eps: the indicator of {dist(x, boundary) >= 3.5 eps} mollified at width
/// eps/4. Identically 1 on a periodic domain.
class Cutoff {
public:
    Cutoff(const Grid& domain, double eps) : eps_(eps), trivial_(domain.periodic) {
        if (!(eps > 0.0)) throw std::invalid_argument("cutoff: eps must be positive");
        if (trivial_) return;
        if (domain.dim != 1) throw std::invalid_argument("cutoff: interval domains only");
        if (!(5.0 * eps < domain.length)) throw std::invalid_argument("cutoff: eps too large for the domain");
        a_ = domain.origin + 3.5 * eps;
        b_ = domain.origin + domain.length - 3.5 * eps;
        s_ = 0.25 * eps;
    }

    double eps() const { return eps_; }
    bool trivial() const { return trivial_; }

    /// k-th derivative of rho at x, k <= 3.
    double derivative(double x, int k) const {
        if (trivial_) return k == 0 ? 1.0 : 0.0;
        if (a_ >= b_) return 0.0;
        const double ta = (x - a_) / s_, tb = (x - b_) / s_;
        if (k == 0) return bump::cdf(ta) - bump::cdf(tb);
        return std::pow(s_, -k) * (bump::derivative(ta, k - 1) - bump::derivative(tb, k - 1));
    }
    double operator()(double x) const { return derivative(x, 0); }

    GridFunction samples(const Grid& g) const {
        GridFunction out(g, 1);
        for (std::size_t k = 0; k < g.size(); ++k) out.component(0)[k] = trivial_ ? 1.0 : derivative(g.coordinates(k)[0], 0);
        return out;
    }

private:
    double eps_;
    bool trivial_;
    double a_ = 0.0, b_ = 0.0, s_ = 1.0;
};

inline Cutoff cutoff(const Grid& domain, double eps) { return Cutoff(domain, eps); }

/// Measured constants of the smoothing estimates. Each returns the ratio
/// left side / right side of the inequality, so a bounded ratio is the claim.
namespace smoothing_constants {

namespace detail {

template <class Pred>
double l2_where(const Grid& g, std::span<const double> v, Pred&& keep) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (keep(g.coordinates(k))) s += v[k] * v[k];
    return std::sqrt(s * g.cell_volume());
}

inline double l2(const Grid& g, std::span<const double> v) {
    return l2_where(g, v, [](const std::vector<double>&) { return true; });
}

}  // namespace detail

/// ||S_eps f - f|| / (eps ||grad f||) on the torus.
inline double approximation(const GridFunction& f, double eps) {
    const Grid& g = f.grid();
    const auto s = smooth(f, eps) - f;
    double grad = 0.0;
    for (int k = 0; k < g.dim; ++k) {
        std::vector<int> a(static_cast<std::size_t>(g.dim), 0);
        a[static_cast<std::size_t>(k)] = 1;
        const auto d = spectral::derivative(g, f.component(0), MultiIndex(a));
        const double n = detail::l2(g, d);
        grad += n * n;
    }
    return detail::l2(g, s.component(0)) / (eps * std::sqrt(grad));
}

/// ||g(x/eps) S_eps f|| / (||g||_{L2(Q)} ||f||) on the torus for 1-periodic g.
template <class G>
double oscillation(const GridFunction& f, G&& g_cell, double eps) {
    const Grid& g = f.grid();
    auto s = smooth(f, eps);
    double gq = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto x = g.coordinates(k);
        for (double& xi : x) xi /= eps;
        const double gv = g_cell(x);
        gq += gv * gv;
        s.component(0)[k] *= gv;
    }
    gq = std::sqrt(gq / static_cast<double>(g.size()));
    return detail::l2(g, s.component(0)) / (gq * detail::l2(g, f.component(0)));
}

/// Boundary-layer estimate on an interval: ||S_eps(f')||_{L2(layer eps)} over
/// eps^{-1} ||f||_{L2(2 eps neighbourhood of the boundary)}; f is extended first.
inline double boundary_layer(const GridFunction& f, double eps, int m = 2) {
    const Grid& g = f.grid();
    const auto e = extend(f, m);
    auto c = spectral::forward(e.grid, e.values.component(0));
    spectral::apply_derivative(e.grid, MultiIndex{1}, c);
    Mollifier(e.grid, eps).apply(c);
    const auto sd = spectral::inverse_real(e.grid, std::move(c));
    const double a = g.origin, b = g.origin + g.length;
    auto dist = [&](double x) { return std::min(std::abs(x - a), std::abs(x - b)); };
    const double lhs = detail::l2_where(e.grid, sd, [&](const std::vector<double>& x) { return x[0] > a && x[0] < b && dist(x[0]) < eps; });
    const double rhs = detail::l2_where(e.grid, e.values.component(0), [&](const std::vector<double>& x) { return dist(x[0]) < 2.0 * eps; });
    return lhs / (rhs / eps);
}

/// Interior analog: ||S_eps(f')||_{L2(dist >= 2 eps)} over eps^{-1} ||f||_{L2(dist >= eps)}.
inline double interior(const GridFunction& f, double eps, int m = 2) {
    const Grid& g = f.grid();
    const auto e = extend(f, m);
    auto c = spectral::forward(e.grid, e.values.component(0));
    spectral::apply_derivative(e.grid, MultiIndex{1}, c);
    Mollifier(e.grid, eps).apply(c);
    const auto sd = spectral::inverse_real(e.grid, std::move(c));
    const double a = g.origin, b = g.origin + g.length;
    auto inside = [&](double x, double r) { return x - a >= r && b - x >= r; };
    const double lhs = detail::l2_where(e.grid, sd, [&](const std::vector<double>& x) { return inside(x[0], 2.0 * eps); });
    const double rhs = detail::l2_where(e.grid, e.values.component(0), [&](const std::vector<double>& x) { return inside(x[0], eps); });
    return lhs / (rhs / eps);
}

}  // namespace smoothing_constants

}  // namespace hohom
