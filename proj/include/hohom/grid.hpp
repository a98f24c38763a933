#pragma once

#include "hohom/fft.hpp"
#include "hohom/multiindex.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace hohom {

/// Uniform tensor grid. Periodic grids hold `points` nodes per axis at
/// origin + k*length/points; interval grids (1D only) include both endpoints.
struct Grid {
    int dim = 1;
    int points = 0;
    double origin = 0.0;
    double length = 1.0;
    bool periodic = true;

    static Grid torus(int d, int n) { return Grid{d, n, 0.0, 1.0, true}; }
    static Grid interval(int n, double a = 0.0, double b = 1.0) { return Grid{1, n, a, b - a, false}; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int k = 0; k < dim; ++k) s *= static_cast<std::size_t>(points);
        return s;
    }
    double spacing() const { return periodic ? length / points : length / (points - 1); }
    double node(int k) const { return origin + k * spacing(); }
    std::vector<int> dims() const { return std::vector<int>(static_cast<std::size_t>(dim), points); }
    double cell_volume() const { return std::pow(spacing(), dim); }

    /// Multi-dimensional node index of a flat (row-major) index; axis 0 is slowest.
    std::vector<int> unflatten(std::size_t flat) const {
        std::vector<int> idx(static_cast<std::size_t>(dim));
        for (int k = dim - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % static_cast<std::size_t>(points));
            flat /= static_cast<std::size_t>(points);
        }
        return idx;
    }
    std::vector<double> coordinates(std::size_t flat) const {
        auto idx = unflatten(flat);
        std::vector<double> x(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) x[k] = node(idx[k]);
        return x;
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Quadrature weights for grid averages: uniform on the torus, trapezoidal on
/// an interval. Weights sum to the domain measure.
inline std::vector<double> quadrature_weights(const Grid& g) {
    std::vector<double> w(g.size(), g.cell_volume());
    if (!g.periodic) {
        w.front() *= 0.5;
        w.back() *= 0.5;
    }
    return w;
}

/// n-component field sampled on a Grid. Storage is component-major.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(Grid grid, int components) : grid_(grid), components_(components), values_(grid.size() * static_cast<std::size_t>(components), 0.0) {}

    const Grid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t points() const { return grid_.size(); }

    std::span<double> component(int c) {
        return std::span<double>(values_).subspan(static_cast<std::size_t>(c) * points(), points());
    }
    std::span<const double> component(int c) const {
        return std::span<const double>(values_).subspan(static_cast<std::size_t>(c) * points(), points());
    }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    double mean(int c) const {
        const auto w = quadrature_weights(grid_);
        const auto v = component(c);
        double s = 0.0, wt = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            s += w[k] * v[k];
            wt += w[k];
        }
        return s / wt;
    }
    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Set by producers that enforce the zero-mean constraint.
    bool zero_mean = false;
    bool zero_mean_holds(double rel = 1e-12) const {
        const double scale = std::max(max_abs(), 1e-300);
        for (int c = 0; c < components_; ++c) {
            if (std::abs(mean(c)) > rel * scale) return false;
        }
        return true;
    }

    GridFunction& operator+=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    GridFunction& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }

private:
    void check_same(const GridFunction& o) const {
        if (!(o.grid_ == grid_) || o.components_ != components_) throw std::invalid_argument("GridFunction: shape mismatch");
    }

    Grid grid_{};
    int components_ = 0;
    std::vector<double> values_;
};

/// Sample a callable f(x) (x a coordinate vector) on every node.
template <class F>
GridFunction sample_function(const Grid& g, F&& f) {
    GridFunction out(g, 1);
    auto v = out.component(0);
    for (std::size_t k = 0; k < g.size(); ++k) v[k] = f(g.coordinates(k));
    return out;
}

namespace spectral {

/// Signed frequency of DFT index k on n points; the Nyquist index maps to +n/2.
inline int frequency(int k, int n) { return k <= n / 2 ? k : k - n; }
inline bool is_nyquist(int k, int n) { return n % 2 == 0 && k == n / 2; }

inline std::vector<std::complex<double>> forward(const Grid& g, std::span<const double> v) {
    if (!g.periodic) throw std::invalid_argument("spectral: grid is not periodic");
    std::vector<std::complex<double>> c(v.begin(), v.end());
    fft::forward(c, g.dims());
    return c;
}

inline std::vector<double> inverse_real(const Grid& g, std::vector<std::complex<double>> c) {
    fft::inverse(c, g.dims());
    std::vector<double> v(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) v[k] = c[k].real();
    return v;
}

/// Symbol of D^alpha at DFT index `idx` on a periodic grid. Odd derivatives
/// along a Nyquist axis vanish so real fields stay real and D^alpha has the
/// exact adjoint (-1)^|alpha| D^alpha.
inline std::complex<double> derivative_symbol(const Grid& g, const MultiIndex& alpha, std::span<const int> idx) {
    std::complex<double> s(1.0, 0.0);
    for (int k = 0; k < g.dim; ++k) {
        const int a = alpha[k];
        if (a == 0) continue;
        const int i = idx[static_cast<std::size_t>(k)];
        if (is_nyquist(i, g.points) && (a % 2 == 1)) return 0.0;
        const std::complex<double> f(0.0, 2.0 * std::numbers::pi * frequency(i, g.points) / g.length);
        for (int p = 0; p < a; ++p) s *= f;
    }
    return s;
}

/// Calls fn(flat, idx) for every node in row-major order without allocating per node.
template <class Fn>
void for_each_index(const Grid& g, Fn&& fn) {
    std::vector<int> idx(static_cast<std::size_t>(g.dim), 0);
    const std::size_t total = g.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        fn(flat, std::span<const int>(idx));
        for (int k = g.dim - 1; k >= 0; --k) {
            auto& i = idx[static_cast<std::size_t>(k)];
            if (++i < g.points) break;
            i = 0;
        }
    }
}

/// Full table of D^alpha symbols over all DFT indices, built from per-axis factors.
inline std::vector<std::complex<double>> derivative_symbols(const Grid& g, const MultiIndex& alpha) {
    std::vector<std::vector<std::complex<double>>> axis(static_cast<std::size_t>(g.dim));
    for (int k = 0; k < g.dim; ++k) {
        auto& t = axis[static_cast<std::size_t>(k)];
        t.resize(static_cast<std::size_t>(g.points));
        for (int i = 0; i < g.points; ++i) {
            std::vector<int> idx(static_cast<std::size_t>(g.dim), 0);
            idx[static_cast<std::size_t>(k)] = i;
            std::vector<int> a(static_cast<std::size_t>(g.dim), 0);
            a[static_cast<std::size_t>(k)] = alpha[k];
            t[static_cast<std::size_t>(i)] = derivative_symbol(g, MultiIndex(a), idx);
        }
    }
    std::vector<std::complex<double>> out(g.size());
    for_each_index(g, [&](std::size_t flat, std::span<const int> idx) {
        std::complex<double> s(1.0, 0.0);
        for (int k = 0; k < g.dim; ++k) s *= axis[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        out[flat] = s;
    });
    return out;
}

/// Multiply spectral coefficients by the D^alpha symbol in place.
inline void apply_derivative(const Grid& g, const MultiIndex& alpha, std::span<std::complex<double>> c) {
    if (alpha.order() == 0) return;
    const auto sym = derivative_symbols(g, alpha);
    for (std::size_t flat = 0; flat < c.size(); ++flat) c[flat] *= sym[flat];
}

/// Spectral derivative of one component.
inline std::vector<double> derivative(const Grid& g, std::span<const double> v, const MultiIndex& alpha) {
    auto c = forward(g, v);
    apply_derivative(g, alpha, c);
    return inverse_real(g, std::move(c));
}

inline GridFunction derivative(const GridFunction& f, const MultiIndex& alpha) {
    GridFunction out(f.grid(), f.components());
    for (int c = 0; c < f.components(); ++c) {
        const auto d = derivative(f.grid(), f.component(c), alpha);
        std::copy(d.begin(), d.end(), out.component(c).begin());
    }
    return out;
}

/// Mask of retained modes for the discrete solution space: zero mode and
/// Nyquist modes removed; with `dealias`, modes with |xi_k| > n/3 removed too.
inline std::vector<char> solution_mask(const Grid& g, bool dealias) {
    std::vector<char> keep(g.size(), 1);
    for_each_index(g, [&](std::size_t flat, std::span<const int> idx) {
        bool all_zero = true;
        for (int k = 0; k < g.dim; ++k) {
            const int i = idx[static_cast<std::size_t>(k)];
            if (i != 0) all_zero = false;
            if (is_nyquist(i, g.points)) keep[flat] = 0;
            if (dealias && 3 * std::abs(frequency(i, g.points)) > g.points) keep[flat] = 0;
        }
        if (all_zero) keep[flat] = 0;
    });
    return keep;
}

/// Trigonometric interpolant of a periodic 1D or 2D field; evaluates the
/// field and its derivatives at arbitrary points.
class TrigInterpolant {
public:
    TrigInterpolant(const Grid& g, std::span<const double> v) : grid_(g), coeffs_(forward(g, v)) {
        const double inv = 1.0 / static_cast<double>(coeffs_.size());
        for (auto& c : coeffs_) c *= inv;
        if (g.dim > 2) throw std::invalid_argument("TrigInterpolant: d <= 2 only");
    }

    /// From unnormalized DFT coefficients (as returned by forward).
    TrigInterpolant(const Grid& g, std::vector<std::complex<double>> spectrum) : grid_(g), coeffs_(std::move(spectrum)) {
        const double inv = 1.0 / static_cast<double>(coeffs_.size());
        for (auto& c : coeffs_) c *= inv;
        if (g.dim > 2) throw std::invalid_argument("TrigInterpolant: d <= 2 only");
    }

    /// D^alpha of the interpolant at x.
    double evaluate(std::span<const double> x, const MultiIndex& alpha) const {
        const int n = grid_.points;
        if (grid_.dim == 1) return eval_1d(x[0], alpha[0], coeffs_.data(), 1);
        // 2D: sum over rows of 1D evaluations along axis 1, then along axis 0.
        std::vector<std::complex<double>> rows(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            rows[static_cast<std::size_t>(i)] = eval_1d_complex(x[1], alpha[1], coeffs_.data() + static_cast<std::size_t>(i) * n, 1);
        }
        return eval_1d(x[0], alpha[0], rows.data(), 1);
    }
    double operator()(double x) const { return eval_1d(x, 0, coeffs_.data(), 1); }
    double derivative(double x, int order) const { return eval_1d(x, order, coeffs_.data(), 1); }

    /// Derivatives of order 0..kmax at x in one pass over the modes (1D).
    std::vector<double> derivatives(double x, int kmax) const {
        const int n = grid_.points;
        const std::complex<double>* c = coeffs_.data();
        const double theta = 2.0 * std::numbers::pi * (x - grid_.origin) / grid_.length;
        const std::complex<double> step = std::polar(1.0, theta);
        const double w0 = 2.0 * std::numbers::pi / grid_.length;
        std::vector<std::complex<double>> sum(static_cast<std::size_t>(kmax + 1), 0.0);
        sum[0] = c[0];
        std::complex<double> e = 1.0;
        for (int k = 1; k <= n / 2; ++k) {
            e *= step;
            const std::complex<double> ik(0.0, w0 * k);
            const bool nyq = n % 2 == 0 && k == n / 2;
            const auto cp = c[static_cast<std::size_t>(k)];
            const auto cm = nyq ? cp : c[static_cast<std::size_t>(n - k)];
            const double half = nyq ? 0.5 : 1.0;
            std::complex<double> tp = half * cp * e, tm = half * cm * std::conj(e);
            for (int p = 0; p <= kmax; ++p) {
                sum[static_cast<std::size_t>(p)] += tp + tm;
                tp *= ik;
                tm *= -ik;
            }
        }
        std::vector<double> out(sum.size());
        for (std::size_t p = 0; p < sum.size(); ++p) out[p] = sum[p].real();
        return out;
    }

private:
    // sum_k c_k (2 pi i xi_k / L)^order exp(2 pi i xi_k (x - x0) / L), with the
    // Nyquist mode split symmetrically so the interpolant is real.
    std::complex<double> eval_1d_complex(double x, int order, const std::complex<double>* c, std::size_t stride) const {
        const int n = grid_.points;
        const double theta = 2.0 * std::numbers::pi * (x - grid_.origin) / grid_.length;
        const std::complex<double> step = std::polar(1.0, theta);
        const double w0 = 2.0 * std::numbers::pi / grid_.length;
        std::complex<double> sum = order == 0 ? c[0] : 0.0;
        std::complex<double> e = 1.0;
        for (int k = 1; k <= n / 2; ++k) {
            e *= step;
            const std::complex<double> ik(0.0, w0 * k);
            std::complex<double> sp = 1.0, sm = 1.0;
            for (int p = 0; p < order; ++p) {
                sp *= ik;
                sm *= -ik;
            }
            const auto cp = c[static_cast<std::size_t>(k) * stride];
            if (n % 2 == 0 && k == n / 2) {
                sum += 0.5 * cp * (sp * e + sm * std::conj(e));
            } else {
                const auto cm = c[static_cast<std::size_t>(n - k) * stride];
                sum += cp * sp * e + cm * sm * std::conj(e);
            }
        }
        return sum;
    }
    double eval_1d(double x, int order, const std::complex<double>* c, std::size_t stride) const {
        return eval_1d_complex(x, order, c, stride).real();
    }

    Grid grid_;
    std::vector<std::complex<double>> coeffs_;
};

}  // namespace spectral

}  // namespace hohom
