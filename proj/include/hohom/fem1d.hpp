#pragma once

#include "hohom/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hohom {

/// Gauss-Legendre nodes and weights mapped to [0, 1].
template <int P>
struct UnitGauss {
    std::array<double, P> x{}, w{};
    UnitGauss() {
        using Q = boost::math::quadrature::gauss<double, P>;
        const auto& a = Q::abscissa();
        const auto& b = Q::weights();
        int k = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) {
                x[static_cast<std::size_t>(k)] = 0.5;
                w[static_cast<std::size_t>(k++)] = 0.5 * b[i];
                continue;
            }
            x[static_cast<std::size_t>(k)] = 0.5 * (1.0 - a[i]);
            w[static_cast<std::size_t>(k++)] = 0.5 * b[i];
            x[static_cast<std::size_t>(k)] = 0.5 * (1.0 + a[i]);
            w[static_cast<std::size_t>(k++)] = 0.5 * b[i];
        }
    }
};

/// Symmetric positive definite banded matrix, lower band stored row-wise,
/// factored by Cholesky in extended precision.
class BandedSpd {
public:
    BandedSpd(int n, int w) : n_(n), w_(w), a_(static_cast<std::size_t>(n) * (w + 1), 0.0L) {}

    int size() const { return n_; }
    long double& at(int i, int j) {  // requires j <= i <= j + w
        return a_[static_cast<std::size_t>(i) * (w_ + 1) + static_cast<std::size_t>(i - j)];
    }
    void add(int i, int j, long double v) {
        if (j > i) std::swap(i, j);
        if (i - j > w_) throw std::logic_error("BandedSpd: entry outside band");
        at(i, j) += v;
    }
    long double get(int i, int j) const {
        if (j > i) std::swap(i, j);
        if (i - j > w_) return 0.0L;
        return a_[static_cast<std::size_t>(i) * (w_ + 1) + static_cast<std::size_t>(i - j)];
    }

    std::vector<long double> multiply(const std::vector<long double>& x) const {
        std::vector<long double> y(static_cast<std::size_t>(n_), 0.0L);
        for (int i = 0; i < n_; ++i)
            for (int j = std::max(0, i - w_); j < std::min(n_, i + w_ + 1); ++j) y[static_cast<std::size_t>(i)] += get(i, j) * x[static_cast<std::size_t>(j)];
        return y;
    }

    /// Cholesky factor in the same banded storage; throws CoercivityLoss on a non-positive pivot.
    BandedSpd factor() const {
        BandedSpd L = *this;
        for (int i = 0; i < n_; ++i) {
            for (int j = std::max(0, i - w_); j <= i; ++j) {
                long double s = L.at(i, j);
                for (int k = std::max(0, i - w_); k < j; ++k) s -= L.at(i, k) * L.at(j, k);
                if (i == j) {
                    if (!(s > 0.0L)) throw CoercivityLoss("banded Cholesky: non-positive pivot", i, static_cast<double>(s));
                    L.at(i, i) = std::sqrt(s);
                } else {
                    L.at(i, j) = s / L.at(j, j);
                }
            }
        }
        return L;
    }

    /// Forward and back substitution with a factor from factor().
    std::vector<long double> substitute(std::vector<long double> b) const {
        for (int i = 0; i < n_; ++i) {
            long double s = b[static_cast<std::size_t>(i)];
            for (int k = std::max(0, i - w_); k < i; ++k) s -= get(i, k) * b[static_cast<std::size_t>(k)];
            b[static_cast<std::size_t>(i)] = s / get(i, i);
        }
        for (int i = n_ - 1; i >= 0; --i) {
            long double s = b[static_cast<std::size_t>(i)];
            for (int k = i + 1; k <= std::min(n_ - 1, i + w_); ++k) s -= get(k, i) * b[static_cast<std::size_t>(k)];
            b[static_cast<std::size_t>(i)] = s / get(i, i);
        }
        return b;
    }

    /// Solves A x = b; throws CoercivityLoss on a non-positive pivot.
    std::vector<long double> solve(std::vector<long double> b) const { return factor().substitute(std::move(b)); }

    /// Solves A x = b with `steps` rounds of iterative refinement, the residual
    /// b - A x accumulated in quad precision.
    std::vector<long double> solve_refined(const std::vector<long double>& b, int steps = 2) const {
        const BandedSpd L = factor();
        auto x = L.substitute(b);
        for (int s = 0; s < steps; ++s) {
            std::vector<long double> r(static_cast<std::size_t>(n_));
            for (int i = 0; i < n_; ++i) {
                __float128 acc = static_cast<__float128>(b[static_cast<std::size_t>(i)]);
                for (int j = std::max(0, i - w_); j < std::min(n_, i + w_ + 1); ++j) acc -= static_cast<__float128>(get(i, j)) * static_cast<__float128>(x[static_cast<std::size_t>(j)]);
                r[static_cast<std::size_t>(i)] = static_cast<long double>(acc);
            }
            const auto dx = L.substitute(std::move(r));
            for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(i)] += dx[static_cast<std::size_t>(i)];
        }
        return x;
    }

private:
    int n_, w_;
    std::vector<long double> a_;
};

/// Dirichlet problem (-1)^m (a(x/eps) u^{(m)})^{(m)} = f on (0, 1) with
/// endpoint values (m = 1) or values and slopes (m = 2).
struct Dirichlet1D {
    std::function<double(double)> a;  // cell profile a(y), 1-periodic
    double eps = 1.0;
    int m = 2;
    std::function<double(double)> f;
    int cells = 0;
    std::array<double, 2> value{0.0, 0.0};  // u(0), u(1)
    std::array<double, 2> slope{0.0, 0.0};  // u'(0), u'(1), m = 2 only
    double mu = 0.0;                        // lower bound of a, checked at quadrature points
    bool enforce_resolution = true;         // h <= eps/16
};

/// Piecewise P1 (m = 1) or C1 Hermite cubic (m = 2) finite element function on a uniform mesh.
class FemFunction1D {
public:
    FemFunction1D() = default;
    FemFunction1D(int m, int cells, std::vector<double> values, std::vector<double> slopes)
        : m_(m), cells_(cells), h_(1.0 / cells), u_(std::move(values)), s_(std::move(slopes)) {}

    int order() const { return m_; }
    int cells() const { return cells_; }
    double spacing() const { return h_; }
    const std::vector<double>& nodal_values() const { return u_; }
    const std::vector<double>& nodal_slopes() const { return s_; }

    /// k-th derivative at x in [0, 1]; k <= m (the element-interior value at mesh nodes).
    double evaluate(double x, int k = 0) const {
        int e = static_cast<int>(std::floor(x / h_));
        e = std::clamp(e, 0, cells_ - 1);
        return evaluate_in(e, (x - e * h_) / h_, k);
    }

    /// k-th derivative at local coordinate t in [0, 1] of element e.
    double evaluate_in(int e, double t, int k) const {
        const auto E = static_cast<std::size_t>(e);
        if (m_ == 1) {
            if (k == 0) return (1.0 - t) * u_[E] + t * u_[E + 1];
            if (k == 1) return (u_[E + 1] - u_[E]) / h_;
            return 0.0;
        }
        const auto N = hermite(t, k);
        const double s = std::pow(h_, -k);
        return s * (N[0] * u_[E] + N[1] * h_ * s_[E] + N[2] * u_[E + 1] + N[3] * h_ * s_[E + 1]);
    }

    /// k-th derivative of the cubic Hermite shape functions on [0, 1] for
    /// dofs (u0, h u0', u1, h u1').
    static std::array<double, 4> hermite(double t, int k) {
        switch (k) {
            case 0: return {1 - 3 * t * t + 2 * t * t * t, t - 2 * t * t + t * t * t, 3 * t * t - 2 * t * t * t, -t * t + t * t * t};
            case 1: return {-6 * t + 6 * t * t, 1 - 4 * t + 3 * t * t, 6 * t - 6 * t * t, -2 * t + 3 * t * t};
            case 2: return {-6 + 12 * t, -4 + 6 * t, 6 - 12 * t, -2 + 6 * t};
            case 3: return {12.0, 6.0, -12.0, 6.0};
            default: return {0.0, 0.0, 0.0, 0.0};
        }
    }

private:
    int m_ = 2;
    int cells_ = 0;
    double h_ = 1.0;
    std::vector<double> u_, s_;
};

struct FemReport {
    double relative_residual = 0.0;  // ||K u - F|| / ||F|| over free dofs
    int unknowns = 0;
};

/// Galerkin solve: P1 with midpoint coefficient for m = 1, Hermite cubics with
/// two-point Gauss for a(x/eps) and five-point Gauss for the load for m = 2.
inline FemFunction1D solve_dirichlet_1d(const Dirichlet1D& p, FemReport* report = nullptr) {
    if (p.m != 1 && p.m != 2) throw std::invalid_argument("solve_dirichlet_1d: m in {1, 2}");
    if (p.cells < 2) throw std::invalid_argument("solve_dirichlet_1d: at least two cells");
    if (!(p.eps > 0.0)) throw std::invalid_argument("solve_dirichlet_1d: eps must be positive");
    const int C = p.cells;
    const double h = 1.0 / C;
    if (p.enforce_resolution && h > p.eps / 16.0 * (1.0 + 1e-12)) throw ResolutionError("solve_dirichlet_1d: h > eps/16, oscillation unresolved");
    static const UnitGauss<2> g2;
    static const UnitGauss<5> g5;
    auto coeff = [&](double x) {
        const double v = p.a(x / p.eps);
        if (!(v > 0.0) || v < p.mu * (1.0 - 1e-12)) throw CoercivityLoss("solve_dirichlet_1d: coefficient below mu", 0, v);
        return v;
    };
    auto load = [&](double x) { return p.f ? p.f(x) : 0.0; };

    const int dpn = p.m;  // dofs per node
    const int n = dpn * (C + 1);
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    std::vector<long double> known(static_cast<std::size_t>(n), 0.0L);
    fixed[0] = 1;
    fixed[static_cast<std::size_t>(dpn * C)] = 1;
    known[0] = p.value[0];
    known[static_cast<std::size_t>(dpn * C)] = p.value[1];
    if (p.m == 2) {
        fixed[1] = 1;
        fixed[static_cast<std::size_t>(dpn * C + 1)] = 1;
        known[1] = h * p.slope[0];  // scaled slope dofs
        known[static_cast<std::size_t>(dpn * C + 1)] = h * p.slope[1];
    }
    std::vector<int> map(static_cast<std::size_t>(n), -1);
    int free = 0;
    for (int i = 0; i < n; ++i)
        if (!fixed[static_cast<std::size_t>(i)]) map[static_cast<std::size_t>(i)] = free++;

    BandedSpd K(free, p.m == 1 ? 1 : 3);
    std::vector<long double> F(static_cast<std::size_t>(free), 0.0L);
    const int ne = 2 * dpn;
    for (int e = 0; e < C; ++e) {
        const double x0 = e * h;
        std::array<std::array<long double, 4>, 4> Ke{};
        std::array<long double, 4> Fe{};
        if (p.m == 1) {
            const double a = coeff(x0 + 0.5 * h);
            Ke[0][0] = Ke[1][1] = a / h;
            Ke[0][1] = Ke[1][0] = -a / h;
            for (std::size_t q = 0; q < g5.x.size(); ++q) {
                const double t = g5.x[q], fx = load(x0 + t * h) * g5.w[q] * h;
                Fe[0] += fx * (1.0 - t);
                Fe[1] += fx * t;
            }
        } else {
            // Second derivatives of the scaled Hermite basis are p + r t with
            // integer p, r; moments of a keep affine functions in the kernel.
            static constexpr std::array<int, 4> P{-6, -4, 6, -2}, R{12, 6, -12, 6};
            long double M0 = 0.0L, M1 = 0.0L, M2 = 0.0L;
            for (std::size_t q = 0; q < g2.x.size(); ++q) {
                const long double t = g2.x[q];
                const long double a = static_cast<long double>(coeff(x0 + g2.x[q] * h)) * g2.w[q];
                M0 += a;
                M1 += a * t;
                M2 += a * t * t;
            }
            const long double h3 = static_cast<long double>(h) * h * h;
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 4; ++j) Ke[i][j] = (P[i] * P[j] * M0 + (P[i] * R[j] + R[i] * P[j]) * M1 + R[i] * R[j] * M2) / h3;
            for (std::size_t q = 0; q < g5.x.size(); ++q) {
                const double t = g5.x[q];
                const auto N = FemFunction1D::hermite(t, 0);
                const double fx = load(x0 + t * h) * g5.w[q] * h;
                for (int i = 0; i < 4; ++i) Fe[static_cast<std::size_t>(i)] += static_cast<long double>(fx) * N[static_cast<std::size_t>(i)];
            }
        }
        for (int i = 0; i < ne; ++i) {
            const int gi = dpn * e + i;
            const int ri = map[static_cast<std::size_t>(gi)];
            if (ri < 0) continue;
            F[static_cast<std::size_t>(ri)] += Fe[static_cast<std::size_t>(i)];
            for (int j = 0; j < ne; ++j) {
                const int gj = dpn * e + j;
                const int rj = map[static_cast<std::size_t>(gj)];
                const long double kij = Ke[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (rj < 0) {
                    F[static_cast<std::size_t>(ri)] -= kij * known[static_cast<std::size_t>(gj)];
                } else if (rj <= ri) {
                    K.add(ri, rj, kij);
                }
            }
        }
    }
    const auto x = K.solve_refined(F);
    if (report) {
        const auto Kx = K.multiply(x);
        long double num = 0.0L, den = 0.0L;
        for (int i = 0; i < free; ++i) {
            const long double r = Kx[static_cast<std::size_t>(i)] - F[static_cast<std::size_t>(i)];
            num += r * r;
            den += F[static_cast<std::size_t>(i)] * F[static_cast<std::size_t>(i)];
        }
        report->relative_residual = den > 0.0L ? static_cast<double>(std::sqrt(num / den)) : static_cast<double>(std::sqrt(num));
        report->unknowns = free;
    }
    std::vector<double> u(static_cast<std::size_t>(C + 1)), s;
    if (p.m == 2) s.resize(static_cast<std::size_t>(C + 1));
    for (int k = 0; k <= C; ++k) {
        auto dof = [&](int i) {
            const int r = map[static_cast<std::size_t>(i)];
            return static_cast<double>(r < 0 ? known[static_cast<std::size_t>(i)] : x[static_cast<std::size_t>(r)]);
        };
        u[static_cast<std::size_t>(k)] = dof(dpn * k);
        if (p.m == 2) s[static_cast<std::size_t>(k)] = dof(dpn * k + 1) / h;
    }
    return FemFunction1D(p.m, C, std::move(u), std::move(s));
}

/// Solution of L_eps u = 0 on [lo, hi] by quadrature:
/// m = 1: a(x/eps) u' = c1, u(0) = c2;
/// m = 2: a(x/eps) u'' = c1 + c2 x, u(0) = c3, u'(0) = c4.
class KernelSolution1D {
public:
    KernelSolution1D(std::function<double(double)> a, double eps, int m, std::vector<double> c, double lo = -1.0, double hi = 2.0, int per_period = 64)
        : a_(std::move(a)), eps_(eps), m_(m), c_(std::move(c)), lo_(lo) {
        if (m != 1 && m != 2) throw std::invalid_argument("KernelSolution1D: m in {1, 2}");
        if (c_.size() != static_cast<std::size_t>(2 * m)) throw std::invalid_argument("KernelSolution1D: 2m constants required");
        if (per_period < 64) throw ResolutionError("KernelSolution1D: fewer than 64 quadrature cells per period");
        if (!(lo <= 0.0 && hi >= 0.0 && hi > lo)) throw std::invalid_argument("KernelSolution1D: range must contain 0");
        H_ = eps / per_period;
        const int left = static_cast<int>(std::ceil(-lo / H_));
        const int right = static_cast<int>(std::ceil(hi / H_));
        lo_ = -left * H_;
        nodes_ = left + right + 1;
        origin_ = left;
        G0_.assign(static_cast<std::size_t>(nodes_), 0.0L);
        G1_.assign(static_cast<std::size_t>(nodes_), 0.0L);
        // Composite Simpson per cell, accumulated outward from x = 0.
        for (int k = origin_; k + 1 < nodes_; ++k) step(k, k + 1);
        for (int k = origin_; k - 1 >= 0; --k) step(k, k - 1);
    }

    int order() const { return m_; }
    double eps() const { return eps_; }

    /// k-th derivative at x, k <= m.
    double derivative(double x, int k) const {
        if (k == m_) return g(x);
        int i = static_cast<int>(std::lround((x - lo_) / H_));
        i = std::clamp(i, 0, nodes_ - 1);
        const double xi = lo_ + i * H_;
        const auto I = local(xi, x);
        const long double G0 = G0_[static_cast<std::size_t>(i)] + I[0];
        if (m_ == 1) return static_cast<double>(c_[1] + G0);  // k == 0
        const long double G1 = G1_[static_cast<std::size_t>(i)] + I[1];
        if (k == 1) return static_cast<double>(c_[3] + G0);
        return static_cast<double>(c_[2] + c_[3] * x + x * G0 - G1);
    }
    double operator()(double x) const { return derivative(x, 0); }

private:
    // u^{(m)} = g.
    double g(double x) const {
        const double a = a_(x / eps_);
        if (!(a > 0.0)) throw CoercivityLoss("KernelSolution1D: coefficient not positive", 0, a);
        return m_ == 1 ? c_[0] / a : (c_[0] + c_[1] * x) / a;
    }
    void step(int from, int to) {
        const double x0 = lo_ + from * H_, x1 = lo_ + to * H_;
        const auto I = simpson(x0, x1);
        G0_[static_cast<std::size_t>(to)] = G0_[static_cast<std::size_t>(from)] + I[0];
        G1_[static_cast<std::size_t>(to)] = G1_[static_cast<std::size_t>(from)] + I[1];
    }
    std::array<long double, 2> simpson(double x0, double x1) const {
        const double xm = 0.5 * (x0 + x1), w = (x1 - x0) / 6.0;
        const double g0 = g(x0), gm = g(xm), g1 = g(x1);
        return {w * (g0 + 4.0 * gm + g1), w * (x0 * g0 + 4.0 * xm * gm + x1 * g1)};
    }
    // Integrals of g and s g over [x0, x] by five-point Gauss.
    std::array<long double, 2> local(double x0, double x) const {
        static const UnitGauss<5> q;
        long double a = 0.0L, b = 0.0L;
        for (std::size_t k = 0; k < q.x.size(); ++k) {
            const double s = x0 + q.x[k] * (x - x0);
            const double v = g(s) * q.w[k] * (x - x0);
            a += v;
            b += s * v;
        }
        return {a, b};
    }

    std::function<double(double)> a_;
    double eps_;
    int m_;
    std::vector<double> c_;
    double lo_, H_ = 0.0;
    int nodes_ = 0, origin_ = 0;
    std::vector<long double> G0_, G1_;
};

inline KernelSolution1D exact_kernel_solution_1d(std::function<double(double)> a, double eps, int m, std::vector<double> c, double lo = -1.0, double hi = 2.0) {
    return KernelSolution1D(std::move(a), eps, m, std::move(c), lo, hi);
}

}  // namespace hohom
