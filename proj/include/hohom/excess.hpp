#pragma once

#include "hohom/fem1d.hpp"
#include "hohom/grid.hpp"
#include "hohom/multiindex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hohom {

/// Quadrature on a ball B(center, r) with weights summing to 1, so that
/// weighted sums are averages. Grid-based rules also carry node indices.
struct BallRule {
    int dim = 1;
    std::vector<double> center;
    double radius = 0.0;
    std::vector<double> points;  // dim coordinates per point, unwrapped around center
    std::vector<double> weights;
    std::vector<std::size_t> nodes;  // grid rules only

    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t k) const { return std::span<const double>(points).subspan(k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)); }
    double average(std::span<const double> v) const {
        double s = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) s += weights[k] * v[k];
        return s;
    }
};

/// Composite five-point Gauss on [x0 - r, x0 + r] with panels no wider than `panel`.
inline BallRule ball_rule_1d(double x0, double r, double panel) {
    if (!(r > 0.0) || !(panel > 0.0)) throw std::invalid_argument("ball_rule_1d: positive radius and panel required");
    static const UnitGauss<5> q;
    const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * r / panel - 1e-12)));
    const double h = 2.0 * r / panels;
    BallRule b{1, {x0}, r, {}, {}, {}};
    for (int e = 0; e < panels; ++e)
        for (std::size_t k = 0; k < q.x.size(); ++k) {
            b.points.push_back(x0 - r + (e + q.x[k]) * h);
            b.weights.push_back(q.w[k] * h / (2.0 * r));
        }
    return b;
}

/// Polar rule on a disc: five-point Gauss in the radius on panels no wider
/// than `panel`, and an equispaced angle rule with arc spacing <= panel / 2 at the rim.
inline BallRule ball_rule_2d(std::span<const double> x0, double r, double panel) {
    if (!(r > 0.0) || !(panel > 0.0)) throw std::invalid_argument("ball_rule_2d: positive radius and panel required");
    static const UnitGauss<5> q;
    const int panels = std::max(1, static_cast<int>(std::ceil(r / panel - 1e-12)));
    const int angles = std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / (0.5 * panel))));
    const double h = r / panels, area = std::numbers::pi * r * r;
    BallRule b{2, {x0[0], x0[1]}, r, {}, {}, {}};
    for (int e = 0; e < panels; ++e)
        for (std::size_t k = 0; k < q.x.size(); ++k) {
            const double rho = (e + q.x[k]) * h;
            for (int t = 0; t < angles; ++t) {
                const double th = 2.0 * std::numbers::pi * (t + 0.5) / angles;
                b.points.push_back(x0[0] + rho * std::cos(th));
                b.points.push_back(x0[1] + rho * std::sin(th));
                b.weights.push_back(q.w[k] * h * rho * (2.0 * std::numbers::pi / angles) / area);
            }
        }
    return b;
}

/// Nodes of a periodic grid within minimum-image distance r of x0, equal weights.
inline BallRule ball_rule_grid(const Grid& g, std::span<const double> x0, double r) {
    if (!g.periodic) throw std::invalid_argument("ball_rule_grid: periodic grid required");
    if (!(r > 0.0) || 2.0 * r > g.length) throw std::invalid_argument("ball_rule_grid: radius must lie in (0, L/2]");
    BallRule b{g.dim, std::vector<double>(x0.begin(), x0.end()), r, {}, {}, {}};
    std::vector<double> disp(static_cast<std::size_t>(g.dim));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto x = g.coordinates(k);
        double d2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double dx = x[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)];
            dx -= g.length * std::round(dx / g.length);
            disp[static_cast<std::size_t>(a)] = dx;
            d2 += dx * dx;
        }
        if (d2 > r * r * (1.0 + 1e-12)) continue;
        for (int a = 0; a < g.dim; ++a) b.points.push_back(x0[static_cast<std::size_t>(a)] + disp[static_cast<std::size_t>(a)]);
        b.nodes.push_back(k);
    }
    b.weights.assign(b.nodes.size(), b.nodes.empty() ? 0.0 : 1.0 / static_cast<double>(b.nodes.size()));
    return b;
}

/// Weighted L2 projection onto polynomials of degree <= k in the scaled
/// variable (x - center) / r.
struct PolyFit {
    int degree = 0;
    std::vector<MultiIndex> basis;
    std::vector<double> coeffs;
    double residual = 0.0;  // (average |u - P|^2)^{1/2}
};

inline PolyFit poly_fit(const BallRule& b, std::span<const double> u, int k) {
    if (u.size() != b.size()) throw std::invalid_argument("poly_fit: value count mismatch");
    PolyFit f;
    f.degree = k;
    if (k < 0) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += b.weights[i] * u[i] * u[i];
        f.residual = std::sqrt(s);
        return f;
    }
    for (int j = 0; j <= k; ++j)
        for (const auto& a : enumerate(b.dim, j)) f.basis.push_back(a);
    const auto P = static_cast<Eigen::Index>(b.size());
    const auto Q = static_cast<Eigen::Index>(f.basis.size());
    if (P < Q) throw std::runtime_error("poly_fit: fewer quadrature points than basis functions");
    Eigen::MatrixXd V(P, Q);
    Eigen::VectorXd y(P);
    std::vector<double> s(static_cast<std::size_t>(b.dim));
    for (Eigen::Index i = 0; i < P; ++i) {
        const double sw = std::sqrt(b.weights[static_cast<std::size_t>(i)]);
        const auto x = b.point(static_cast<std::size_t>(i));
        for (int a = 0; a < b.dim; ++a) s[static_cast<std::size_t>(a)] = (x[static_cast<std::size_t>(a)] - b.center[static_cast<std::size_t>(a)]) / b.radius;
        for (Eigen::Index j = 0; j < Q; ++j) V(i, j) = sw * monomial(f.basis[static_cast<std::size_t>(j)], s);
        y(i) = sw * u[static_cast<std::size_t>(i)];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    if (qr.rank() < Q) throw std::runtime_error("poly_fit: rank-deficient fit basis (ball too small for the grid)");
    const Eigen::VectorXd c = qr.solve(y);
    f.coeffs.assign(c.data(), c.data() + Q);
    f.residual = (V * c - y).norm();
    return f;
}

/// Lower-order source terms f^alpha in the excess functionals.
struct Source {
    int order = 0;               // |alpha|
    std::vector<double> values;  // at the rule points
};

struct ExcessValue {
    double value = 0.0;
    PolyFit fit;
};

namespace detail {

inline double source_term(const BallRule& b, const std::vector<Source>& sources, int m, double q) {
    double s = 0.0;
    for (const auto& f : sources) {
        double a = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) a += b.weights[i] * std::pow(std::abs(f.values[i]), q);
        s += std::pow(b.radius, 2 * m - f.order) * std::pow(a, 1.0 / q);
    }
    return s;
}

}  // namespace detail

/// H(r) = r^{-m} { inf over P_m of (avg |u - P|^2)^{1/2} + sum r^{2m-|a|} (avg |f^a|^q)^{1/q} }.
inline ExcessValue excess_H(const BallRule& b, std::span<const double> u, int m, const std::vector<Source>& sources = {}, double q = 2.0) {
    ExcessValue e;
    e.fit = poly_fit(b, u, m);
    e.value = std::pow(b.radius, -m) * (e.fit.residual + detail::source_term(b, sources, m, q));
    return e;
}

/// I(r): as H with P_{m-1} and the L2 average of the sources.
inline ExcessValue excess_I(const BallRule& b, std::span<const double> u, int m, const std::vector<Source>& sources = {}) {
    ExcessValue e;
    e.fit = poly_fit(b, u, m - 1);
    e.value = std::pow(b.radius, -m) * (e.fit.residual + detail::source_term(b, sources, m, 2.0));
    return e;
}

/// G(t) for a solution of the constant-coefficient equation: same functional as H.
inline ExcessValue excess_G(const BallRule& b, std::span<const double> u0, int m, const std::vector<Source>& sources = {}, double q = 2.0) {
    return excess_H(b, u0, m, sources, q);
}

/// h(r) = sum_{|a| = m} |D^a P_mr| / a! for the minimizer P_mr of H(r).
inline double coeff_h(const PolyFit& fit, double r, int m) {
    if (fit.degree < m) throw std::invalid_argument("coeff_h: fit degree below m");
    double s = 0.0;
    for (std::size_t j = 0; j < fit.basis.size(); ++j)
        if (fit.basis[j].order() == m) s += std::abs(fit.coeffs[j]);
    return s * std::pow(r, -m);
}

/// A solution family member for the probes: rule construction and sampling.
struct ProbeField {
    double eps = 1.0;
    int m = 1;
    std::function<BallRule(double r)> ball;                           // B(x0, r)
    std::function<std::vector<double>(const BallRule&)> values;       // u at the rule points
    std::function<std::vector<double>(const BallRule&)> grad_m;       // |grad^m u| at the rule points
};

/// A 1D field given by u(x, k) = k-th derivative, probed on balls around x0
/// with Gauss panels no wider than `panel`.
inline ProbeField probe_field_1d(double eps, int m, double x0, std::function<double(double, int)> u, double panel) {
    ProbeField f;
    f.eps = eps;
    f.m = m;
    f.ball = [x0, panel](double r) { return ball_rule_1d(x0, r, panel); };
    f.values = [u](const BallRule& b) {
        std::vector<double> v(b.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = u(b.points[k], 0);
        return v;
    };
    f.grad_m = [u, m](const BallRule& b) {
        std::vector<double> v(b.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::abs(u(b.points[k], m));
        return v;
    };
    return f;
}

struct ExcessRow {
    double eps = 0.0, r = 0.0, delta = 0.0;
    double H_r = 0.0, H_delta_r = 0.0, I_2r = 0.0, h_r = 0.0;
    bool pass = false;
};

struct ExcessReport {
    std::vector<ExcessRow> rows;
    std::vector<double> C_eps;  // per family member
    double C_hat = 0.0;         // max over the family
    std::vector<std::string> notices;
};

/// Dyadic radii 2^{-j} in [lo, hi].
inline std::vector<double> dyadic_radii(double lo, double hi) {
    std::vector<double> r;
    for (double t = 0.5; t >= lo * (1.0 - 1e-12); t *= 0.5)
        if (t <= hi * (1.0 + 1e-12)) r.push_back(t);
    return r;
}

/// H(delta r) <= H(r)/2 + C sqrt(eps/r) I(2r) for dyadic r in [eps, 1/2] and
/// delta in `deltas`, with C the smallest constant that certifies every member.
inline ExcessReport certify_excess_decay(const std::vector<ProbeField>& family, const std::vector<double>& deltas, const std::vector<double>& radii = {}) {
    ExcessReport rep;
    std::vector<double> floors;
    for (const auto& u : family) {
        double C = 0.0;
        const auto rs = radii.empty() ? dyadic_radii(u.eps, 0.5) : radii;
        for (double r : rs) {
            if (r < u.eps * (1.0 - 1e-12) || r > 0.5 * (1.0 + 1e-12)) {
                rep.notices.push_back("skipped r outside [eps, 1/2]");
                continue;
            }
            const auto Br = u.ball(r);
            const auto Hr = excess_H(Br, u.values(Br), u.m);
            const auto B2r = u.ball(2.0 * r);
            const auto v2 = u.values(B2r);
            const double I2 = excess_I(B2r, v2, u.m).value;
            // round-off level of the fits: relative to the data on B_2r
            double rms = 0.0;
            for (std::size_t k = 0; k < v2.size(); ++k) rms += B2r.weights[k] * v2[k] * v2[k];
            const double floor = 1e-12 * std::pow(r, -u.m) * std::sqrt(rms);
            const double hr = coeff_h(Hr.fit, r, u.m);
            for (double d : deltas) {
                const auto Bd = u.ball(d * r);
                const double Hd = excess_H(Bd, u.values(Bd), u.m).value;
                const double gap = Hd - 0.5 * Hr.value;
                if (gap > floor) C = std::max(C, I2 > 0.0 ? gap / (std::sqrt(u.eps / r) * I2) : std::numeric_limits<double>::infinity());
                rep.rows.push_back({u.eps, r, d, Hr.value, Hd, I2, hr, false});
                floors.push_back(floor);
            }
        }
        rep.C_eps.push_back(C);
        rep.C_hat = std::max(rep.C_hat, C);
    }
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        auto& row = rep.rows[k];
        const double rhs = 0.5 * row.H_r + rep.C_hat * std::sqrt(row.eps / row.r) * row.I_2r;
        row.pass = std::isfinite(rep.C_hat) && row.H_delta_r <= rhs * (1.0 + 1e-12) + floors[k];
    }
    return rep;
}

/// Pure halving G(delta r) <= G(r)/2 for constant-coefficient solutions.
inline std::vector<ExcessRow> certify_halving(const ProbeField& u0, double delta, const std::vector<double>& radii) {
    std::vector<ExcessRow> rows;
    for (double r : radii) {
        const auto Br = u0.ball(r);
        const auto G = excess_G(Br, u0.values(Br), u0.m);
        const auto Bd = u0.ball(delta * r);
        const double Gd = excess_G(Bd, u0.values(Bd), u0.m).value;
        rows.push_back({u0.eps, r, delta, G.value, Gd, 0.0, coeff_h(G.fit, r, u0.m), Gd <= 0.5 * G.value * (1.0 + 1e-12) + 1e-300});
    }
    return rows;
}

struct LipschitzProbe {
    std::vector<double> radii, ratios;
    double sup = 0.0;
};

/// (avg_{B_r} |grad^m u|^2)^{1/2} / (R^{-m} (avg_{B_R} |u|^2)^{1/2}) over r in `radii`.
inline LipschitzProbe lipschitz_probe(const ProbeField& u, const std::vector<double>& radii, double R = 1.0) {
    for (double r : radii)
        if (r < u.eps * (1.0 - 1e-12) || r > 0.5 * R * (1.0 + 1e-12)) throw std::invalid_argument("lipschitz_probe: radius outside [eps, R/2]");
    const auto BR = u.ball(R);
    const auto vR = u.values(BR);
    double den = 0.0;
    for (std::size_t k = 0; k < vR.size(); ++k) den += BR.weights[k] * vR[k] * vR[k];
    den = std::pow(R, -u.m) * std::sqrt(den);
    LipschitzProbe p;
    for (double r : radii) {
        const auto B = u.ball(r);
        const auto g = u.grad_m(B);
        double num = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) num += B.weights[k] * g[k] * g[k];
        num = std::sqrt(num);
        const double ratio = num == 0.0 ? 0.0 : num / den;
        p.radii.push_back(r);
        p.ratios.push_back(ratio);
        p.sup = std::max(p.sup, ratio);
    }
    return p;
}

/// (avg_B |grad^m u|^p)^{1/p} / (avg_{2B} |grad^m u|^2)^{1/2}; 0 when both vanish.
inline double reverse_holder_probe(const ProbeField& u, double r, double p) {
    if (!(p > 2.0)) throw std::invalid_argument("reverse_holder_probe: p > 2 required");
    const auto B = u.ball(r);
    const auto B2 = u.ball(2.0 * r);
    const auto g = u.grad_m(B);
    const auto g2 = u.grad_m(B2);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) num += B.weights[k] * std::pow(std::abs(g[k]), p);
    for (std::size_t k = 0; k < g2.size(); ++k) den += B2.weights[k] * g2[k] * g2[k];
    num = std::pow(num, 1.0 / p);
    den = std::sqrt(den);
    if (num == 0.0 && den == 0.0) return 0.0;
    return num / den;
}

}  // namespace hohom
