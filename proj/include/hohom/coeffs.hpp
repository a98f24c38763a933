#pragma once

#include "hohom/grid.hpp"
#include "hohom/multiindex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hohom {

/// Description of a coefficient preset. `kind` is one of constant, cosine_1d,
/// laminate_2d, smoothed_checkerboard_2d, tabulated.
struct CoefficientPreset {
    std::string kind = "constant";
    int d = 1;
    int m = 1;
    int n = 1;
    double c = 1.0;         // constant
    double a0 = 2.0;        // cosine_1d, laminate_2d
    double a1 = 1.0;
    double contrast = 4.0;  // smoothed_checkerboard_2d
    double width = 0.1;
    double skew = 0.0;      // antisymmetric part in the (alpha, beta) slots, d=2 m=1 only
    // tabulated: samples laid out like CoefficientField::data(), on a grid of
    // `table_points` per axis, with the claimed ellipticity constant.
    std::vector<double> table;
    int table_points = 0;
    double table_mu = 0.0;
};

/// Sampled periodic tensor A^{ab}_{ij}(y) on the unit torus. Slots a, b run
/// over enumerate(d, m); storage is [a][b][i][j][node].
class CoefficientField {
public:
    CoefficientField(int d, int m, int n, int points, double mu)
        : d_(d), m_(m), n_(n), grid_(Grid::torus(d, points)), mu_(mu), indices_(enumerate(d, m)),
          data_(indices_.size() * indices_.size() * static_cast<std::size_t>(n * n) * grid_.size(), 0.0) {}

    int dim() const { return d_; }
    int order() const { return m_; }
    int components() const { return n_; }
    int points() const { return grid_.points; }
    const Grid& grid() const { return grid_; }
    double mu() const { return mu_; }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    std::size_t slots() const { return indices_.size(); }

    std::size_t offset(std::size_t a, std::size_t b, int i, int j) const {
        const std::size_t M = slots();
        return (((a * M + b) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)) * grid_.size();
    }
    std::span<double> entry(std::size_t a, std::size_t b, int i, int j) {
        return std::span<double>(data_).subspan(offset(a, b, i, j), grid_.size());
    }
    std::span<const double> entry(std::size_t a, std::size_t b, int i, int j) const {
        return std::span<const double>(data_).subspan(offset(a, b, i, j), grid_.size());
    }
    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    double max_abs() const {
        double mx = 0.0;
        for (double v : data_) mx = std::max(mx, std::abs(v));
        return mx;
    }
    /// Exact check of the bound max |A| <= 1/mu over all samples.
    bool satisfies_bound() const { return max_abs() <= 1.0 / mu_ * (1.0 + 1e-14); }

    /// A*^{ab}_{ij} = A^{ba}_{ji}.
    CoefficientField adjoint() const {
        CoefficientField out(d_, m_, n_, grid_.points, mu_);
        for (std::size_t a = 0; a < slots(); ++a)
            for (std::size_t b = 0; b < slots(); ++b)
                for (int i = 0; i < n_; ++i)
                    for (int j = 0; j < n_; ++j) {
                        auto src = entry(b, a, j, i);
                        std::copy(src.begin(), src.end(), out.entry(a, b, i, j).begin());
                    }
        return out;
    }
    bool is_symmetric() const {
        const auto adj = adjoint();
        return std::equal(data_.begin(), data_.end(), adj.data_.begin());
    }
    bool is_constant() const {
        for (std::size_t a = 0; a < slots(); ++a)
            for (std::size_t b = 0; b < slots(); ++b)
                for (int i = 0; i < n_; ++i)
                    for (int j = 0; j < n_; ++j) {
                        auto e = entry(a, b, i, j);
                        if (std::any_of(e.begin(), e.end(), [&](double v) { return v != e[0]; })) return false;
                    }
        return true;
    }

private:
    int d_, m_, n_;
    Grid grid_;
    double mu_;
    std::vector<MultiIndex> indices_;
    std::vector<double> data_;
};

namespace detail {

inline double scalar_profile(const CoefficientPreset& p, std::span<const double> y) {
    constexpr double tau = 2.0 * std::numbers::pi;
    if (p.kind == "constant") return p.c;
    if (p.kind == "cosine_1d" || p.kind == "laminate_2d") return p.a0 + p.a1 * std::cos(tau * y[0]);
    if (p.kind == "smoothed_checkerboard_2d") {
        const double s = std::sin(tau * y[0]) * std::sin(tau * y[1]);
        return 1.0 + (p.contrast - 1.0) * 0.5 * (1.0 + std::tanh(s / p.width));
    }
    throw std::invalid_argument("unknown coefficient preset: " + p.kind);
}

inline double skew_profile(const CoefficientPreset& p, std::span<const double> y) {
    return p.skew * (1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * y[1]));
}

inline void validate(const CoefficientPreset& p) {
    if (p.d < 1 || p.m < 1 || p.n < 1) throw std::invalid_argument("preset: d, m, n must be >= 1");
    if (p.kind == "constant") {
        if (!(p.c > 0.0)) throw std::invalid_argument("preset constant: c must be positive");
    } else if (p.kind == "cosine_1d") {
        if (p.d != 1) throw std::invalid_argument("preset cosine_1d: d must be 1");
        if (!(p.a0 - std::abs(p.a1) > 0.0)) throw std::invalid_argument("preset cosine_1d: a0 - |a1| must be positive");
    } else if (p.kind == "laminate_2d") {
        if (p.d != 2) throw std::invalid_argument("preset laminate_2d: d must be 2");
        if (!(p.a0 - std::abs(p.a1) > 0.0)) throw std::invalid_argument("preset laminate_2d: a0 - |a1| must be positive");
    } else if (p.kind == "smoothed_checkerboard_2d") {
        if (p.d != 2) throw std::invalid_argument("preset smoothed_checkerboard_2d: d must be 2");
        if (!(p.contrast > 0.0) || !(p.width > 0.0)) throw std::invalid_argument("preset smoothed_checkerboard_2d: contrast and width must be positive");
    } else if (p.kind == "tabulated") {
        if (!(p.table_mu > 0.0)) throw std::invalid_argument("preset tabulated: mu must be positive");
    } else {
        throw std::invalid_argument("unknown coefficient preset: " + p.kind);
    }
    if (p.skew != 0.0 && (p.d != 2 || p.m != 1)) throw std::invalid_argument("preset: skew part requires d = 2, m = 1");
}

}  // namespace detail

/// Sample a preset at the nodes y_k = k/N of the unit torus.
inline CoefficientField sample(const CoefficientPreset& p, int N) {
    detail::validate(p);
    if (N < 4 || N % 2 != 0) throw std::invalid_argument("sample: N must be even and >= 4");

    if (p.kind == "tabulated") {
        if (p.table_points != N) throw std::invalid_argument("sample: tabulated preset resolution differs from N");
        CoefficientField out(p.d, p.m, p.n, N, p.table_mu);
        if (p.table.size() != out.data().size()) throw std::invalid_argument("sample: tabulated preset has wrong size");
        std::copy(p.table.begin(), p.table.end(), out.data().begin());
        if (!out.satisfies_bound()) throw std::invalid_argument("sample: tabulated samples violate max|A| <= 1/mu");
        return out;
    }

    const Grid g = Grid::torus(p.d, N);
    std::vector<double> a(g.size()), s(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto y = g.coordinates(k);
        a[k] = detail::scalar_profile(p, y);
        if (p.skew != 0.0) s[k] = detail::skew_profile(p, y);
    }
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    if (!(*amin > 0.0)) throw std::invalid_argument("sample: coefficient is not positive on the grid");
    double smax = 0.0;
    for (double v : s) smax = std::max(smax, std::abs(v));
    const double mu = std::min(*amin, 1.0 / std::max(*amax, smax));

    CoefficientField out(p.d, p.m, p.n, N, mu);
    const std::size_t M = out.slots();
    for (std::size_t ab = 0; ab < M; ++ab)
        for (int i = 0; i < p.n; ++i) std::copy(a.begin(), a.end(), out.entry(ab, ab, i, i).begin());
    if (p.skew != 0.0) {
        for (int i = 0; i < p.n; ++i) {
            auto e01 = out.entry(0, 1, i, i);
            auto e10 = out.entry(1, 0, i, i);
            for (std::size_t k = 0; k < g.size(); ++k) {
                e01[k] = s[k];
                e10[k] = -s[k];
            }
        }
    }
    return out;
}

/// Scalar profile y -> a(y) of a diagonal preset, for 1D quadrature oracles.
inline auto scalar_profile(const CoefficientPreset& p) {
    detail::validate(p);
    if (p.kind == "tabulated") throw std::invalid_argument("scalar_profile: tabulated presets have no closed form");
    return [p](double y) {
        const double yy[2] = {y, 0.0};
        return detail::scalar_profile(p, yy);
    };
}

struct CoercivityEstimate {
    double mu_hat = std::numeric_limits<double>::infinity();
    int evaluated = 0;
    int skipped = 0;
};

namespace detail {

// Rayleigh quotient sum <D^a phi_i A^{ab}_{ij} D^b phi_j> / sum ||D^a phi||^2;
// returns NaN for degenerate fields.
inline double rayleigh_quotient(const CoefficientField& A, const GridFunction& phi) {
    const Grid& g = A.grid();
    const std::size_t M = A.slots();
    const int n = A.components();
    std::vector<std::vector<double>> D(M * static_cast<std::size_t>(n));
    for (std::size_t a = 0; a < M; ++a)
        for (int i = 0; i < n; ++i) D[a * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = spectral::derivative(g, phi.component(i), A.indices()[a]);
    double num = 0.0, den = 0.0;
    for (const auto& v : D)
        for (double x : v) den += x * x;
    if (!(den > 1e-24)) return std::numeric_limits<double>::quiet_NaN();
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = 0; b < M; ++b)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const auto e = A.entry(a, b, i, j);
                    const auto& u = D[a * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
                    const auto& v = D[b * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                    for (std::size_t k = 0; k < e.size(); ++k) num += u[k] * e[k] * v[k];
                }
    return num / den;
}

inline double periodic_offset(double x, double c) {
    double t = x - c;
    return t - std::round(t);
}

}  // namespace detail

/// Falsification probe for coercivity: the minimum Rayleigh quotient over all
/// single Fourier modes up to a small cutoff plus `trials` random fields
/// (band-limited noise and localized wave packets). The result bounds the true
/// coercivity constant from above; a non-positive value proves coercivity fails.
/// Trial t depends only on (seed, t), so the estimate is nonincreasing in trials.
inline CoercivityEstimate coercivity_probe(const CoefficientField& A, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("coercivity_probe: trials must be >= 1");
    const Grid& g = A.grid();
    const int n = A.components();
    const int N = g.points;
    CoercivityEstimate est;
    auto consider = [&](const GridFunction& phi) {
        const double q = detail::rayleigh_quotient(A, phi);
        if (std::isnan(q)) {
            ++est.skipped;
            return;
        }
        ++est.evaluated;
        est.mu_hat = std::min(est.mu_hat, q);
    };

    // Single modes cos/sin(2 pi xi.y) e_i with 0 < |xi|_inf <= cutoff.
    const int cutoff = std::min(4, N / 4);
    const Grid modes = Grid::torus(g.dim, 2 * cutoff + 1);
    for (std::size_t f = 0; f < modes.size(); ++f) {
        auto idx = modes.unflatten(f);
        bool zero = true;
        for (auto& v : idx) {
            v -= cutoff;
            if (v != 0) zero = false;
        }
        if (zero) continue;
        for (int phase = 0; phase < 2; ++phase)
            for (int i = 0; i < n; ++i) {
                GridFunction phi(g, n);
                auto c = phi.component(i);
                for (std::size_t k = 0; k < g.size(); ++k) {
                    const auto y = g.coordinates(k);
                    double arg = 0.0;
                    for (int ax = 0; ax < g.dim; ++ax) arg += idx[static_cast<std::size_t>(ax)] * y[static_cast<std::size_t>(ax)];
                    arg *= 2.0 * std::numbers::pi;
                    c[k] = phase == 0 ? std::cos(arg) : std::sin(arg);
                }
                consider(phi);
            }
    }

    const double h = g.spacing();
    for (int t = 0; t < trials; ++t) {
        std::seed_seq sq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(sq);
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unif;
        std::vector<double> dir(static_cast<std::size_t>(n));
        double nrm = 0.0;
        for (auto& v : dir) {
            v = gauss(rng);
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        for (auto& v : dir) v /= nrm;

        GridFunction phi(g, n);
        if (t % 2 == 0) {
            // band-limited random field
            const int kmax = 1 + static_cast<int>(unif(rng) * std::max(1, N / 4));
            std::vector<std::complex<double>> spec(g.size(), 0.0);
            spectral::for_each_index(g, [&](std::size_t flat, std::span<const int> idx) {
                double r2 = 0.0;
                for (int v : idx) {
                    const int f = spectral::frequency(v, N);
                    if (std::abs(f) > kmax) return;
                    r2 += f * f;
                }
                spec[flat] = std::complex<double>(gauss(rng), gauss(rng)) / (1.0 + r2);
            });
            const auto field = spectral::inverse_real(g, std::move(spec));
            for (int i = 0; i < n; ++i) {
                auto c = phi.component(i);
                for (std::size_t k = 0; k < g.size(); ++k) c[k] = dir[static_cast<std::size_t>(i)] * field[k];
            }
        } else {
            // localized wave packet: width log-uniform in [0.7h, 1/8]
            const double sigma = 0.7 * h * std::exp(unif(rng) * std::log(0.125 / (0.7 * h)));
            std::vector<double> center(static_cast<std::size_t>(g.dim)), carrier(static_cast<std::size_t>(g.dim));
            for (auto& v : center) v = unif(rng);
            for (auto& v : carrier) v = std::floor(unif(rng) * (N / 4 + 1));
            const double phase = 2.0 * std::numbers::pi * unif(rng);
            for (std::size_t k = 0; k < g.size(); ++k) {
                const auto y = g.coordinates(k);
                double r2 = 0.0, arg = phase;
                for (int ax = 0; ax < g.dim; ++ax) {
                    const double o = detail::periodic_offset(y[static_cast<std::size_t>(ax)], center[static_cast<std::size_t>(ax)]);
                    r2 += o * o;
                    arg += 2.0 * std::numbers::pi * carrier[static_cast<std::size_t>(ax)] * o;
                }
                const double v = std::exp(-0.5 * r2 / (sigma * sigma)) * std::cos(arg);
                for (int i = 0; i < n; ++i) phi.component(i)[k] = dir[static_cast<std::size_t>(i)] * v;
            }
        }
        consider(phi);
    }
    if (est.evaluated == 0) throw std::runtime_error("coercivity_probe: every test field was degenerate");
    return est;
}

}  // namespace hohom
