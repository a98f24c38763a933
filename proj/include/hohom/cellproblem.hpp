#pragma once

#include "hohom/coeffs.hpp"
#include "hohom/errors.hpp"
#include "hohom/grid.hpp"
#include "hohom/torus_operator.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace hohom {

struct CellOptions {
    double tol = 1e-9;
    int max_iter = 0;  // 0 selects 10 * N^{d/2}
    bool dealias = false;
};

/// Outputs of the cell stage. Index conventions (M = number of order-m
/// multi-indices, n = components):
///   chi[g*n + j]          n-component field, component k is chi^g_{kj}
///   A_bar[((a*M+b)*n+i)*n+j]
///   B[a*M + b]            n*n-component field, component i*n+j
///   dualB[(g*M+a)*M + b]  n*n-component field, component i*n+j
struct CorrectorSet {
    int d = 0, m = 0, n = 0, N = 0;
    std::vector<MultiIndex> indices;
    std::vector<GridFunction> chi;
    std::vector<GridFunction> chi_star;
    std::vector<double> A_bar;
    std::vector<GridFunction> B;
    std::vector<GridFunction> dualB;

    struct Residuals {
        std::vector<double> chi;       // per (g, j)
        std::vector<double> chi_star;  // per (g, j)
        std::vector<int> iterations;   // chi then chi_star
        double flux_identity = 0.0;    // max relative |P sum_a D^a B^{ab}|
        double dual_identity = 0.0;    // max relative |P(sum_g D^g dualB^{gab} - B^{ab})|
    } residuals;

    std::size_t slots() const { return indices.size(); }
    double a_bar(std::size_t a, std::size_t b, int i, int j) const {
        const std::size_t M = slots();
        return A_bar[((a * M + b) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    }
    const GridFunction& corrector(std::size_t g, int j) const { return chi[g * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]; }
    const GridFunction& flux(std::size_t a, std::size_t b) const { return B[a * slots() + b]; }
    const GridFunction& dual(std::size_t g, std::size_t a, std::size_t b) const { return dualB[(g * slots() + a) * slots() + b]; }
};

namespace detail {

inline double spectrum_norm(const Spectrum& s) { return std::sqrt(TorusOperator::dot(s, s)); }

// Right-hand side of the cell problem for (g, j), multiplied by (-1)^m so the
// operator is positive: -(-1)^m sum_a D^a A^{ag}_{.j}.
inline Spectrum corrector_rhs(const CoefficientField& A, const TorusOperator& op, std::size_t g, int j) {
    const std::size_t P = A.grid().size();
    const int n = A.components();
    const double sign = A.order() % 2 == 0 ? -1.0 : 1.0;
    Spectrum rhs(op.size(), 0.0);
    for (std::size_t a = 0; a < A.slots(); ++a)
        for (int i = 0; i < n; ++i) {
            const auto c = spectral::forward(A.grid(), A.entry(a, g, i, j));
            for (std::size_t k = 0; k < P; ++k) rhs[static_cast<std::size_t>(i) * P + k] += sign * op.symbol(a)[k] * c[k];
        }
    op.project(rhs);
    return rhs;
}

}  // namespace detail

/// Corrector chi^g_j: zero-mean periodic solution of the cell problem with
/// macroscopic derivative index g (position in enumerate(d, m)) and column j.
inline GridFunction solve_corrector(const CoefficientField& A, std::size_t g, int j, const CellOptions& opt, PcgReport* report = nullptr) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_corrector: tol must be positive");
    if (g >= A.slots() || j < 0 || j >= A.components()) throw std::invalid_argument("solve_corrector: index out of range");
    const TorusOperator op(A, opt.dealias);
    const int max_iter = opt.max_iter > 0 ? opt.max_iter : default_max_iter(A.grid());
    PcgReport rep;
    const auto rhs = detail::corrector_rhs(A, op, g, j);
    std::string label = "corrector (gamma=" + std::to_string(g) + ", j=" + std::to_string(j) + ")";
    auto sol = op.solve(rhs, opt.tol, max_iter, rep, label);
    if (report != nullptr) *report = rep;
    GridFunction chi = op.to_field(sol);
    chi.zero_mean = true;
    return chi;
}

/// D^g chi^b_{lj} for every (g, b, l, j); index ((g*M+b)*n+l)*n+j.
inline std::vector<std::vector<double>> corrector_gradients(const CoefficientField& A, const std::vector<GridFunction>& chi) {
    const std::size_t M = A.slots();
    const int n = A.components();
    std::vector<std::vector<double>> out(M * M * static_cast<std::size_t>(n * n));
    for (std::size_t b = 0; b < M; ++b)
        for (int j = 0; j < n; ++j) {
            const auto& field = chi[b * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
            for (int l = 0; l < n; ++l) {
                const auto c = spectral::forward(A.grid(), field.component(l));
                for (std::size_t g = 0; g < M; ++g) {
                    auto cc = c;
                    spectral::apply_derivative(A.grid(), A.indices()[g], cc);
                    out[((g * M + b) * static_cast<std::size_t>(n) + static_cast<std::size_t>(l)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] =
                        spectral::inverse_real(A.grid(), std::move(cc));
                }
            }
        }
    return out;
}

namespace detail {

// Pointwise A^{ab}_{ij} + sum_{g,l} A^{ag}_{il} D^g chi^b_{lj}.
inline std::vector<double> flux_density(const CoefficientField& A, const std::vector<std::vector<double>>& grads, std::size_t a, std::size_t b, int i, int j) {
    const std::size_t M = A.slots();
    const int n = A.components();
    const auto base = A.entry(a, b, i, j);
    std::vector<double> out(base.begin(), base.end());
    for (std::size_t g = 0; g < M; ++g)
        for (int l = 0; l < n; ++l) {
            const auto e = A.entry(a, g, i, l);
            const auto& dchi = grads[((g * M + b) * static_cast<std::size_t>(n) + static_cast<std::size_t>(l)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < out.size(); ++k) out[k] += e[k] * dchi[k];
        }
    return out;
}

}  // namespace detail

/// Homogenized tensor: grid average of A^{ab}_{ij} + sum_g A^{ag}_{il} D^g chi^b_{lj}.
inline std::vector<double> homogenized_tensor(const CoefficientField& A, const std::vector<GridFunction>& chi) {
    const std::size_t M = A.slots();
    const int n = A.components();
    if (chi.size() != M * static_cast<std::size_t>(n)) throw std::invalid_argument("homogenized_tensor: wrong number of correctors");
    for (const auto& c : chi)
        if (!(c.grid() == A.grid())) throw std::invalid_argument("homogenized_tensor: corrector grid differs from coefficient grid");
    const auto grads = corrector_gradients(A, chi);
    std::vector<double> out(M * M * static_cast<std::size_t>(n * n));
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = 0; b < M; ++b)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const auto dens = detail::flux_density(A, grads, a, b, i, j);
                    double s = 0.0;
                    for (double v : dens) s += v;
                    out[((a * M + b) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = s / static_cast<double>(dens.size());
                }
    return out;
}

/// Flux fields B^{ab} = A^{ab} + A^{ag} D^g chi^b - A_bar^{ab}; each has zero grid mean.
inline std::vector<GridFunction> flux_field(const CoefficientField& A, const std::vector<GridFunction>& chi, const std::vector<double>& A_bar) {
    const std::size_t M = A.slots();
    const int n = A.components();
    if (A_bar.size() != M * M * static_cast<std::size_t>(n * n)) throw std::invalid_argument("flux_field: A_bar has wrong size");
    const auto grads = corrector_gradients(A, chi);
    std::vector<GridFunction> out;
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = 0; b < M; ++b) {
            GridFunction f(A.grid(), n * n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    auto dens = detail::flux_density(A, grads, a, b, i, j);
                    const double bar = A_bar[((a * M + b) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                    auto c = f.component(i * n + j);
                    for (std::size_t k = 0; k < dens.size(); ++k) c[k] = dens[k] - bar;
                }
            f.zero_mean = true;
            out.push_back(std::move(f));
        }
    return out;
}

/// Potentials b^{ab} with sum_g D^g D^g b^{ab} = B^{ab}, solved exactly by
/// symbol division on the discrete solution space; zero mean.
inline std::vector<GridFunction> dual_potentials(const std::vector<GridFunction>& B, const std::vector<MultiIndex>& indices) {
    if (B.empty()) return {};
    const Grid& g = B.front().grid();
    const std::size_t P = g.size();
    const auto mask = spectral::solution_mask(g, false);
    std::vector<std::vector<std::complex<double>>> syms;
    for (const auto& gamma : indices) syms.push_back(spectral::derivative_symbols(g, gamma));
    std::vector<std::complex<double>> total(P, 0.0);
    for (const auto& s : syms)
        for (std::size_t k = 0; k < P; ++k) total[k] += s[k] * s[k];

    std::vector<GridFunction> out;
    for (const auto& f : B) {
        const double scale = std::max(f.max_abs(), 1e-300);
        for (int c = 0; c < f.components(); ++c) {
            if (std::abs(f.mean(c)) > 1e-10 * std::max(scale, 1.0)) throw std::invalid_argument("dual_correctors: flux field has nonzero mean");
        }
        GridFunction b(g, f.components());
        for (int c = 0; c < f.components(); ++c) {
            auto spec = spectral::forward(g, f.component(c));
            for (std::size_t k = 0; k < P; ++k) spec[k] = (mask[k] && std::abs(total[k]) > 0.0) ? spec[k] / total[k] : 0.0;
            const auto v = spectral::inverse_real(g, std::move(spec));
            std::copy(v.begin(), v.end(), b.component(c).begin());
        }
        b.zero_mean = true;
        out.push_back(std::move(b));
    }
    return out;
}

/// dualB^{gab} = D^g b^{ab} - D^a b^{gb}. Antisymmetric in (g, a) by construction.
inline std::vector<GridFunction> dual_from_potentials(const std::vector<GridFunction>& b, const std::vector<MultiIndex>& indices) {
    const std::size_t M = indices.size();
    if (b.size() != M * M) throw std::invalid_argument("dual_from_potentials: expected M*M potentials");
    // D^g b^{ab} for all (g, a, b)
    std::vector<GridFunction> Db;
    Db.reserve(M * M * M);
    for (std::size_t g = 0; g < M; ++g)
        for (std::size_t ab = 0; ab < M * M; ++ab) Db.push_back(spectral::derivative(b[ab], indices[g]));
    auto D = [&](std::size_t g, std::size_t a, std::size_t bb) -> const GridFunction& { return Db[g * M * M + a * M + bb]; };
    std::vector<GridFunction> out;
    out.reserve(M * M * M);
    for (std::size_t g = 0; g < M; ++g)
        for (std::size_t a = 0; a < M; ++a)
            for (std::size_t bb = 0; bb < M; ++bb) {
                if (g == a) {
                    out.emplace_back(b[0].grid(), b[0].components());
                } else if (g > a) {
                    // exact negation of the already computed (a, g) entry
                    GridFunction f = out[(a * M + g) * M + bb];
                    f *= -1.0;
                    out.push_back(std::move(f));
                } else {
                    out.push_back(D(g, a, bb) - D(a, g, bb));
                }
            }
    return out;
}

/// Maximum relative residual of P(sum_g D^g dualB^{gab} - B^{ab}) over all
/// slots and components, against the larger of ||B^{ab}|| and `scale` (as a
/// constant field). Zero flux fields with zero scale use the absolute residual.
inline double dual_identity_residual(const std::vector<GridFunction>& B, const std::vector<GridFunction>& dualB, const std::vector<MultiIndex>& indices, double scale = 0.0) {
    const std::size_t M = indices.size();
    if (B.empty()) return 0.0;
    const Grid& g = B.front().grid();
    const auto mask = spectral::solution_mask(g, false);
    double worst = 0.0;
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t bb = 0; bb < M; ++bb) {
            const auto& Bf = B[a * M + bb];
            for (int c = 0; c < Bf.components(); ++c) {
                auto target = spectral::forward(g, Bf.component(c));
                std::vector<std::complex<double>> acc(g.size(), 0.0);
                for (std::size_t gg = 0; gg < M; ++gg) {
                    auto s = spectral::forward(g, dualB[(gg * M + a) * M + bb].component(c));
                    spectral::apply_derivative(g, indices[gg], s);
                    for (std::size_t k = 0; k < s.size(); ++k) acc[k] += s[k];
                }
                double num = 0.0, den = 0.0;
                for (std::size_t k = 0; k < acc.size(); ++k) {
                    den += std::norm(target[k]);
                    if (mask[k]) num += std::norm(acc[k] - target[k]);
                }
                den = std::max(den, scale * scale * static_cast<double>(g.size()) * static_cast<double>(g.size()));
                const double r = den > 1e-300 ? std::sqrt(num / den) : std::sqrt(num / static_cast<double>(g.size()));
                worst = std::max(worst, r);
            }
        }
    return worst;
}

/// Dual correctors for zero-mean flux fields B.
inline std::vector<GridFunction> dual_correctors(const std::vector<GridFunction>& B, const std::vector<MultiIndex>& indices) {
    return dual_from_potentials(dual_potentials(B, indices), indices);
}

/// Maximum relative size of P sum_a D^a B^{ab} in H^{-m}, the norm the cell
/// solver controls, measured against the cell right-hand side (absolute when
/// that vanishes).
inline double flux_identity_residual(const CoefficientField& A, const std::vector<GridFunction>& B) {
    const std::size_t M = A.slots();
    const int n = A.components();
    const Grid& g = A.grid();
    const auto mask = spectral::solution_mask(g, false);
    std::vector<double> weight(g.size(), 0.0);
    spectral::for_each_index(g, [&](std::size_t flat, std::span<const int> idx) {
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) k2 += std::pow(2.0 * std::numbers::pi * spectral::frequency(idx[static_cast<std::size_t>(a)], g.points) / g.length, 2);
        if (k2 > 0.0) weight[flat] = std::pow(k2, -A.order());
    });
    double worst = 0.0;
    for (std::size_t bb = 0; bb < M; ++bb)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                std::vector<std::complex<double>> acc(g.size(), 0.0), ref(g.size(), 0.0);
                for (std::size_t a = 0; a < M; ++a) {
                    auto s = spectral::forward(g, B[a * M + bb].component(i * n + j));
                    spectral::apply_derivative(g, A.indices()[a], s);
                    auto r = spectral::forward(g, A.entry(a, bb, i, j));
                    spectral::apply_derivative(g, A.indices()[a], r);
                    for (std::size_t k = 0; k < s.size(); ++k) {
                        acc[k] += s[k];
                        ref[k] += r[k];
                    }
                }
                double num = 0.0, den = 0.0;
                for (std::size_t k = 0; k < acc.size(); ++k) {
                    if (!mask[k]) continue;
                    num += weight[k] * std::norm(acc[k]);
                    den += weight[k] * std::norm(ref[k]);
                }
                worst = std::max(worst, den > 1e-300 ? std::sqrt(num / den) : std::sqrt(num) / static_cast<double>(g.size()));
            }
    return worst;
}

/// Recomputes the flux and dual identity residuals of a corrector set for A.
inline void measure_identities(const CoefficientField& A, CorrectorSet& cs) {
    cs.residuals.flux_identity = flux_identity_residual(A, cs.B);
    double scale = 0.0;
    for (double v : cs.A_bar) scale = std::max(scale, std::abs(v));
    cs.residuals.dual_identity = dual_identity_residual(cs.B, cs.dualB, cs.indices, scale);
}

/// Full cell stage: correctors for A and its adjoint, homogenized tensor, flux
/// and dual correctors.
inline CorrectorSet solve_all(const CoefficientField& A, const CellOptions& opt = {}) {
    CorrectorSet cs;
    cs.d = A.dim();
    cs.m = A.order();
    cs.n = A.components();
    cs.N = A.points();
    cs.indices = A.indices();
    const std::size_t M = A.slots();
    const CoefficientField Astar = A.adjoint();
    const bool symmetric = A.is_symmetric();
    for (std::size_t g = 0; g < M; ++g)
        for (int j = 0; j < cs.n; ++j) {
            PcgReport rep;
            cs.chi.push_back(solve_corrector(A, g, j, opt, &rep));
            cs.residuals.chi.push_back(rep.relative_residual);
            cs.residuals.iterations.push_back(rep.iterations);
        }
    for (std::size_t g = 0; g < M; ++g)
        for (int j = 0; j < cs.n; ++j) {
            if (symmetric) {
                cs.chi_star.push_back(cs.chi[g * static_cast<std::size_t>(cs.n) + static_cast<std::size_t>(j)]);
                cs.residuals.chi_star.push_back(cs.residuals.chi[g * static_cast<std::size_t>(cs.n) + static_cast<std::size_t>(j)]);
                cs.residuals.iterations.push_back(0);
                continue;
            }
            PcgReport rep;
            cs.chi_star.push_back(solve_corrector(Astar, g, j, opt, &rep));
            cs.residuals.chi_star.push_back(rep.relative_residual);
            cs.residuals.iterations.push_back(rep.iterations);
        }
    cs.A_bar = homogenized_tensor(A, cs.chi);
    cs.B = flux_field(A, cs.chi, cs.A_bar);
    cs.dualB = dual_correctors(cs.B, cs.indices);
    measure_identities(A, cs);
    return cs;
}

/// Cell energy <(D chi e + e) . A (D chi e + e)> for constant coefficients
/// E[g*n+j] multiplying (x^g/g!) e_j + chi^g_j.
inline double cell_energy(const CoefficientField& A, const std::vector<GridFunction>& chi, const std::vector<double>& E) {
    const std::size_t M = A.slots();
    const int n = A.components();
    const auto grads = corrector_gradients(A, chi);
    const std::size_t P = A.grid().size();
    // D^a v_i for v = sum E^g_j (P^g e_j + chi^g_j)
    std::vector<std::vector<double>> Dv(M * static_cast<std::size_t>(n), std::vector<double>(P, 0.0));
    for (std::size_t a = 0; a < M; ++a)
        for (int i = 0; i < n; ++i) {
            auto& dv = Dv[a * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
            for (std::size_t g = 0; g < M; ++g)
                for (int j = 0; j < n; ++j) {
                    const double e = E[g * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                    const auto& dchi = grads[((a * M + g) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                    const double delta = (a == g && i == j) ? 1.0 : 0.0;
                    for (std::size_t k = 0; k < P; ++k) dv[k] += e * (delta + dchi[k]);
                }
        }
    double s = 0.0;
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = 0; b < M; ++b)
            for (int i = 0; i < n; ++i)
                for (int k2 = 0; k2 < n; ++k2) {
                    const auto e = A.entry(a, b, i, k2);
                    const auto& u = Dv[a * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
                    const auto& v = Dv[b * static_cast<std::size_t>(n) + static_cast<std::size_t>(k2)];
                    for (std::size_t k = 0; k < P; ++k) s += u[k] * e[k] * v[k];
                }
    return s / static_cast<double>(P);
}

}  // namespace hohom
