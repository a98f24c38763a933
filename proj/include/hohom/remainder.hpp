#pragma once

#include "hohom/cellproblem.hpp"
#include "hohom/fem1d.hpp"
#include "hohom/norms.hpp"
#include "hohom/smoothing.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hohom {

/// w_eps = u_eps - u_0 - eps^m sum_gamma chi^gamma(x/eps) S^2_eps(D^gamma u_0) on
/// the torus (rho = 1). The fine grid must be the cell grid repeated 1/eps times.
inline GridFunction build_w(const GridFunction& ue, const GridFunction& u0, const CorrectorSet& cs, int reps) {
    const Grid& g = ue.grid();
    if (!(g == u0.grid()) || ue.components() != u0.components()) throw std::invalid_argument("build_w: u_eps and u_0 on different grids");
    if (!g.periodic || g.dim != cs.d || g.points != cs.N * reps) throw std::invalid_argument("build_w: fine grid incompatible with the corrector grid");
    const int n = cs.n;
    const std::size_t M = cs.indices.size();
    if (cs.chi.size() != M * static_cast<std::size_t>(n)) throw std::invalid_argument("build_w: missing correctors");
    const double eps = 1.0 / reps;
    const double scale = std::pow(eps, cs.m);
    std::vector<std::size_t> cell(g.size());
    spectral::for_each_index(g, [&](std::size_t flat, std::span<const int> idx) {
        std::size_t s = 0;
        for (int k = 0; k < g.dim; ++k) s = s * static_cast<std::size_t>(cs.N) + static_cast<std::size_t>(idx[static_cast<std::size_t>(k)] % cs.N);
        cell[flat] = s;
    });
    GridFunction w = ue - u0;
    const Mollifier K(g, eps);
    for (std::size_t gi = 0; gi < M; ++gi) {
        for (int j = 0; j < n; ++j) {
            const auto& chi = cs.chi[gi * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
            if (chi.max_abs() == 0.0) continue;
            auto c = spectral::forward(g, u0.component(j));
            spectral::apply_derivative(g, cs.indices[gi], c);
            K.apply(c, 2);
            const auto V = spectral::inverse_real(g, std::move(c));
            for (int i = 0; i < n; ++i) {
                const auto x = chi.component(i);
                auto out = w.component(i);
                for (std::size_t k = 0; k < g.size(); ++k) out[k] -= scale * x[cell[k]] * V[k];
            }
        }
    }
    return w;
}

/// Interval version in 1D: w_eps and its derivatives up to order m at the
/// five-point Gauss nodes of a uniform mesh (that of u_eps unless `sample_cells`
/// is given), with u_0 extended to the line by reflection, S^2_eps applied
/// spectrally and the cutoff rho_eps.
inline Samples1D build_w_interval(const FemFunction1D& ue, const FemFunction1D& u0, const CorrectorSet& cs, double eps, const Cutoff& rho, int sample_cells = 0) {
    if (cs.d != 1 || cs.n != 1) throw std::invalid_argument("build_w_interval: scalar 1D correctors required");
    const int m = cs.m;
    if (ue.order() != m || u0.order() != m) throw std::invalid_argument("build_w_interval: order mismatch");
    if (cs.chi.empty()) throw std::invalid_argument("build_w_interval: missing corrector");
    const int Nx = u0.cells();
    GridFunction nodal(Grid::interval(Nx + 1), 1);
    std::copy(u0.nodal_values().begin(), u0.nodal_values().end(), nodal.component(0).begin());
    const auto e = extend(nodal, m);
    auto c = spectral::forward(e.grid, e.values.component(0));
    spectral::apply_derivative(e.grid, MultiIndex{m}, c);
    Mollifier(e.grid, eps).apply(c, 2);
    const spectral::TrigInterpolant V(e.grid, std::move(c));
    const spectral::TrigInterpolant chi(cs.chi[0].grid(), cs.chi[0].component(0));

    auto s = gauss_points<5>(sample_cells > 0 ? sample_cells : ue.cells());
    s.d.assign(static_cast<std::size_t>(m + 1), std::vector<double>(s.x.size()));
    const double em = std::pow(eps, m);
    const double fact[] = {1.0, 1.0, 2.0, 6.0};
    for (std::size_t p = 0; p < s.x.size(); ++p) {
        const double x = s.x[p];
        const auto X = chi.derivatives(x / eps, m);
        const auto W = V.derivatives(x, m);
        std::vector<double> R(static_cast<std::size_t>(m + 1));
        for (int l = 0; l <= m; ++l) R[static_cast<std::size_t>(l)] = rho.derivative(x, l);
        for (int k = 0; k <= m; ++k) {
            double corr = 0.0;
            for (int i = 0; i <= k; ++i)
                for (int j = 0; i + j <= k; ++j) {
                    const int l = k - i - j;
                    corr += fact[k] / (fact[i] * fact[j] * fact[l]) * std::pow(eps, -i) * X[static_cast<std::size_t>(i)] * W[static_cast<std::size_t>(j)] * R[static_cast<std::size_t>(l)];
                }
            s.d[static_cast<std::size_t>(k)][p] = ue.evaluate(x, k) - u0.evaluate(x, k) - em * corr;
        }
    }
    return s;
}

/// u_eps - u_0 and derivatives up to order m at the Gauss nodes of the mesh of
/// u_eps, or of a uniform mesh with `sample_cells` cells.
inline Samples1D difference_samples(const FemFunction1D& ue, const FemFunction1D& u0, int sample_cells = 0) {
    auto s = gauss_points<5>(sample_cells > 0 ? sample_cells : ue.cells());
    const int m = ue.order();
    s.d.assign(static_cast<std::size_t>(m + 1), std::vector<double>(s.x.size()));
    for (std::size_t p = 0; p < s.x.size(); ++p)
        for (int k = 0; k <= m; ++k) s.d[static_cast<std::size_t>(k)][p] = ue.evaluate(s.x[p], k) - u0.evaluate(s.x[p], k);
    return s;
}

}  // namespace hohom
