#pragma once

#include "hohom/cellproblem.hpp"
#include "hohom/errors.hpp"
#include "hohom/fem1d.hpp"
#include "hohom/torus_operator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hohom {

/// L_eps u = f on the unit torus with eps = 1 / reps. The coefficient is the
/// cell sampling A tiled reps times, so f must live on the matching fine grid.
struct PeriodicProblem {
    const CoefficientField* A = nullptr;
    int reps = 1;
    GridFunction f;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 0;  // 0: default_max_iter of the fine grid
    bool dealias = false;
};

inline void check_zero_mean(const GridFunction& f, const char* who) {
    const double scale = std::max(f.max_abs(), 1e-300);
    for (int c = 0; c < f.components(); ++c)
        if (std::abs(f.mean(c)) > 1e-12 * scale) throw std::invalid_argument(std::string(who) + ": right-hand side must have zero mean");
}

inline GridFunction solve_periodic(const PeriodicProblem& p, const SolveOptions& opt = {}, PcgReport* report = nullptr) {
    if (!p.A) throw std::invalid_argument("solve_periodic: missing coefficient");
    const Grid& fg = p.f.grid();
    if (!fg.periodic || fg.dim != p.A->dim()) throw std::invalid_argument("solve_periodic: f must live on a torus of the coefficient's dimension");
    if (p.reps < 1) throw std::invalid_argument("solve_periodic: 1/eps must be a positive integer");
    if (fg.points != p.A->points() * p.reps) throw ResolutionError("solve_periodic: fine grid must have N_cell / eps points per axis");
    if (fg.points < 16 * p.reps) throw ResolutionError("solve_periodic: fewer than 16 points per eps-cell");
    if (p.f.components() != p.A->components()) throw std::invalid_argument("solve_periodic: component mismatch");
    check_zero_mean(p.f, "solve_periodic");
    const auto Aeps = tile(*p.A, p.reps);
    const TorusOperator op(Aeps, opt.dealias);
    auto rhs = op.to_spectrum(p.f);
    op.project(rhs);
    PcgReport rep;
    const auto u = op.solve(rhs, opt.tol, opt.max_iter > 0 ? opt.max_iter : default_max_iter(fg), rep, "solve_periodic");
    if (report) *report = rep;
    auto out = op.to_field(u);
    out.zero_mean = true;
    return out;
}

/// Homogenized operator with constant tensor A_bar (layout of CorrectorSet)
/// solved exactly mode by mode on the torus grid of f.
inline GridFunction solve_homogenized(const std::vector<double>& A_bar, int m, const GridFunction& f) {
    const Grid& g = f.grid();
    if (!g.periodic) throw std::invalid_argument("solve_homogenized: torus grid required (use the 1D FEM for intervals)");
    const int n = f.components();
    const auto idx = enumerate(g.dim, m);
    const std::size_t M = idx.size();
    if (A_bar.size() != M * M * static_cast<std::size_t>(n * n)) throw std::invalid_argument("solve_homogenized: tensor size mismatch");
    check_zero_mean(f, "solve_homogenized");
    std::vector<std::vector<std::complex<double>>> sym;
    for (const auto& a : idx) sym.push_back(spectral::derivative_symbols(g, a));
    std::vector<std::vector<std::complex<double>>> fh;
    for (int c = 0; c < n; ++c) fh.push_back(spectral::forward(g, f.component(c)));
    const auto mask = spectral::solution_mask(g, false);
    std::vector<std::vector<std::complex<double>>> uh(static_cast<std::size_t>(n), std::vector<std::complex<double>>(g.size(), 0.0));
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!mask[k]) continue;
        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
        for (std::size_t a = 0; a < M; ++a)
            for (std::size_t b = 0; b < M; ++b) {
                // (-1)^m D^a (A D^b) has symbol (-1)^m sym_a sym_b A.
                const std::complex<double> s = sign * sym[a][k] * sym[b][k];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) S(i, j) += s * A_bar[((a * M + b) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
            }
        const Eigen::MatrixXcd herm = 0.5 * (S + S.adjoint());
        const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm).eigenvalues().minCoeff();
        if (!(lo > 0.0)) throw CoercivityLoss("solve_homogenized: symbol block not positive definite", 0, lo);
        Eigen::VectorXcd r(n);
        for (int c = 0; c < n; ++c) r(c) = fh[static_cast<std::size_t>(c)][k];
        const Eigen::VectorXcd x = S.partialPivLu().solve(r);
        for (int c = 0; c < n; ++c) uh[static_cast<std::size_t>(c)][k] = x(c);
    }
    GridFunction out(g, n);
    for (int c = 0; c < n; ++c) {
        const auto v = spectral::inverse_real(g, std::move(uh[static_cast<std::size_t>(c)]));
        std::copy(v.begin(), v.end(), out.component(c).begin());
    }
    out.zero_mean = true;
    return out;
}

/// Homogenized Dirichlet problem on (0, 1): the FEM of solve_dirichlet_1d
/// with the constant coefficient A_bar.
inline FemFunction1D solve_homogenized_1d(double A_bar, Dirichlet1D p, FemReport* report = nullptr) {
    p.a = [A_bar](double) { return A_bar; };
    p.enforce_resolution = false;
    p.mu = 0.0;
    return solve_dirichlet_1d(p, report);
}

}  // namespace hohom
