#pragma once

#include "hohom/coeffs.hpp"
#include "hohom/errors.hpp"
#include "hohom/grid.hpp"

#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace hohom {

using Spectrum = std::vector<std::complex<double>>;

/// Coefficient field repeated `reps` times per axis: the samples of A(x/eps)
/// on the unit torus for eps = 1/reps.
inline CoefficientField tile(const CoefficientField& A, int reps) {
    if (reps < 1) throw std::invalid_argument("tile: reps must be >= 1");
    const int Nc = A.points();
    CoefficientField out(A.dim(), A.order(), A.components(), Nc * reps, A.mu());
    const Grid& fine = out.grid();
    std::vector<std::size_t> src(fine.size());
    spectral::for_each_index(fine, [&](std::size_t flat, std::span<const int> idx) {
        std::size_t s = 0;
        for (int k = 0; k < fine.dim; ++k) s = s * static_cast<std::size_t>(Nc) + static_cast<std::size_t>(idx[static_cast<std::size_t>(k)] % Nc);
        src[flat] = s;
    });
    for (std::size_t a = 0; a < A.slots(); ++a)
        for (std::size_t b = 0; b < A.slots(); ++b)
            for (int i = 0; i < A.components(); ++i)
                for (int j = 0; j < A.components(); ++j) {
                    const auto in = A.entry(a, b, i, j);
                    auto o = out.entry(a, b, i, j);
                    for (std::size_t k = 0; k < o.size(); ++k) o[k] = in[src[k]];
                }
    return out;
}

struct PcgReport {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// The operator u -> (-1)^m sum_{ab} D^a (A^{ab} D^b u) on the periodic grid of
/// A, acting on spectral coefficient vectors of n stacked components and
/// projected onto the discrete solution space (zero mean, no Nyquist modes).
class TorusOperator {
public:
    explicit TorusOperator(const CoefficientField& A, bool dealias = false)
        : A_(&A), grid_(A.grid()), mask_(spectral::solution_mask(A.grid(), dealias)) {
        for (const auto& alpha : A.indices()) symbols_.push_back(spectral::derivative_symbols(grid_, alpha));
        precond_.assign(grid_.size(), 0.0);
        const double scale = std::pow(2.0 * std::numbers::pi, 2 * A.order());
        spectral::for_each_index(grid_, [&](std::size_t flat, std::span<const int> idx) {
            if (!mask_[flat]) return;
            double s = 0.0;
            for (const auto& gamma : A.indices()) {
                double t = 1.0;
                for (int k = 0; k < grid_.dim; ++k) {
                    const double xi = spectral::frequency(idx[static_cast<std::size_t>(k)], grid_.points);
                    t *= std::pow(xi * xi, gamma[k]);
                }
                s += t;
            }
            precond_[flat] = 1.0 / (scale * s);
        });
    }

    const Grid& grid() const { return grid_; }
    int components() const { return A_->components(); }
    std::size_t size() const { return grid_.size() * static_cast<std::size_t>(components()); }
    const std::vector<char>& mask() const { return mask_; }

    void project(Spectrum& u) const {
        const std::size_t P = grid_.size();
        for (std::size_t k = 0; k < u.size(); ++k)
            if (!mask_[k % P]) u[k] = 0.0;
    }

    Spectrum apply(const Spectrum& u) const {
        const std::size_t P = grid_.size();
        const std::size_t M = A_->slots();
        const int n = components();
        // D^b u_j in physical space
        std::vector<std::vector<double>> grads(M * static_cast<std::size_t>(n));
        for (std::size_t b = 0; b < M; ++b)
            for (int j = 0; j < n; ++j) {
                Spectrum c(u.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * P), u.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j + 1) * P));
                for (std::size_t k = 0; k < P; ++k) c[k] *= symbols_[b][k];
                grads[b * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = spectral::inverse_real(grid_, std::move(c));
            }
        Spectrum out(size(), 0.0);
        const double sign = A_->order() % 2 == 0 ? 1.0 : -1.0;
        std::vector<double> flux(P);
        for (std::size_t a = 0; a < M; ++a)
            for (int i = 0; i < n; ++i) {
                std::fill(flux.begin(), flux.end(), 0.0);
                for (std::size_t b = 0; b < M; ++b)
                    for (int j = 0; j < n; ++j) {
                        const auto e = A_->entry(a, b, i, j);
                        const auto& g = grads[b * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
                        for (std::size_t k = 0; k < P; ++k) flux[k] += e[k] * g[k];
                    }
                auto fc = spectral::forward(grid_, flux);
                for (std::size_t k = 0; k < P; ++k) out[static_cast<std::size_t>(i) * P + k] += sign * symbols_[a][k] * fc[k];
            }
        project(out);
        return out;
    }

    /// Diagonal preconditioner (symbol of (-1)^m sum_g D^{2g})^{-1}.
    Spectrum precondition(const Spectrum& r) const {
        const std::size_t P = grid_.size();
        Spectrum z(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) z[k] = r[k] * precond_[k % P];
        return z;
    }

    static double dot(const Spectrum& a, const Spectrum& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
        return s;
    }

    /// Preconditioned CG for apply(u) = rhs on the masked subspace. Residuals are
    /// measured in the norm of the inverse preconditioner (an H^{-m} norm), relative
    /// to the right-hand side.
    Spectrum solve(const Spectrum& rhs_in, double tol, int max_iter, PcgReport& report, const std::string& label = "") const {
        Spectrum rhs = rhs_in;
        project(rhs);
        Spectrum x(size(), 0.0);
        report = {};
        Spectrum r = rhs;
        Spectrum z = precondition(r);
        double rz = dot(r, z);
        const double rz0 = rz;
        if (rz0 == 0.0) return x;
        Spectrum p = z;
        double rel = 1.0;
        for (int it = 1; it <= max_iter; ++it) {
            const Spectrum Ap = apply(p);
            const double curv = dot(p, Ap);
            if (!(curv > 0.0)) {
                throw CoercivityLoss("CG met non-positive curvature" + (label.empty() ? std::string() : " in " + label) + "; coercivity probably violated", it, rel);
            }
            const double alpha = rz / curv;
            for (std::size_t k = 0; k < x.size(); ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * Ap[k];
            }
            z = precondition(r);
            const double rz_new = dot(r, z);
            rel = std::sqrt(std::max(rz_new, 0.0) / rz0);
            report.iterations = it;
            if (rel <= tol) break;
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < p.size(); ++k) p[k] = z[k] + beta * p[k];
        }
        // true residual
        const Spectrum Ax = apply(x);
        Spectrum rt(size());
        for (std::size_t k = 0; k < x.size(); ++k) rt[k] = rhs[k] - Ax[k];
        report.relative_residual = std::sqrt(std::max(dot(rt, precondition(rt)), 0.0) / rz0);
        if (report.relative_residual > tol) {
            std::ostringstream msg;
            msg << "CG did not converge" << (label.empty() ? std::string() : " in " + label) << " (relative residual " << std::scientific << std::setprecision(3) << report.relative_residual << " after " << report.iterations << " iterations)";
            throw NonConvergence(msg.str(), report.iterations, report.relative_residual);
        }
        return x;
    }

    /// Spectral coefficients of a real field with n components.
    Spectrum to_spectrum(const GridFunction& f) const {
        const std::size_t P = grid_.size();
        Spectrum out(size());
        for (int c = 0; c < f.components(); ++c) {
            const auto s = spectral::forward(grid_, f.component(c));
            std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * P));
        }
        return out;
    }
    GridFunction to_field(const Spectrum& s) const {
        const std::size_t P = grid_.size();
        GridFunction out(grid_, components());
        for (int c = 0; c < components(); ++c) {
            Spectrum part(s.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * P), s.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c + 1) * P));
            const auto v = spectral::inverse_real(grid_, std::move(part));
            std::copy(v.begin(), v.end(), out.component(c).begin());
        }
        return out;
    }

    const std::vector<std::complex<double>>& symbol(std::size_t a) const { return symbols_[a]; }

private:
    const CoefficientField* A_;
    Grid grid_;
    std::vector<char> mask_;
    std::vector<std::vector<std::complex<double>>> symbols_;
    std::vector<double> precond_;
};

inline int default_max_iter(const Grid& g) { return static_cast<int>(10.0 * std::pow(static_cast<double>(g.points), g.dim / 2.0)); }

}  // namespace hohom
