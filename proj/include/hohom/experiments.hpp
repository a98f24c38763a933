#pragma once

#include "hohom/cellproblem.hpp"
#include "hohom/corrector_cache.hpp"
#include "hohom/excess.hpp"
#include "hohom/remainder.hpp"
#include "hohom/solvers.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace hohom::experiments {

/// Parsed experiment configuration. Defaults reproduce the 1D m = 2 cosine sweeps.
struct Config {
    std::string kind = "rates";  // cell | rates | excess | probes
    CoefficientPreset preset = [] {
        CoefficientPreset p;
        p.kind = "cosine_1d";
        p.m = 2;
        return p;
    }();
    int N = 64;  // cell grid points per axis
    std::vector<double> eps;
    std::uint64_t seed = 0;
    double cell_tol = 1e-10;
    double solve_tol = 1e-9;
    int probe_trials = 1000;

    // cell
    std::vector<double> expect_A_bar;
    double expect_tol = 1e-6;

    // rates
    std::string forcing = "sin";       // sin | one
    std::string domain = "interval";   // interval | torus | both
    int cells_per_eps = 32;
    std::array<double, 2> value{0.0, 1.0};  // u(0), u(1): endpoint jets of x^2 by default
    std::array<double, 2> slope{0.0, 2.0};  // u'(0), u'(1), m = 2
    int torus_N = 32;
    double slope_l2 = 0.9, r2_min = 0.98, cert_max = 0.02;
    double slope_w = 0.45, slope_torus = 0.9;

    // excess and probes
    std::vector<double> kernel;  // 2m constants of the kernel solution
    double x0 = 0.5;
    std::vector<double> deltas{0.125};
    double stability = 2.0;
    std::vector<double> p{3.0, 4.0};
    double R = 1.0;
    double spread_max = 2.0;
    std::vector<double> affine;  // D^gamma P of the corrector-affine fields (d >= 2)
};

struct RateRow {
    std::string experiment;
    double eps = 0.0;
    std::string norm_kind;
    double error = 0.0;
    std::string slope_group;
    std::string cert;
};

struct ExcessCsvRow {
    ExcessRow row;
    std::string cert;
};

struct ProbeRow {
    std::string probe;
    double eps = 0.0;
    double p_or_r = 0.0;
    double value = 0.0;
    std::string cert;
};

/// Solver certificate: named numbers and a verdict, referenced from CSV rows by id.
struct Certificate {
    std::string id;
    std::vector<std::pair<std::string, double>> values;
    bool ok = true;
};

struct Assertion {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    std::string relation;  // ">=" or "<="
    bool pass = false;
};

struct SlopeFit {
    std::string group;
    RateFit fit;
    std::size_t points = 0;
    std::string error;  // set when the fit was refused
};

struct Outcome {
    std::vector<RateRow> rates;
    std::vector<ExcessCsvRow> excess;
    std::vector<ProbeRow> probes;
    std::vector<Certificate> certificates;
    std::vector<Assertion> assertions;
    std::vector<SlopeFit> fits;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::string> notices;

    bool passed() const {
        return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
    }
    void require(std::string name, double value, const char* rel, double bound) {
        const bool ok = std::string(rel) == ">=" ? value >= bound : value <= bound;
        assertions.push_back({std::move(name), value, bound, rel, ok && std::isfinite(value)});
    }
};

/// Configuration error: maps to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Run fn(0..n-1) on up to `jobs` threads; results are stored by index, and the
/// exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, int jobs, F fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::unique_ptr<R>> out(n);
    std::vector<std::exception_ptr> err(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = std::make_unique<R>(fn(i));
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    const int t = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
    if (t == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < t; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    std::vector<R> res;
    res.reserve(n);
    for (auto& r : out) res.push_back(std::move(*r));
    return res;
}

/// 64-bit FNV-1a of the preset's defining fields and N: the corrector cache key.
inline std::uint64_t preset_hash(const CoefficientPreset& p, int N) {
    std::ostringstream os;
    os.precision(17);
    os << p.kind << '|' << p.d << '|' << p.m << '|' << p.n << '|' << p.c << '|' << p.a0 << '|' << p.a1 << '|' << p.contrast << '|' << p.width << '|' << p.skew << '|' << p.table_points << '|' << p.table_mu << '|' << N;
    for (double v : p.table) os << '|' << v;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : os.str()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int k = 15; k >= 0; --k, v >>= 4) s[static_cast<std::size_t>(k)] = digits[v & 15u];
    return s;
}

/// Correctors from `cache_dir` when present (keyed by preset hash and N), else solved and stored there.
inline CorrectorSet correctors(const CoefficientPreset& p, int N, double tol, const std::filesystem::path& cache_dir = {}) {
    std::filesystem::path file;
    if (!cache_dir.empty()) {
        file = cache_dir / ("correctors-" + hex(preset_hash(p, N)) + ".bin");
        if (std::filesystem::exists(file)) {
            auto cs = cache::load(file);
            measure_identities(sample(p, N), cs);
            return cs;
        }
    }
    CellOptions o;
    o.tol = tol;
    auto cs = solve_all(sample(p, N), o);
    if (!file.empty()) {
        std::filesystem::create_directories(cache_dir);
        cache::save(cs, file);
    }
    return cs;
}

inline double max_chi_residual(const CorrectorSet& cs) {
    double worst = 0.0;
    for (double r : cs.residuals.chi) worst = std::max(worst, r);
    return worst;
}

/// Certificate entries of the cell solve. Corrector sets read back from the
/// cache carry no PCG residuals and are marked instead.
inline std::vector<std::pair<std::string, double>> cell_residuals(const CorrectorSet& cs) {
    std::vector<std::pair<std::string, double>> v{{"flux_identity", cs.residuals.flux_identity}, {"dual_identity", cs.residuals.dual_identity}};
    if (cs.residuals.chi.empty()) v.emplace_back("from_cache", 1.0);
    else v.emplace_back("max_relative_residual", max_chi_residual(cs));
    return v;
}

inline std::function<double(double)> forcing(const std::string& name) {
    if (name == "sin") return [](double x) { return std::sin(2.0 * std::numbers::pi * x); };
    if (name == "one") return [](double) { return 1.0; };
    throw ConfigError("unknown forcing: " + name);
}

inline std::vector<double> kernel_constants(const Config& c) {
    if (!c.kernel.empty()) return c.kernel;
    return c.preset.m == 1 ? std::vector<double>{1.0, 0.0} : std::vector<double>{1.0, 1.0, 0.0, 0.0};
}

inline double scalar_A_bar(const CorrectorSet& cs) {
    if (cs.d != 1 || cs.n != 1) throw ConfigError("1D scalar preset required");
    return cs.A_bar.at(0);
}

// ---------------------------------------------------------------- cell

inline Outcome run_cell(const Config& c, const std::filesystem::path& cache_dir = {}) {
    Outcome out;
    const auto A = sample(c.preset, c.N);
    const auto cs = correctors(c.preset, c.N, c.cell_tol, cache_dir);
    double chi_max = 0.0, b_mean = 0.0;
    for (const auto& f : cs.chi) chi_max = std::max(chi_max, f.max_abs());
    for (const auto& f : cs.B)
        for (int k = 0; k < f.components(); ++k) b_mean = std::max(b_mean, std::abs(f.mean(k)));
    for (std::size_t k = 0; k < cs.A_bar.size(); ++k) out.scalars.emplace_back("A_bar[" + std::to_string(k) + "]", cs.A_bar[k]);
    out.scalars.emplace_back("chi_max", chi_max);
    out.scalars.emplace_back("B_mean_max", b_mean);
    out.scalars.emplace_back("flux_identity", cs.residuals.flux_identity);
    out.scalars.emplace_back("dual_identity", cs.residuals.dual_identity);
    const auto mu = coercivity_probe(A, c.probe_trials, c.seed);
    out.scalars.emplace_back("mu_hat", mu.mu_hat);
    Certificate cert{"cell", {{"N", static_cast<double>(c.N)}, {"tol", c.cell_tol}}, true};
    const auto residuals = cell_residuals(cs);
    cert.values.insert(cert.values.end(), residuals.begin(), residuals.end());
    cert.ok = cs.residuals.chi.empty() || max_chi_residual(cs) <= c.cell_tol;
    out.certificates.push_back(cert);
    if (!c.expect_A_bar.empty()) {
        if (c.expect_A_bar.size() != cs.A_bar.size()) throw ConfigError("expect_A_bar has " + std::to_string(c.expect_A_bar.size()) + " entries, the tensor has " + std::to_string(cs.A_bar.size()));
        for (std::size_t k = 0; k < cs.A_bar.size(); ++k)
            out.require("A_bar[" + std::to_string(k) + "] deviation", std::abs(cs.A_bar[k] - c.expect_A_bar[k]), "<=", c.expect_tol);
    }
    if (c.preset.kind == "constant") out.require("chi_max", chi_max, "<=", 1e-10);
    out.require("flux_identity", cs.residuals.flux_identity, "<=", 1e-8);
    out.require("dual_identity", cs.residuals.dual_identity, "<=", 1e-8);
    out.require("B_mean_max", b_mean, "<=", 1e-10);
    return out;
}

// ---------------------------------------------------------------- rates

struct IntervalDatum {
    double eps = 0.0;
    int cells = 0;
    double l2 = 0.0, w1q = 0.0, w = 0.0;
    double cert_l2 = 0.0, cert_w = 0.0, residual = 0.0;
};

/// u_eps - u_0 and w_eps for the 1D Dirichlet problem at h = eps / cells_per_eps,
/// each certified against the same quantity at h / 2.
inline IntervalDatum interval_datum(const Config& c, const CorrectorSet& cs, double eps) {
    const int m = cs.m;
    Dirichlet1D p;
    p.a = scalar_profile(c.preset);
    p.eps = eps;
    p.m = m;
    p.f = forcing(c.forcing);
    p.cells = static_cast<int>(std::lround(c.cells_per_eps / eps));
    p.value = c.value;
    p.slope = c.slope;
    p.mu = sample(c.preset, c.N).mu();
    const double Abar = scalar_A_bar(cs);
    auto p2 = p;
    p2.cells = 2 * p.cells;
    FemReport r1, r2;
    const auto ue = solve_dirichlet_1d(p, &r1);
    const auto ue2 = solve_dirichlet_1d(p2, &r2);
    const auto u0 = solve_homogenized_1d(Abar, p);
    const auto u02 = solve_homogenized_1d(Abar, p2);
    const auto rho = cutoff(Grid::interval(p.cells + 1), eps);

    IntervalDatum d;
    d.eps = eps;
    d.cells = p.cells;
    d.residual = std::max(r1.relative_residual, r2.relative_residual);
    const auto s1 = difference_samples(ue, u0);
    d.l2 = s1.lq(0);
    d.w1q = s1.sobolev(m - 1, 4.0);
    auto a = difference_samples(ue, u0, p2.cells);
    const auto b = difference_samples(ue2, u02);
    for (std::size_t k = 0; k < a.d[0].size(); ++k) a.d[0][k] -= b.d[0][k];
    d.cert_l2 = a.lq(0) / d.l2;

    d.w = build_w_interval(ue, u0, cs, eps, rho).lq(m);
    auto w1 = build_w_interval(ue, u0, cs, eps, rho, p2.cells);
    const auto w2 = build_w_interval(ue2, u02, cs, eps, rho);
    for (std::size_t k = 0; k < w1.d[static_cast<std::size_t>(m)].size(); ++k) w1.d[static_cast<std::size_t>(m)][k] -= w2.d[static_cast<std::size_t>(m)][k];
    d.cert_w = w1.lq(m) / d.w;
    return d;
}

struct TorusDatum {
    double eps = 0.0;
    double l2 = 0.0, w = 0.0, cert = 0.0, residual = 0.0;
    int iterations = 0;
};

namespace detail {

inline std::pair<GridFunction, GridFunction> torus_pair(const CoefficientField& A, const CorrectorSet& cs, int reps, double tol, PcgReport* rep) {
    const auto g = Grid::torus(A.dim(), A.points() * reps);
    const auto f = sample_function(g, [](const std::vector<double>& x) { return std::sin(2.0 * std::numbers::pi * x[0]); });
    SolveOptions o;
    o.tol = tol;
    auto ue = solve_periodic({&A, reps, f}, o, rep);
    auto u0 = solve_homogenized(cs.A_bar, cs.m, f);
    return {std::move(ue), std::move(u0)};
}

}  // namespace detail

/// Periodic problem with f = sin(2 pi x_1): w_eps in the H^m seminorm at cell
/// resolution N, certified against the same computation at 2N.
inline TorusDatum torus_datum(const Config& c, const CoefficientField& A, const CorrectorSet& cs, const CoefficientField& A2, const CorrectorSet& cs2, double eps) {
    const int reps = static_cast<int>(std::lround(1.0 / eps));
    TorusDatum d;
    d.eps = eps;
    PcgReport rep;
    const auto [ue, u0] = detail::torus_pair(A, cs, reps, c.solve_tol, &rep);
    d.iterations = rep.iterations;
    d.residual = rep.relative_residual;
    d.l2 = norm(ue - u0, NormKind::L2);
    d.w = norm(build_w(ue, u0, cs, reps), NormKind::HkSemi, 2.0, cs.m);
    const auto [ve, v0] = detail::torus_pair(A2, cs2, reps, c.solve_tol, &rep);
    d.residual = std::max(d.residual, rep.relative_residual);
    const double w2 = norm(build_w(ve, v0, cs2, reps), NormKind::HkSemi, 2.0, cs2.m);
    d.cert = std::abs(d.w - w2) / w2;
    return d;
}

inline SlopeFit fit_group(const std::vector<RateRow>& rows, const std::string& group, double floor_tol) {
    SlopeFit s;
    s.group = group;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.slope_group == group) pts.emplace_back(r.eps, r.error);
    s.points = pts.size();
    try {
        s.fit = rate_fit(pts, floor_tol);
    } catch (const FitError& e) {
        s.error = e.what();
    }
    return s;
}

inline Outcome run_rates(const Config& c, int jobs = 1, const std::filesystem::path& cache_dir = {}) {
    Outcome out;
    const bool interval = c.domain == "interval" || c.domain == "both";
    const bool torus = c.domain == "torus" || c.domain == "both";
    if (!interval && !torus) throw ConfigError("rates.domain must be interval, torus or both");
    if (interval) {
        if (c.preset.d != 1 || c.preset.m > 2) throw ConfigError("interval rates need a 1D preset with m <= 2");
        const auto cs = correctors(c.preset, c.N, c.cell_tol, cache_dir);
        const auto data = parallel_map(c.eps.size(), jobs, [&](std::size_t i) { return interval_datum(c, cs, c.eps[i]); });
        const std::string mq = "W" + std::to_string(c.preset.m - 1) + "_4";
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& d = data[i];
            const std::string id = "fem-" + std::to_string(i);
            out.certificates.push_back({id, {{"eps", d.eps}, {"cells", static_cast<double>(d.cells)}, {"relative_residual", d.residual}, {"refinement_l2", d.cert_l2}, {"refinement_w", d.cert_w}}, d.cert_l2 <= c.cert_max && d.cert_w <= c.cert_max});
            out.rates.push_back({"interval", d.eps, "L2", d.l2, "l2", id});
            out.rates.push_back({"interval", d.eps, mq, d.w1q, "w1q", id});
            out.rates.push_back({"interval", d.eps, "H" + std::to_string(c.preset.m) + "_semi_w", d.w, "w_interval", id});
        }
        const auto l2 = fit_group(out.rates, "l2", c.solve_tol);
        const auto w1q = fit_group(out.rates, "w1q", c.solve_tol);
        const auto w = fit_group(out.rates, "w_interval", c.solve_tol);
        out.fits.insert(out.fits.end(), {l2, w1q, w});
        out.require("l2 slope", l2.error.empty() ? l2.fit.slope : NAN, ">=", c.slope_l2);
        out.require("l2 r2", l2.error.empty() ? l2.fit.r2 : NAN, ">=", c.r2_min);
        double worst = 0.0, worst_w = 0.0;
        for (const auto& d : data) {
            worst = std::max(worst, d.cert_l2);
            worst_w = std::max(worst_w, d.cert_w);
        }
        out.require("l2 refinement certificate", worst, "<=", c.cert_max);
        out.require("w_interval slope", w.error.empty() ? w.fit.slope : NAN, ">=", c.slope_w);
        out.require("w_interval refinement certificate", worst_w, "<=", c.cert_max);
    }
    if (torus) {
        const auto A = sample(c.preset, c.torus_N);
        const auto A2 = sample(c.preset, 2 * c.torus_N);
        const auto cs = correctors(c.preset, c.torus_N, c.cell_tol, cache_dir);
        const auto cs2 = correctors(c.preset, 2 * c.torus_N, c.cell_tol, cache_dir);
        const auto data = parallel_map(c.eps.size(), jobs, [&](std::size_t i) { return torus_datum(c, A, cs, A2, cs2, c.eps[i]); });
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& d = data[i];
            const std::string id = "torus-" + std::to_string(i);
            out.certificates.push_back({id, {{"eps", d.eps}, {"pcg_iterations", static_cast<double>(d.iterations)}, {"relative_residual", d.residual}, {"refinement_w", d.cert}}, d.cert <= c.cert_max});
            out.rates.push_back({"torus", d.eps, "L2", d.l2, "l2_torus", id});
            out.rates.push_back({"torus", d.eps, "H" + std::to_string(c.preset.m) + "_semi_w", d.w, "w_torus", id});
        }
        const auto l2 = fit_group(out.rates, "l2_torus", c.solve_tol);
        const auto w = fit_group(out.rates, "w_torus", c.solve_tol);
        out.fits.insert(out.fits.end(), {l2, w});
        out.require("w_torus slope", w.error.empty() ? w.fit.slope : NAN, ">=", c.slope_torus);
        double worst = 0.0;
        for (const auto& d : data) worst = std::max(worst, d.cert);
        out.require("w_torus refinement certificate", worst, "<=", c.cert_max);
    }
    return out;
}

// ---------------------------------------------------------------- excess

inline ProbeField kernel_field(const Config& c, double eps, std::function<double(double)> a) {
    const auto K = std::make_shared<KernelSolution1D>(std::move(a), eps, c.preset.m, kernel_constants(c), c.x0 - 2.0 * c.R, c.x0 + 2.0 * c.R);
    return probe_field_1d(eps, c.preset.m, c.x0, [K](double x, int k) { return K->derivative(x, k); }, eps / 8.0);
}

inline Outcome run_excess(const Config& c, int jobs = 1, const std::filesystem::path& cache_dir = {}) {
    if (c.preset.d != 1) throw ConfigError("excess probes use 1D kernel solutions");
    if (c.x0 - 2.0 * c.R > 0.0 || c.x0 + 2.0 * c.R < 0.0) throw ConfigError("excess: the kernel range [x0 - 2R, x0 + 2R] must contain 0");
    Outcome out;
    const auto a = scalar_profile(c.preset);
    const auto fam = parallel_map(c.eps.size(), jobs, [&](std::size_t i) { return kernel_field(c, c.eps[i], a); });
    const auto rep = certify_excess_decay(fam, c.deltas);
    out.notices = rep.notices;
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
        out.certificates.push_back({"kernel-" + std::to_string(i), {{"eps", c.eps[i]}, {"quadrature_cells_per_period", 64.0}, {"C_eps", rep.C_eps[i]}}, true});
        out.scalars.emplace_back("C_eps[" + std::to_string(i) + "]", rep.C_eps[i]);
    }
    for (const auto& row : rep.rows) {
        const auto it = std::find(c.eps.begin(), c.eps.end(), row.eps);
        out.excess.push_back({row, "kernel-" + std::to_string(it - c.eps.begin())});
    }
    out.scalars.emplace_back("C_hat", rep.C_hat);

    // eps = 0: solutions of the homogenized equation, where pure halving is claimed
    const double Abar = scalar_A_bar(correctors(c.preset, c.N, c.cell_tol, cache_dir));
    const auto u0 = kernel_field(c, c.eps.front(), [Abar](double) { return Abar; });
    out.certificates.push_back({"homogenized", {{"A_bar", Abar}}, true});
    bool halving = true;
    for (double d : c.deltas)
        for (auto row : certify_halving(u0, d, dyadic_radii(c.eps.back(), 0.5))) {
            row.eps = 0.0;
            halving = halving && row.pass;
            out.excess.push_back({row, "homogenized"});
        }
    std::size_t failed = 0;
    for (const auto& r : rep.rows) failed += !r.pass;
    out.require("halving rows failing", halving ? 0.0 : 1.0, "<=", 0.0);
    out.require("certificate rows failing", static_cast<double>(failed), "<=", 0.0);
    out.require("C_hat finite", std::isfinite(rep.C_hat) ? 0.0 : 1.0, "<=", 0.0);
    const auto [lo, hi] = std::minmax_element(rep.C_eps.begin(), rep.C_eps.end());
    const double spread = *hi == 0.0 ? 1.0 : (*lo == 0.0 ? INFINITY : *hi / *lo);
    out.scalars.emplace_back("C_eps_spread", spread);
    out.require("C_eps max/min", spread, "<=", c.stability);
    return out;
}

// ---------------------------------------------------------------- probes

/// grad^m of u = P + eps^m chi^gamma(x/eps) D^gamma P on the torus grid with
/// N / eps points per axis. D^alpha u = E_alpha + sum_gamma D^alpha chi^gamma(y) E_gamma
/// depends only on y, so the field is sampled by reducing node indices mod N.
inline ProbeField corrector_affine_field(const CorrectorSet& cs, const std::vector<double>& E, int reps, std::vector<double> x0) {
    if (cs.n != 1) throw ConfigError("corrector-affine probes need scalar presets");
    const std::size_t M = cs.slots();
    if (E.size() != M) throw ConfigError("affine needs " + std::to_string(M) + " entries");
    const Grid cg = Grid::torus(cs.d, cs.N);
    std::vector<double> Du(cg.size() * M);
    for (std::size_t a = 0; a < M; ++a) {
        std::vector<double> acc(cg.size(), E[a]);
        for (std::size_t g = 0; g < M; ++g) {
            const auto D = spectral::derivative(cg, cs.corrector(g, 0).component(0), cs.indices[a]);
            for (std::size_t k = 0; k < cg.size(); ++k) acc[k] += D[k] * E[g];
        }
        for (std::size_t k = 0; k < cg.size(); ++k) Du[k * M + a] = acc[k];
    }
    std::vector<double> mult(M);
    for (std::size_t a = 0; a < M; ++a) mult[a] = static_cast<double>(factorial(MultiIndex(std::vector<int>{cs.m}))) / static_cast<double>(factorial(cs.indices[a]));
    const Grid fg = Grid::torus(cs.d, cs.N * reps);
    ProbeField f;
    f.eps = 1.0 / reps;
    f.m = cs.m;
    f.ball = [fg, x0](double r) { return ball_rule_grid(fg, x0, r); };
    f.values = [](const BallRule&) -> std::vector<double> { throw std::logic_error("corrector-affine probe: values not sampled"); };
    const int N = cs.N, d = cs.d, P = cs.N * reps;
    f.grad_m = [Du = std::move(Du), mult, M, N, d, P](const BallRule& b) {
        std::vector<double> v(b.size());
        for (std::size_t k = 0; k < b.size(); ++k) {
            std::size_t flat = b.nodes[k], cell = 0, stride = 1;
            for (int a = 0; a < d; ++a) {
                const std::size_t i = flat % static_cast<std::size_t>(P);
                flat /= static_cast<std::size_t>(P);
                cell += (i % static_cast<std::size_t>(N)) * stride;
                stride *= static_cast<std::size_t>(N);
            }
            double s = 0.0;
            for (std::size_t a = 0; a < M; ++a) s += mult[a] * Du[cell * M + a] * Du[cell * M + a];
            v[k] = std::sqrt(s);
        }
        return v;
    };
    return f;
}

inline double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi == 0.0) return 1.0;
    return *lo == 0.0 ? INFINITY : *hi / *lo;
}

inline Outcome run_probes(const Config& c, int jobs = 1, const std::filesystem::path& cache_dir = {}) {
    Outcome out;
    const double rmax_rh = 0.25 * c.R;
    if (c.preset.d == 1) {
        const auto a = scalar_profile(c.preset);
        struct Row {
            LipschitzProbe lip;
            std::vector<double> rh;
        };
        const auto rows = parallel_map(c.eps.size(), jobs, [&](std::size_t i) {
            const auto u = kernel_field(c, c.eps[i], a);
            Row r;
            r.lip = lipschitz_probe(u, dyadic_radii(c.eps[i], 0.5 * c.R), c.R);
            for (double p : c.p) {
                double best = 0.0;
                for (double rr : dyadic_radii(c.eps[i], rmax_rh)) best = std::max(best, reverse_holder_probe(u, rr, p));
                r.rh.push_back(best);
            }
            return r;
        });
        std::vector<double> sups;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string id = "kernel-" + std::to_string(i);
            out.certificates.push_back({id, {{"eps", c.eps[i]}, {"quadrature_cells_per_period", 64.0}, {"gauss_panel_over_eps", 0.125}}, true});
            for (std::size_t k = 0; k < rows[i].lip.radii.size(); ++k) out.probes.push_back({"lipschitz", c.eps[i], rows[i].lip.radii[k], rows[i].lip.ratios[k], id});
            out.probes.push_back({"lipschitz_sup", c.eps[i], c.R, rows[i].lip.sup, id});
            sups.push_back(rows[i].lip.sup);
        }
        out.require("lipschitz_sup max/min", spread(sups), "<=", c.spread_max);
        for (std::size_t j = 0; j < c.p.size(); ++j) {
            std::vector<double> v;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                out.probes.push_back({"reverse_holder", c.eps[i], c.p[j], rows[i].rh[j], "kernel-" + std::to_string(i)});
                v.push_back(rows[i].rh[j]);
            }
            out.require("reverse_holder p=" + std::to_string(static_cast<int>(c.p[j])) + " max/min", spread(v), "<=", c.spread_max);
        }
        return out;
    }
    const auto cs = correctors(c.preset, c.N, c.cell_tol, cache_dir);
    auto E = c.affine;
    if (E.empty()) {
        E.assign(cs.slots(), 0.5);
        E[0] = 1.0;
    }
    std::vector<double> x0(static_cast<std::size_t>(c.preset.d), c.x0);
    const auto rows = parallel_map(c.eps.size(), jobs, [&](std::size_t i) {
        const auto u = corrector_affine_field(cs, E, static_cast<int>(std::lround(1.0 / c.eps[i])), x0);
        std::vector<double> rh;
        for (double p : c.p) {
            double best = 0.0;
            for (double rr : dyadic_radii(c.eps[i], rmax_rh)) best = std::max(best, reverse_holder_probe(u, rr, p));
            rh.push_back(best);
        }
        return rh;
    });
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
        Certificate cert{"affine-" + std::to_string(i), {{"eps", c.eps[i]}, {"cell_N", static_cast<double>(c.N)}}, true};
        const auto r = cell_residuals(cs);
        cert.values.insert(cert.values.end(), r.begin(), r.end());
        out.certificates.push_back(cert);
    }
    for (std::size_t j = 0; j < c.p.size(); ++j) {
        std::vector<double> v;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.probes.push_back({"reverse_holder", c.eps[i], c.p[j], rows[i][j], "affine-" + std::to_string(i)});
            v.push_back(rows[i][j]);
        }
        out.require("reverse_holder p=" + std::to_string(static_cast<int>(c.p[j])) + " max/min", spread(v), "<=", c.spread_max);
    }
    return out;
}

inline Outcome run(const Config& c, int jobs = 1, const std::filesystem::path& cache_dir = {}) {
    if (c.kind == "cell") return run_cell(c, cache_dir);
    if (c.kind == "rates") return run_rates(c, jobs, cache_dir);
    if (c.kind == "excess") return run_excess(c, jobs, cache_dir);
    if (c.kind == "probes") return run_probes(c, jobs, cache_dir);
    throw ConfigError("unknown experiment kind: " + c.kind);
}

}  // namespace hohom::experiments
