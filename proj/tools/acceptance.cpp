#include "hohom/config.hpp"
#include "hohom/report.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <boost/math/quadrature/trapezoidal.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <thread>

using namespace hohom;
namespace ex = hohom::experiments;

namespace {

constexpr double pi = std::numbers::pi;

// Tolerances of the acceptance suite.
constexpr double chi_const_tol = 1e-10;
constexpr double abar_const_tol = 1e-12;
constexpr double flux_const_tol = 1e-10;
constexpr double harmonic_tol = 1e-6;
constexpr double laminate_tol = 1e-4;
constexpr double dual_tol = 1e-8;
constexpr double b_mean_tol = 1e-10;
constexpr double refinement_band = 0.2;

struct Line {
    bool pass = true;
    std::string detail;
    void add(const std::string& name, double value, const char* rel, double bound) {
        const bool ok = std::string(rel) == "<=" ? value <= bound : value >= bound;
        pass = pass && ok && std::isfinite(value);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s%s=%.6g%s%.3g", detail.empty() ? "" : " ", name.c_str(), value, rel, bound);
        detail += buf;
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : " ") + s; }
};

CellOptions tight() {
    CellOptions o;
    o.tol = 1e-11;
    return o;
}

double harmonic_mean_oracle() {
    auto inv = [](double y) { return 1.0 / (2.0 + std::cos(2.0 * pi * y)); };
    return 1.0 / boost::math::quadrature::trapezoidal(inv, 0.0, 1.0, 1e-14);
}

CoefficientPreset preset(const std::string& kind, int d, int m) {
    CoefficientPreset p;
    p.kind = kind;
    p.d = d;
    p.m = m;
    return p;
}

// Minimum of the staggered finite-difference cell energy
// sum_edges a_e (E_dir + (chi_next - chi) / h)^2 h^2 over periodic chi on an
// n x n grid, for a(y) = 2 + cos(2 pi y1).
double laminate_fd_energy(int n, double E1, double E2) {
    const double h = 1.0 / n;
    const auto id = [n](int i, int j) { return ((i + n) % n) + n * ((j + n) % n); };
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n * n);
    struct Edge {
        int from, to;
        double a, E;
    };
    std::vector<Edge> edges;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            edges.push_back({id(i, j), id(i + 1, j), 2.0 + std::cos(2.0 * pi * (i + 0.5) * h), E1});
            edges.push_back({id(i, j), id(i, j + 1), 2.0 + std::cos(2.0 * pi * i * h), E2});
        }
    for (const auto& e : edges) {
        t.emplace_back(e.from, e.from, e.a);
        t.emplace_back(e.to, e.to, e.a);
        t.emplace_back(e.from, e.to, -e.a);
        t.emplace_back(e.to, e.from, -e.a);
        r[e.from] += h * e.E * e.a;
        r[e.to] -= h * e.E * e.a;
    }
    Eigen::SparseMatrix<double> K(n * n, n * n);
    K.setFromTriplets(t.begin(), t.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-13);
    cg.setMaxIterations(20 * n * n);
    cg.compute(K);
    const Eigen::VectorXd chi = cg.solve(r);
    double energy = 0.0;
    for (const auto& e : edges) {
        const double g = e.E + (chi[e.to] - chi[e.from]) / h;
        energy += e.a * g * g * h * h;
    }
    return energy;
}

Line constant_degeneracy() {
    Line l;
    double chi = 0.0, abar = 0.0, B = 0.0, dual = 0.0;
    for (int d : {1, 2})
        for (int m : {1, 2}) {
            CoefficientPreset p = preset("constant", d, m);
            p.c = 1.7;
            const auto cs = solve_all(sample(p, 16), tight());
            for (const auto& f : cs.chi) chi = std::max(chi, f.max_abs());
            for (std::size_t a = 0; a < cs.slots(); ++a)
                for (std::size_t b = 0; b < cs.slots(); ++b) abar = std::max(abar, std::abs(cs.a_bar(a, b, 0, 0) - (a == b ? 1.7 : 0.0)));
            for (const auto& f : cs.B) B = std::max(B, f.max_abs());
            for (const auto& f : cs.dualB) dual = std::max(dual, f.max_abs());
        }
    l.add("chi_max", chi, "<=", chi_const_tol);
    l.add("A_bar_dev", abar, "<=", abar_const_tol);
    l.add("B_max", B, "<=", flux_const_tol);
    l.add("dualB_max", dual, "<=", flux_const_tol);
    return l;
}

Line harmonic_mean() {
    Line l;
    const double hm = harmonic_mean_oracle();
    for (int m : {1, 2}) {
        CoefficientPreset p = preset("cosine_1d", 1, m);
        const auto cs = solve_all(sample(p, 256), tight());
        const auto Dm = spectral::derivative(cs.chi[0], MultiIndex{m});
        double err = 0.0;
        for (int k = 0; k < 256; ++k) {
            const double exact = hm / (2.0 + std::cos(2.0 * pi * k / 256.0)) - 1.0;
            err += std::pow(Dm.component(0)[static_cast<std::size_t>(k)] - exact, 2) / 256.0;
        }
        const std::string tag = "m" + std::to_string(m);
        l.add(tag + "_A_bar_dev", std::abs(cs.A_bar[0] - hm), "<=", harmonic_tol);
        l.add(tag + "_corrector_L2", std::sqrt(err), "<=", harmonic_tol);
    }
    return l;
}

Line laminate() {
    Line l;
    const auto cs = solve_all(sample(preset("laminate_2d", 2, 1), 128), tight());
    const double hm = harmonic_mean_oracle();
    const int n = 128;
    const double e11 = laminate_fd_energy(n, 1.0, 0.0);
    const double e22 = laminate_fd_energy(n, 0.0, 1.0);
    const double e12 = 0.5 * (laminate_fd_energy(n, 1.0, 1.0) - e11 - e22);
    l.add("A11_vs_harmonic", std::abs(cs.a_bar(0, 0, 0, 0) - hm), "<=", laminate_tol);
    l.add("A22_vs_arithmetic", std::abs(cs.a_bar(1, 1, 0, 0) - 2.0), "<=", laminate_tol);
    l.add("A11_vs_fd", std::abs(cs.a_bar(0, 0, 0, 0) - e11), "<=", laminate_tol);
    l.add("A22_vs_fd", std::abs(cs.a_bar(1, 1, 0, 0) - e22), "<=", laminate_tol);
    l.add("A12_vs_fd", std::abs(0.5 * (cs.a_bar(0, 1, 0, 0) + cs.a_bar(1, 0, 0, 0)) - e12), "<=", laminate_tol);
    l.add("offdiag_max", std::max(std::abs(cs.a_bar(0, 1, 0, 0)), std::abs(cs.a_bar(1, 0, 0, 0))), "<=", laminate_tol);
    return l;
}

Line dual_identities() {
    std::vector<std::pair<CoefficientPreset, int>> suite;
    for (int d : {1, 2})
        for (int m : {1, 2}) {
            auto p = preset("constant", d, m);
            p.c = 1.7;
            suite.emplace_back(p, 16);
        }
    suite.emplace_back(preset("cosine_1d", 1, 1), 128);
    suite.emplace_back(preset("cosine_1d", 1, 2), 128);
    suite.emplace_back(preset("laminate_2d", 2, 1), 64);
    suite.emplace_back(preset("laminate_2d", 2, 2), 32);
    for (int m : {1, 2}) {
        auto p = preset("smoothed_checkerboard_2d", 2, m);
        p.contrast = 4.0;
        p.width = 0.25;
        suite.emplace_back(p, m == 1 ? 64 : 32);
    }
    auto skew = preset("smoothed_checkerboard_2d", 2, 1);
    skew.contrast = 3.0;
    skew.width = 0.3;
    skew.skew = 0.6;
    suite.emplace_back(skew, 32);

    double antisym = 0.0, dual = 0.0, mean = 0.0;
    for (const auto& [p, N] : suite) {
        const auto cs = solve_all(sample(p, N), tight());
        const std::size_t M = cs.slots();
        for (std::size_t g = 0; g < M; ++g)
            for (std::size_t a = 0; a < M; ++a)
                for (std::size_t b = 0; b < M; ++b) {
                    const auto x = cs.dual(g, a, b).values();
                    const auto y = cs.dual(a, g, b).values();
                    for (std::size_t k = 0; k < x.size(); ++k) antisym = std::max(antisym, std::abs(x[k] + y[k]));
                }
        dual = std::max(dual, cs.residuals.dual_identity);
        for (const auto& f : cs.B)
            for (int c = 0; c < f.components(); ++c) mean = std::max(mean, std::abs(f.mean(c)));
    }
    Line l;
    l.note("presets=" + std::to_string(suite.size()));
    l.add("antisymmetry", antisym, "<=", 0.0);
    l.add("dual_identity", dual, "<=", dual_tol);
    l.add("B_mean", mean, "<=", b_mean_tol);
    return l;
}

const ex::Assertion* find(const ex::Outcome& o, const std::string& name) {
    for (const auto& a : o.assertions)
        if (a.name == name) return &a;
    return nullptr;
}

void take(Line& l, const ex::Outcome& o, const std::string& name, const std::string& label) {
    const auto* a = find(o, name);
    if (!a) {
        l.pass = false;
        l.note(label + "=missing");
        return;
    }
    l.add(label, a->value, a->relation.c_str(), a->bound);
}

ex::Config sweep(const std::string& kind, std::vector<double> eps) {
    ex::Config c;
    c.kind = kind;
    c.eps = std::move(eps);
    ex::validate(c);
    return c;
}

std::vector<double> dyadic(int lo, int hi) {
    std::vector<double> e;
    for (int k = lo; k <= hi; k *= 2) e.push_back(1.0 / k);
    return e;
}

double refinement_drift(double coarse, double fine) { return std::abs(coarse / fine - 1.0); }

Line smoothing_suite() {
    Line l;
    const auto torus1 = [](const std::vector<double>& x) { return std::sin(2 * pi * x[0]) + 0.5 * std::cos(6 * pi * x[0]) + 0.25 * std::sin(10 * pi * x[0]); };
    const auto torus2 = [](const std::vector<double>& x) { return std::sin(2 * pi * x[0]) * std::cos(4 * pi * x[1]) + 0.3 * std::cos(2 * pi * (x[0] + x[1])); };
    const auto interval = [](const std::vector<double>& x) { return 0.3 + std::cos(3 * pi * x[0]) + 0.5 * std::sin(5 * pi * x[0]); };
    double approx = 0.0, osc = 0.0, layer = 0.0, inner = 0.0;
    for (int r : {8, 16, 32}) {
        const double eps = 1.0 / r;
        approx = std::max(approx, refinement_drift(smoothing_constants::approximation(sample_function(Grid::torus(1, 16 * r), torus1), eps),
                                                   smoothing_constants::approximation(sample_function(Grid::torus(1, 32 * r), torus1), eps)));
        const auto g = [](const std::vector<double>& y) { return std::cos(2 * pi * y[0]); };
        osc = std::max(osc, refinement_drift(smoothing_constants::oscillation(sample_function(Grid::torus(1, 16 * r), torus1), g, eps),
                                             smoothing_constants::oscillation(sample_function(Grid::torus(1, 32 * r), torus1), g, eps)));
        layer = std::max(layer, refinement_drift(smoothing_constants::boundary_layer(sample_function(Grid::interval(16 * r + 1), interval), eps),
                                                 smoothing_constants::boundary_layer(sample_function(Grid::interval(32 * r + 1), interval), eps)));
        inner = std::max(inner, refinement_drift(smoothing_constants::interior(sample_function(Grid::interval(16 * r + 1), interval), eps),
                                                 smoothing_constants::interior(sample_function(Grid::interval(32 * r + 1), interval), eps)));
    }
    for (int r : {4, 8}) {
        const double eps = 1.0 / r;
        approx = std::max(approx, refinement_drift(smoothing_constants::approximation(sample_function(Grid::torus(2, 8 * r), torus2), eps),
                                                   smoothing_constants::approximation(sample_function(Grid::torus(2, 16 * r), torus2), eps)));
    }
    l.add("approximation_drift", approx, "<=", refinement_band);
    l.add("oscillation_drift", osc, "<=", refinement_band);
    l.add("boundary_layer_drift", layer, "<=", refinement_band);
    l.add("interior_drift", inner, "<=", refinement_band);
    return l;
}

std::string csv_text(const ex::Outcome& o) {
    std::string s;
    for (const auto& [name, body] : report::csv_files(o)) s += name + "\n" + body;
    for (const auto& [k, v] : o.scalars) s += k + "=" + report::num(v) + "\n";
    return s;
}

Line determinism(int jobs) {
    Line l;
    auto rates = sweep("rates", dyadic(8, 32));
    rates.domain = "both";
    auto excess = sweep("excess", dyadic(32, 64));
    auto probes = sweep("probes", dyadic(16, 64));
    auto probes2 = sweep("probes", dyadic(4, 8));
    probes2.preset = preset("smoothed_checkerboard_2d", 2, 1);
    probes2.N = 32;
    int mismatches = 0, files = 0;
    for (const auto* c : {&rates, &excess, &probes, &probes2}) {
        const auto a = csv_text(ex::run(*c, 1));
        const auto b = csv_text(ex::run(*c, jobs));
        const auto again = csv_text(ex::run(*c, jobs));
        mismatches += (a != b) + (b != again);
        files += 1;
    }
    l.note("configs=" + std::to_string(files) + " jobs=1," + std::to_string(jobs));
    l.add("mismatches", mismatches, "<=", 0.0);
    return l;
}

}  // namespace

int main() {
    const int jobs = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    int failed = 0;
    auto report = [&](int id, const std::string& title, const std::function<Line()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Line l;
        try {
            l = fn();
        } catch (const std::exception& e) {
            l.pass = false;
            l.note(std::string("error: ") + e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !l.pass;
        std::printf("%s %2d %s: %s (%.1fs)\n", l.pass ? "PASS" : "FAIL", id, title.c_str(), l.detail.c_str(), s);
        std::fflush(stdout);
    };

    report(1, "constant-coefficient degeneracy", constant_degeneracy);
    report(2, "harmonic-mean oracle", harmonic_mean);
    report(3, "laminate oracle", laminate);
    report(4, "dual-corrector identities", dual_identities);

    ex::Outcome rates;
    bool have_rates = false;
    auto from_rates = [&](std::vector<std::pair<std::string, std::string>> names) {
        return [&rates, &have_rates, &jobs, names] {
            if (!have_rates) {
                auto c = sweep("rates", dyadic(8, 128));
                c.domain = "both";
                have_rates = true;
                rates = ex::run_rates(c, jobs);
            }
            Line l;
            for (const auto& [n, label] : names) take(l, rates, n, label);
            return l;
        };
    };
    report(5, "L2 convergence rate", from_rates({{"l2 slope", "slope"}, {"l2 r2", "r2"}, {"l2 refinement certificate", "certificate"}}));
    report(6, "remainder rate", from_rates({{"w_interval slope", "interval_slope"}, {"w_interval refinement certificate", "interval_certificate"}, {"w_torus slope", "torus_slope"}, {"w_torus refinement certificate", "torus_certificate"}}));

    ex::Outcome probes_m2;
    report(7, "large-scale Lipschitz uniformity", [&] {
        probes_m2 = ex::run_probes(sweep("probes", dyadic(16, 256)), jobs);
        Line l;
        take(l, probes_m2, "lipschitz_sup max/min", "sup_spread");
        return l;
    });
    report(8, "excess decay", [&] {
        const auto o = ex::run_excess(sweep("excess", dyadic(32, 128)), jobs);
        Line l;
        take(l, o, "halving rows failing", "halving_failures");
        take(l, o, "certificate rows failing", "certificate_failures");
        take(l, o, "C_eps max/min", "C_eps_spread");
        for (const auto& [k, v] : o.scalars)
            if (k == "C_hat") l.note("C_hat=" + std::to_string(v));
        return l;
    });
    report(9, "reverse Holder", [&] {
        Line l;
        if (probes_m2.assertions.empty()) throw std::runtime_error("1D m=2 probes unavailable");
        take(l, probes_m2, "reverse_holder p=3 max/min", "m2_p3_spread");
        take(l, probes_m2, "reverse_holder p=4 max/min", "m2_p4_spread");
        auto c1 = sweep("probes", dyadic(16, 256));
        c1.preset = preset("cosine_1d", 1, 1);
        const auto o1 = ex::run_probes(c1, jobs);
        take(l, o1, "reverse_holder p=3 max/min", "m1_p3_spread");
        take(l, o1, "reverse_holder p=4 max/min", "m1_p4_spread");
        auto c2 = sweep("probes", dyadic(4, 32));
        c2.preset = preset("smoothed_checkerboard_2d", 2, 1);
        c2.N = 32;
        const auto o2 = ex::run_probes(c2, jobs);
        take(l, o2, "reverse_holder p=3 max/min", "2d_p3_spread");
        take(l, o2, "reverse_holder p=4 max/min", "2d_p4_spread");
        return l;
    });
    report(10, "smoothing-operator constants", smoothing_suite);
    report(11, "determinism", [&] { return determinism(jobs); });

    std::printf("%d of 11 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
