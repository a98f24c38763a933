#include "hohom/config.hpp"
#include "hohom/report.hpp"
#include "hohom/version.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

using namespace hohom;
using json = nlohmann::json;

namespace {

enum Exit { ok = 0, acceptance = 1, config = 2, solver = 3 };

int fail(Exit code, const std::string& cls, const std::string& reason) {
    std::string r = reason;
    for (char& ch : r)
        if (ch == '\n' || ch == '"') ch = ' ';
    std::cerr << "hohom: exit=" << code << " class=" << cls << " reason=\"" << r << "\"\n";
    return code;
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json versions() {
    return {{"hohom", HOHOM_VERSION},
            {"fftw", std::string(fftw_version)},
            {"boost", BOOST_LIB_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}};
}

json manifest(const experiments::Config& c, const std::string& config_text, const experiments::Outcome& o, double seconds, int jobs, const std::string& started) {
    json m;
    m["kind"] = c.kind;
    m["config"] = config_text;
    m["seed"] = c.seed;
    m["jobs"] = jobs;
    m["versions"] = versions();
    m["started"] = started;
    m["wall_seconds"] = seconds;
    for (const auto& [k, v] : o.scalars) m["scalars"][k] = v;
    if (c.kind == "cell") {
        json a = json::array();
        for (const auto& [k, v] : o.scalars)
            if (k.rfind("A_bar[", 0) == 0) a.push_back(v);
        m["A_bar"] = a;
    }
    m["certificates"] = json::object();
    for (const auto& cert : o.certificates) {
        json e;
        for (const auto& [k, v] : cert.values) e[k] = v;
        e["ok"] = cert.ok;
        m["certificates"][cert.id] = e;
    }
    m["fits"] = json::array();
    for (const auto& f : o.fits) {
        json e{{"group", f.group}, {"points", f.points}};
        if (f.error.empty()) {
            e["slope"] = f.fit.slope;
            e["intercept"] = f.fit.intercept;
            e["r2"] = f.fit.r2;
        } else {
            e["refused"] = f.error;
        }
        m["fits"].push_back(e);
    }
    m["assertions"] = json::array();
    for (const auto& a : o.assertions) m["assertions"].push_back({{"name", a.name}, {"value", a.value}, {"relation", a.relation}, {"bound", a.bound}, {"pass", a.pass}});
    m["notices"] = o.notices;
    m["passed"] = o.passed();
    return m;
}

int run(const std::string& sub, const std::string& config_path, const std::string& out_flag, int jobs, std::optional<std::uint64_t> seed) {
    experiments::ParsedConfig pc;
    try {
        pc = experiments::load_config(config_path);
        auto& c = pc.config;
        if (c.kind.empty()) c.kind = sub;
        if (sub != "validate-config" && c.kind != sub) throw experiments::ConfigError("config kind '" + c.kind + "' does not match subcommand '" + sub + "'");
        if (seed) c.seed = *seed;
        experiments::validate(c);
    } catch (const experiments::ConfigError& e) {
        return fail(config, "config", e.what());
    }
    const auto& c = pc.config;
    if (sub == "validate-config") {
        std::cout << "valid kind=" << c.kind << " preset=" << c.preset.kind << " eps=" << c.eps.size() << "\n";
        return ok;
    }
    const std::filesystem::path out = out_flag.empty() ? std::filesystem::path(pc.out) : std::filesystem::path(out_flag);
    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    experiments::Outcome o;
    try {
        std::filesystem::create_directories(out);
        o = experiments::run(c, jobs, out / "cache");
    } catch (const experiments::ConfigError& e) {
        return fail(config, "config", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(config, "config", e.what());
    } catch (const SolverError& e) {
        return fail(solver, "solver", e.what());
    } catch (const ResolutionError& e) {
        return fail(solver, "resolution", e.what());
    } catch (const std::exception& e) {
        return fail(solver, "runtime", e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        for (const auto& [name, body] : report::csv_files(o)) report::write_atomic(out / name, body);
        report::write_atomic(out / "manifest.json", manifest(c, read_text(config_path), o, seconds, jobs, started).dump(2) + "\n");
    } catch (const std::exception& e) {
        return fail(solver, "io", e.what());
    }
    for (const auto& [k, v] : o.scalars)
        if (k.rfind("A_bar", 0) == 0) std::cout << k << "=" << report::num(v) << "\n";
    for (const auto& f : o.fits) {
        if (f.error.empty()) std::cout << "fit " << f.group << " slope=" << report::num(f.fit.slope) << " r2=" << report::num(f.fit.r2) << "\n";
        else std::cout << "fit " << f.group << " refused: " << f.error << "\n";
    }
    for (const auto& a : o.assertions) std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " " << report::num(a.value) << " " << a.relation << " " << report::num(a.bound) << "\n";
    if (!o.passed()) {
        for (const auto& a : o.assertions)
            if (!a.pass) return fail(acceptance, "acceptance", a.name + " = " + report::num(a.value) + " violates " + a.relation + " " + report::num(a.bound));
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic homogenization experiments for 2m-order elliptic systems"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::uint64_t seed = 0;
    for (const char* name : {"cell", "rates", "excess", "probes", "validate-config"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides experiment.out)");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "random seed (overrides experiment.seed)");
    }
    app.get_subcommand("validate-config")->description("parse and check a configuration");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return fail(config, "usage", e.what());
    }
    const auto* sub = app.get_subcommands().front();
    std::optional<std::uint64_t> s;
    if (sub->count("--seed")) s = seed;
    return run(sub->get_name(), config_path, out_dir, jobs, s);
}
