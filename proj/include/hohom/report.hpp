#pragma once

#include "hohom/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unistd.h>

namespace hohom::report {

/// Shortest text that reads back to the same double (%.17g).
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string rates_csv(const std::vector<experiments::RateRow>& rows) {
    std::string s = "experiment,eps,norm_kind,error,slope_group,cert\n";
    for (const auto& r : rows) s += r.experiment + ',' + num(r.eps) + ',' + r.norm_kind + ',' + num(r.error) + ',' + r.slope_group + ',' + r.cert + '\n';
    return s;
}

inline std::string excess_csv(const std::vector<experiments::ExcessCsvRow>& rows) {
    std::string s = "eps,r,delta,H_r,H_delta_r,I_2r,h_r,pass,cert\n";
    for (const auto& [r, cert] : rows)
        s += num(r.eps) + ',' + num(r.r) + ',' + num(r.delta) + ',' + num(r.H_r) + ',' + num(r.H_delta_r) + ',' + num(r.I_2r) + ',' + num(r.h_r) + ',' + (r.pass ? "1" : "0") + ',' + cert + '\n';
    return s;
}

inline std::string probes_csv(const std::vector<experiments::ProbeRow>& rows) {
    std::string s = "probe,eps,p_or_r,value,cert\n";
    for (const auto& r : rows) s += r.probe + ',' + num(r.eps) + ',' + num(r.p_or_r) + ',' + num(r.value) + ',' + r.cert + '\n';
    return s;
}

/// Writes `content` to a temporary file next to `path` and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
        os.flush();
        if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// CSV files of an outcome, keyed by file name; experiments without rows of a kind omit that file.
inline std::vector<std::pair<std::string, std::string>> csv_files(const experiments::Outcome& o) {
    std::vector<std::pair<std::string, std::string>> f;
    if (!o.rates.empty()) f.emplace_back("rates.csv", rates_csv(o.rates));
    if (!o.excess.empty()) f.emplace_back("excess.csv", excess_csv(o.excess));
    if (!o.probes.empty()) f.emplace_back("probes.csv", probes_csv(o.probes));
    return f;
}

}  // namespace hohom::report
