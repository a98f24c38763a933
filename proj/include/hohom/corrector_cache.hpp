#pragma once

#include "hohom/cellproblem.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace hohom {

/// Binary corrector cache:
///   "H2MC" | version u32 | d, m, n, N u32   (little-endian)
///   then little-endian float64 blocks: chi, chi_star, A_bar, B, dualB,
///   each in canonical multi-index order and row-major in the grid.
/// Field component order inside a block follows CorrectorSet.
namespace cache {

inline constexpr std::array<char, 4> magic = {'H', '2', 'M', 'C'};
inline constexpr std::uint32_t version = 1;

static_assert(std::endian::native == std::endian::little, "corrector cache assumes a little-endian host");

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("corrector cache: truncated header");
    return v;
}
inline void put_fields(std::ostream& os, const std::vector<GridFunction>& fields) {
    for (const auto& f : fields) os.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.values().size() * sizeof(double)));
}
inline void get_fields(std::istream& is, std::vector<GridFunction>& fields, std::size_t count, const Grid& g, int comps) {
    fields.clear();
    for (std::size_t k = 0; k < count; ++k) {
        GridFunction f(g, comps);
        is.read(reinterpret_cast<char*>(f.values().data()), static_cast<std::streamsize>(f.values().size() * sizeof(double)));
        if (!is) throw std::runtime_error("corrector cache: truncated payload");
        f.zero_mean = true;
        fields.push_back(std::move(f));
    }
}

}  // namespace detail

inline void write(const CorrectorSet& cs, std::ostream& os) {
    os.write(magic.data(), magic.size());
    detail::put_u32(os, version);
    for (int v : {cs.d, cs.m, cs.n, cs.N}) detail::put_u32(os, static_cast<std::uint32_t>(v));
    detail::put_fields(os, cs.chi);
    detail::put_fields(os, cs.chi_star);
    os.write(reinterpret_cast<const char*>(cs.A_bar.data()), static_cast<std::streamsize>(cs.A_bar.size() * sizeof(double)));
    detail::put_fields(os, cs.B);
    detail::put_fields(os, cs.dualB);
    if (!os) throw std::runtime_error("corrector cache: write failed");
}

inline CorrectorSet read(std::istream& is) {
    std::array<char, 4> mg{};
    is.read(mg.data(), mg.size());
    if (!is || mg != magic) throw std::runtime_error("corrector cache: bad magic");
    if (detail::get_u32(is) != version) throw std::runtime_error("corrector cache: unsupported version");
    CorrectorSet cs;
    cs.d = static_cast<int>(detail::get_u32(is));
    cs.m = static_cast<int>(detail::get_u32(is));
    cs.n = static_cast<int>(detail::get_u32(is));
    cs.N = static_cast<int>(detail::get_u32(is));
    if (cs.d < 1 || cs.m < 1 || cs.n < 1 || cs.N < 4 || cs.d > 3) throw std::runtime_error("corrector cache: implausible header");
    cs.indices = enumerate(cs.d, cs.m);
    const std::size_t M = cs.indices.size();
    const auto n = static_cast<std::size_t>(cs.n);
    const Grid g = Grid::torus(cs.d, cs.N);
    detail::get_fields(is, cs.chi, M * n, g, cs.n);
    detail::get_fields(is, cs.chi_star, M * n, g, cs.n);
    cs.A_bar.resize(M * M * n * n);
    is.read(reinterpret_cast<char*>(cs.A_bar.data()), static_cast<std::streamsize>(cs.A_bar.size() * sizeof(double)));
    if (!is) throw std::runtime_error("corrector cache: truncated A_bar");
    detail::get_fields(is, cs.B, M * M, g, cs.n * cs.n);
    detail::get_fields(is, cs.dualB, M * M * M, g, cs.n * cs.n);
    return cs;
}

inline void save(const CorrectorSet& cs, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("corrector cache: cannot open " + tmp);
        write(cs, os);
    }
    std::filesystem::rename(tmp, path);
}

inline CorrectorSet load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("corrector cache: cannot open " + path.string());
    return read(is);
}

}  // namespace cache

}  // namespace hohom
