#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace hohom::fft {

namespace detail {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// FFTW planning is not thread-safe; execution through the new-array interface is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(const std::vector<int>& dims, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(dims, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second.get();
        std::size_t total = 1;
        for (int n : dims) total *= static_cast<std::size_t>(n);
        std::vector<std::complex<double>> scratch(total);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (p == nullptr) throw std::runtime_error("fftw: planning failed");
        auto [it, ok] = plans_.emplace(std::move(key), PlanHandle(p));
        return it->second.get();
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::vector<int>, int>, PlanHandle> plans_;
};

inline void execute(std::span<std::complex<double>> data, const std::vector<int>& dims, int sign) {
    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    if (data.size() != total) throw std::invalid_argument("fft: buffer size does not match dims");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(PlanCache::instance().get(dims, sign), buf, buf);
}

}  // namespace detail

/// In-place unnormalized forward DFT over a row-major array with the given dims.
inline void forward(std::span<std::complex<double>> data, const std::vector<int>& dims) {
    detail::execute(data, dims, FFTW_FORWARD);
}

/// In-place inverse DFT including the 1/N normalization.
inline void inverse(std::span<std::complex<double>> data, const std::vector<int>& dims) {
    detail::execute(data, dims, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

}  // namespace hohom::fft
