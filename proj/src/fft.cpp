#include "qholo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace qholo::fft {

namespace {

// FFTW planning is not thread-safe; execution of a ready plan is. Plans are
// created with FFTW_ESTIMATE (input-independent, deterministic algorithm
// choice) and FFTW_UNALIGNED so they can run on any caller buffer.
class PlanCache {
public:
    fftw_plan get(int nx, int ny, int sign) {
        const auto key = std::make_tuple(nx, ny, sign);
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<fftw_complex> dummy(static_cast<std::size_t>(nx) * ny);
        fftw_plan p;
        if (ny == 1)
            p = fftw_plan_dft_1d(nx, dummy.data(), dummy.data(), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        else
            p = fftw_plan_dft_2d(ny, nx, dummy.data(), dummy.data(), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

} // namespace

void transform(const GridSpec& g, std::complex<double>* data, int sign) {
    fftw_plan p = cache().get(g.nx, g.ndim == 2 ? g.ny : 1, sign);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

} // namespace qholo::fft
