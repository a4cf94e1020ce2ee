#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace tlf::detail {
namespace {

struct PlanPair {
    fftw_plan forward;
    fftw_plan inverse;
};

// Plan creation is not thread-safe in FFTW; execution with the new-array
// interface is. Plans are created once per size and never destroyed.
PlanPair plans_for(std::size_t h, std::size_t w) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, std::size_t>, PlanPair> cache;

    std::lock_guard lock(mutex);
    auto it = cache.find({h, w});
    if (it != cache.end()) return it->second;

    const int ih = static_cast<int>(h);
    const int iw = static_cast<int>(w);
    std::vector<double> real(h * w);
    std::vector<Complex> spec(h * (w / 2 + 1));
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p{fftw_plan_dft_r2c_2d(ih, iw, real.data(), cspec, flags),
               fftw_plan_dft_c2r_2d(ih, iw, cspec, real.data(), flags)};
    cache.emplace(std::make_pair(h, w), p);
    return p;
}

}  // namespace

Fft2d::Fft2d(std::size_t height, std::size_t width) : height_(height), width_(width) {
    const PlanPair p = plans_for(height, width);
    forward_plan_ = p.forward;
    inverse_plan_ = p.inverse;
}

void Fft2d::forward(std::span<const double> plane, std::span<Complex> spectrum) const {
    // r2c does not modify its input.
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(plane.data()),
                         reinterpret_cast<fftw_complex*>(spectrum.data()));
}

void Fft2d::inverse(std::vector<Complex> spectrum, std::span<double> plane) const {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(spectrum.data()),
                         plane.data());
    const double scale = 1.0 / static_cast<double>(height_ * width_);
    for (double& v : plane) v *= scale;
}

}  // namespace tlf::detail
