#include "tlf/rng.hpp"

#include <cmath>
#include <numbers>

namespace tlf {

double Lcg64::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

ImageTensor random_uniform(Shape shape, Lcg64& rng, double lo, double hi) {
    ImageTensor out(shape);
    for (double& v : out.values()) v = lo + (hi - lo) * rng.uniform();
    return out;
}

ImageTensor random_normal(Shape shape, Lcg64& rng) {
    ImageTensor out(shape);
    for (double& v : out.values()) v = rng.normal();
    return out;
}

ImageTensor add_gaussian_noise(const ImageTensor& x, double percent, std::uint64_t seed) {
    Lcg64 rng(seed);
    ImageTensor out = x;
    const double sigma = percent / 100.0;
    for (double& v : out.values()) v += sigma * rng.normal();
    return out;
}

}  // namespace tlf
