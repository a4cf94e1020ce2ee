#include "tlf/metrics.hpp"

#include <array>
#include <cmath>

#include "tlf/errors.hpp"

namespace tlf {

namespace {

double mse_to_psnr(double mse) {
    if (mse <= 1e-10) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow * kWindow> gaussian_window() {
    std::array<double, kWindow * kWindow> w{};
    double total = 0.0;
    for (int r = 0; r < kWindow; ++r)
        for (int c = 0; c < kWindow; ++c) {
            const double dr = r - kWindow / 2, dc = c - kWindow / 2;
            w[r * kWindow + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * kSigma * kSigma));
            total += w[r * kWindow + c];
        }
    for (double& v : w) v /= total;
    return w;
}

}  // namespace

double psnr(const ImageTensor& x, const ImageTensor& ref) {
    require_same_shape(x, ref, "psnr");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - ref[i];
        acc += d * d;
    }
    return mse_to_psnr(acc / static_cast<double>(x.size()));
}

double psnr_masked(const ImageTensor& x, const ImageTensor& ref, const ImageTensor& region) {
    require_same_shape(x, ref, "psnr_masked");
    require_same_shape(x, region, "psnr_masked");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (region[i] == 0.0) continue;
        const double d = x[i] - ref[i];
        acc += d * d;
        ++count;
    }
    if (count == 0) throw ValidationError("psnr_masked: empty region");
    return mse_to_psnr(acc / static_cast<double>(count));
}

ImageTensor to_gray(const ImageTensor& x) {
    ImageTensor g(Shape{x.height(), x.width(), 1});
    for (std::size_t c = 0; c < x.channels(); ++c) {
        auto plane = x.channel(c);
        for (std::size_t i = 0; i < plane.size(); ++i) g[i] += plane[i];
    }
    g *= 1.0 / static_cast<double>(x.channels());
    return g;
}

double ssim(const ImageTensor& x, const ImageTensor& ref) {
    require_same_shape(x, ref, "ssim");
    if (x.height() < kWindow || x.width() < kWindow)
        throw ValidationError("ssim needs images of at least 11x11 pixels, got " + to_string(x.shape()));
    const ImageTensor a = x.channels() == 1 ? x : to_gray(x);
    const ImageTensor b = ref.channels() == 1 ? ref : to_gray(ref);
    static const auto window = gaussian_window();
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);

    const std::size_t rows = a.height() - kWindow + 1;
    const std::size_t cols = a.width() - kWindow + 1;
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int r = 0; r < kWindow; ++r)
                for (int c = 0; c < kWindow; ++c) {
                    const double w = window[r * kWindow + c];
                    const double u = a.at(i + r, j + c), v = b.at(i + r, j + c);
                    mx += w * u;
                    my += w * v;
                    sxx += w * u * u;
                    syy += w * v * v;
                    sxy += w * u * v;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return total / static_cast<double>(rows * cols);
}

double total_variation(const ImageTensor& x) {
    double acc = 0.0;
    const std::size_t H = x.height(), W = x.width();
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < W; ++j) {
                acc += std::abs(x.at(i, (j + 1) % W, c) - x.at(i, j, c));
                acc += std::abs(x.at((i + 1) % H, j, c) - x.at(i, j, c));
            }
    return acc;
}

}  // namespace tlf
