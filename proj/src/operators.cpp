#include "tlf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "tlf/errors.hpp"
#include "tlf/rng.hpp"

namespace tlf {

using detail::Complex;
using detail::Fft2d;

// ---------------------------------------------------------------------------
// BlurKernel

BlurKernel::BlurKernel(std::size_t rows, std::size_t cols, std::vector<double> taps, bool normalize)
    : rows_(rows), cols_(cols), taps_(std::move(taps)) {
    if (rows == 0 || cols == 0 || rows % 2 == 0 || cols % 2 == 0)
        throw ValidationError("kernel dimensions must be odd, got " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    if (taps_.size() != rows * cols) throw ValidationError("kernel tap count does not match its dimensions");
    for (double t : taps_)
        if (!std::isfinite(t)) throw ValidationError("kernel taps must be finite");
    if (normalize) {
        const double total = std::accumulate(taps_.begin(), taps_.end(), 0.0);
        if (std::abs(total) < 1e-12) throw ValidationError("kernel taps sum to zero; cannot normalize");
        for (double& t : taps_) t /= total;
    }
}

BlurKernel BlurKernel::gaussian(std::size_t size, double sigma) {
    if (sigma <= 0.0) throw ConfigError("gaussian kernel needs sigma > 0");
    std::vector<double> taps(size * size);
    const double c = static_cast<double>(size / 2);
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t q = 0; q < size; ++q) {
            const double dr = static_cast<double>(r) - c;
            const double dq = static_cast<double>(q) - c;
            taps[r * size + q] = std::exp(-(dr * dr + dq * dq) / (2.0 * sigma * sigma));
        }
    return BlurKernel(size, size, std::move(taps));
}

BlurKernel BlurKernel::box(std::size_t size) { return BlurKernel(size, size, std::vector<double>(size * size, 1.0)); }

BlurKernel BlurKernel::delta() { return BlurKernel(1, 1, {1.0}); }

// ---------------------------------------------------------------------------
// LinearOperator

struct LinearOperator::Impl {
    OperatorKind kind;
    Shape in;
    Shape out;
    std::optional<BlurKernel> kernel;
    std::vector<Complex> transfer;  // convolution only
    ImageTensor weights;            // mask only
    int levels = 0;
    std::vector<LinearOperator> factors;
};

namespace {

std::vector<Complex> kernel_transfer(const BlurKernel& k, const Shape& s) {
    if (k.rows() > s.height || k.cols() > s.width || k.rows() > std::min(s.height, s.width) ||
        k.cols() > std::min(s.height, s.width))
        throw ShapeError("kernel " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                         " exceeds image " + to_string(s));
    std::vector<double> plane(s.plane(), 0.0);
    const auto ch = static_cast<std::ptrdiff_t>(k.rows() / 2);
    const auto cw = static_cast<std::ptrdiff_t>(k.cols() / 2);
    const auto H = static_cast<std::ptrdiff_t>(s.height);
    const auto W = static_cast<std::ptrdiff_t>(s.width);
    for (std::size_t a = 0; a < k.rows(); ++a)
        for (std::size_t b = 0; b < k.cols(); ++b) {
            const std::ptrdiff_t r = ((static_cast<std::ptrdiff_t>(a) - ch) % H + H) % H;
            const std::ptrdiff_t c = ((static_cast<std::ptrdiff_t>(b) - cw) % W + W) % W;
            plane[static_cast<std::size_t>(r * W + c)] += k.tap(a, b);
        }
    return Fft2d(s.height, s.width).forward(plane);
}

std::vector<Complex> gradient_transfer(const Shape& s, bool horizontal) {
    const std::size_t hw = s.width / 2 + 1;
    std::vector<Complex> t(s.height * hw);
    for (std::size_t m = 0; m < s.height; ++m)
        for (std::size_t l = 0; l < hw; ++l) {
            const double theta = horizontal ? 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(s.width)
                                            : 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(s.height);
            t[m * hw + l] = Complex(std::cos(theta) - 1.0, std::sin(theta));
        }
    return t;
}

void require_shape(const ImageTensor& x, const Shape& expected, const char* what) {
    if (x.shape() != expected)
        throw ShapeError(std::string(what) + ": expected " + to_string(expected) + ", got " + to_string(x.shape()));
}

ImageTensor filter_planes(const ImageTensor& x, const std::vector<Complex>& transfer, bool conjugate) {
    const Fft2d fft(x.height(), x.width());
    ImageTensor out(x.shape());
    std::vector<Complex> spec(fft.spectrum_size());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        fft.forward(x.channel(c), spec);
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= conjugate ? std::conj(transfer[i]) : transfer[i];
        fft.inverse(spec, out.channel(c));
    }
    return out;
}

ImageTensor gradient_apply(const ImageTensor& x, bool horizontal) {
    ImageTensor out(x.shape());
    const std::size_t H = x.height(), W = x.width();
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < W; ++j) {
                const double next = horizontal ? x.at(i, (j + 1) % W, c) : x.at((i + 1) % H, j, c);
                out.at(i, j, c) = next - x.at(i, j, c);
            }
    return out;
}

ImageTensor gradient_adjoint(const ImageTensor& y, bool horizontal) {
    ImageTensor out(y.shape());
    const std::size_t H = y.height(), W = y.width();
    for (std::size_t c = 0; c < y.channels(); ++c)
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < W; ++j) {
                const double prev = horizontal ? y.at(i, (j + W - 1) % W, c) : y.at((i + H - 1) % H, j, c);
                out.at(i, j, c) = prev - y.at(i, j, c);
            }
    return out;
}

bool is_wavelet(OperatorKind k) { return k == OperatorKind::wavelet_forward || k == OperatorKind::wavelet_inverse; }

}  // namespace

LinearOperator LinearOperator::identity(Shape shape) {
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::identity;
    impl->in = impl->out = shape;
    return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::convolution(const BlurKernel& kernel, Shape shape) {
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::convolution;
    impl->in = impl->out = shape;
    impl->transfer = kernel_transfer(kernel, shape);
    impl->kernel = kernel;
    return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::mask(ImageTensor weights) {
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::mask;
    impl->in = impl->out = weights.shape();
    impl->weights = std::move(weights);
    return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::gradient_h(Shape shape) {
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::gradient_h;
    impl->in = impl->out = shape;
    return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::gradient_v(Shape shape) {
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::gradient_v;
    impl->in = impl->out = shape;
    return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::wavelet_forward(Shape shape, int levels) {
    // Validate eagerly so a bad shape fails at build time, not mid-solve.
    (void)tlf::wavelet_forward(ImageTensor(Shape{shape.height, shape.width, 1}), levels);
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::wavelet_forward;
    impl->in = impl->out = shape;
    impl->levels = levels;
    return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::wavelet_inverse(Shape shape, int levels) {
    (void)tlf::wavelet_forward(ImageTensor(Shape{shape.height, shape.width, 1}), levels);
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::wavelet_inverse;
    impl->in = impl->out = shape;
    impl->levels = levels;
    return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::compose(std::vector<LinearOperator> factors) {
    if (factors.empty()) throw ConfigError("composition needs at least one factor");
    for (std::size_t i = 0; i + 1 < factors.size(); ++i)
        if (factors[i].input_shape() != factors[i + 1].output_shape())
            throw ShapeError("composition factors have incompatible shapes");
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::composition;
    impl->in = factors.back().input_shape();
    impl->out = factors.front().output_shape();
    impl->factors = std::move(factors);
    return LinearOperator(std::move(impl));
}

OperatorKind LinearOperator::kind() const noexcept { return impl_->kind; }
const Shape& LinearOperator::input_shape() const noexcept { return impl_->in; }
const Shape& LinearOperator::output_shape() const noexcept { return impl_->out; }
const BlurKernel* LinearOperator::kernel() const noexcept { return impl_->kernel ? &*impl_->kernel : nullptr; }
const ImageTensor* LinearOperator::mask_weights() const noexcept {
    return impl_->kind == OperatorKind::mask ? &impl_->weights : nullptr;
}
int LinearOperator::wavelet_levels() const noexcept { return impl_->levels; }
const std::vector<LinearOperator>& LinearOperator::factors() const noexcept { return impl_->factors; }

bool LinearOperator::is_circulant() const noexcept {
    switch (impl_->kind) {
        case OperatorKind::identity:
        case OperatorKind::convolution:
        case OperatorKind::gradient_h:
        case OperatorKind::gradient_v:
            return true;
        case OperatorKind::composition:
            return std::all_of(impl_->factors.begin(), impl_->factors.end(),
                               [](const LinearOperator& f) { return f.is_circulant(); });
        default:
            return false;
    }
}

std::optional<std::vector<Complex>> LinearOperator::transfer_function() const {
    const Shape& s = impl_->in;
    const std::size_t n = s.height * (s.width / 2 + 1);
    switch (impl_->kind) {
        case OperatorKind::identity:
            return std::vector<Complex>(n, Complex(1.0, 0.0));
        case OperatorKind::convolution:
            return impl_->transfer;
        case OperatorKind::gradient_h:
            return gradient_transfer(s, true);
        case OperatorKind::gradient_v:
            return gradient_transfer(s, false);
        case OperatorKind::composition: {
            std::vector<Complex> t(n, Complex(1.0, 0.0));
            for (const auto& f : impl_->factors) {
                auto ft = f.transfer_function();
                if (!ft) return std::nullopt;
                for (std::size_t i = 0; i < n; ++i) t[i] *= (*ft)[i];
            }
            return t;
        }
        default:
            return std::nullopt;
    }
}

std::optional<double> LinearOperator::exact_norm_sq() const {
    switch (impl_->kind) {
        case OperatorKind::wavelet_forward:
        case OperatorKind::wavelet_inverse:
            return 1.0;
        case OperatorKind::mask: {
            double m = 0.0;
            for (double w : impl_->weights.values()) m = std::max(m, w * w);
            return m;
        }
        case OperatorKind::composition: {
            // Orthonormal factors at either end leave the spectral norm unchanged.
            std::vector<LinearOperator> core = impl_->factors;
            while (!core.empty() && is_wavelet(core.front().kind())) core.erase(core.begin());
            while (!core.empty() && is_wavelet(core.back().kind())) core.pop_back();
            if (core.empty()) return 1.0;
            if (core.size() == 1) return core.front().exact_norm_sq();
            const LinearOperator inner = compose(std::move(core));
            if (!inner.is_circulant()) return std::nullopt;
            return inner.exact_norm_sq();
        }
        default: {
            auto t = transfer_function();
            if (!t) return std::nullopt;
            double m = 0.0;
            for (const auto& v : *t) m = std::max(m, std::norm(v));
            return m;
        }
    }
}

ImageTensor LinearOperator::apply(const ImageTensor& x) const {
    require_shape(x, impl_->in, "LinearOperator::apply");
    switch (impl_->kind) {
        case OperatorKind::identity:
            return x;
        case OperatorKind::convolution:
            return filter_planes(x, impl_->transfer, false);
        case OperatorKind::mask: {
            ImageTensor out = x;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] *= impl_->weights[i];
            return out;
        }
        case OperatorKind::gradient_h:
            return gradient_apply(x, true);
        case OperatorKind::gradient_v:
            return gradient_apply(x, false);
        case OperatorKind::wavelet_forward:
            return tlf::wavelet_forward(x, impl_->levels);
        case OperatorKind::wavelet_inverse:
            return tlf::wavelet_inverse(x, impl_->levels);
        case OperatorKind::composition: {
            ImageTensor y = x;
            for (auto it = impl_->factors.rbegin(); it != impl_->factors.rend(); ++it) y = it->apply(y);
            return y;
        }
    }
    return x;
}

ImageTensor LinearOperator::adjoint(const ImageTensor& y) const {
    require_shape(y, impl_->out, "LinearOperator::adjoint");
    switch (impl_->kind) {
        case OperatorKind::identity:
            return y;
        case OperatorKind::convolution:
            return filter_planes(y, impl_->transfer, true);
        case OperatorKind::mask:
            return apply(y);
        case OperatorKind::gradient_h:
            return gradient_adjoint(y, true);
        case OperatorKind::gradient_v:
            return gradient_adjoint(y, false);
        case OperatorKind::wavelet_forward:
            return tlf::wavelet_inverse(y, impl_->levels);
        case OperatorKind::wavelet_inverse:
            return tlf::wavelet_forward(y, impl_->levels);
        case OperatorKind::composition: {
            ImageTensor x = y;
            for (const auto& f : impl_->factors) x = f.adjoint(x);
            return x;
        }
    }
    return y;
}

ImageTensor apply(const LinearOperator& op, const ImageTensor& x) { return op.apply(x); }
ImageTensor adjoint(const LinearOperator& op, const ImageTensor& y) { return op.adjoint(y); }

// ---------------------------------------------------------------------------
// Haar wavelet

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_dyadic(const Shape& s, int levels) {
    if (levels < 0) throw ShapeError("wavelet levels must be nonnegative");
    const std::size_t block = std::size_t{1} << levels;
    if (s.height % block != 0 || s.width % block != 0)
        throw ShapeError("wavelet with " + std::to_string(levels) + " levels needs dimensions divisible by " +
                         std::to_string(block) + ", got " + to_string(s));
}

// One analysis level on the top-left rows x cols block of a plane with row stride `stride`.
void haar_level_forward(std::span<double> p, std::size_t stride, std::size_t rows, std::size_t cols,
                        std::vector<double>& tmp) {
    const std::size_t hc = cols / 2, hr = rows / 2;
    tmp.resize(std::max(rows, cols));
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = &p[r * stride];
        for (std::size_t j = 0; j < hc; ++j) {
            tmp[j] = (row[2 * j] + row[2 * j + 1]) * kInvSqrt2;
            tmp[hc + j] = (row[2 * j] - row[2 * j + 1]) * kInvSqrt2;
        }
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(cols), row);
    }
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t i = 0; i < hr; ++i) {
            const double a = p[(2 * i) * stride + c], b = p[(2 * i + 1) * stride + c];
            tmp[i] = (a + b) * kInvSqrt2;
            tmp[hr + i] = (a - b) * kInvSqrt2;
        }
        for (std::size_t i = 0; i < rows; ++i) p[i * stride + c] = tmp[i];
    }
}

void haar_level_inverse(std::span<double> p, std::size_t stride, std::size_t rows, std::size_t cols,
                        std::vector<double>& tmp) {
    const std::size_t hc = cols / 2, hr = rows / 2;
    tmp.resize(std::max(rows, cols));
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t i = 0; i < hr; ++i) {
            const double a = p[i * stride + c], d = p[(hr + i) * stride + c];
            tmp[2 * i] = (a + d) * kInvSqrt2;
            tmp[2 * i + 1] = (a - d) * kInvSqrt2;
        }
        for (std::size_t i = 0; i < rows; ++i) p[i * stride + c] = tmp[i];
    }
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = &p[r * stride];
        for (std::size_t j = 0; j < hc; ++j) {
            tmp[2 * j] = (row[j] + row[hc + j]) * kInvSqrt2;
            tmp[2 * j + 1] = (row[j] - row[hc + j]) * kInvSqrt2;
        }
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(cols), row);
    }
}

}  // namespace

ImageTensor wavelet_forward(const ImageTensor& x, int levels) {
    check_dyadic(x.shape(), levels);
    ImageTensor out = x;
    std::vector<double> tmp;
    for (std::size_t c = 0; c < x.channels(); ++c) {
        auto plane = out.channel(c);
        std::size_t rows = x.height(), cols = x.width();
        for (int l = 0; l < levels; ++l, rows /= 2, cols /= 2) haar_level_forward(plane, x.width(), rows, cols, tmp);
    }
    return out;
}

ImageTensor wavelet_inverse(const ImageTensor& coeffs, int levels) {
    check_dyadic(coeffs.shape(), levels);
    ImageTensor out = coeffs;
    std::vector<double> tmp;
    for (std::size_t c = 0; c < coeffs.channels(); ++c) {
        auto plane = out.channel(c);
        for (int l = levels - 1; l >= 0; --l)
            haar_level_inverse(plane, coeffs.width(), coeffs.height() >> l, coeffs.width() >> l, tmp);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lipschitz constants

double estimate_lipschitz(const LinearOperator& op, int iters) {
    if (iters < 1) throw ConfigError("power iteration needs at least one iteration");
    Lcg64 rng(0x5eed5eedULL);
    ImageTensor x = random_normal(op.input_shape(), rng);
    x *= 1.0 / norm(x);
    double estimate = 0.0;
    for (int k = 0; k < iters; ++k) {
        const ImageTensor ax = op.apply(x);
        estimate = dot(ax, ax);  // Rayleigh quotient of A^T A at unit x
        ImageTensor next = op.adjoint(ax);
        const double n = norm(next);
        if (n == 0.0) return 0.0;
        x = (1.0 / n) * std::move(next);
    }
    const ImageTensor ax = op.apply(x);
    return std::max(estimate, dot(ax, ax));
}

double lipschitz_constant(const LinearOperator& op, int iters) {
    if (auto exact = op.exact_norm_sq()) return *exact;
    return estimate_lipschitz(op, iters);
}

}  // namespace tlf
