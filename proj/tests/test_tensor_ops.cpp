#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tlf/errors.hpp"
#include "tlf/operators.hpp"
#include "tlf/tensor.hpp"

using namespace tlf;

namespace {

double adjoint_gap(const LinearOperator& A, std::uint64_t seed) {
    const ImageTensor x = oracle::random_image(A.input_shape(), seed, -1.0, 1.0);
    const ImageTensor y = oracle::random_image(A.output_shape(), seed + 1, -1.0, 1.0);
    const ImageTensor Ax = A.apply(x);
    const double lhs = oracle::inner(Ax, y);
    const double rhs = oracle::inner(x, A.adjoint(y));
    return std::abs(lhs - rhs) / (oracle::l2(Ax) * oracle::l2(y));
}

BlurKernel random_kernel(std::size_t kh, std::size_t kw, std::uint64_t seed) {
    Lcg64 rng(seed);
    std::vector<double> taps(kh * kw);
    for (double& t : taps) t = rng.uniform();
    return BlurKernel(kh, kw, taps, false);
}

}  // namespace

TEST_CASE("tensor arithmetic and shapes") {
    Shape s{3, 4, 2};
    CHECK(s.size() == 24);
    ImageTensor a(s, 1.5), b(s, 0.5);
    CHECK((a + b)[7] == 2.0);
    CHECK((a - b)[0] == 1.0);
    CHECK((2.0 * b)[23] == 1.0);
    CHECK(dot(a, b) == doctest::Approx(24 * 0.75));
    CHECK(lincomb(0.25, a, 0.5, b)[3] == doctest::Approx(0.625));
    ImageTensor c(Shape{4, 3, 2});
    CHECK_THROWS_AS(a += c, ShapeError);
    CHECK_THROWS_AS(ImageTensor(s, std::vector<double>(5)), ShapeError);
    a.at(1, 2, 1) = 9.0;
    CHECK(a[12 + 4 + 2] == 9.0);
    CHECK(a.channel(1)[6] == 9.0);
}

TEST_CASE("identity and all-ones mask are the identity") {
    Shape s{8, 8, 1};
    ImageTensor x = oracle::random_image(s, 3);
    CHECK(apply(LinearOperator::identity(s), x) == x);
    CHECK(adjoint(LinearOperator::identity(s), x) == x);
    auto M = LinearOperator::mask(ImageTensor(s, 1.0));
    CHECK(apply(M, x) == x);
}

TEST_CASE("mask adjoint equals forward") {
    Shape s{8, 8, 1};
    ImageTensor w = oracle::random_image(s, 5);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] < 0.5 ? 0.0 : 1.0;
    auto M = LinearOperator::mask(w);
    ImageTensor x = oracle::random_image(s, 6);
    CHECK(M.apply(x) == M.adjoint(x));
}

TEST_CASE("averaging kernel preserves constants") {
    Shape s{12, 12, 1};
    auto K = LinearOperator::convolution(BlurKernel::box(3), s);
    ImageTensor y = K.apply(ImageTensor(s, 0.37));
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("shape mismatch is rejected") {
    auto K = LinearOperator::convolution(BlurKernel::box(3), Shape{8, 8, 1});
    CHECK_THROWS_AS(K.apply(ImageTensor(Shape{8, 4, 1})), ShapeError);
    CHECK_THROWS_AS(K.adjoint(ImageTensor(Shape{4, 8, 1})), ShapeError);
    CHECK_THROWS_AS(wavelet_forward(ImageTensor(Shape{12, 16, 1}), 3), ShapeError);
}

TEST_CASE("convolution matches direct circular convolution") {
    for (auto [H, W, kh, kw, C] : std::vector<std::array<std::size_t, 5>>{
             {16, 16, 5, 5, 1}, {9, 13, 3, 7, 1}, {16, 8, 7, 7, 1}, {10, 10, 5, 3, 3}, {7, 7, 7, 7, 1}}) {
        Shape s{H, W, C};
        BlurKernel k = random_kernel(kh, kw, H * 31 + kw);
        ImageTensor x = oracle::random_image(s, H + W);
        ImageTensor fast = LinearOperator::convolution(k, s).apply(x);
        ImageTensor ref = oracle::conv_direct(x, k);
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(fast[i] - ref[i]));
        CHECK(err <= 1e-10);
    }
}

TEST_CASE("adjoint consistency for every operator kind") {
    Shape s{16, 16, 1};
    const std::vector<LinearOperator> ops{
        LinearOperator::identity(s),
        LinearOperator::convolution(random_kernel(5, 5, 11), s),
        LinearOperator::mask(oracle::random_image(s, 12)),
        LinearOperator::gradient_h(s),
        LinearOperator::gradient_v(s),
        LinearOperator::wavelet_forward(s, 3),
        LinearOperator::wavelet_inverse(s, 2),
        LinearOperator::compose({LinearOperator::convolution(BlurKernel::gaussian(9, 1.5), s),
                                 LinearOperator::wavelet_inverse(s, 3)}),
        LinearOperator::compose({LinearOperator::mask(oracle::random_image(s, 13)), LinearOperator::gradient_v(s)}),
    };
    std::uint64_t seed = 100;
    for (const auto& A : ops) {
        CHECK(adjoint_gap(A, seed) <= 1e-8);
        seed += 7;
    }
    Shape color{8, 16, 3};
    CHECK(adjoint_gap(LinearOperator::convolution(random_kernel(3, 5, 2), color), 9) <= 1e-8);
    CHECK(adjoint_gap(LinearOperator::wavelet_forward(color, 3), 10) <= 1e-8);
}

TEST_CASE("gradients are wrapped forward differences") {
    Shape s{6, 5, 2};
    ImageTensor x = oracle::random_image(s, 21);
    ImageTensor gh = LinearOperator::gradient_h(s).apply(x), gv = LinearOperator::gradient_v(s).apply(x);
    ImageTensor rh = oracle::grad_h(x), rv = oracle::grad_v(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(gh[i] == doctest::Approx(rh[i]).epsilon(1e-12));
        CHECK(gv[i] == doctest::Approx(rv[i]).epsilon(1e-12));
    }
}

TEST_CASE("haar transform") {
    SUBCASE("constant image") {
        Shape s{16, 16, 1};
        const double c = 0.3;
        ImageTensor w = wavelet_forward(ImageTensor(s, c), 3);
        // approximation band is the top-left 2x2 block after 3 levels
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 16; ++j) {
                if (i < 2 && j < 2)
                    CHECK(w.at(i, j) == doctest::Approx(c * 8.0).epsilon(1e-14));
                else
                    CHECK(w.at(i, j) == 0.0);
            }
    }
    SUBCASE("parseval and round trip") {
        for (int levels = 1; levels <= 4; ++levels) {
            Shape s{32, 16, 3};
            ImageTensor x = oracle::random_image(s, 40 + levels, -2.0, 2.0);
            ImageTensor w = wavelet_forward(x, levels);
            CHECK(std::abs(oracle::l2(w) - oracle::l2(x)) / oracle::l2(x) <= 1e-10);
            ImageTensor back = wavelet_inverse(w, levels);
            CHECK(oracle::l2(back - x) / oracle::l2(x) <= 1e-10);
        }
    }
}

TEST_CASE("lipschitz estimates") {
    Shape s{16, 16, 1};
    CHECK(estimate_lipschitz(LinearOperator::identity(s)) == doctest::Approx(1.0).epsilon(1e-12));

    auto twice = LinearOperator::convolution(BlurKernel(1, 1, {2.0}, false), s);
    CHECK(estimate_lipschitz(twice) == doctest::Approx(4.0).epsilon(1e-12));

    BlurKernel g = BlurKernel::gaussian(9, 1.5);
    double sum = 0.0;
    for (double t : g.taps()) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    auto K = LinearOperator::convolution(g, s);
    const double ref = oracle::max_transfer_sq(g, 16, 16);
    CHECK(ref > 0.0);
    CHECK(ref <= 1.0 + 1e-12);
    CHECK(std::abs(estimate_lipschitz(K) - ref) <= 1e-6);
    CHECK(std::abs(*K.exact_norm_sq() - ref) <= 1e-12);

    // nondecreasing in the iteration count
    auto A = LinearOperator::compose({LinearOperator::mask(oracle::random_image(s, 77)), K});
    double prev = 0.0;
    for (int it = 1; it <= 30; ++it) {
        const double e = estimate_lipschitz(A, it);
        CHECK(e >= prev - 1e-15);
        prev = e;
    }

    auto zero = LinearOperator::mask(ImageTensor(s, 0.0));
    CHECK(estimate_lipschitz(zero) == 0.0);
}

TEST_CASE("kernel validation") {
    CHECK_THROWS_AS(BlurKernel(2, 3, std::vector<double>(6, 1.0)), ValidationError);
    CHECK_THROWS_AS(BlurKernel(3, 3, std::vector<double>(4, 1.0)), ValidationError);
    CHECK_THROWS_AS(LinearOperator::convolution(BlurKernel::box(9), Shape{8, 8, 1}), ShapeError);
}
