#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tlf/errors.hpp"
#include "tlf/metrics.hpp"

using namespace tlf;

TEST_CASE("psnr") {
    const Shape s{16, 16, 1};
    ImageTensor x = oracle::random_image(s, 1);
    CHECK(psnr(x, x) == 100.0);
    ImageTensor y = x;
    for (double& v : y.values()) v += 0.1;
    CHECK(psnr(y, x) == doctest::Approx(20.0).epsilon(1e-12));
    ImageTensor z = oracle::random_image(s, 2);
    CHECK(std::abs(psnr(z, x) - oracle::psnr(z, x)) <= 1e-9);
    CHECK_THROWS_AS(psnr(x, ImageTensor(Shape{16, 8, 1})), ShapeError);
}

TEST_CASE("masked psnr uses only the region") {
    const Shape s{8, 8, 1};
    ImageTensor ref(s, 0.5), x(s, 0.5), region(s, 0.0);
    for (std::size_t i = 0; i < 32; ++i) {
        region[i] = 1.0;
        x[i] = 0.6;
    }
    x[40] = 0.0;  // outside the region
    CHECK(psnr_masked(x, ref, region) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("ssim") {
    const Shape s{32, 32, 1};
    ImageTensor x(s);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j) x.at(i, j) = 0.3 + 0.4 * ((i / 4 + j / 4) % 2) + 0.05 * std::sin(0.3 * j);
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));

    ImageTensor neg = x;
    for (double& v : neg.values()) v = 1.0 - v;
    const double sn = ssim(neg, x);
    CHECK(sn < 0.5);
    CHECK(std::abs(sn - oracle::ssim(neg, x)) <= 1e-9);

    ImageTensor c0(s, 0.2), c1(s, 0.7);
    CHECK(std::abs(ssim(c1, c0) - oracle::ssim(c1, c0)) <= 1e-9);
    CHECK(ssim(c1, c0) < 0.6);

    ImageTensor r = oracle::random_image(s, 3), q = oracle::random_image(s, 4);
    const double v = ssim(r, q);
    CHECK(std::abs(v - oracle::ssim(r, q)) <= 1e-9);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);

    CHECK_THROWS_AS(ssim(ImageTensor(Shape{10, 32, 1}), ImageTensor(Shape{10, 32, 1})), ValidationError);
}

TEST_CASE("color images are compared on the channel mean") {
    const Shape s{16, 16, 3};
    ImageTensor a = oracle::random_image(s, 5), b = oracle::random_image(s, 6);
    const ImageTensor ga = to_gray(a), gb = to_gray(b);
    CHECK(ga.channels() == 1);
    CHECK(ga[7] == doctest::Approx((a[7] + a[7 + 256] + a[7 + 512]) / 3.0).epsilon(1e-15));
    CHECK(ssim(a, b) == doctest::Approx(oracle::ssim(ga, gb)).epsilon(1e-12));
}

TEST_CASE("total variation") {
    const Shape s{4, 4, 1};
    ImageTensor x(s, 0.0);
    x.at(1, 1) = 1.0;
    CHECK(total_variation(x) == 4.0);
    CHECK(total_variation(ImageTensor(s, 0.3)) == 0.0);
}
