#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "tlf/denoise.hpp"
#include "tlf/errors.hpp"
#include "tlf/metrics.hpp"
#include "tlf/prox.hpp"

using namespace tlf;

namespace {

const Shape kS{16, 16, 1};

std::vector<std::string> double_cmd(const std::string& mode) { return {TLF_DENOISER_DOUBLE, mode}; }

// Values exactly representable in f32.
ImageTensor f32_image(Shape s, std::uint64_t seed) {
    ImageTensor x = oracle::random_image(s, seed);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(static_cast<float>(x[i]));
    return x;
}

double naive_tv(const ImageTensor& x) {
    double tv = 0.0;
    const ImageTensor h = oracle::grad_h(x), v = oracle::grad_v(x);
    for (std::size_t i = 0; i < x.size(); ++i) tv += std::abs(h[i]) + std::abs(v[i]);
    return tv;
}

}  // namespace

TEST_CASE("zero strength is the identity for every kind") {
    ImageTensor x = oracle::random_image(kS, 1);
    for (const char* spec : {"tv-rof:0", "recursive-filter:0", "gaussian:0", "median:0", "wavelet-shrink:0"})
        CHECK(denoise(parse_denoiser(spec), x, 0) == x);
    CHECK(denoise(external_denoiser("/nonexistent/denoiser", 0.0), x, 0) == x);
}

TEST_CASE("gaussian preserves constants") {
    ImageTensor y = denoise(parse_denoiser("gaussian:1.5"), ImageTensor(kS, 0.6), 0);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("tv-rof reduces total variation") {
    ImageTensor clean(kS, 0.2);
    for (std::size_t i = 4; i < 12; ++i)
        for (std::size_t j = 4; j < 12; ++j) clean.at(i, j) = 0.8;
    ImageTensor noisy = add_gaussian_noise(clean, 5.0, 3);
    ImageTensor out = denoise(parse_denoiser("tv-rof:0.05"), noisy, 0);
    CHECK(naive_tv(out) <= naive_tv(noisy));
    CHECK(total_variation(noisy) == doctest::Approx(naive_tv(noisy)).epsilon(1e-12));
}

TEST_CASE("every kind is shape preserving and finite") {
    ImageTensor x = oracle::random_image(Shape{16, 24, 3}, 4);
    for (const char* spec : {"tv-rof:0.05", "recursive-filter:0.2", "gaussian:1.0", "median:1", "wavelet-shrink:0.05"}) {
        ImageTensor y = denoise(parse_denoiser(spec), x, 0);
        CHECK(y.shape() == x.shape());
        CHECK(y.all_finite());
    }
}

TEST_CASE("wavelet-shrink is the prox composition") {
    ImageTensor x = oracle::random_image(kS, 5);
    ImageTensor ref = wavelet_inverse(prox_lp(wavelet_forward(x, 3), ProxSpec{Exponent::one, 0.07}), 3);
    CHECK(denoise(parse_denoiser("wavelet-shrink:0.07"), x, 0) == ref);
}

TEST_CASE("median removes an isolated spike") {
    ImageTensor x(kS, 0.3);
    x.at(7, 7) = 1.0;
    ImageTensor y = median_filter(x, 1);
    CHECK(y.at(7, 7) == 0.3);
}

TEST_CASE("schedules") {
    DenoiserSpec s = parse_denoiser("gaussian:2,1,0");
    CHECK(s.strength_at(0) == 2.0);
    CHECK(s.strength_at(1) == 1.0);
    CHECK(s.strength_at(2) == 0.0);
    CHECK(s.strength_at(50) == 0.0);
    ImageTensor x = oracle::random_image(kS, 6);
    CHECK(denoise(s, x, 7) == x);
    CHECK(!(denoise(s, x, 0) == x));
}

TEST_CASE("spec parsing errors") {
    CHECK_THROWS_AS(parse_denoiser("bm3d:1"), ConfigError);
    CHECK_THROWS_AS(parse_denoiser("gaussian"), ConfigError);
    CHECK_THROWS_AS(parse_denoiser("gaussian:abc"), ConfigError);
    CHECK_THROWS_AS(parse_denoiser("gaussian:-1"), ConfigError);
    CHECK_THROWS_AS(external_denoiser("   "), ConfigError);
    CHECK(describe(parse_denoiser("tv-rof:0.05")) == "tv-rof:0.05");
}

TEST_CASE("wire format layout") {
    ImageTensor x(Shape{2, 3, 1}, std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0, -1.5});
    auto req = wire::encode_request(x, 0.5f);
    REQUIRE(req.size() == 20 + 4 * 6);
    CHECK(std::memcmp(req.data(), "TLF1", 4) == 0);
    CHECK(req[4] == 2);
    CHECK(req[8] == 3);
    CHECK(req[12] == 1);
    float hint = 0.0f, third = 0.0f;
    std::memcpy(&hint, &req[16], 4);
    std::memcpy(&third, &req[20 + 8], 4);
    CHECK(hint == 0.5f);
    CHECK(third == 0.5f);
    auto decoded = wire::decode_request(req);
    CHECK(decoded.image == x);
    CHECK(decoded.hint == 0.5f);

    auto rep = wire::encode_reply(x);
    CHECK(rep.size() == 16 + 24);
    CHECK(wire::decode_reply(rep) == x);
    rep.pop_back();
    CHECK_THROWS_AS(wire::decode_reply(rep), DenoiserError);
    req[0] = 'X';
    CHECK_THROWS_AS(wire::decode_request(req), DenoiserError);
}

TEST_CASE("external round trips") {
    ImageTensor x = f32_image(Shape{8, 12, 3}, 7);
    SUBCASE("echo is bit exact") { CHECK(external_roundtrip(double_cmd("echo"), x, 0.1) == x); }
    SUBCASE("scripted offset") {
        ImageTensor y = external_roundtrip(double_cmd("add"), x, 0.1);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(y[i] == static_cast<double>(static_cast<float>(x[i]) + 0.01f));
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - (x[i] + 0.01)) <= 1e-6);
    }
    SUBCASE("shape mismatch") { CHECK_THROWS_AS(external_roundtrip(double_cmd("reshape"), x, 0.1), DenoiserError); }
    SUBCASE("garbage reply") { CHECK_THROWS_AS(external_roundtrip(double_cmd("garbage"), x, 0.1), DenoiserError); }
    SUBCASE("non-zero exit") { CHECK_THROWS_AS(external_roundtrip(double_cmd("fail"), x, 0.1), DenoiserError); }
    SUBCASE("missing program") {
        CHECK_THROWS_AS(external_roundtrip({"/nonexistent/denoiser"}, x, 0.1), DenoiserError);
    }
    SUBCASE("timeout") {
        CHECK_THROWS_AS(external_roundtrip({TLF_DENOISER_DOUBLE, "sleep", "3"}, x, 0.1, 0.3), DenoiserError);
    }
    SUBCASE("through denoise()") {
        DenoiserSpec spec = external_denoiser(std::string(TLF_DENOISER_DOUBLE) + " echo", 0.1);
        CHECK(denoise(spec, x, 0) == x);
    }
}
