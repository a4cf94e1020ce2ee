#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tlf/errors.hpp"
#include "tlf/feasibility.hpp"

using namespace tlf;

namespace {

const Shape kS{16, 16, 1};

FeasibilityModel blur_model(const BlurKernel& k, std::uint64_t seed, double lambda2, Exponent q = Exponent::one) {
    auto K = LinearOperator::convolution(k, kS);
    FeasibilityModel m(K, add_gaussian_noise(K.apply(oracle::random_image(kS, seed)), 1.0, seed + 1));
    m.tv_weight = lambda2;
    m.tv_exponent = q;
    m.rho_h = 0.05;
    m.rho_v = 0.08;
    return m;
}

ImageTensor binary_mask(std::uint64_t seed, double keep = 0.6) {
    ImageTensor w = oracle::random_image(kS, seed);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] < keep ? 1.0 : 0.0;
    return w;
}

}  // namespace

TEST_CASE("identity model without TV returns b") {
    ImageTensor b = oracle::random_image(kS, 1);
    FeasibilityModel m(LinearOperator::identity(kS), b);
    m.tv_weight = 0.0;
    // b is the fixed point; from b itself it is reached at once, from
    // elsewhere the alternation contracts toward it
    m.hqs_iters = 1;
    CHECK(oracle::l2(solve_G(m, b) - b) <= 1e-12 * oracle::l2(b));
    m.hqs_iters = 80;
    ImageTensor x = solve_G(m, oracle::random_image(kS, 2));
    CHECK(oracle::l2(x - b) <= 1e-12 * oracle::l2(b));
}

TEST_CASE("constant observation stays constant") {
    FeasibilityModel m(LinearOperator::identity(kS), ImageTensor(kS, 0.42));
    m.tv_weight = 0.3;
    ImageTensor x = solve_G(m, ImageTensor(kS, 0.42));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("fft x-update solves the normal equations") {
    BlurKernel k = BlurKernel::gaussian(5, 1.0);
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        FeasibilityModel m = blur_model(k, seed, 0.01);
        ImageTensor zh = oracle::random_image(kS, seed + 10, -0.2, 0.2);
        ImageTensor zv = oracle::random_image(kS, seed + 20, -0.2, 0.2);
        ImageTensor x = hqs_x_update(m, zh, zv, ImageTensor(kS));
        oracle::DataTerm K{&k, nullptr};
        CHECK(oracle::normal_residual(K, m.observation, m.rho_h, m.rho_v, 0.0, nullptr, zh, zv, x) <= 1e-8);

        // the full solve ends on an x-update, so its output satisfies the
        // system for the last z
        HqsState st = run_hqs(m, m.observation);
        CHECK(oracle::normal_residual(K, m.observation, m.rho_h, m.rho_v, 0.0, nullptr, st.z_h, st.z_v, st.x) <= 1e-8);
    }
}

TEST_CASE("cg x-update reaches cg_tol") {
    for (std::uint64_t seed : {6u, 7u}) {
        ImageTensor w = binary_mask(seed);
        FeasibilityModel m(LinearOperator::mask(w), oracle::random_image(kS, seed + 1));
        m.tv_weight = 0.02;
        m.x_solver = XSolver::cg;
        m.cg_tol = 1e-9;
        ImageTensor zh = oracle::random_image(kS, seed + 2, -0.1, 0.1);
        ImageTensor zv = oracle::random_image(kS, seed + 3, -0.1, 0.1);
        ImageTensor x = hqs_x_update(m, zh, zv, ImageTensor(kS));
        oracle::DataTerm K{nullptr, &w};
        CHECK(oracle::normal_residual(K, m.observation, m.rho_h, m.rho_v, 0.0, nullptr, zh, zv, x) <= m.cg_tol);
    }
}

TEST_CASE("fft and cg agree on circulant systems") {
    BlurKernel k = BlurKernel::gaussian(5, 1.3);
    FeasibilityModel f = blur_model(k, 8, 0.02);
    FeasibilityModel c = f;
    c.x_solver = XSolver::cg;
    c.cg_tol = 1e-12;
    ImageTensor a = solve_G(f, f.observation), b = solve_G(c, c.observation);
    CHECK(oracle::l2(a - b) <= 1e-6 * oracle::l2(a));
}

TEST_CASE("anchored solve") {
    BlurKernel k = BlurKernel::gaussian(5, 1.0);
    FeasibilityModel m = blur_model(k, 9, 0.01);
    ImageTensor target = oracle::random_image(kS, 90);

    SUBCASE("huge mu reproduces the anchor") {
        ImageTensor x = solve_G_mu(m.with_anchor(target, 1e8), m.observation);
        CHECK(oracle::l2(x - target) <= 1e-4 * oracle::l2(target));
    }
    SUBCASE("mu = 0 and missing anchors are rejected") {
        CHECK_THROWS_AS(solve_G_mu(m.with_anchor(target, 0.0), m.observation), ConfigError);
        CHECK_THROWS_AS(solve_G_mu(m, m.observation), ConfigError);
        CHECK_THROWS_AS(solve_G(m.with_anchor(target, 1.0), m.observation), ConfigError);
    }
    SUBCASE("normal equations include mu I") {
        const double mu = 0.7;
        FeasibilityModel a = m.with_anchor(target, mu);
        HqsState st = run_hqs(a, m.observation);
        oracle::DataTerm K{&k, nullptr};
        CHECK(oracle::normal_residual(K, m.observation, m.rho_h, m.rho_v, mu, &target, st.z_h, st.z_v, st.x) <= 1e-8);

        FeasibilityModel ac = a;
        ac.x_solver = XSolver::cg;
        ac.cg_tol = 1e-10;
        HqsState sc = run_hqs(ac, m.observation);
        CHECK(oracle::normal_residual(K, m.observation, m.rho_h, m.rho_v, mu, &target, sc.z_h, sc.z_v, sc.x) <= 1e-10);
    }
}

TEST_CASE("splitting energy never increases") {
    BlurKernel k = BlurKernel::gaussian(7, 1.5);
    for (Exponent q : {Exponent::one, Exponent::half, Exponent::zero}) {
        FeasibilityModel m = blur_model(k, 11, 0.02, q);
        m.hqs_iters = 12;
        HqsState st = run_hqs(m, m.observation);
        for (std::size_t i = 2; i < st.energy.size(); ++i) CHECK(st.energy[i] <= st.energy[i - 1] + 1e-10);
        // first alternation starts from z = grad x, a different splitting point
        CHECK(st.energy.size() == 13);
    }
    ImageTensor w = binary_mask(12);
    FeasibilityModel m(LinearOperator::mask(w), oracle::random_image(kS, 13));
    m.tv_weight = 0.05;
    m.x_solver = XSolver::cg;
    m.hqs_iters = 8;
    m = m.with_anchor(oracle::random_image(kS, 14), 0.3);
    HqsState st = run_hqs(m, m.observation);
    for (std::size_t i = 2; i < st.energy.size(); ++i) CHECK(st.energy[i] <= st.energy[i - 1] + 1e-10);
}

TEST_CASE("solves are deterministic") {
    BlurKernel k = BlurKernel::gaussian(5, 1.0);
    FeasibilityModel m = blur_model(k, 15, 0.01);
    m.hqs_iters = 3;
    CHECK(solve_G(m, m.observation) == solve_G(m, m.observation));
}

TEST_CASE("configuration errors") {
    ImageTensor w = binary_mask(16);
    FeasibilityModel m(LinearOperator::mask(w), ImageTensor(kS));
    m.x_solver = XSolver::fft;
    CHECK_THROWS_AS(solve_G(m, ImageTensor(kS)), ConfigError);

    FeasibilityModel r(LinearOperator::identity(kS), ImageTensor(kS));
    r.rho_h = 0.0;
    CHECK_THROWS_AS(solve_G(r, ImageTensor(kS)), ConfigError);
    r.rho_h = 0.05;
    r.hqs_iters = 0;
    CHECK_THROWS_AS(solve_G(r, ImageTensor(kS)), ConfigError);
}

TEST_CASE("cg failure carries the residual") {
    FeasibilityModel m(LinearOperator::mask(binary_mask(17)), oracle::random_image(kS, 18));
    m.tv_weight = 0.01;
    m.x_solver = XSolver::cg;
    m.cg_tol = 1e-14;
    m.cg_max_iters = 1;
    try {
        solve_G(m, ImageTensor(kS));
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.residual() > 1e-14);
    }
}
