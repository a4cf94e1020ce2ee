#include "tlf/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tlf/errors.hpp"

namespace tlf {

double exponent_value(Exponent p) noexcept {
    switch (p) {
        case Exponent::zero: return 0.0;
        case Exponent::half: return 0.5;
        case Exponent::two_thirds: return 2.0 / 3.0;
        case Exponent::one: return 1.0;
    }
    return 1.0;
}

std::string exponent_name(Exponent p) {
    switch (p) {
        case Exponent::zero: return "0";
        case Exponent::half: return "1/2";
        case Exponent::two_thirds: return "2/3";
        case Exponent::one: return "1";
    }
    return "1";
}

Exponent exponent_from_value(double p) {
    if (p == 0.0) return Exponent::zero;
    if (std::abs(p - 0.5) < 1e-3) return Exponent::half;
    if (std::abs(p - 2.0 / 3.0) < 1e-3) return Exponent::two_thirds;
    if (p == 1.0) return Exponent::one;
    throw ConfigError("unsupported exponent p = " + std::to_string(p) + " (closed forms exist for 0, 1/2, 2/3, 1)");
}

Exponent parse_exponent(const std::string& text) {
    if (text == "1/2") return Exponent::half;
    if (text == "2/3") return Exponent::two_thirds;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw ConfigError("bad exponent '" + text + "'");
        return exponent_from_value(v);
    } catch (const std::logic_error&) {
        throw ConfigError("bad exponent '" + text + "'");
    }
}

void ProxSpec::validate() const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("prox threshold weight must be finite and >= 0");
}

double lp_term(double u, Exponent p) noexcept {
    const double a = std::abs(u);
    switch (p) {
        case Exponent::zero: return a > 0.0 ? 1.0 : 0.0;
        case Exponent::half: return std::sqrt(a);
        case Exponent::two_thirds: return std::cbrt(a * a);
        case Exponent::one: return a;
    }
    return a;
}

double lp_penalty(const ImageTensor& x, Exponent p) {
    double acc = 0.0;
    for (double v : x.values()) acc += lp_term(v, p);
    return acc;
}

namespace {

// Half thresholding for (u - v)^2 + lambda |u|^{1/2}.
double half_threshold(double v, double lambda) {
    const double a = std::abs(v);
    const double threshold = std::cbrt(54.0) / 4.0 * std::pow(lambda, 2.0 / 3.0);
    if (a <= threshold) return 0.0;
    const double phi = std::acos(lambda / 8.0 * std::pow(a / 3.0, -1.5));
    return 2.0 / 3.0 * v * (1.0 + std::cos(2.0 * std::numbers::pi / 3.0 - 2.0 / 3.0 * phi));
}

// Two-thirds thresholding for (u - v)^2 + lambda |u|^{2/3}.
double two_thirds_threshold(double v, double lambda) {
    const double a = std::abs(v);
    const double threshold = 2.0 / 3.0 * std::pow(3.0 * lambda * lambda * lambda, 0.25);
    if (a <= threshold) return 0.0;
    const double phi = std::acosh(27.0 * v * v / 16.0 * std::pow(lambda, -1.5));
    const double big_a = 2.0 / std::sqrt(3.0) * std::pow(lambda, 0.25) * std::sqrt(std::cosh(phi / 3.0));
    const double root = (big_a + std::sqrt(2.0 * a / big_a - big_a * big_a)) / 2.0;
    return std::copysign(root * root * root, v);
}

}  // namespace

double prox_lp(double v, const ProxSpec& spec) {
    const double tau = spec.tau;
    if (tau == 0.0) return v;
    switch (spec.p) {
        case Exponent::one: {
            const double a = std::abs(v) - tau;
            return a > 0.0 ? std::copysign(a, v) : 0.0;
        }
        case Exponent::zero:
            return std::abs(v) > std::sqrt(2.0 * tau) ? v : 0.0;
        case Exponent::half:
            return half_threshold(v, 2.0 * tau);
        case Exponent::two_thirds:
            return two_thirds_threshold(v, 2.0 * tau);
    }
    return v;
}

ImageTensor prox_lp(const ImageTensor& v, const ProxSpec& spec) {
    spec.validate();
    ImageTensor out = v;
    for (double& x : out.values()) x = prox_lp(x, spec);
    return out;
}

ImageTensor project_box01(const ImageTensor& v) {
    ImageTensor out = v;
    for (double& x : out.values()) x = std::clamp(x, 0.0, 1.0);
    return out;
}

}  // namespace tlf
