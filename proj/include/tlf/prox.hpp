#pragma once

#include <string>

#include "tlf/tensor.hpp"

namespace tlf {

// Exponents with closed-form l_p proximal maps.
enum class Exponent { zero, half, two_thirds, one };

double exponent_value(Exponent p) noexcept;
std::string exponent_name(Exponent p);
// Accepts 0, 0.5, 1/2, 2/3, 0.6667 (within 1e-3), 1. Throws ConfigError otherwise.
Exponent parse_exponent(const std::string& text);
Exponent exponent_from_value(double p);

// Penalty tau * |u|^p with threshold weight tau = step * lambda.
struct ProxSpec {
    Exponent p = Exponent::one;
    double tau = 0.0;

    void validate() const;
};

// |u|^p with the convention 0^0 = 0, so p = 0 counts nonzeros.
double lp_term(double u, Exponent p) noexcept;
// sum_i |x_i|^p.
double lp_penalty(const ImageTensor& x, Exponent p);

// argmin_u tau |u|^p + (u - v)^2 / 2 for one scalar. Exact threshold ties
// resolve to 0.
double prox_lp(double v, const ProxSpec& spec);
ImageTensor prox_lp(const ImageTensor& v, const ProxSpec& spec);

ImageTensor project_box01(const ImageTensor& v);

}  // namespace tlf
