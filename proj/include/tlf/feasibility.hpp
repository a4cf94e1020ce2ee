#pragma once

#include <optional>
#include <vector>

#include "tlf/operators.hpp"
#include "tlf/prox.hpp"
#include "tlf/tensor.hpp"

namespace tlf {

enum class XSolver { fft, cg };

// Proximal anchor (x_tilde, mu) adding mu/2 ||x - x_tilde||^2.
struct Anchor {
    ImageTensor target;
    double mu = 0.0;
};

// Latent feasibility energy
//   1/2 ||K x - b||^2 + lambda2 sum_{j in h,v} ||grad_j x||_q^q  [+ mu/2 ||x - x_tilde||^2]
// minimized approximately by half-quadratic splitting with fixed penalties
// rho_h, rho_v on ||z_j - grad_j x||^2.
struct FeasibilityModel {
    LinearOperator data_op;
    ImageTensor observation;
    double tv_weight = 0.0;
    Exponent tv_exponent = Exponent::one;
    double rho_h = 0.05;
    double rho_v = 0.05;
    int hqs_iters = 5;
    XSolver x_solver = XSolver::fft;
    double cg_tol = 1e-8;
    int cg_max_iters = 5000;
    std::optional<Anchor> anchor;

    FeasibilityModel(LinearOperator op, ImageTensor b) : data_op(std::move(op)), observation(std::move(b)) {}

    void validate() const;
    FeasibilityModel with_anchor(ImageTensor target, double mu) const;
};

struct HqsState {
    ImageTensor x;
    ImageTensor z_h;
    ImageTensor z_v;
    // Splitting energy after every alternation (index 0 = energy at the start
    // point with z = grad x_init).
    std::vector<double> energy;
};

// Runs the alternation from x_init; anchor (if any) is honored.
HqsState run_hqs(const FeasibilityModel& model, const ImageTensor& x_init);

// Anchor-free solve; throws ConfigError when the model carries an anchor.
ImageTensor solve_G(const FeasibilityModel& model, const ImageTensor& x_init);
// Anchored solve; requires an anchor with mu > 0.
ImageTensor solve_G_mu(const FeasibilityModel& model, const ImageTensor& x_init);

// 1/2 ||Kx - b||^2 + lambda2 sum_j ||z_j||_q^q + sum_j rho_j ||z_j - grad_j x||^2 [+ mu/2 ||x - x_tilde||^2].
double hqs_energy(const FeasibilityModel& model, const ImageTensor& x, const ImageTensor& z_h, const ImageTensor& z_v);

// Exact minimizer of the splitting energy in x for fixed z (the normal
// equations), via FFT or CG per model.x_solver. `warm` seeds CG.
ImageTensor hqs_x_update(const FeasibilityModel& model, const ImageTensor& z_h, const ImageTensor& z_v,
                         const ImageTensor& warm);

// Right-hand side K^T b + sum_j 2 rho_j grad_j^T z_j [+ mu x_tilde].
ImageTensor hqs_rhs(const FeasibilityModel& model, const ImageTensor& z_h, const ImageTensor& z_v);
// (K^T K + sum_j 2 rho_j grad_j^T grad_j [+ mu I]) x, by direct operator application.
ImageTensor hqs_normal_apply(const FeasibilityModel& model, const ImageTensor& x);

}  // namespace tlf
