#pragma once

#include <optional>
#include <string>

#include "tlf/operators.hpp"
#include "tlf/prox.hpp"
#include "tlf/tensor.hpp"
#include "tlf/trace.hpp"

namespace tlf {

enum class VariableSpace { image, wavelet };

// F(x) = 1/2 ||A x - b||^2 + lambda sum |x_i|^p, with A = data_op. For
// wavelet-space problems x holds Haar coefficients and A already contains the
// synthesis W^T, so the image is W^T x.
class CompositeProblem {
public:
    CompositeProblem(LinearOperator data_op, ImageTensor observation, double lambda, Exponent p,
                     double lipschitz, VariableSpace space = VariableSpace::image,
                     int wavelet_levels = kDefaultWaveletLevels);

    const LinearOperator& data_op() const noexcept { return data_op_; }
    const ImageTensor& observation() const noexcept { return observation_; }
    double lambda() const noexcept { return lambda_; }
    Exponent exponent() const noexcept { return p_; }
    double lipschitz() const noexcept { return lipschitz_; }
    VariableSpace space() const noexcept { return space_; }
    int wavelet_levels() const noexcept { return levels_; }
    const Shape& variable_shape() const noexcept { return data_op_.input_shape(); }

    ImageTensor to_image(const ImageTensor& x) const;
    ImageTensor from_image(const ImageTensor& image) const;

    double data_fit(const ImageTensor& x) const;
    double regularizer(const ImageTensor& x) const;
    double eval(const ImageTensor& x) const { return data_fit(x) + regularizer(x); }
    // A^T (A x - b).
    ImageTensor gradient(const ImageTensor& x) const;

private:
    LinearOperator data_op_;
    ImageTensor observation_;
    double lambda_;
    Exponent p_;
    double lipschitz_;
    VariableSpace space_;
    int levels_;
};

struct SolverParams {
    double step = 0.0;  // 0 selects 0.99 / L
    int max_iters = 500;
    double rel_tol = 5e-4;
    double alpha0 = 0.9;
    double gamma = 0.99;
    double mu0 = 0.01;
    double beta = 0.5;
    double C = 1.5;

    double step_for(double lipschitz) const { return step > 0.0 ? step : 0.99 / lipschitz; }
    // Throws ConfigError when a range constraint fails.
    void validate(double lipschitz) const;
};

// Optional starting point (in the problem's variable space) and ground truth
// image for per-iteration PSNR.
struct SolveOptions {
    std::optional<ImageTensor> x0;
    std::optional<ImageTensor> ground_truth;
};

struct SolveResult {
    ImageTensor solution;  // variable space
    ImageTensor image;     // image space
    IterateTrace trace;
};

double eval_F(const CompositeProblem& prob, const ImageTensor& x);

// prox_{t psi}(x - t grad f(x)). Requires 0 < t < 1/L.
ImageTensor pg_step(const CompositeProblem& prob, const ImageTensor& x, double t);

// ||x_next - x_prev|| / ||x_next||; zero when both are zero.
double relative_change(const ImageTensor& x_next, const ImageTensor& x_prev);

// 1/(2t) - L/2.
double descent_constant(double step, double lipschitz);

enum class BaselineMethod { pg, apg, mapg };

std::string to_string(BaselineMethod m);

SolveResult solve_baseline(const CompositeProblem& prob, BaselineMethod method, const SolverParams& params,
                           const SolveOptions& options = {});

}  // namespace tlf
