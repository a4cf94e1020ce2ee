#include "tlf/problem.hpp"

#include <cmath>

#include "tlf/errors.hpp"
#include "tlf/metrics.hpp"

namespace tlf {

std::string to_string(MdusBranch b) {
    switch (b) {
        case MdusBranch::accepted_v: return "accepted-v";
        case MdusBranch::fell_back_xF: return "fell-back-xF";
        case MdusBranch::not_applicable: return "not-applicable";
    }
    return "not-applicable";
}

std::string to_string(BusBranch b) {
    switch (b) {
        case BusBranch::accepted_z: return "accepted-z";
        case BusBranch::fell_back_xG: return "fell-back-xG";
        case BusBranch::not_applicable: return "not-applicable";
    }
    return "not-applicable";
}

MdusBranch parse_mdus_branch(const std::string& s) {
    if (s == "accepted-v") return MdusBranch::accepted_v;
    if (s == "fell-back-xF") return MdusBranch::fell_back_xF;
    if (s == "not-applicable") return MdusBranch::not_applicable;
    throw ValidationError("unknown MDUS branch '" + s + "'");
}

BusBranch parse_bus_branch(const std::string& s) {
    if (s == "accepted-z") return BusBranch::accepted_z;
    if (s == "fell-back-xG") return BusBranch::fell_back_xG;
    if (s == "not-applicable") return BusBranch::not_applicable;
    throw ValidationError("unknown BUS branch '" + s + "'");
}

CompositeProblem::CompositeProblem(LinearOperator data_op, ImageTensor observation, double lambda, Exponent p,
                                   double lipschitz, VariableSpace space, int wavelet_levels)
    : data_op_(std::move(data_op)),
      observation_(std::move(observation)),
      lambda_(lambda),
      p_(p),
      lipschitz_(lipschitz),
      space_(space),
      levels_(wavelet_levels) {
    if (observation_.shape() != data_op_.output_shape())
        throw ShapeError("observation shape " + to_string(observation_.shape()) + " does not match operator output " +
                         to_string(data_op_.output_shape()));
    if (!(lambda_ >= 0.0)) throw ConfigError("regularization weight must be >= 0");
    if (!(lipschitz_ > 0.0) || !std::isfinite(lipschitz_)) throw ConfigError("Lipschitz constant must be positive");
}

ImageTensor CompositeProblem::to_image(const ImageTensor& x) const {
    return space_ == VariableSpace::wavelet ? wavelet_inverse(x, levels_) : x;
}

ImageTensor CompositeProblem::from_image(const ImageTensor& image) const {
    return space_ == VariableSpace::wavelet ? wavelet_forward(image, levels_) : image;
}

double CompositeProblem::data_fit(const ImageTensor& x) const {
    const ImageTensor r = data_op_.apply(x) - observation_;
    return 0.5 * dot(r, r);
}

double CompositeProblem::regularizer(const ImageTensor& x) const {
    return lambda_ == 0.0 ? 0.0 : lambda_ * lp_penalty(x, p_);
}

ImageTensor CompositeProblem::gradient(const ImageTensor& x) const {
    return data_op_.adjoint(data_op_.apply(x) - observation_);
}

void SolverParams::validate(double lipschitz) const {
    const double t = step_for(lipschitz);
    if (!(t > 0.0) || !(t * lipschitz < 1.0))
        throw ConfigError("step must lie in (0, 1/L); got t = " + std::to_string(t) +
                          ", L = " + std::to_string(lipschitz));
    if (max_iters < 1) throw ConfigError("max_iters must be positive");
    if (!(rel_tol >= 0.0)) throw ConfigError("rel_tol must be >= 0");
    if (!(alpha0 >= 0.0 && alpha0 < 1.0)) throw ConfigError("alpha0 must lie in [0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(mu0 > 0.0)) throw ConfigError("mu0 must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
    if (!(C > 0.0)) throw ConfigError("C must be positive");
}

double eval_F(const CompositeProblem& prob, const ImageTensor& x) { return prob.eval(x); }

ImageTensor pg_step(const CompositeProblem& prob, const ImageTensor& x, double t) {
    if (!(t > 0.0) || !(t * prob.lipschitz() < 1.0))
        throw ConfigError("pg_step: step must lie in (0, 1/L)");
    ImageTensor y = x;
    const ImageTensor g = prob.gradient(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= t * g[i];
    return prob.lambda() == 0.0 ? y : prox_lp(y, ProxSpec{prob.exponent(), t * prob.lambda()});
}

double relative_change(const ImageTensor& x_next, const ImageTensor& x_prev) {
    const double d = distance(x_next, x_prev);
    if (d == 0.0) return 0.0;
    const double n = norm(x_next);
    return n > 0.0 ? d / n : INFINITY;
}

double descent_constant(double step, double lipschitz) { return 1.0 / (2.0 * step) - lipschitz / 2.0; }

std::string to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::pg: return "pg";
        case BaselineMethod::apg: return "apg";
        case BaselineMethod::mapg: return "mapg";
    }
    return "pg";
}

SolveResult solve_baseline(const CompositeProblem& prob, BaselineMethod method, const SolverParams& params,
                           const SolveOptions& options) {
    params.validate(prob.lipschitz());
    const double t = params.step_for(prob.lipschitz());

    ImageTensor x = options.x0 ? *options.x0 : prob.from_image(prob.observation());
    if (x.shape() != prob.variable_shape()) throw ShapeError("initial point has the wrong shape");
    ImageTensor x_prev = x;

    IterateTrace trace;
    trace.method = to_string(method);
    trace.initial_F = prob.eval(x);
    trace.sigma = descent_constant(t, prob.lipschitz());

    for (int k = 0; k < params.max_iters; ++k) {
        TraceRecord rec;
        rec.k = k;
        ImageTensor next;
        double F_next = 0.0;
        switch (method) {
            case BaselineMethod::pg: {
                next = pg_step(prob, x, t);
                rec.norm_xF_x = distance(next, x);
                F_next = prob.eval(next);
                break;
            }
            case BaselineMethod::apg: {
                const double w = static_cast<double>(k) / static_cast<double>(k + 3);  // (j-1)/(j+2), j = k+1
                const ImageTensor y = lincomb(1.0 + w, x, -w, x_prev);
                next = pg_step(prob, y, t);
                rec.norm_xF_x = distance(next, y);
                F_next = prob.eval(next);
                break;
            }
            case BaselineMethod::mapg: {
                const double w = static_cast<double>(k) / static_cast<double>(k + 3);
                const ImageTensor y = lincomb(1.0 + w, x, -w, x_prev);
                ImageTensor z = pg_step(prob, y, t);
                ImageTensor v = pg_step(prob, x, t);
                rec.norm_xF_x = distance(v, x);
                const double Fz = prob.eval(z), Fv = prob.eval(v);
                if (Fz <= Fv) {
                    next = std::move(z);
                    F_next = Fz;
                    rec.mdus_branch = MdusBranch::accepted_v;
                } else {
                    next = std::move(v);
                    F_next = Fv;
                    rec.mdus_branch = MdusBranch::fell_back_xF;
                }
                break;
            }
        }
        if (!next.all_finite()) throw NumericalError("non-finite iterate in " + to_string(method));
        rec.F = F_next;
        rec.rel_err = relative_change(next, x);
        if (options.ground_truth) rec.psnr = psnr(prob.to_image(next), *options.ground_truth);
        trace.records.push_back(rec);
        x_prev = std::move(x);
        x = std::move(next);
        if (rec.rel_err <= params.rel_tol) {
            trace.converged = true;
            break;
        }
    }
    SolveResult result{x, prob.to_image(x), std::move(trace)};
    return result;
}

}  // namespace tlf
