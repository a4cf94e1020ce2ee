#include "tlf/engine.hpp"

#include <cmath>
#include <limits>

#include "tlf/errors.hpp"
#include "tlf/metrics.hpp"

namespace tlf {

MdusResult mdus(double F_v, ImageTensor v, double F_xF, ImageTensor x_F, double alpha, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("MDUS: gamma must lie in (0, 1)");
    if (F_v <= F_xF) return MdusResult{std::move(v), F_v, gamma * alpha, MdusBranch::accepted_v};
    return MdusResult{std::move(x_F), F_xF, gamma * alpha, MdusBranch::fell_back_xF};
}

MdusResult mdus(const CompositeProblem& prob, ImageTensor v, ImageTensor x_F, double alpha, double gamma) {
    const double F_v = prob.eval(v);
    const double F_xF = prob.eval(x_F);
    return mdus(F_v, std::move(v), F_xF, std::move(x_F), alpha, gamma);
}

BusResult bus(double anchored_step, double model_step, const ImageTensor& x_G, ImageTensor z, const ImageTensor& x_F,
              double alpha, double mu, double beta, double C) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("BUS: beta must lie in (0, 1)");
    if (!(C > 0.0)) throw ConfigError("BUS: C must be positive");
    if (anchored_step <= C * model_step)
        return BusResult{std::move(z), mu, BusBranch::accepted_z, anchored_step, model_step};
    return BusResult{lincomb(alpha, x_G, 1.0 - alpha, x_F), beta * mu, BusBranch::fell_back_xG, anchored_step,
                     model_step};
}

BusResult bus(const ImageTensor& x, const ImageTensor& x_G, const ImageTensor& x_Gmu, ImageTensor z,
              const ImageTensor& x_F, double alpha, double mu, double beta, double C) {
    return bus(distance(x_Gmu, x), distance(x_G, x), x_G, std::move(z), x_F, alpha, mu, beta, C);
}

FeasibilitySolvers hqs_solvers(const FeasibilityModel& model) {
    model.validate();
    FeasibilitySolvers s;
    s.G = [model](const ImageTensor& x) { return solve_G(model, x); };
    s.G_mu = [model](const ImageTensor& x, const ImageTensor& anchor, double mu) {
        return solve_G_mu(model.with_anchor(anchor, mu), x);
    };
    return s;
}

namespace {

struct LoopState {
    ImageTensor x;
    double F = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
};

LoopState start(const CompositeProblem& prob, const SolverParams& params, const SolveOptions& options) {
    params.validate(prob.lipschitz());
    ImageTensor x = options.x0 ? *options.x0 : prob.from_image(prob.observation());
    if (x.shape() != prob.variable_shape()) throw ShapeError("initial point has the wrong shape");
    const double F = prob.eval(x);
    return LoopState{std::move(x), F, params.alpha0, params.mu0};
}

// Records the accepted step and advances the state; returns true on convergence.
bool finish_iteration(const CompositeProblem& prob, const SolveOptions& options, const SolverParams& params,
                      LoopState& st, MdusResult&& m, TraceRecord rec, IterateTrace& trace) {
    if (!m.x.all_finite()) throw NumericalError("non-finite iterate at k = " + std::to_string(rec.k));
    rec.F = m.F;
    rec.rel_err = relative_change(m.x, st.x);
    rec.mdus_branch = m.branch;
    if (options.ground_truth) rec.psnr = psnr(prob.to_image(m.x), *options.ground_truth);
    trace.records.push_back(rec);
    st.x = std::move(m.x);
    st.F = m.F;
    st.alpha = m.alpha;
    return rec.rel_err <= params.rel_tol;
}

}  // namespace

SolveResult tlf_solve(const CompositeProblem& prob, const FeasibilitySolvers& feas, const SolverParams& params,
                      const SolveOptions& options) {
    LoopState st = start(prob, params, options);
    const double t = params.step_for(prob.lipschitz());
    IterateTrace trace;
    trace.method = "tlf";
    trace.initial_F = st.F;
    trace.sigma = descent_constant(t, prob.lipschitz());

    for (int k = 0; k < params.max_iters; ++k) {
        ImageTensor x_F = pg_step(prob, st.x, t);
        const ImageTensor x_G = prob.from_image(feas.G(prob.to_image(st.x)));
        ImageTensor v = lincomb(st.alpha, x_G, 1.0 - st.alpha, x_F);

        TraceRecord rec;
        rec.k = k;
        rec.norm_xF_x = distance(x_F, st.x);
        rec.norm_xG_x = distance(x_G, st.x);
        rec.alpha = st.alpha;
        rec.mu = 0.0;
        rec.bus_branch = BusBranch::not_applicable;

        const double F_v = prob.eval(v), F_xF = prob.eval(x_F);
        MdusResult m = mdus(F_v, std::move(v), F_xF, std::move(x_F), st.alpha, params.gamma);
        if (finish_iteration(prob, options, params, st, std::move(m), rec, trace)) {
            trace.converged = true;
            break;
        }
    }
    return SolveResult{st.x, prob.to_image(st.x), std::move(trace)};
}

SolveResult tlf_solve(const CompositeProblem& prob, const FeasibilityModel& feas, const SolverParams& params,
                      const SolveOptions& options) {
    return tlf_solve(prob, hqs_solvers(feas), params, options);
}

SolveResult dtlf_solve(const CompositeProblem& prob, const FeasibilitySolvers& feas, const DenoiserSpec& denoiser,
                       const SolverParams& params, const SolveOptions& options) {
    denoiser.validate();
    LoopState st = start(prob, params, options);
    const double t = params.step_for(prob.lipschitz());
    IterateTrace trace;
    trace.method = "dtlf";
    trace.initial_F = st.F;
    trace.sigma = descent_constant(t, prob.lipschitz());

    for (int k = 0; k < params.max_iters; ++k) {
        ImageTensor x_F = pg_step(prob, st.x, t);
        const ImageTensor x_img = prob.to_image(st.x);
        const ImageTensor x_G = prob.from_image(feas.G(x_img));

        TraceRecord rec;
        rec.k = k;
        rec.norm_xF_x = distance(x_F, st.x);
        rec.norm_xG_x = distance(x_G, st.x);
        rec.alpha = st.alpha;
        rec.mu = st.mu;

        BusResult b;
        try {
            const ImageTensor anchor = denoise(denoiser, x_img, k);
            const ImageTensor x_Gmu = prob.from_image(feas.G_mu(x_img, anchor, st.mu));
            ImageTensor z = lincomb(st.alpha, x_Gmu, 1.0 - st.alpha, x_F);
            b = bus(st.x, x_G, x_Gmu, std::move(z), x_F, st.alpha, st.mu, params.beta, params.C);
            rec.norm_xGmu_x = b.anchored_step;
        } catch (const DenoiserError&) {
            b = BusResult{lincomb(st.alpha, x_G, 1.0 - st.alpha, x_F), params.beta * st.mu, BusBranch::fell_back_xG,
                          std::numeric_limits<double>::quiet_NaN(), rec.norm_xG_x};
            rec.norm_xGmu_x = std::numeric_limits<double>::quiet_NaN();
        }
        rec.bus_branch = b.branch;
        st.mu = b.mu;

        const double F_u = prob.eval(b.u), F_xF = prob.eval(x_F);
        MdusResult m = mdus(F_u, std::move(b.u), F_xF, std::move(x_F), st.alpha, params.gamma);
        if (finish_iteration(prob, options, params, st, std::move(m), rec, trace)) {
            trace.converged = true;
            break;
        }
    }
    return SolveResult{st.x, prob.to_image(st.x), std::move(trace)};
}

SolveResult dtlf_solve(const CompositeProblem& prob, const FeasibilityModel& feas, const DenoiserSpec& denoiser,
                       const SolverParams& params, const SolveOptions& options) {
    return dtlf_solve(prob, hqs_solvers(feas), denoiser, params, options);
}

int first_monotonicity_violation(const IterateTrace& trace, double slack) {
    for (std::size_t k = 0; k < trace.records.size(); ++k)
        if (!(trace.records[k].F <= trace.F_before(k) + slack)) return static_cast<int>(k);
    return -1;
}

int first_sufficient_descent_violation(const IterateTrace& trace, double slack) {
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const double d = trace.records[k].norm_xF_x;
        if (!(trace.records[k].F <= trace.F_before(k) - trace.sigma * d * d + slack)) return static_cast<int>(k);
    }
    return -1;
}

int first_bus_violation(const IterateTrace& trace, double C) {
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        if (r.bus_branch == BusBranch::accepted_z && !(r.norm_xGmu_x <= C * r.norm_xG_x)) return static_cast<int>(k);
    }
    return -1;
}

}  // namespace tlf
