#pragma once

#include <functional>

#include "tlf/denoise.hpp"
#include "tlf/feasibility.hpp"
#include "tlf/problem.hpp"

namespace tlf {

struct MdusResult {
    ImageTensor x;
    double F = 0.0;      // objective at the returned point
    double alpha = 0.0;  // gamma * alpha, in both branches
    MdusBranch branch = MdusBranch::accepted_v;
};

// Monotone descent updating: keep the aggregated point v when it does not
// increase the objective relative to the proximal-gradient point x_F,
// otherwise fall back to x_F. alpha decays unconditionally.
MdusResult mdus(double F_v, ImageTensor v, double F_xF, ImageTensor x_F, double alpha, double gamma);
MdusResult mdus(const CompositeProblem& prob, ImageTensor v, ImageTensor x_F, double alpha, double gamma);

struct BusResult {
    ImageTensor u;
    double mu = 0.0;  // mu for the next iteration
    BusBranch branch = BusBranch::accepted_z;
    double anchored_step = 0.0;  // ||x_Gmu - x||
    double model_step = 0.0;     // ||x_G - x||
};

// Boundedness-based updating: accept z when ||x_Gmu - x|| <= C ||x_G - x||,
// else rebuild from the anchor-free x_G and shrink mu by beta.
BusResult bus(const ImageTensor& x, const ImageTensor& x_G, const ImageTensor& x_Gmu, ImageTensor z,
              const ImageTensor& x_F, double alpha, double mu, double beta, double C);
// Same decision from precomputed displacement norms.
BusResult bus(double anchored_step, double model_step, const ImageTensor& x_G, ImageTensor z, const ImageTensor& x_F,
              double alpha, double mu, double beta, double C);

// Feasibility maps in image space. G(x) warm-starts at x; G_mu(x, anchor, mu)
// adds the proximal anchor term.
struct FeasibilitySolvers {
    std::function<ImageTensor(const ImageTensor& x)> G;
    std::function<ImageTensor(const ImageTensor& x, const ImageTensor& anchor, double mu)> G_mu;
};

FeasibilitySolvers hqs_solvers(const FeasibilityModel& model);

SolveResult tlf_solve(const CompositeProblem& prob, const FeasibilitySolvers& feas, const SolverParams& params,
                      const SolveOptions& options = {});
SolveResult tlf_solve(const CompositeProblem& prob, const FeasibilityModel& feas, const SolverParams& params,
                      const SolveOptions& options = {});

// Denoiser failures at an iteration are absorbed: that iteration takes the
// BUS fallback (recorded as fell-back-xG with norm_xGmu_x = NaN).
SolveResult dtlf_solve(const CompositeProblem& prob, const FeasibilitySolvers& feas, const DenoiserSpec& denoiser,
                       const SolverParams& params, const SolveOptions& options = {});
SolveResult dtlf_solve(const CompositeProblem& prob, const FeasibilityModel& feas, const DenoiserSpec& denoiser,
                       const SolverParams& params, const SolveOptions& options = {});

// Invariant checks over a finished trace; each returns the index of the first
// violating record or -1.
int first_monotonicity_violation(const IterateTrace& trace, double slack = 1e-10);
int first_sufficient_descent_violation(const IterateTrace& trace, double slack = 1e-10);
int first_bus_violation(const IterateTrace& trace, double C);

}  // namespace tlf
