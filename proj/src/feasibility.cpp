#include "tlf/feasibility.hpp"

#include <cmath>

#include "fft.hpp"
#include "tlf/errors.hpp"

namespace tlf {

using detail::Complex;
using detail::Fft2d;

void FeasibilityModel::validate() const {
    if (observation.shape() != data_op.output_shape())
        throw ShapeError("feasibility observation shape does not match the data operator");
    if (data_op.input_shape() != data_op.output_shape())
        throw ShapeError("feasibility data operator must be square");
    if (!(tv_weight >= 0.0)) throw ConfigError("TV weight must be >= 0");
    if (!(rho_h > 0.0) || !(rho_v > 0.0)) throw ConfigError("HQS penalties rho_h, rho_v must be positive");
    if (hqs_iters < 1) throw ConfigError("hqs_iters must be positive");
    if (x_solver == XSolver::fft && !data_op.is_circulant())
        throw ConfigError("fft x-solver needs a circulant data operator (blur or identity); use cg");
    if (x_solver == XSolver::cg && !(cg_tol > 0.0)) throw ConfigError("cg_tol must be positive");
    if (anchor) {
        if (!(anchor->mu >= 0.0)) throw ConfigError("anchor weight mu must be >= 0");
        if (anchor->target.shape() != data_op.input_shape()) throw ShapeError("anchor shape mismatch");
    }
}

FeasibilityModel FeasibilityModel::with_anchor(ImageTensor target, double mu) const {
    FeasibilityModel m = *this;
    m.anchor = Anchor{std::move(target), mu};
    return m;
}

namespace {

ImageTensor grad_h(const ImageTensor& x) { return LinearOperator::gradient_h(x.shape()).apply(x); }
ImageTensor grad_v(const ImageTensor& x) { return LinearOperator::gradient_v(x.shape()).apply(x); }

double anchor_mu(const FeasibilityModel& m) { return m.anchor ? m.anchor->mu : 0.0; }

ImageTensor fft_solve(const FeasibilityModel& model, const ImageTensor& rhs) {
    const Shape& s = rhs.shape();
    const auto kt = model.data_op.transfer_function();
    const auto dh = LinearOperator::gradient_h(s).transfer_function();
    const auto dv = LinearOperator::gradient_v(s).transfer_function();
    const double mu = anchor_mu(model);
    const Fft2d fft(s.height, s.width);
    std::vector<double> denom(fft.spectrum_size());
    for (std::size_t i = 0; i < denom.size(); ++i) {
        denom[i] = std::norm((*kt)[i]) + 2.0 * model.rho_h * std::norm((*dh)[i]) +
                   2.0 * model.rho_v * std::norm((*dv)[i]) + mu;
        if (!(denom[i] > 0.0)) throw NumericalError("singular HQS normal equations (zero frequency response)");
    }
    ImageTensor x(s);
    std::vector<Complex> spec(fft.spectrum_size());
    for (std::size_t c = 0; c < s.channels; ++c) {
        fft.forward(rhs.channel(c), spec);
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] /= denom[i];
        fft.inverse(spec, x.channel(c));
    }
    return x;
}

ImageTensor cg_solve(const FeasibilityModel& model, const ImageTensor& rhs, const ImageTensor& warm) {
    ImageTensor x = warm;
    ImageTensor r = rhs - hqs_normal_apply(model, x);
    // A zero right-hand side (e.g. empty mask with z = 0) falls back to a
    // reduction relative to the initial residual.
    const double scale = norm(rhs) > 0.0 ? norm(rhs) : norm(r);
    if (scale == 0.0) return x;
    ImageTensor p = r;
    double rr = dot(r, r);
    const double target = model.cg_tol * scale;
    for (int it = 0; it < model.cg_max_iters; ++it) {
        if (std::sqrt(rr) <= target) return x;
        const ImageTensor ap = hqs_normal_apply(model, p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double a = rr / pap;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        const double rr_next = dot(r, r);
        const double b = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + b * p[i];
    }
    // Recompute the true residual before giving up; recursion drift can
    // leave the updated residual slightly off.
    const double true_res = norm(rhs - hqs_normal_apply(model, x)) / scale;
    if (true_res <= model.cg_tol) return x;
    throw NumericalError("conjugate gradient did not reach tolerance", true_res);
}

}  // namespace

ImageTensor hqs_rhs(const FeasibilityModel& model, const ImageTensor& z_h, const ImageTensor& z_v) {
    const Shape& s = z_h.shape();
    ImageTensor rhs = model.data_op.adjoint(model.observation);
    const ImageTensor th = LinearOperator::gradient_h(s).adjoint(z_h);
    const ImageTensor tv = LinearOperator::gradient_v(s).adjoint(z_v);
    const double mu = anchor_mu(model);
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        rhs[i] += 2.0 * model.rho_h * th[i] + 2.0 * model.rho_v * tv[i];
        if (mu > 0.0) rhs[i] += mu * model.anchor->target[i];
    }
    return rhs;
}

ImageTensor hqs_normal_apply(const FeasibilityModel& model, const ImageTensor& x) {
    const Shape& s = x.shape();
    ImageTensor out = model.data_op.adjoint(model.data_op.apply(x));
    const auto gh = LinearOperator::gradient_h(s), gv = LinearOperator::gradient_v(s);
    const ImageTensor lh = gh.adjoint(gh.apply(x));
    const ImageTensor lv = gv.adjoint(gv.apply(x));
    const double mu = anchor_mu(model);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += 2.0 * model.rho_h * lh[i] + 2.0 * model.rho_v * lv[i] + mu * x[i];
    return out;
}

ImageTensor hqs_x_update(const FeasibilityModel& model, const ImageTensor& z_h, const ImageTensor& z_v,
                         const ImageTensor& warm) {
    const ImageTensor rhs = hqs_rhs(model, z_h, z_v);
    return model.x_solver == XSolver::fft ? fft_solve(model, rhs) : cg_solve(model, rhs, warm);
}

double hqs_energy(const FeasibilityModel& model, const ImageTensor& x, const ImageTensor& z_h, const ImageTensor& z_v) {
    const ImageTensor r = model.data_op.apply(x) - model.observation;
    double e = 0.5 * dot(r, r);
    e += model.tv_weight * (lp_penalty(z_h, model.tv_exponent) + lp_penalty(z_v, model.tv_exponent));
    const ImageTensor dh = z_h - grad_h(x), dv = z_v - grad_v(x);
    e += model.rho_h * dot(dh, dh) + model.rho_v * dot(dv, dv);
    if (model.anchor) {
        const double d = distance(x, model.anchor->target);
        e += 0.5 * model.anchor->mu * d * d;
    }
    return e;
}

HqsState run_hqs(const FeasibilityModel& model, const ImageTensor& x_init) {
    model.validate();
    if (x_init.shape() != model.data_op.input_shape()) throw ShapeError("HQS initial point has the wrong shape");
    HqsState st{x_init, grad_h(x_init), grad_v(x_init), {}};
    st.energy.push_back(hqs_energy(model, st.x, st.z_h, st.z_v));
    // lambda2 |z|^q + rho (z - g)^2 = 2 rho [ lambda2/(2 rho) |z|^q + (z - g)^2 / 2 ]
    const ProxSpec spec_h{model.tv_exponent, model.tv_weight / (2.0 * model.rho_h)};
    const ProxSpec spec_v{model.tv_exponent, model.tv_weight / (2.0 * model.rho_v)};
    for (int it = 0; it < model.hqs_iters; ++it) {
        st.z_h = prox_lp(grad_h(st.x), spec_h);
        st.z_v = prox_lp(grad_v(st.x), spec_v);
        st.x = hqs_x_update(model, st.z_h, st.z_v, st.x);
        st.energy.push_back(hqs_energy(model, st.x, st.z_h, st.z_v));
    }
    if (!st.x.all_finite()) throw NumericalError("non-finite HQS iterate");
    return st;
}

ImageTensor solve_G(const FeasibilityModel& model, const ImageTensor& x_init) {
    if (model.anchor) throw ConfigError("solve_G called with an anchored model; use solve_G_mu");
    return run_hqs(model, x_init).x;
}

ImageTensor solve_G_mu(const FeasibilityModel& model, const ImageTensor& x_init) {
    if (!model.anchor || !(model.anchor->mu > 0.0))
        throw ConfigError("solve_G_mu needs an anchor with mu > 0");
    return run_hqs(model, x_init).x;
}

}  // namespace tlf
