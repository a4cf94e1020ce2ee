#include "tlf/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "tlf/errors.hpp"
#include "tlf/metrics.hpp"
#include "tlf/rng.hpp"

namespace tlf {

namespace {

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a finite value >= 0");
}

}  // namespace

TaskProblem build_deblur(const ImageTensor& blurry, const BlurKernel& kernel, double lambda1, Exponent p,
                         double lambda2, Exponent q, int wavelet_levels) {
    require_nonnegative(lambda1, "lambda1");
    require_nonnegative(lambda2, "lambda2");
    const Shape shape = blurry.shape();
    const LinearOperator K = LinearOperator::convolution(kernel, shape);
    const LinearOperator A = LinearOperator::compose({K, LinearOperator::wavelet_inverse(shape, wavelet_levels)});
    const double L = *K.exact_norm_sq();

    FeasibilityModel feas(K, blurry);
    feas.tv_weight = lambda2;
    feas.tv_exponent = q;
    feas.x_solver = XSolver::fft;
    return TaskProblem{CompositeProblem(A, blurry, lambda1, p, L, VariableSpace::wavelet, wavelet_levels),
                       std::move(feas)};
}

void validate_binary_mask(const ImageTensor& mask) {
    for (double v : mask.values())
        if (v != 0.0 && v != 1.0) throw ValidationError("mask entries must be exactly 0 or 1");
}

TaskProblem build_inpaint(const ImageTensor& observed, const ImageTensor& mask, double lambda1, Exponent p,
                          double lambda2, Exponent q, int wavelet_levels) {
    require_nonnegative(lambda1, "lambda1");
    require_nonnegative(lambda2, "lambda2");
    require_same_shape(observed, mask, "inpainting mask");
    validate_binary_mask(mask);
    const Shape shape = observed.shape();
    const LinearOperator M = LinearOperator::mask(mask);
    const LinearOperator A = LinearOperator::compose({M, LinearOperator::wavelet_inverse(shape, wavelet_levels)});

    FeasibilityModel feas(M, observed);
    feas.tv_weight = lambda2;
    feas.tv_exponent = q;
    feas.x_solver = XSolver::cg;
    // L = 1 even for an all-zero mask: any step below 1 stays valid.
    return TaskProblem{CompositeProblem(A, observed, lambda1, p, 1.0, VariableSpace::wavelet, wavelet_levels),
                       std::move(feas)};
}

// ---------------------------------------------------------------------------
// Derain

void DerainModel::validate() const {
    require_nonnegative(nu1, "nu1");
    require_nonnegative(nu2, "nu2");
    require_nonnegative(rho1, "rho1");
    require_nonnegative(rho2, "rho2");
    if (hqs_iters < 1) throw ConfigError("derain hqs_iters must be >= 1");
    if (wavelet_levels < 1) throw ConfigError("derain wavelet_levels must be >= 1");
}

namespace {

bool in_box(const ImageTensor& x) {
    return std::all_of(x.values().begin(), x.values().end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

// min_beta 1/2 (beta - c)^2 + nu |beta|^p, summed over coefficients.
double envelope(const ImageTensor& coeffs, double nu, Exponent p) {
    const ProxSpec spec{p, nu};
    double acc = 0.0;
    for (double c : coeffs.values()) {
        const double b = prox_lp(c, spec);
        acc += 0.5 * (b - c) * (b - c) + nu * lp_term(b, p);
    }
    return acc;
}

double layer_residual_sq(const ImageTensor& y, const ImageTensor& x_b, const ImageTensor& x_r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - x_b[i] - x_r[i];
        acc += d * d;
    }
    return acc;
}

double joint_distance(const ImageTensor& a_b, const ImageTensor& a_r, const ImageTensor& b_b, const ImageTensor& b_r) {
    const double db = distance(a_b, b_b), dr = distance(a_r, b_r);
    return std::sqrt(db * db + dr * dr);
}

double quad(double y, double c, double d, double a, double b) {
    const double r = y - a - b;
    return 0.5 * (r * r + (a - c) * (a - c) + (b - d) * (b - d));
}

}  // namespace

double derain_objective(const ImageTensor& y, const ImageTensor& x_b, const ImageTensor& x_r, const DerainModel& m) {
    require_same_shape(y, x_b, "derain background");
    require_same_shape(y, x_r, "derain rain layer");
    if (!in_box(x_b) || !in_box(x_r)) return std::numeric_limits<double>::infinity();
    return 0.5 * layer_residual_sq(y, x_b, x_r) + envelope(wavelet_forward(x_b, m.wavelet_levels), m.nu1, m.p1) +
           envelope(wavelet_forward(x_r, m.wavelet_levels), m.nu2, m.p2);
}

double derain_objective(const ImageTensor& y, const DerainState& s, const DerainModel& m) {
    require_same_shape(y, s.x_b, "derain background");
    require_same_shape(y, s.x_r, "derain rain layer");
    if (!in_box(s.x_b) || !in_box(s.x_r)) return std::numeric_limits<double>::infinity();
    const double fit_b = distance(s.x_b, wavelet_inverse(s.beta, m.wavelet_levels));
    const double fit_r = distance(s.x_r, wavelet_inverse(s.gamma, m.wavelet_levels));
    return 0.5 * layer_residual_sq(y, s.x_b, s.x_r) + 0.5 * fit_b * fit_b + 0.5 * fit_r * fit_r +
           m.nu1 * lp_penalty(s.beta, m.p1) + m.nu2 * lp_penalty(s.gamma, m.p2);
}

std::pair<double, double> layer_fit(double y, double c, double d) {
    // Stationary point of the quadratic: 2a + b = y + c, a + 2b = y + d.
    const double a0 = (y + 2.0 * c - d) / 3.0;
    const double b0 = (y + 2.0 * d - c) / 3.0;
    if (a0 >= 0.0 && a0 <= 1.0 && b0 >= 0.0 && b0 <= 1.0) return {a0, b0};
    // Otherwise the minimum lies on an edge of the square; each edge problem
    // is a clamped 1-D quadratic.
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    std::pair<double, double> best{0.0, 0.0};
    double best_q = std::numeric_limits<double>::infinity();
    for (double a : {0.0, 1.0}) {
        const double b = clamp01((y - a + d) / 2.0);
        const double q = quad(y, c, d, a, b);
        if (q < best_q) best_q = q, best = {a, b};
    }
    for (double b : {0.0, 1.0}) {
        const double a = clamp01((y - b + c) / 2.0);
        const double q = quad(y, c, d, a, b);
        if (q < best_q) best_q = q, best = {a, b};
    }
    return best;
}

double rain_layer_update(double c, double anchor, double eta, double rho, Exponent p) {
    return prox_lp((c + eta * anchor) / (1.0 + eta), ProxSpec{p, rho / (1.0 + eta)});
}

DerainState derain_init(const ImageTensor& y, const DerainModel& m, const SolverParams& params) {
    m.validate();
    DerainState s;
    s.x_b = project_box01(y);
    s.x_r = ImageTensor(y.shape());
    s.beta = wavelet_forward(s.x_b, m.wavelet_levels);
    s.gamma = ImageTensor(y.shape());
    s.alpha = params.alpha0;
    s.mu = params.mu0;
    s.F = derain_objective(y, s.x_b, s.x_r, m);
    return s;
}

namespace {

FeasibilityModel background_model(const ImageTensor& y, const ImageTensor& x_r, const DerainModel& m) {
    FeasibilityModel model(LinearOperator::identity(y.shape()), y - x_r);
    model.tv_weight = m.rho1;
    model.tv_exponent = m.p1;
    model.rho_h = model.rho_v = m.rho1 > 0.0 ? 50.0 * m.rho1 : 0.05;
    model.hqs_iters = m.hqs_iters;
    model.x_solver = XSolver::fft;
    return model;
}

ImageTensor rain_update(const ImageTensor& residual, const ImageTensor* anchor, double eta, const DerainModel& m) {
    ImageTensor out(residual.shape());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = rain_layer_update(residual[i], anchor ? (*anchor)[i] : 0.0, anchor ? eta : 0.0, m.rho2, m.p2);
    return project_box01(out);
}

void check_params(const SolverParams& p) {
    if (!(p.alpha0 >= 0.0 && p.alpha0 < 1.0)) throw ConfigError("alpha0 must lie in [0, 1)");
    if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(p.beta > 0.0 && p.beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
    if (!(p.mu0 > 0.0)) throw ConfigError("mu0 must be positive");
    if (!(p.C > 0.0)) throw ConfigError("C must be positive");
    if (p.max_iters < 1) throw ConfigError("max_iters must be >= 1");
}

}  // namespace

DerainState derain_step(const ImageTensor& y, const DerainState& state, const DerainDenoisers& denoisers,
                        const SolverParams& params, const DerainModel& model, int k, TraceRecord* record) {
    require_same_shape(y, state.x_b, "derain background");
    require_same_shape(y, state.x_r, "derain rain layer");
    const int levels = model.wavelet_levels;

    // (a) codes: proximal step with s = 1, the exact minimizer in the codes.
    DerainState next;
    next.beta = prox_lp(wavelet_forward(state.x_b, levels), ProxSpec{model.p1, model.nu1});
    next.gamma = prox_lp(wavelet_forward(state.x_r, levels), ProxSpec{model.p2, model.nu2});

    // (b) both layers at once: exact box-constrained minimizer given the codes.
    const ImageTensor c_b = wavelet_inverse(next.beta, levels);
    const ImageTensor c_r = wavelet_inverse(next.gamma, levels);
    ImageTensor xF_b(y.shape()), xF_r(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) std::tie(xF_b[i], xF_r[i]) = layer_fit(y[i], c_b[i], c_r[i]);

    // Anchor-free feasibility maps. The background sees the previous rain
    // layer; the rain layer then sees the fresh background.
    const FeasibilityModel bg = background_model(y, state.x_r, model);
    const ImageTensor xG_b = project_box01(solve_G(bg, state.x_b));
    const ImageTensor xG_r = rain_update(y - xG_b, nullptr, 0.0, model);

    const double alpha = state.alpha;
    const double mu = state.mu;
    const double model_step = joint_distance(xG_b, xG_r, state.x_b, state.x_r);
    double anchored_step = std::numeric_limits<double>::quiet_NaN();
    ImageTensor u_b, u_r;
    BusBranch bus_branch = BusBranch::fell_back_xG;
    try {
        // (c)-(e) denoised anchors and the anchored maps.
        const ImageTensor anchor_b = denoise(denoisers.background, state.x_b, k);
        const ImageTensor anchor_r = denoise(denoisers.rain, state.x_r, k);
        const ImageTensor xGmu_b = project_box01(solve_G_mu(bg.with_anchor(anchor_b, mu), state.x_b));
        const ImageTensor xGmu_r = rain_update(y - xGmu_b, &anchor_r, mu, model);
        anchored_step = joint_distance(xGmu_b, xGmu_r, state.x_b, state.x_r);
        if (anchored_step <= params.C * model_step) {
            bus_branch = BusBranch::accepted_z;
            u_b = lincomb(alpha, xGmu_b, 1.0 - alpha, xF_b);
            u_r = lincomb(alpha, xGmu_r, 1.0 - alpha, xF_r);
        }
    } catch (const DenoiserError&) {
        anchored_step = std::numeric_limits<double>::quiet_NaN();
    }
    next.mu = mu;
    if (bus_branch == BusBranch::fell_back_xG) {
        u_b = lincomb(alpha, xG_b, 1.0 - alpha, xF_b);
        u_r = lincomb(alpha, xG_r, 1.0 - alpha, xF_r);
        next.mu = params.beta * mu;
    }

    // (f) joint MDUS on the layer objective.
    const double F_u = derain_objective(y, u_b, u_r, model);
    const double F_xF = derain_objective(y, xF_b, xF_r, model);
    MdusBranch mdus_branch;
    if (F_u <= F_xF) {
        next.x_b = std::move(u_b);
        next.x_r = std::move(u_r);
        next.F = F_u;
        mdus_branch = MdusBranch::accepted_v;
    } else {
        next.x_b = xF_b;
        next.x_r = xF_r;
        next.F = F_xF;
        mdus_branch = MdusBranch::fell_back_xF;
    }
    next.alpha = params.gamma * alpha;
    if (!next.x_b.all_finite() || !next.x_r.all_finite())
        throw NumericalError("non-finite derain iterate at k = " + std::to_string(k));

    if (record) {
        record->k = k;
        record->F = next.F;
        const double step = joint_distance(next.x_b, next.x_r, state.x_b, state.x_r);
        const double scale = std::hypot(norm(next.x_b), norm(next.x_r));
        record->rel_err = scale > 0.0 ? step / scale : (step > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        record->norm_xF_x = joint_distance(xF_b, xF_r, state.x_b, state.x_r);
        record->norm_xG_x = model_step;
        record->norm_xGmu_x = anchored_step;
        record->alpha = alpha;
        record->mu = mu;
        record->mdus_branch = mdus_branch;
        record->bus_branch = bus_branch;
    }
    return next;
}

DerainResult derain_solve(const ImageTensor& y, const DerainState& init, const DerainDenoisers& denoisers,
                          const SolverParams& params, const DerainModel& model,
                          const std::optional<ImageTensor>& background_truth) {
    check_params(params);
    model.validate();
    denoisers.background.validate();
    denoisers.rain.validate();
    if (!in_box(init.x_b) || !in_box(init.x_r)) throw ValidationError("derain initial layers must lie in [0, 1]");

    DerainResult res{init, {}};
    res.state.F = derain_objective(y, init.x_b, init.x_r, model);
    res.trace.method = "derain";
    res.trace.initial_F = res.state.F;
    for (int k = 0; k < params.max_iters; ++k) {
        TraceRecord rec;
        res.state = derain_step(y, res.state, denoisers, params, model, k, &rec);
        if (background_truth) rec.psnr = psnr(res.state.x_b, *background_truth);
        res.trace.records.push_back(rec);
        if (rec.rel_err <= params.rel_tol) {
            res.trace.converged = true;
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Synthetic data

ImageTensor desk_scene(std::size_t size) {
    if (size < 16) throw ShapeError("desk_scene needs size >= 16");
    const double s = static_cast<double>(size);
    ImageTensor x(Shape{size, size, 1});
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) {
            const double r = static_cast<double>(i) / s, c = static_cast<double>(j) / s;
            double v = 0.35 + 0.15 * r;  // wall shading
            if (r >= 0.55 && r < 0.85 && c >= 0.1 && c < 0.9) v = 0.7;   // desk top
            if (r >= 0.2 && r < 0.45 && c >= 0.15 && c < 0.4) v = 0.15;  // book
            const double dr = r - 0.3, dc = c - 0.7;
            if (dr * dr + dc * dc < 0.12 * 0.12) v = 0.9;                // lamp shade
            if (r >= 0.62 && r < 0.8 && c >= 0.55 && c < 0.8) v = (j / 2) % 2 ? 0.8 : 0.4;  // keyboard
            const double br = r - 0.75, bc = c - 0.25;
            v += 0.2 * std::exp(-(br * br + bc * bc) / (2.0 * 0.08 * 0.08));  // mug
            x.at(i, j) = std::clamp(v, 0.0, 1.0);
        }
    return x;
}

ImageTensor synthetic_rain(Shape shape, std::uint64_t seed, double amplitude, double density, double angle_degrees,
                           int streak_length) {
    if (!(amplitude > 0.0 && amplitude <= 0.5)) throw ConfigError("rain amplitude must lie in (0, 0.5]");
    if (!(density > 0.0 && density < 1.0)) throw ConfigError("rain density must lie in (0, 1)");
    if (streak_length < 1) throw ConfigError("rain streak length must be >= 1");
    Lcg64 rng(seed);
    const Shape plane{shape.height, shape.width, 1};
    ImageTensor salt(plane);
    for (std::size_t i = 0; i < salt.size(); ++i) {
        const double u = rng.uniform();
        const double level = rng.uniform();
        if (u < density) salt[i] = 0.5 + 0.5 * level;
    }

    // Motion blur along a line at the given angle (row axis points down).
    const double theta = angle_degrees * std::numbers::pi / 180.0;
    const auto H = static_cast<std::ptrdiff_t>(shape.height), W = static_cast<std::ptrdiff_t>(shape.width);
    ImageTensor streaks(plane);
    const double half = 0.5 * (streak_length - 1);
    for (std::ptrdiff_t i = 0; i < H; ++i)
        for (std::ptrdiff_t j = 0; j < W; ++j) {
            const double v = salt.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (v == 0.0) continue;
            for (int t = 0; t < streak_length; ++t) {
                const double d = t - half;
                const auto di = static_cast<std::ptrdiff_t>(std::lround(-d * std::sin(theta)));
                const auto dj = static_cast<std::ptrdiff_t>(std::lround(d * std::cos(theta)));
                streaks.at(static_cast<std::size_t>(((i + di) % H + H) % H), static_cast<std::size_t>(((j + dj) % W + W) % W)) += v;
            }
        }
    const double peak = *std::max_element(streaks.values().begin(), streaks.values().end());
    if (peak > 0.0) streaks *= amplitude / peak;

    ImageTensor out(shape);
    for (std::size_t c = 0; c < shape.channels; ++c)
        std::copy(streaks.values().begin(), streaks.values().end(), out.channel(c).begin());
    return out;
}

ImageTensor random_mask(Shape shape, double missing_fraction, std::uint64_t seed) {
    if (!(missing_fraction >= 0.0 && missing_fraction <= 1.0)) throw ConfigError("missing fraction must lie in [0, 1]");
    const std::size_t n = shape.plane();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Lcg64 rng(seed);
    for (std::size_t i = n; i-- > 1;) {
        const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
        std::swap(order[i], order[j]);
    }
    const auto missing = static_cast<std::size_t>(std::llround(missing_fraction * static_cast<double>(n)));
    ImageTensor mask(shape, 1.0);
    for (std::size_t m = 0; m < missing; ++m)
        for (std::size_t c = 0; c < shape.channels; ++c) mask[c * n + order[m]] = 0.0;
    return mask;
}

}  // namespace tlf
