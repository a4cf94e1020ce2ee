#include "tlf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tlf/denoise.hpp"
#include "tlf/engine.hpp"
#include "tlf/errors.hpp"
#include "tlf/io.hpp"
#include "tlf/metrics.hpp"
#include "tlf/rng.hpp"
#include "tlf/tasks.hpp"

namespace tlf {

using json = nlohmann::ordered_json;

std::string to_string(Task t) {
    switch (t) {
        case Task::deblur: return "deblur";
        case Task::inpaint: return "inpaint";
        case Task::derain: return "derain";
        case Task::bench: return "bench";
    }
    return "deblur";
}

Task parse_task(const std::string& s) {
    if (s == "deblur") return Task::deblur;
    if (s == "inpaint") return Task::inpaint;
    if (s == "derain") return Task::derain;
    if (s == "bench") return Task::bench;
    throw ConfigError("unknown task '" + s + "'");
}

namespace {

const std::vector<std::string> kSolvers{"pg", "apg", "mapg", "tlf", "dtlf"};

bool known_solver(const std::string& s) { return std::find(kSolvers.begin(), kSolvers.end(), s) != kSolvers.end(); }

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::logic_error&) {
    }
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long n = std::stoll(v, &used);
        if (used == v.size()) return n;
    } catch (const std::logic_error&) {
    }
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string real_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!known_solver(solver)) throw ConfigError("unknown solver '" + solver + "'");
    if (task == Task::derain && solver != "dtlf") throw ConfigError("derain runs only with the dtlf solver");
    if (task == Task::bench) {
        const Task t = parse_task(bench_task);
        if (t == Task::bench || t == Task::derain) throw ConfigError("bench_task must be deblur or inpaint");
        if (bench_solvers.empty()) throw ConfigError("bench_solvers is empty");
        for (const auto& s : bench_solvers)
            if (!known_solver(s)) throw ConfigError("unknown solver '" + s + "' in bench_solvers");
    }
    if (params.max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(params.rel_tol >= 0.0)) throw ConfigError("rel_tol must be >= 0");
    if (!(params.step >= 0.0)) throw ConfigError("step must be >= 0 (0 selects 0.99/L)");
    for (double w : {lambda1, lambda2, nu1, nu2, rho1, rho2})
        if (!(w >= 0.0)) throw ConfigError("regularization weights must be >= 0");
    if (hqs_iters < 1) throw ConfigError("hqs_iters must be >= 1");
    if (wavelet_levels < 1) throw ConfigError("wavelet_levels must be >= 1");
    if (size < 16) throw ConfigError("size must be >= 16");
    if (!(noise >= 0.0)) throw ConfigError("noise must be >= 0");
    if (blur_size % 2 == 0) throw ConfigError("blur_size must be odd");
    if (!(blur_sigma > 0.0)) throw ConfigError("blur_sigma must be positive");
    if (!(missing >= 0.0 && missing <= 1.0)) throw ConfigError("missing must lie in [0, 1]");
    if (!(rain_amplitude > 0.0 && rain_amplitude <= 0.5)) throw ConfigError("rain_amplitude must lie in (0, 0.5]");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (external_denoiser.empty()) parse_denoiser(denoiser);
    parse_denoiser(rain_denoiser);
}

void apply_settings(ExperimentConfig& c, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, v] : kv) {
        if (key == "task") c.task = parse_task(v);
        else if (key == "input") c.input = v;
        else if (key == "kernel") c.kernel = v;
        else if (key == "mask") c.mask = v;
        else if (key == "gt") c.gt = v;
        else if (key == "out") c.out = v;
        else if (key == "solver") c.solver = v;
        else if (key == "step") c.params.step = to_real(key, v);
        else if (key == "max_iters") c.params.max_iters = static_cast<int>(to_integer(key, v));
        else if (key == "rel_tol") c.params.rel_tol = to_real(key, v);
        else if (key == "alpha0") c.params.alpha0 = to_real(key, v);
        else if (key == "gamma") c.params.gamma = to_real(key, v);
        else if (key == "mu0") c.params.mu0 = to_real(key, v);
        else if (key == "beta") c.params.beta = to_real(key, v);
        else if (key == "C") c.params.C = to_real(key, v);
        else if (key == "lambda1") c.lambda1 = to_real(key, v);
        else if (key == "lambda2") c.lambda2 = to_real(key, v);
        else if (key == "p") c.p = parse_exponent(v);
        else if (key == "q") c.q = parse_exponent(v);
        else if (key == "nu1") c.nu1 = to_real(key, v);
        else if (key == "nu2") c.nu2 = to_real(key, v);
        else if (key == "rho1") c.rho1 = to_real(key, v);
        else if (key == "rho2") c.rho2 = to_real(key, v);
        else if (key == "p1") c.p1 = parse_exponent(v);
        else if (key == "p2") c.p2 = parse_exponent(v);
        else if (key == "hqs_iters") c.hqs_iters = static_cast<int>(to_integer(key, v));
        else if (key == "wavelet_levels") c.wavelet_levels = static_cast<int>(to_integer(key, v));
        else if (key == "denoiser") c.denoiser = v;
        else if (key == "rain_denoiser") c.rain_denoiser = v;
        else if (key == "external_denoiser") c.external_denoiser = v;
        else if (key == "external_hint") c.external_hint = to_real(key, v);
        else if (key == "seed") {
            const long long s = to_integer(key, v);
            if (s < 0) throw ConfigError("seed must be >= 0");
            c.seed = static_cast<std::uint64_t>(s);
        } else if (key == "size") c.size = static_cast<std::size_t>(std::max(0LL, to_integer(key, v)));
        else if (key == "noise") c.noise = to_real(key, v);
        else if (key == "blur_size") c.blur_size = static_cast<std::size_t>(std::max(0LL, to_integer(key, v)));
        else if (key == "blur_sigma") c.blur_sigma = to_real(key, v);
        else if (key == "missing") c.missing = to_real(key, v);
        else if (key == "rain_amplitude") c.rain_amplitude = to_real(key, v);
        else if (key == "bench_task") c.bench_task = v;
        else if (key == "bench_solvers") c.bench_solvers = split_list(v);
        else if (key == "threads") c.threads = static_cast<int>(to_integer(key, v));
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream o;
    auto line = [&o](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
    line("task", to_string(c.task));
    line("input", c.input);
    line("kernel", c.kernel);
    line("mask", c.mask);
    line("gt", c.gt);
    line("out", c.out);
    line("solver", c.solver);
    line("step", real_text(c.params.step));
    line("max_iters", std::to_string(c.params.max_iters));
    line("rel_tol", real_text(c.params.rel_tol));
    line("alpha0", real_text(c.params.alpha0));
    line("gamma", real_text(c.params.gamma));
    line("mu0", real_text(c.params.mu0));
    line("beta", real_text(c.params.beta));
    line("C", real_text(c.params.C));
    line("lambda1", real_text(c.lambda1));
    line("lambda2", real_text(c.lambda2));
    line("p", exponent_name(c.p));
    line("q", exponent_name(c.q));
    line("nu1", real_text(c.nu1));
    line("nu2", real_text(c.nu2));
    line("rho1", real_text(c.rho1));
    line("rho2", real_text(c.rho2));
    line("p1", exponent_name(c.p1));
    line("p2", exponent_name(c.p2));
    line("hqs_iters", std::to_string(c.hqs_iters));
    line("wavelet_levels", std::to_string(c.wavelet_levels));
    line("denoiser", c.denoiser);
    line("rain_denoiser", c.rain_denoiser);
    line("external_denoiser", c.external_denoiser);
    line("external_hint", real_text(c.external_hint));
    line("seed", std::to_string(c.seed));
    line("size", std::to_string(c.size));
    line("noise", real_text(c.noise));
    line("blur_size", std::to_string(c.blur_size));
    line("blur_sigma", real_text(c.blur_sigma));
    line("missing", real_text(c.missing));
    line("rain_amplitude", real_text(c.rain_amplitude));
    line("bench_task", c.bench_task);
    std::string solvers;
    for (std::size_t i = 0; i < c.bench_solvers.size(); ++i) solvers += (i ? "," : "") + c.bench_solvers[i];
    line("bench_solvers", solvers);
    line("threads", std::to_string(c.threads));
    return o.str();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return 2;
    if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const DenoiserError*>(&e)) return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const ShapeError*>(&e))
        return 1;
    return 3;
}

namespace {

struct Inputs {
    ImageTensor observation;
    std::optional<ImageTensor> truth;
    std::optional<BlurKernel> kernel;
    std::optional<ImageTensor> mask;
};

// Noise for synthetic observations uses a stream separate from the mask /
// rain stream so the two stay independent under one seed.
constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;

Inputs load_inputs(const ExperimentConfig& c, Task task) {
    Inputs in;
    if (!c.gt.empty()) in.truth = read_image(c.gt);
    const bool synthetic = c.input.empty();
    switch (task) {
        case Task::deblur: {
            if (!c.kernel.empty()) in.kernel = read_kernel(c.kernel);
            if (synthetic) {
                const ImageTensor scene = desk_scene(c.size);
                if (!in.kernel) in.kernel = BlurKernel::gaussian(c.blur_size, c.blur_sigma);
                in.observation = add_gaussian_noise(apply(LinearOperator::convolution(*in.kernel, scene.shape()), scene),
                                                    c.noise, c.seed);
                if (!in.truth) in.truth = scene;
            } else {
                if (!in.kernel) throw ConfigError("deblur with --input needs --kernel");
                in.observation = read_image(c.input);
            }
            break;
        }
        case Task::inpaint: {
            if (!c.mask.empty()) in.mask = read_mask(c.mask);
            if (synthetic) {
                const ImageTensor scene = desk_scene(c.size);
                if (!in.mask) in.mask = random_mask(scene.shape(), c.missing, c.seed);
                ImageTensor noisy = add_gaussian_noise(scene, c.noise, c.seed ^ kNoiseStream);
                require_same_shape(noisy, *in.mask, "inpainting mask");
                for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] *= (*in.mask)[i];
                in.observation = std::move(noisy);
                if (!in.truth) in.truth = scene;
            } else {
                if (!in.mask) throw ConfigError("inpaint with --input needs --mask");
                in.observation = read_image(c.input);
            }
            break;
        }
        case Task::derain: {
            if (synthetic) {
                ImageTensor background = desk_scene(c.size);
                for (double& v : background.values()) v = 0.1 + 0.5 * v;
                in.observation = background + synthetic_rain(background.shape(), c.seed, c.rain_amplitude);
                if (!in.truth) in.truth = std::move(background);
            } else {
                in.observation = read_image(c.input);
            }
            break;
        }
        case Task::bench: throw ConfigError("bench has no inputs of its own");
    }
    if (in.truth) require_same_shape(in.observation, *in.truth, "ground truth");
    if (!in.observation.all_finite()) throw ValidationError("input contains non-finite values");
    return in;
}

DenoiserSpec background_denoiser(const ExperimentConfig& c) {
    if (!c.external_denoiser.empty()) return external_denoiser(c.external_denoiser, c.external_hint);
    return parse_denoiser(c.denoiser);
}

void write_image_pair(const std::filesystem::path& dir, const std::string& stem, const ImageTensor& x) {
    write_tlft((dir / (stem + ".tlft")).string(), x);
    if (x.channels() == 1 || x.channels() == 3)
        write_pnm((dir / (stem + (x.channels() == 1 ? ".pgm" : ".ppm"))).string(), x);
}

void add_quality(json& j, const char* prefix, const ImageTensor& x, const std::optional<ImageTensor>& truth) {
    if (!truth) return;
    j[std::string(prefix) + "psnr"] = psnr(x, *truth);
    if (x.height() >= 11 && x.width() >= 11) j[std::string(prefix) + "ssim"] = ssim(x, *truth);
}

void add_trace_summary(json& j, const IterateTrace& t, bool check_descent) {
    j["iterations"] = t.records.size();
    j["converged"] = t.converged;
    j["initial_F"] = t.initial_F;
    j["final_F"] = t.empty() ? t.initial_F : t.back().F;
    if (!t.empty()) j["final_rel_err"] = t.back().rel_err;
    int accepted_v = 0, accepted_z = 0;
    for (const auto& r : t.records) {
        accepted_v += r.mdus_branch == MdusBranch::accepted_v;
        accepted_z += r.bus_branch == BusBranch::accepted_z;
    }
    j["mdus_accepted"] = accepted_v;
    j["bus_accepted"] = accepted_z;
    j["monotone"] = first_monotonicity_violation(t) < 0;
    if (check_descent) j["sufficient_descent"] = first_sufficient_descent_violation(t) < 0;
}

json run_single(const ExperimentConfig& c) {
    c.validate();
    const Inputs in = load_inputs(c, c.task);
    const std::filesystem::path out(c.out);
    std::filesystem::create_directories(out);
    json summary;
    summary["task"] = to_string(c.task);
    summary["solver"] = c.solver;
    summary["seed"] = c.seed;
    if (in.truth) summary["input_psnr"] = psnr(in.observation, *in.truth);
    const auto t0 = std::chrono::steady_clock::now();

    if (c.task == Task::derain) {
        DerainModel m;
        m.nu1 = c.nu1;
        m.nu2 = c.nu2;
        m.rho1 = c.rho1;
        m.rho2 = c.rho2;
        m.p1 = c.p1;
        m.p2 = c.p2;
        m.hqs_iters = c.hqs_iters;
        m.wavelet_levels = c.wavelet_levels;
        const DerainDenoisers dn{background_denoiser(c), parse_denoiser(c.rain_denoiser)};
        summary["denoiser"] = describe(dn.background);
        summary["rain_denoiser"] = describe(dn.rain);
        const DerainState init = derain_init(in.observation, m, c.params);
        const DerainResult res = derain_solve(in.observation, init, dn, c.params, m, in.truth);
        summary["runtime_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        add_trace_summary(summary, res.trace, false);
        add_quality(summary, "", res.state.x_b, in.truth);
        const ImageTensor residual = in.observation - res.state.x_b - res.state.x_r;
        summary["layer_residual"] = norm(in.observation) > 0.0 ? norm(residual) / norm(in.observation) : norm(residual);
        write_trace_csv((out / "trace.csv").string(), res.trace);
        write_image_pair(out, "background", res.state.x_b);
        write_image_pair(out, "rain", res.state.x_r);
        return summary;
    }

    TaskProblem tp = c.task == Task::deblur
                         ? build_deblur(in.observation, *in.kernel, c.lambda1, c.p, c.lambda2, c.q, c.wavelet_levels)
                         : build_inpaint(in.observation, *in.mask, c.lambda1, c.p, c.lambda2, c.q, c.wavelet_levels);
    tp.feasibility.hqs_iters = c.hqs_iters;
    SolveOptions opts;
    opts.ground_truth = in.truth;
    SolveResult res;
    if (c.solver == "pg") res = solve_baseline(tp.problem, BaselineMethod::pg, c.params, opts);
    else if (c.solver == "apg") res = solve_baseline(tp.problem, BaselineMethod::apg, c.params, opts);
    else if (c.solver == "mapg") res = solve_baseline(tp.problem, BaselineMethod::mapg, c.params, opts);
    else if (c.solver == "tlf") res = tlf_solve(tp.problem, tp.feasibility, c.params, opts);
    else {
        const DenoiserSpec dn = background_denoiser(c);
        summary["denoiser"] = describe(dn);
        res = dtlf_solve(tp.problem, tp.feasibility, dn, c.params, opts);
    }
    summary["runtime_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    summary["lipschitz"] = tp.problem.lipschitz();
    summary["step"] = c.params.step_for(tp.problem.lipschitz());
    add_trace_summary(summary, res.trace, c.solver == "pg" || c.solver == "tlf" || c.solver == "dtlf");
    if (c.solver == "dtlf") summary["bus_bound_holds"] = first_bus_violation(res.trace, c.params.C) < 0;
    add_quality(summary, "", res.image, in.truth);
    if (c.task == Task::inpaint && in.truth) {
        ImageTensor missing(in.mask->shape());
        for (std::size_t i = 0; i < missing.size(); ++i) missing[i] = 1.0 - (*in.mask)[i];
        if (sum_abs(missing) > 0.0) {
            summary["input_psnr_missing"] = psnr_masked(in.observation, *in.truth, missing);
            summary["psnr_missing"] = psnr_masked(res.image, *in.truth, missing);
        }
    }
    write_trace_csv((out / "trace.csv").string(), res.trace);
    write_image_pair(out, "restored", res.image);
    return summary;
}

void write_summary(const std::filesystem::path& dir, const json& j) {
    write_text_file((dir / "summary.json").string(), j.dump(2) + "\n");
}

int run_bench(const ExperimentConfig& c) {
    c.validate();
    const std::filesystem::path out(c.out);
    std::filesystem::create_directories(out);
    std::vector<json> results(c.bench_solvers.size());
    std::vector<int> codes(c.bench_solvers.size(), 0);
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < c.bench_solvers.size(); i = next++) {
            ExperimentConfig run = c;
            run.task = parse_task(c.bench_task);
            run.solver = c.bench_solvers[i];
            run.out = (out / run.solver).string();
            try {
                results[i] = run_single(run);
                write_summary(run.out, results[i]);
            } catch (const std::exception& e) {
                codes[i] = exit_code_for(e);
                results[i] = json{{"solver", run.solver}, {"error", e.what()}};
                std::lock_guard lock(err_mutex);
                std::cerr << "bench " << run.solver << ": " << e.what() << '\n';
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n = std::min<std::size_t>(c.threads > 0 ? static_cast<std::size_t>(c.threads) : hw,
                                                c.bench_solvers.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    json summary;
    summary["task"] = "bench";
    summary["bench_task"] = c.bench_task;
    summary["runs"] = results;
    write_summary(out, summary);
    return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
    try {
        if (cfg.task == Task::bench) return run_bench(cfg);
        const json summary = run_single(cfg);
        write_summary(cfg.out, summary);
        return 0;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace tlf
