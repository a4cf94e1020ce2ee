#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tlf/problem.hpp"
#include "tlf/prox.hpp"

namespace tlf {

enum class Task { deblur, inpaint, derain, bench };

std::string to_string(Task t);
Task parse_task(const std::string& s);

// One experiment. Empty input paths select the built-in synthetic scene
// (desk_scene), degraded deterministically from `seed`.
struct ExperimentConfig {
    Task task = Task::deblur;
    std::string input;
    std::string kernel;
    std::string mask;
    std::string gt;
    std::string out = "out";
    std::string solver = "dtlf";  // pg, apg, mapg, tlf, dtlf
    SolverParams params;

    double lambda1 = 4e-4;
    double lambda2 = 1e-4;
    Exponent p = Exponent::one;
    Exponent q = Exponent::one;
    double nu1 = 0.005;
    double nu2 = 0.002;
    double rho1 = 0.03;
    double rho2 = 0.02;
    Exponent p1 = Exponent::zero;
    Exponent p2 = Exponent::one;
    int hqs_iters = 5;
    int wavelet_levels = 3;

    std::string denoiser = "tv-rof:0.01";
    std::string rain_denoiser = "wavelet-shrink:0.01";
    std::string external_denoiser;  // command line; replaces `denoiser` when set
    double external_hint = 0.1;

    // Synthetic data.
    std::uint64_t seed = 42;
    std::size_t size = 64;
    double noise = 1.0;  // Gaussian noise std, percent of peak
    std::size_t blur_size = 9;
    double blur_sigma = 1.5;
    double missing = 0.4;
    double rain_amplitude = 0.4;

    // bench: solvers run side by side on the deblur (or bench_task) setup.
    std::string bench_task = "deblur";
    std::vector<std::string> bench_solvers{"pg", "apg", "mapg", "tlf", "dtlf"};
    int threads = 0;  // 0 = hardware concurrency

    // Throws ConfigError on any out-of-range field.
    void validate() const;
};

// Applies key = value overrides (keys as printed by format_config). Throws
// ConfigError on unknown keys and unparsable values.
void apply_settings(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);
// Every field as "key = value" lines, round-trippable through apply_settings.
std::string format_config(const ExperimentConfig& cfg);

// Exit codes: 0 success, 1 configuration/validation, 2 I/O, 3 numerical.
int exit_code_for(const std::exception& e);

// Runs the experiment and writes into cfg.out:
//   trace.csv, summary.json, restored.tlft and restored.pgm/.ppm
//   (derain: background.* and rain.*; bench: one subdirectory per solver
//   plus a combined summary.json). Returns the exit status; errors are
//   reported on stderr.
int run_experiment(const ExperimentConfig& cfg);

}  // namespace tlf
