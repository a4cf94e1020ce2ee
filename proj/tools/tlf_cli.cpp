// Experiment runner: one restoration experiment per invocation.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tlf/errors.hpp"
#include "tlf/experiment.hpp"
#include "tlf/io.hpp"

namespace {

struct Flags {
    std::string config;
    std::map<std::string, std::string> values;  // flag overrides, by config key
    std::vector<std::string> sets;              // --set key=value
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key = value config file; flags override it");
    auto opt = [&](const char* flag, const char* key, const char* help) {
        cmd->add_option_function<std::string>(flag, [&f, key](const std::string& v) { f.values[key] = v; }, help);
    };
    opt("--input", "input", "degraded input image (PGM/PPM/TLFT); omit for the synthetic scene");
    opt("--kernel", "kernel", "blur kernel text file (deblur)");
    opt("--mask", "mask", "mask PGM, 0 = missing, 255 = observed (inpaint)");
    opt("--gt", "gt", "ground-truth image for PSNR/SSIM");
    opt("--out", "out", "output directory");
    opt("--solver", "solver", "pg, apg, mapg, tlf or dtlf");
    opt("--max-iters", "max_iters", "outer iteration cap");
    opt("--rel-tol", "rel_tol", "stop when ||x+ - x|| / ||x+|| falls below this");
    opt("--seed", "seed", "seed for synthetic degradations");
    opt("--denoiser", "denoiser", "denoiser spec, e.g. tv-rof:0.01 or gaussian:1,0.5");
    opt("--external-denoiser", "external_denoiser", "command speaking the TLF1 denoiser protocol");
    cmd->add_option("--set", f.sets, "any config key, as key=value (repeatable)");
}

tlf::ExperimentConfig build_config(tlf::Task task, const Flags& f) {
    tlf::ExperimentConfig cfg;
    if (!f.config.empty()) tlf::apply_settings(cfg, tlf::parse_key_values(tlf::read_text_file(f.config)));
    std::map<std::string, std::string> overrides = f.values;
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw tlf::ConfigError("--set expects key=value, got '" + s + "'");
        std::string key = s.substr(0, eq);
        for (char& ch : key)
            if (ch == '-') ch = '_';
        overrides[key] = s.substr(eq + 1);
    }
    tlf::apply_settings(cfg, overrides);
    cfg.task = task;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task-driven latent feasibility solvers for image restoration"};
    app.require_subcommand(1);

    Flags flags;
    std::vector<std::pair<CLI::App*, tlf::Task>> runs;
    for (auto [name, task, help] : {std::tuple{"deblur", tlf::Task::deblur, "non-blind deblurring"},
                                    std::tuple{"inpaint", tlf::Task::inpaint, "inpainting with a binary mask"},
                                    std::tuple{"derain", tlf::Task::derain, "rain streak removal"},
                                    std::tuple{"bench", tlf::Task::bench, "run several solvers side by side"}}) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(cmd, flags);
        runs.emplace_back(cmd, task);
    }
    CLI::App* defaults = app.add_subcommand("defaults", "print every config key with its default value");
    defaults->add_option("--config", flags.config, "merge this config file before printing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (defaults->parsed()) {
            tlf::ExperimentConfig cfg;
            if (!flags.config.empty()) tlf::apply_settings(cfg, tlf::parse_key_values(tlf::read_text_file(flags.config)));
            std::cout << tlf::format_config(cfg);
            return 0;
        }
        for (const auto& [cmd, task] : runs)
            if (cmd->parsed()) return tlf::run_experiment(build_config(task, flags));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tlf::exit_code_for(e);
    }
    return 1;
}
