// Regenerates the packaged test fixtures:
//   make_fixtures <dir>
// writes the 64x64 desk scene, its degraded versions, the deblur config and
// the golden deblur trace.

#include <filesystem>
#include <iostream>

#include "tlf/errors.hpp"
#include "tlf/experiment.hpp"
#include "tlf/io.hpp"
#include "tlf/rng.hpp"
#include "tlf/tasks.hpp"

namespace fs = std::filesystem;
using namespace tlf;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <dir>\n";
        return 1;
    }
    const fs::path dir = argv[1];
    try {
        fs::create_directories(dir);
        auto at = [&](const char* name) { return (dir / name).string(); };

        const ImageTensor desk = desk_scene(64);
        write_tlft(at("desk64.tlft"), desk);
        write_pnm(at("desk64.pgm"), desk);

        const BlurKernel kernel = BlurKernel::gaussian(9, 1.5);
        write_kernel(at("gauss9.txt"), kernel);
        const ImageTensor blurry =
            add_gaussian_noise(LinearOperator::convolution(kernel, desk.shape()).apply(desk), 1.0, 42);
        write_tlft(at("deblur_blurry.tlft"), blurry);
        write_pnm(at("deblur_blurry.pgm"), blurry);

        // inpainting: 40% missing, mask seed 7, noise on its own stream
        const ImageTensor mask = random_mask(desk.shape(), 0.4, 7);
        ImageTensor observed = add_gaussian_noise(desk, 1.0, 7 ^ 0x9e3779b97f4a7c15ULL);
        for (std::size_t i = 0; i < observed.size(); ++i) observed[i] *= mask[i];
        write_mask(at("inpaint_mask.pgm"), mask);
        write_tlft(at("inpaint_observed.tlft"), observed);

        // derain: dimmed scene plus streaks (seed 11)
        ImageTensor background = desk;
        for (double& v : background.values()) v = 0.1 + 0.5 * v;
        const ImageTensor rain = synthetic_rain(desk.shape(), 11, 0.4);
        write_tlft(at("derain_background.tlft"), background);
        write_tlft(at("derain_rain.tlft"), rain);
        write_tlft(at("derain_rainy.tlft"), background + rain);
        write_pnm(at("derain_rainy.pgm"), background + rain);

        write_text_file(at("deblur.cfg"),
                        "# 64x64 desk scene, 9x9 Gaussian blur (sigma 1.5), 1% noise, seed 42\n"
                        "input = deblur_blurry.tlft\n"
                        "kernel = gauss9.txt\n"
                        "gt = desk64.tlft\n"
                        "solver = dtlf\n"
                        "max_iters = 100\n"
                        "rel_tol = 0\n");

        ExperimentConfig cfg;
        apply_settings(cfg, parse_key_values(read_text_file(at("deblur.cfg"))));
        cfg.input = at("deblur_blurry.tlft");
        cfg.kernel = at("gauss9.txt");
        cfg.gt = at("desk64.tlft");
        cfg.out = (fs::temp_directory_path() / "tlf_make_fixtures").string();
        if (const int rc = run_experiment(cfg); rc != 0) return rc;
        fs::copy_file(fs::path(cfg.out) / "trace.csv", dir / "deblur_trace.csv", fs::copy_options::overwrite_existing);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}
