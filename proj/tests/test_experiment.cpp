#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "tlf/errors.hpp"
#include "tlf/experiment.hpp"
#include "tlf/io.hpp"

using namespace tlf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tlf_experiment_tests" / name;
    fs::remove_all(dir);
    return dir;
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p.string())); }

const fs::path kData = TLF_TEST_DATA_DIR;

}  // namespace

TEST_CASE("config text round trips") {
    ExperimentConfig c;
    c.solver = "tlf";
    c.params.max_iters = 17;
    c.lambda1 = 1.0 / 3.0;
    c.p = Exponent::two_thirds;
    c.bench_solvers = {"pg", "dtlf"};
    const std::string text = format_config(c);
    ExperimentConfig d;
    apply_settings(d, parse_key_values(text));
    CHECK(format_config(d) == text);
    CHECK(d.lambda1 == c.lambda1);
    CHECK(text.find("bench_solvers = pg,dtlf\n") != std::string::npos);
}

TEST_CASE("settings errors") {
    ExperimentConfig c;
    CHECK_THROWS_AS(apply_settings(c, {{"lambda3", "1"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(c, {{"max_iters", "ten"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(c, {{"p", "0.3"}}), ConfigError);
    CHECK_THROWS_AS(apply_settings(c, {{"seed", "-1"}}), ConfigError);
    c.solver = "fista";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.solver = "tlf";
    c.task = Task::derain;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.blur_size = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_NOTHROW(ExperimentConfig{}.validate());
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(ConfigError("x")) == 1);
    CHECK(exit_code_for(ValidationError("x")) == 1);
    CHECK(exit_code_for(ShapeError("x")) == 1);
    CHECK(exit_code_for(IoError("x")) == 2);
    CHECK(exit_code_for(NumericalError("x")) == 3);
    CHECK(exit_code_for(DenoiserError("x")) == 3);

    ExperimentConfig c;
    c.out = scratch("codes").string();
    c.input = (kData / "does-not-exist.tlft").string();
    c.kernel = (kData / "gauss9.txt").string();
    CHECK(run_experiment(c) == 2);
    c.input.clear();
    c.kernel.clear();
    c.solver = "nope";
    CHECK(run_experiment(c) == 1);
}

TEST_CASE("single deblur run writes its outputs") {
    ExperimentConfig c;
    c.out = scratch("deblur").string();
    c.size = 32;
    c.params.max_iters = 15;
    c.solver = "dtlf";
    REQUIRE(run_experiment(c) == 0);
    for (const char* f : {"trace.csv", "summary.json", "restored.tlft", "restored.pgm"}) CHECK(fs::exists(fs::path(c.out) / f));
    auto s = load_json(fs::path(c.out) / "summary.json");
    CHECK(s["task"] == "deblur");
    CHECK(s["solver"] == "dtlf");
    CHECK(s["iterations"] == 15);
    CHECK(s["monotone"] == true);
    CHECK(s["sufficient_descent"] == true);
    CHECK(s["bus_bound_holds"] == true);
    CHECK(s["psnr"].get<double>() > s["input_psnr"].get<double>());
    auto trace = read_trace_csv((fs::path(c.out) / "trace.csv").string());
    CHECK(trace.size() == 15);
    CHECK(*trace.back().psnr == doctest::Approx(s["psnr"].get<double>()).epsilon(1e-12));
}

TEST_CASE("inpaint and derain runs") {
    ExperimentConfig c;
    c.size = 32;
    c.params.max_iters = 10;
    c.task = Task::inpaint;
    c.out = scratch("inpaint").string();
    REQUIRE(run_experiment(c) == 0);
    auto s = load_json(fs::path(c.out) / "summary.json");
    CHECK(s.contains("psnr_missing"));
    CHECK(s.contains("input_psnr_missing"));

    c.task = Task::derain;
    c.out = scratch("derain").string();
    REQUIRE(run_experiment(c) == 0);
    for (const char* f : {"trace.csv", "background.tlft", "rain.tlft", "background.pgm"})
        CHECK(fs::exists(fs::path(c.out) / f));
    auto d = load_json(fs::path(c.out) / "summary.json");
    CHECK(d["layer_residual"].get<double>() <= 0.1);
}

TEST_CASE("bench without regularization on an identity blur hits the psnr cap") {
    ExperimentConfig c;
    c.task = Task::bench;
    c.size = 32;
    c.blur_size = 1;
    c.noise = 0.0;
    c.lambda1 = 0.0;
    c.lambda2 = 0.0;
    c.params.max_iters = 5;
    c.out = scratch("bench").string();
    REQUIRE(run_experiment(c) == 0);
    auto s = load_json(fs::path(c.out) / "summary.json");
    REQUIRE(s["runs"].size() == 5);
    for (const auto& run : s["runs"]) CHECK(run["psnr"].get<double>() == 100.0);
    for (const char* solver : {"pg", "apg", "mapg", "tlf", "dtlf"})
        CHECK(fs::exists(fs::path(c.out) / solver / "trace.csv"));
}

TEST_CASE("repeated runs give byte-identical traces") {
    ExperimentConfig c;
    c.size = 32;
    c.params.max_iters = 20;
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    c.out = a.string();
    REQUIRE(run_experiment(c) == 0);
    c.out = b.string();
    REQUIRE(run_experiment(c) == 0);
    CHECK(read_text_file((a / "trace.csv").string()) == read_text_file((b / "trace.csv").string()));
}

TEST_CASE("packaged deblur fixture reproduces the golden trace") {
    ExperimentConfig c;
    apply_settings(c, parse_key_values(read_text_file((kData / "deblur.cfg").string())));
    c.input = (kData / c.input).string();
    c.kernel = (kData / c.kernel).string();
    c.gt = (kData / c.gt).string();
    c.out = scratch("golden").string();
    REQUIRE(run_experiment(c) == 0);
    const auto got = read_trace_csv((fs::path(c.out) / "trace.csv").string());
    const auto want = read_trace_csv((kData / "deblur_trace.csv").string());
    REQUIRE(got.size() == want.size());
    auto close = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || std::abs(a - b) <= 1e-6; };
    for (std::size_t k = 0; k < got.size(); ++k) {
        const auto& g = got[k];
        const auto& w = want[k];
        CHECK(g.k == w.k);
        CHECK(close(g.F, w.F));
        CHECK(close(g.rel_err, w.rel_err));
        CHECK(close(g.norm_xF_x, w.norm_xF_x));
        CHECK(close(g.norm_xG_x, w.norm_xG_x));
        CHECK(close(g.norm_xGmu_x, w.norm_xGmu_x));
        CHECK(close(g.alpha, w.alpha));
        CHECK(close(g.mu, w.mu));
        CHECK(g.mdus_branch == w.mdus_branch);
        CHECK(g.bus_branch == w.bus_branch);
        REQUIRE(g.psnr.has_value() == w.psnr.has_value());
        if (g.psnr) CHECK(close(*g.psnr, *w.psnr));
    }
}
