#include "nscr/experiment.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace nscr;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::istringstream in(slurp(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// Default subspace fixture with 40 samples per class, written once.
std::filesystem::path fixture_pool() {
    static const std::filesystem::path path = [] {
        SubspaceFixture f;
        f.train_per_class = 40;
        f.queries_per_class = 0;
        f.seed = 21;
        const auto dir = test::scratch_dir("experiment_pool");
        test::write_samples(dir / "pool.bin", make_subspace_data(f).train);
        return dir / "pool.bin";
    }();
    return path;
}

ExperimentSpec spec_for(const std::string& out, std::initializer_list<std::pair<std::string, std::string>> extra) {
    Config cfg;
    cfg.set("dataset", fixture_pool().string());
    cfg.set("output", test::scratch_dir(out).string());
    for (const auto& [k, v] : extra) cfg.set(k, v);
    return ExperimentSpec::from_config(cfg);
}

} // namespace

TEST_CASE("config parsing") {
    std::istringstream in("# comment\ndataset = a.csv\n  alpha=0.5  # trailing\n\nalphas = 0.1, 0.2\ncv = true\n");
    auto cfg = Config::parse(in);
    CHECK(cfg.get_string("dataset", "") == "a.csv");
    CHECK(cfg.get_double("alpha", 0) == 0.5);
    CHECK(cfg.get_doubles("alphas", {}) == std::vector<double>{0.1, 0.2});
    CHECK(cfg.get_bool("cv", false));
    CHECK(cfg.get_int("trials", 7) == 7);

    Config overrides;
    overrides.set("alpha", "0.25");
    cfg.merge(overrides);
    CHECK(cfg.get_double("alpha", 0) == 0.25);

    CHECK_THROWS_AS(cfg.set("alhpa", "1"), InputError);
    std::istringstream bad("alpha 0.5\n");
    CHECK_THROWS_AS(Config::parse(bad), InputError);
    cfg.set("trials", "x");
    CHECK_THROWS_AS(cfg.get_int("trials", 1), InputError);
}

TEST_CASE("experiment spec") {
    Config cfg;
    cfg.set("preset", "usps");
    auto spec = ExperimentSpec::from_config(cfg);
    CHECK(spec.solver.alpha == 0.01);
    CHECK(spec.solver.beta == 0.05);
    cfg.set("beta", "0.2");
    CHECK(ExperimentSpec::from_config(cfg).solver.beta == 0.2);
    cfg.set("coder", "knn");
    CHECK_THROWS_AS(ExperimentSpec::from_config(cfg), InputError);
    Config zero;
    zero.set("trials", "0");
    CHECK_THROWS_AS(ExperimentSpec::from_config(zero), InputError);
}

TEST_CASE("benchmark") {
    std::ostringstream log;
    const auto spec = spec_for("bench_a", {{"trials", "10"}, {"seed", "5"}});
    const auto report = cmd_benchmark(spec, log);
    REQUIRE(report.trials.size() == 10);
    CHECK(report.mean_accuracy >= 99.0);
    CHECK(report.mean_accuracy <= 100.0);

    SUBCASE("summary mean equals the mean of trials.csv") {
        const auto trials = read_csv(spec.output / "trials.csv");
        REQUIRE(trials.size() == 11);
        CHECK(trials[0][7] == "accuracy");
        double sum = 0.0;
        for (std::size_t r = 1; r < trials.size(); ++r) sum += std::stod(trials[r][7]);
        const auto summary = read_csv(spec.output / "summary.csv");
        CHECK(std::abs(std::stod(summary[1][5]) - sum / 10.0) <= 1e-12);
    }
    SUBCASE("non-timing CSVs are byte-identical across runs") {
        const auto again = spec_for("bench_b", {{"trials", "10"}, {"seed", "5"}});
        (void)cmd_benchmark(again, log);
        for (const char* name : {"trials.csv", "summary.csv", "predictions.csv"})
            CHECK(slurp(spec.output / name) == slurp(again.output / name));
    }
    SUBCASE("predictions carry one residual per class") {
        const auto rows = read_csv(spec.output / "predictions.csv");
        CHECK(rows[0].size() == 4 + 10);
        CHECK(rows.size() == 1 + 10 * 200);
    }
}

TEST_CASE("benchmark errors carry the trial index") {
    std::ostringstream log;
    const auto spec = spec_for("bench_err", {{"n_per_class", "40"}});
    try {
        cmd_benchmark(spec, log);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("trial 0") != std::string::npos);
    }
}

TEST_CASE("sweep") {
    std::ostringstream log;
    SUBCASE("1x1 grid matches benchmark") {
        const auto bench = cmd_benchmark(spec_for("sweep_b", {{"trials", "2"}, {"alpha", "0.5"}, {"beta", "0.5"}}), log);
        const auto sweep =
            cmd_sweep(spec_for("sweep_s", {{"trials", "2"}, {"alphas", "0.5"}, {"betas", "0.5"}}), log);
        CHECK(std::abs(100.0 * sweep.accuracy(0, 0) - bench.mean_accuracy) <= 1e-9);
    }
    SUBCASE("5x5 grid is complete and agrees with grid evaluation on the same splits") {
        const auto spec = spec_for("sweep_full", {{"trials", "2"}, {"n_per_class", "8"}});
        const auto sweep = cmd_sweep(spec, log);
        const auto rows = read_csv(spec.output / "sweep.csv");
        REQUIRE(rows.size() == 26);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const double acc = std::stod(rows[r][2]);
            CHECK(acc >= 0.0);
            CHECK(acc <= 100.0);
        }
        const auto pool = load_dataset(spec.dataset);
        std::vector<EvalSplit> splits;
        for (int t = 0; t < spec.trials; ++t) splits.push_back(prepare_trial(spec, pool, nullptr, t));
        const auto direct = evaluate_grid(splits, spec.grid.alphas, spec.grid.betas, spec.solver);
        CHECK(direct.best_alpha() == sweep.best_alpha());
        CHECK(direct.best_beta() == sweep.best_beta());
        CHECK(direct.accuracy.maxCoeff() == sweep.accuracy.maxCoeff());
    }
}

TEST_CASE("convergence") {
    std::ostringstream log;
    const auto spec = spec_for("conv", {{"tol", "0"}, {"max_iter", "100"}, {"query_index", "3"}});
    const auto history = cmd_convergence(spec, log);
    CHECK(history.size() == 100);
    const auto rows = read_csv(spec.output / "convergence.csv");
    CHECK(rows.size() == 101);
    CHECK(rows[0] == std::vector<std::string>{"iter", "zc_gap", "dc", "dz"});
    for (std::size_t t = 0; t < history.size(); ++t) {
        CHECK(std::isfinite(history.zc_gap[t]));
        CHECK(std::isfinite(history.dc[t]));
        CHECK(std::isfinite(history.dz[t]));
    }
    CHECK(history.zc_gap.back() <= history.zc_gap.front());

    CHECK_THROWS_AS(cmd_convergence(spec_for("conv_bad", {{"query_index", "400"}}), log), InputError);
}

TEST_CASE("time") {
    std::ostringstream log;
    SubspaceFixture f;
    f.classes = 10;
    f.ambient_dim = 128;
    f.subspace_dim = 8;
    f.train_per_class = 100;
    f.queries_per_class = 10;
    const auto data = make_subspace_data(f);
    const auto dir = test::scratch_dir("time_data");
    test::write_samples(dir / "train.bin", data.train);
    test::write_samples(dir / "test.bin", data.queries);

    Config cfg;
    cfg.set("dataset", (dir / "train.bin").string());
    cfg.set("test_dataset", (dir / "test.bin").string());
    cfg.set("output", test::scratch_dir("time_out").string());
    const auto spec = ExperimentSpec::from_config(cfg);
    const auto rows = cmd_time(spec, log);
    REQUIRE(rows.size() == 4);
    CHECK(read_csv(spec.output / "timing.csv").size() == 5);
    const auto seconds = [&](const std::string& name) {
        for (const auto& r : rows)
            if (r.coder == name) return r.seconds_per_query;
        return -1.0;
    };
    MESSAGE("crc " << seconds("crc") << " s, nscr " << seconds("nscr") << " s");
    CHECK(seconds("crc") < seconds("nscr"));

    const auto again = cmd_time(spec, log);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].accuracy == again[i].accuracy);
}
