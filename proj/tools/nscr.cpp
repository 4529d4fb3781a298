// nscr: benchmark harness for representation-based classifiers.
//
//   nscr benchmark|sweep|convergence|time|cv --config <file> [--key value ...]
//   nscr synth --path <file> [--classes 10 --ambient_dim 50 ...]

#include "nscr/experiment.hpp"
#include "nscr/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

nscr::Config collect_config(const std::string& config_path, const std::vector<std::string>& extras) {
    nscr::Config config;
    if (!config_path.empty()) config = nscr::Config::from_file(config_path);
    nscr::Config overrides;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string arg = extras[i];
        if (arg.rfind("--", 0) != 0) throw nscr::InputError("unexpected argument '" + arg + "'");
        arg.erase(0, 2);
        if (const auto eq = arg.find('='); eq != std::string::npos) {
            overrides.set(arg.substr(0, eq), arg.substr(eq + 1));
        } else {
            if (i + 1 >= extras.size()) throw nscr::InputError("missing value for --" + arg);
            overrides.set(arg, extras[++i]);
        }
    }
    config.merge(overrides);
    return config;
}

void run_synth(const nscr::Config& config) {
    nscr::SubspaceFixture fixture;
    fixture.classes = config.get_int("classes", fixture.classes);
    fixture.ambient_dim = config.get_int("ambient_dim", fixture.ambient_dim);
    fixture.subspace_dim = config.get_int("subspace_dim", fixture.subspace_dim);
    fixture.train_per_class = config.get_int("samples_per_class", 40);
    fixture.queries_per_class = 0;
    fixture.noise = config.get_double("noise", fixture.noise);
    fixture.seed = static_cast<std::uint64_t>(config.get_int("seed", 1));
    const std::string path = config.get_string("path", "");
    if (path.empty()) throw nscr::InputError("config key 'path' is required");

    const auto data = nscr::make_subspace_data(fixture);
    nscr::LabeledDataset out{data.train, {}};
    for (nscr::Index r = 0; r < data.train.dim(); ++r) out.feature_names.push_back("f" + std::to_string(r));
    if (path.size() > 4 && path.substr(path.size() - 4) == ".bin")
        nscr::write_binary_dataset(path, out);
    else
        nscr::write_csv_dataset(path, out);
    std::cout << "wrote " << data.train.size() << " samples (" << fixture.classes << " classes, D="
              << fixture.ambient_dim << ") to " << path << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"NSCR coder/classifier benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"benchmark", "repeated-trial accuracy and timing"},
        {"sweep", "held-out accuracy over an (alpha, beta) grid"},
        {"convergence", "ADMM residual curves for one query"},
        {"time", "per-query running time of each coder"},
        {"cv", "k-fold cross-validation grid search"},
        {"synth", "write a synthetic union-of-subspaces dataset"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key = value settings file");
        sub->allow_extras();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        auto* sub = app.get_subcommands().front();
        const auto config = collect_config(config_path, sub->remaining());
        const std::string name = sub->get_name();
        if (name == "synth") {
            run_synth(config);
            return 0;
        }
        const auto spec = nscr::ExperimentSpec::from_config(config);
        if (name == "benchmark") nscr::cmd_benchmark(spec, std::cout);
        else if (name == "sweep") nscr::cmd_sweep(spec, std::cout);
        else if (name == "convergence") nscr::cmd_convergence(spec, std::cout);
        else if (name == "time") nscr::cmd_time(spec, std::cout);
        else if (name == "cv") nscr::cmd_cv(spec, std::cout);
        std::cout << "outputs in " << spec.output.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "nscr: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
