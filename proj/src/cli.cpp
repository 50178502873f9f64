#include "tsf/cli.hpp"

#include <atomic>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tsf/errors.hpp"
#include "tsf/experiment.hpp"
#include "tsf/runner.hpp"

namespace tsf::cli {

namespace {

using experiment::ExperimentConfig;

ExperimentConfig config_for(const std::string& config_path, const std::string& out_override) {
    ExperimentConfig cfg = experiment::load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    return cfg;
}

void do_generate(const ExperimentConfig& cfg) {
    const auto out_root = experiment::resolve_output_dir(cfg);
    runner::write_dataset(cfg, runner::data_dir(out_root));
    std::cerr << "[tsf] dataset written to " << runner::data_dir(out_root).string() << "\n";
}

void do_train(const ExperimentConfig& cfg, const std::string& variant_name,
              std::uint64_t seed) {
    const auto variant = model::variant_from_string(variant_name);
    const auto out_root = experiment::resolve_output_dir(cfg);
    const runner::Dataset data = runner::load_dataset(cfg, runner::data_dir(out_root));
    const auto dir = runner::run_dir(out_root, variant, seed);
    runner::train_run(cfg, data, variant, seed, dir);
    std::cerr << "[tsf] run written to " << dir.string() << "\n";
}

std::vector<std::filesystem::path> discover_runs(const std::filesystem::path& out_root) {
    std::vector<std::filesystem::path> dirs;
    const auto base = out_root / "runs";
    if (std::filesystem::exists(base)) {
        for (const auto& entry : std::filesystem::directory_iterator(base)) {
            if (entry.is_directory()) dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

void do_evaluate(const ExperimentConfig& cfg, std::vector<std::string> run_dirs) {
    const auto out_root = experiment::resolve_output_dir(cfg);
    std::vector<std::filesystem::path> dirs;
    if (run_dirs.empty()) {
        dirs = discover_runs(out_root);
    } else {
        dirs.assign(run_dirs.begin(), run_dirs.end());
    }
    if (dirs.empty()) throw AggregateError("no run directories found under " + out_root.string());
    const runner::Dataset data = runner::load_dataset(cfg, runner::data_dir(out_root));
    runner::evaluate_runs(cfg, data, dirs, runner::report_dir(out_root));
    std::cerr << "[tsf] report written to " << runner::report_dir(out_root).string() << "\n";
}

void train_all(const ExperimentConfig& cfg, const runner::Dataset& data,
               const std::filesystem::path& out_root, int jobs) {
    struct Job {
        model::VariantId variant;
        std::uint64_t seed;
    };
    std::vector<Job> todo;
    for (auto v : cfg.model.variants) {
        for (auto s : cfg.training.seeds) todo.push_back({v, s});
    }
    std::atomic<std::size_t> next{0};
    std::mutex log_mu;
    std::exception_ptr first_error;
    std::mutex err_mu;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            const Job& job = todo[i];
            try {
                runner::train_run(cfg, data, job.variant, job.seed,
                                  runner::run_dir(out_root, job.variant, job.seed));
                std::lock_guard<std::mutex> lk(log_mu);
                std::cerr << "[tsf] trained " << model::to_string(job.variant) << " seed "
                          << job.seed << " (" << i + 1 << "/" << todo.size() << ")\n";
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(todo.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

void do_reproduce(const std::string& id, const std::string& scale,
                  const std::string& out_override, int jobs) {
    ExperimentConfig cfg = experiment::preset(id, scale);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const auto out_root = experiment::resolve_output_dir(cfg);
    std::cerr << "[tsf] reproduce " << id << " " << scale << " -> " << out_root.string() << "\n";

    runner::write_dataset(cfg, runner::data_dir(out_root));
    const runner::Dataset data = runner::load_dataset(cfg, runner::data_dir(out_root));
    train_all(cfg, data, out_root, jobs);
    runner::evaluate_runs(cfg, data, discover_runs(out_root), runner::report_dir(out_root));
    std::cerr << "[tsf] done: " << runner::report_dir(out_root).string() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"NARMA / PMSM forecasting workbench"};
    app.require_subcommand(1);

    std::string config_path, out_override, variant_name, experiment_id, scale = "desk";
    std::uint64_t seed = 1;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    std::vector<std::string> run_dirs;

    auto* gen = app.add_subcommand("generate", "generate a dataset and its manifest");
    gen->add_option("--config", config_path, "experiment config JSON")->required();
    gen->add_option("--out", out_override, "override output directory");

    auto* tr = app.add_subcommand("train", "train one (variant, seed) run");
    tr->add_option("--config", config_path, "experiment config JSON")->required();
    tr->add_option("--variant", variant_name, "baseline|baseline_sc|ours_hd|ours")->required();
    tr->add_option("--seed", seed, "training seed")->required();
    tr->add_option("--out", out_override, "override output directory");

    auto* ev = app.add_subcommand("evaluate", "aggregate runs into report CSVs");
    ev->add_option("--config", config_path, "experiment config JSON")->required();
    ev->add_option("--runs", run_dirs, "run directories (default: <out>/runs/*)");
    ev->add_option("--out", out_override, "override output directory");

    auto* rep = app.add_subcommand("reproduce", "generate + train all variants/seeds + evaluate");
    rep->add_option("experiment", experiment_id, "narma-1..narma-4 or pmsm")->required();
    rep->add_option("scale", scale, "full|desk|smoke");
    rep->add_option("--jobs", jobs, "parallel (variant, seed) runs");
    rep->add_option("--out", out_override, "override output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) {
            do_generate(config_for(config_path, out_override));
        } else if (tr->parsed()) {
            do_train(config_for(config_path, out_override), variant_name, seed);
        } else if (ev->parsed()) {
            do_evaluate(config_for(config_path, out_override), run_dirs);
        } else if (rep->parsed()) {
            do_reproduce(experiment_id, scale, out_override, jobs);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParamError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const StaleDataError& e) {
        std::cerr << "stale data: " << e.what() << "\n";
        return 4;
    } catch (const AggregateError& e) {
        std::cerr << "nothing to aggregate: " << e.what() << "\n";
        return 5;
    } catch (const FormatError& e) {
        std::cerr << "data format error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace tsf::cli
