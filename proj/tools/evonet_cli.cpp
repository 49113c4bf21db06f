// Command-line front end: evolve architectures on an IDX dataset, deep-train
// or initializer-compare the evolved best individual, and generate synthetic
// datasets.

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evonet/config.hpp"
#include "evonet/data.hpp"
#include "evonet/engine.hpp"

namespace {

evonet::Dataset load_train_set(const evonet::DatasetConfig& ds) {
    if (ds.train_images.empty() || ds.train_labels.empty())
        throw evonet::ConfigError("dataset.train_images/train_labels not set");
    return evonet::load_idx(ds.train_images, ds.train_labels);
}

evonet::Dataset load_test_set(const evonet::DatasetConfig& ds) {
    if (ds.test_images.empty() || ds.test_labels.empty())
        throw evonet::ConfigError(
            "dataset.test_images/test_labels required for this command");
    return evonet::load_idx(ds.test_images, ds.test_labels);
}

// The train/fitness split must not consume the master evolution stream, so it
// derives its own seed from the run seed.
std::uint64_t split_seed(std::uint64_t run_seed) {
    return run_seed ^ 0x53504c4954ull;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_evolve(const std::string& config_path, const std::string& images,
               const std::string& labels, const std::string& out_dir,
               std::int64_t seed, bool seed_set, int workers,
               const std::string& resume) {
    evonet::RunConfig cfg;
    if (!resume.empty()) {
        if (!config_path.empty() || !images.empty() || seed_set)
            throw evonet::ConfigError(
                "--resume uses the checkpointed config; do not combine it with "
                "--config/--dataset-*/--seed");
        cfg = evonet::checkpoint_load(resume).first;
    } else {
        if (config_path.empty())
            throw evonet::ConfigError("--config is required unless resuming");
        cfg = evonet::load_run_config(config_path);
        if (!images.empty()) cfg.dataset.train_images = images;
        if (!labels.empty()) cfg.dataset.train_labels = labels;
        if (seed_set) cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.validate();
    }

    const evonet::Dataset full = load_train_set(cfg.dataset);
    auto [train, fitness] = evonet::split_train_fitness(
        full, cfg.dataset.fitness_fraction, split_seed(cfg.seed));
    std::cout << "dataset: " << full.size() << " samples ("
              << train.size() << " train / " << fitness.size()
              << " fitness), " << full.num_classes << " classes\n";

    evonet::TruncatedTrainingEvaluator evaluator(train, fitness, cfg.fitness.k,
                                                 cfg.fitness.train);
    evonet::RunOptions opt;
    opt.out_dir = out_dir;
    opt.workers = workers;
    opt.resume_path = resume;
    opt.progress = &std::cout;

    const evonet::RunResult result = evonet::run_evolution(cfg, evaluator, opt);
    evonet::write_report(std::cout, cfg, result.population, result.history);
    std::cout << "\nartifacts written to " << out_dir << "\n";
    return 0;
}

int cmd_final_train(const std::string& checkpoint, const std::string& policy,
                    double tol, int epochs) {
    auto [cfg, state] = evonet::checkpoint_load(checkpoint);
    evonet::BestPick pick = cfg.best_pick;
    if (policy == "min_error") {
        pick.policy = evonet::BestPickPolicy::kMinError;
    } else if (policy == "min_params_within_tolerance") {
        pick.policy = evonet::BestPickPolicy::kMinParamsWithinTolerance;
        pick.tol = tol;
    } else if (!policy.empty()) {
        throw evonet::ConfigError("unknown policy: " + policy);
    }

    const evonet::Individual& best = evonet::select_best(state.population, pick);
    std::cout << "selected individual id " << best.id << " (mean_error "
              << best.fitness->mean_error << ", params "
              << best.fitness->param_count << ")\n";
    std::cout << evonet::to_text(best.chromosome);

    const evonet::Dataset train = load_train_set(cfg.dataset);
    const evonet::Dataset test = load_test_set(cfg.dataset);
    evonet::TrainConfig tc = cfg.final_train;
    if (epochs >= 0) tc.epochs = epochs;

    const evonet::TrainedNet net = evonet::final_train(best, train, test, tc);
    std::cout << "final training: " << tc.epochs << " epochs, test_error "
              << net.test_error << "\n";
    return 0;
}

int cmd_compare_init(const std::string& checkpoint, int seeds, int epochs) {
    auto [cfg, state] = evonet::checkpoint_load(checkpoint);
    const evonet::Individual& best =
        evonet::select_best(state.population, cfg.best_pick);
    const evonet::Dataset train = load_train_set(cfg.dataset);
    const evonet::Dataset test = load_test_set(cfg.dataset);

    std::vector<double> gauss, xavier, diff;
    for (int s = 0; s < seeds; ++s) {
        evonet::TrainConfig tc = cfg.final_train;
        if (epochs >= 0) tc.epochs = epochs;
        tc.seed = cfg.seed + static_cast<std::uint64_t>(s) + 1;
        const evonet::InitComparison cmp =
            evonet::compare_initializers(best, train, test, tc);
        gauss.push_back(cmp.gaussian_error);
        xavier.push_back(cmp.xavier_error);
        diff.push_back(cmp.gaussian_error - cmp.xavier_error);
        std::cout << "seed " << s << ": evolved_gaussian " << cmp.gaussian_error
                  << "  xavier " << cmp.xavier_error << "  difference "
                  << diff.back() << "\n";
    }
    std::cout << "median evolved_gaussian " << median(gauss) << "  median xavier "
              << median(xavier) << "  median difference " << median(diff) << "\n";
    return 0;
}

int cmd_gen_data(const std::string& kind, int n, int size, std::int64_t seed,
                 const std::string& out) {
    evonet::SyntheticKind k;
    if (kind == "blobs")
        k = evonet::SyntheticKind::kSeparableBlobs;
    else if (kind == "rectangles")
        k = evonet::SyntheticKind::kRectangleToy;
    else
        throw evonet::ConfigError("unknown kind: " + kind +
                                  " (expected blobs|rectangles)");
    const evonet::Dataset d =
        evonet::make_synthetic(k, n, size, static_cast<std::uint64_t>(seed));
    const std::string images = out + "-images-idx3-ubyte";
    const std::string labels = out + "-labels-idx1-ubyte";
    evonet::save_idx(d, images, labels);
    std::cout << "wrote " << d.size() << " " << size << "x" << size
              << " images to " << images << " / " << labels << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evonet: evolves CNN architectures and weight-initialization "
                 "statistics with a genetic algorithm"};
    app.require_subcommand(1);

    // evolve
    auto* evolve = app.add_subcommand("evolve", "run the evolutionary search");
    std::string config_path, images, labels, out_dir = "evonet-run", resume;
    std::int64_t seed = 0;
    int workers = 1;
    evolve->add_option("--config", config_path, "run config (JSON)");
    evolve->add_option("--dataset-images", images, "override train image IDX path");
    evolve->add_option("--dataset-labels", labels, "override train label IDX path");
    evolve->add_option("--out", out_dir, "output directory");
    auto* seed_opt = evolve->add_option("--seed", seed, "override run seed");
    evolve->add_option("--workers", workers, "parallel evaluation workers");
    evolve->add_option("--resume", resume, "checkpoint to resume from");

    // final-train
    auto* ft = app.add_subcommand("final-train",
                                  "deep-train the evolved best individual");
    std::string ft_checkpoint, ft_policy;
    double ft_tol = 0.0;
    int ft_epochs = -1;
    ft->add_option("--checkpoint", ft_checkpoint, "run checkpoint")->required();
    ft->add_option("--policy", ft_policy,
                   "min_error | min_params_within_tolerance");
    ft->add_option("--tol", ft_tol, "error tolerance for the parameter policy");
    ft->add_option("--epochs", ft_epochs, "override final training epochs");

    // compare-init
    auto* ci = app.add_subcommand(
        "compare-init", "evolved Gaussian vs Xavier on the best individual");
    std::string ci_checkpoint;
    int ci_seeds = 10, ci_epochs = -1;
    ci->add_option("--checkpoint", ci_checkpoint, "run checkpoint")->required();
    ci->add_option("--seeds", ci_seeds, "number of seeds");
    ci->add_option("--epochs", ci_epochs, "override training epochs");

    // gen-data
    auto* gd = app.add_subcommand("gen-data", "generate a synthetic IDX dataset");
    std::string gd_kind = "rectangles", gd_out = "synthetic";
    int gd_n = 1000, gd_size = 16;
    std::int64_t gd_seed = 0;
    gd->add_option("--kind", gd_kind, "blobs | rectangles");
    gd->add_option("--n", gd_n, "number of images");
    gd->add_option("--size", gd_size, "image side length");
    gd->add_option("--seed", gd_seed, "generator seed");
    gd->add_option("--out", gd_out, "output path prefix");

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve->parsed())
            return cmd_evolve(config_path, images, labels, out_dir, seed,
                              seed_opt->count() > 0, workers, resume);
        if (ft->parsed())
            return cmd_final_train(ft_checkpoint, ft_policy, ft_tol, ft_epochs);
        if (ci->parsed()) return cmd_compare_init(ci_checkpoint, ci_seeds, ci_epochs);
        if (gd->parsed())
            return cmd_gen_data(gd_kind, gd_n, gd_size, gd_seed, gd_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
