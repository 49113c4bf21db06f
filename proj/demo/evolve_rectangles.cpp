// Minimal end-to-end usage: evolve a small population on an in-memory
// rectangle-vs-segments dataset and print the per-generation progress.

#include <iostream>

#include "evonet/data.hpp"
#include "evonet/engine.hpp"

int main() {
    using namespace evonet;

    const Dataset data = make_synthetic(SyntheticKind::kRectangleToy,
                                        /*n=*/400, /*size=*/12, /*seed=*/7);
    auto [train, fitness] = split_train_fitness(data, 0.2, /*seed=*/7);

    RunConfig cfg;
    cfg.population_size = 8;
    cfg.generations = 4;
    cfg.seed = 7;
    cfg.bounds.max_filter_size = 5;
    cfg.bounds.max_feature_maps = 6;
    cfg.bounds.max_neurons = 32;
    cfg.bounds.n_cp = 3;
    cfg.bounds.n_f = 2;
    cfg.fitness.k = 2;
    cfg.fitness.train.learning_rate = 0.05;
    cfg.fitness.train.batch_size = 32;

    TruncatedTrainingEvaluator evaluator(train, fitness, cfg.fitness.k,
                                         cfg.fitness.train);
    RunOptions opt;
    opt.workers = 2;
    opt.progress = &std::cout;

    const RunResult result = run_evolution(cfg, evaluator, opt);
    const Individual& best = select_best(result.population, BestPick{});
    std::cout << "\nbest architecture (mean_error "
              << best.fitness->mean_error << ", params "
              << best.fitness->param_count << "):\n"
              << to_text(best.chromosome);
    return 0;
}
