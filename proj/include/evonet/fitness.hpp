#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "evonet/data.hpp"
#include "evonet/errors.hpp"
#include "evonet/genome.hpp"
#include "evonet/network.hpp"
#include "evonet/rng.hpp"

namespace evonet {

/// Fitness assignment abstraction. Implementations must be safe to call from
/// several threads at once and must derive any randomness from the
/// individual's own rng_seed, so results do not depend on evaluation order.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual FitnessRecord evaluate(const Individual& ind) = 0;
};

namespace detail {

template <typename S>
void train_one_epoch(const NetworkSpec& spec, const Dataset& train,
                     WeightSet<S>& ws, const TrainConfig& cfg, Rng& rng) {
    Batcher batcher(train, cfg.batch_size, /*drop_last=*/false);
    batcher.reshuffle(rng);
    const int batches = batcher.num_batches();
    for (int j = 0; j < batches; ++j) {
        auto [images, labels] = batcher.batch(j);
        backward_and_step(spec, images.template cast<S>(), labels, ws, cfg);
    }
}

} // namespace detail

/// Truncated-training fitness: trains the decoded network from its evolved
/// Gaussian initialization for k epochs, then scores the classification error
/// per batch of the held-out fitness set in the final epoch. The record holds
/// the mean and population standard deviation of those per-batch errors plus
/// the parameter count. Undecodable or diverging individuals receive the
/// worst fitness instead of aborting the run.
class TruncatedTrainingEvaluator : public Evaluator {
public:
    TruncatedTrainingEvaluator(const Dataset& train, const Dataset& fitness,
                               int k, TrainConfig cfg)
        : train_(&train), fitness_(&fitness), k_(k), cfg_(cfg) {
        if (k < 1) throw ConfigError("fitness epochs k must be >= 1");
        if (fitness.size() < 1) throw ConfigError("fitness set is empty");
        if (fitness.size() < cfg.batch_size)
            throw ConfigError("fitness set smaller than one batch; "
                              "no evaluation batches would remain");
        cfg_.validate();
        input_ = train.sample_shape();
        num_classes_ = train.num_classes;
    }

    FitnessRecord evaluate(const Individual& ind) override {
        trainings_started_.fetch_add(1, std::memory_order_relaxed);
        NetworkSpec spec;
        try {
            spec = decode(ind.chromosome, input_, num_classes_);
        } catch (const ShapeUnderflow&) {
            return FitnessRecord::worst(0, k_);
        }
        const long long params =
            count_parameters(ind.chromosome, input_, num_classes_);

        Rng rng(ind.rng_seed);
        WeightSet<float> ws = gaussian_init<float>(spec, rng);
        try {
            for (int epoch = 1; epoch <= k_; ++epoch)
                detail::train_one_epoch(spec, *train_, ws, cfg_, rng);
        } catch (const NonFiniteLoss&) {
            return FitnessRecord::worst(params, k_);
        }

        Batcher eval(*fitness_, cfg_.batch_size, /*drop_last=*/true);
        const int eval_steps = eval.num_batches();
        std::vector<double> errors;
        errors.reserve(static_cast<std::size_t>(eval_steps));
        for (int j = 0; j < eval_steps; ++j) {
            auto [images, labels] = eval.batch(j);
            errors.push_back(classification_error(spec, ws, images, labels));
        }

        double mean = 0.0;
        for (double e : errors) mean += e;
        mean /= static_cast<double>(errors.size());
        double var = 0.0;
        for (double e : errors) var += (e - mean) * (e - mean);
        var /= static_cast<double>(errors.size());

        FitnessRecord rec;
        rec.mean_error = mean;
        rec.std_error = std::sqrt(var);
        rec.param_count = params;
        rec.epochs_used = k_;
        rec.diverged = false;
        return rec;
    }

    /// Number of evaluations that actually ran (cache hits never reach here).
    long long trainings_started() const {
        return trainings_started_.load(std::memory_order_relaxed);
    }

private:
    const Dataset* train_;
    const Dataset* fitness_;
    int k_;
    TrainConfig cfg_;
    Shape3 input_;
    int num_classes_ = 0;
    std::atomic<long long> trainings_started_{0};
};

/// Closed-form structural fitness for exercising the GA without training.
/// The error blends the distance of the chromosome's depth from a target
/// depth with the distance of its parameter count from a target count (log10
/// scale), both normalized to [0, 1].
struct SurrogateConfig {
    int target_depth = 6;
    long long target_params = 50000;
    double depth_weight = 0.5;
    double param_weight = 0.5;
    Shape3 input{16, 16, 1};
    int num_classes = 2;
};

class SurrogateEvaluator : public Evaluator {
public:
    explicit SurrogateEvaluator(SurrogateConfig cfg = {}) : cfg_(cfg) {}

    double depth_component(const Chromosome& c) const {
        const double d = std::abs(c.depth() - cfg_.target_depth) / 10.0;
        return std::min(1.0, d);
    }

    double param_component(long long params) const {
        const double d = std::abs(std::log10(double(params) + 1.0) -
                                  std::log10(double(cfg_.target_params) + 1.0)) /
                         6.0;
        return std::min(1.0, d);
    }

    FitnessRecord evaluate(const Individual& ind) override {
        FitnessRecord rec;
        long long params = 0;
        try {
            params = count_parameters(ind.chromosome, cfg_.input, cfg_.num_classes);
        } catch (const ShapeUnderflow&) {
            return FitnessRecord::worst(0, 1);
        }
        const double err = cfg_.depth_weight * depth_component(ind.chromosome) +
                           cfg_.param_weight * param_component(params);
        rec.mean_error = std::min(1.0, err);
        rec.std_error = 0.0;
        rec.param_count = params;
        rec.epochs_used = 1;
        rec.diverged = false;
        return rec;
    }

private:
    SurrogateConfig cfg_;
};

/// Evaluates every individual that does not yet carry a fitness record.
/// Work is spread over worker_count threads; because each individual owns its
/// seed, results are identical for any worker count and schedule. Telemetry
/// lines (one per freshly evaluated individual, in population order) are
/// appended to the given stream.
inline void evaluate_population(std::vector<Individual>& pop, Evaluator& eval,
                                int worker_count, int generation,
                                std::ostream* telemetry = nullptr) {
    if (worker_count < 1) throw ConfigError("worker_count must be >= 1");
    std::vector<double> wall(pop.size(), 0.0);
    std::vector<char> fresh(pop.size(), 0);

    const auto work = [&](std::size_t i) {
        if (pop[i].fitness) return;
        const auto t0 = std::chrono::steady_clock::now();
        pop[i].fitness = eval.evaluate(pop[i]);
        const auto t1 = std::chrono::steady_clock::now();
        wall[i] = std::chrono::duration<double>(t1 - t0).count();
        fresh[i] = 1;
    };

    if (worker_count == 1 || pop.size() <= 1) {
        for (std::size_t i = 0; i < pop.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        const int threads = std::min<int>(worker_count, int(pop.size()));
        std::vector<std::thread> team;
        team.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            team.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < pop.size();
                     i = next.fetch_add(1))
                    work(i);
            });
        for (std::thread& t : team) t.join();
    }

    if (telemetry) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (!fresh[i]) continue;
            const FitnessRecord& r = *pop[i].fitness;
            char line[192];
            std::snprintf(line, sizeof(line),
                          "gen=%d id=%llu mean_error=%.6f std_error=%.6f "
                          "params=%lld wall_seconds=%.3f\n",
                          generation, static_cast<unsigned long long>(pop[i].id),
                          r.mean_error, r.std_error, r.param_count, wall[i]);
            (*telemetry) << line;
        }
        telemetry->flush();
    }
}

} // namespace evonet
