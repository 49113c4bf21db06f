#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "evonet/errors.hpp"
#include "evonet/fitness.hpp"
#include "evonet/genome.hpp"
#include "evonet/network.hpp"
#include "evonet/selection.hpp"
#include "evonet/variation.hpp"

namespace evonet {

struct DatasetConfig {
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    double fitness_fraction = 0.2;
};

enum class BestPickPolicy { kMinError, kMinParamsWithinTolerance };

struct BestPick {
    BestPickPolicy policy = BestPickPolicy::kMinError;
    double tol = 0.0;
};

struct FitnessConfig {
    int k = 5; // truncated training epochs per candidate
    TrainConfig train{0.01, 64, 1, 0};
};

/// Everything a full run depends on. A run is a pure function of this struct
/// plus the dataset bytes.
struct RunConfig {
    int population_size = 100;
    int generations = 100;
    GeneBounds bounds;
    VariationConfig variation;
    SelectionConfig selection;
    FitnessConfig fitness;
    TrainConfig final_train{0.01, 64, 100, 0};
    std::uint64_t seed = 0;
    DatasetConfig dataset;
    BestPick best_pick;

    void validate() const {
        if (population_size < 2 || population_size % 2 != 0)
            throw ConfigError("population_size must be even and >= 2");
        if (generations < 0) throw ConfigError("generations must be >= 0");
        bounds.validate();
        variation.validate();
        selection.validate();
        if (fitness.k < 1) throw ConfigError("fitness.k must be >= 1");
        fitness.train.validate();
        final_train.validate();
        if (!(dataset.fitness_fraction > 0.0 && dataset.fitness_fraction < 1.0))
            throw ConfigError("dataset.fitness_fraction must be in (0, 1)");
        if (best_pick.tol < 0.0) throw ConfigError("best_pick.tol must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// JSON binding. Field names mirror the structs exactly; unknown keys are
// rejected so typos cannot silently fall back to defaults.
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline void read_interval(const json& j, const char* key, Interval& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2)
        throw ConfigError(std::string("'") + key + "' must be [lo, hi]");
    out.lo = v[0].get<double>();
    out.hi = v[1].get<double>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const char* scope) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) { ok = true; break; }
        if (!ok)
            throw ConfigError(std::string("unknown key '") + item.key() + "' in " +
                              scope);
    }
}

} // namespace detail

inline void from_json_checked(const detail::json& j, GeneBounds& b) {
    detail::reject_unknown(
        j,
        {"min_filter_size", "max_filter_size", "min_kernel_size", "max_kernel_size",
         "min_feature_maps", "max_feature_maps", "min_neurons", "max_neurons",
         "mean_range", "std_range", "n_cp", "n_f"},
        "bounds");
    detail::read_field(j, "min_filter_size", b.min_filter_size);
    detail::read_field(j, "max_filter_size", b.max_filter_size);
    detail::read_field(j, "min_kernel_size", b.min_kernel_size);
    detail::read_field(j, "max_kernel_size", b.max_kernel_size);
    detail::read_field(j, "min_feature_maps", b.min_feature_maps);
    detail::read_field(j, "max_feature_maps", b.max_feature_maps);
    detail::read_field(j, "min_neurons", b.min_neurons);
    detail::read_field(j, "max_neurons", b.max_neurons);
    detail::read_interval(j, "mean_range", b.mean_range);
    detail::read_interval(j, "std_range", b.std_range);
    detail::read_field(j, "n_cp", b.n_cp);
    detail::read_field(j, "n_f", b.n_f);
}

inline void from_json_checked(const detail::json& j, VariationConfig& v) {
    detail::reject_unknown(
        j, {"crossover_prob", "mutation_prob", "sbx_eta", "pm_eta"}, "variation");
    detail::read_field(j, "crossover_prob", v.crossover_prob);
    detail::read_field(j, "mutation_prob", v.mutation_prob);
    detail::read_field(j, "sbx_eta", v.sbx_eta);
    detail::read_field(j, "pm_eta", v.pm_eta);
}

inline void from_json_checked(const detail::json& j, SelectionConfig& s) {
    detail::reject_unknown(j, {"alpha", "beta", "gamma", "gap_returns_higher_mean"},
                           "selection");
    detail::read_field(j, "alpha", s.alpha);
    detail::read_field(j, "beta", s.beta);
    detail::read_field(j, "gamma", s.gamma);
    detail::read_field(j, "gap_returns_higher_mean", s.gap_returns_higher_mean);
}

inline void from_json_checked(const detail::json& j, TrainConfig& t,
                              const char* scope) {
    detail::reject_unknown(j, {"learning_rate", "batch_size", "epochs", "seed"},
                           scope);
    detail::read_field(j, "learning_rate", t.learning_rate);
    detail::read_field(j, "batch_size", t.batch_size);
    detail::read_field(j, "epochs", t.epochs);
    detail::read_field(j, "seed", t.seed);
}

inline void from_json_checked(const detail::json& j, FitnessConfig& f) {
    detail::reject_unknown(j, {"k", "train"}, "fitness");
    detail::read_field(j, "k", f.k);
    if (j.contains("train")) from_json_checked(j.at("train"), f.train, "fitness.train");
}

inline void from_json_checked(const detail::json& j, DatasetConfig& d) {
    detail::reject_unknown(j,
                           {"train_images", "train_labels", "test_images",
                            "test_labels", "fitness_fraction"},
                           "dataset");
    detail::read_field(j, "train_images", d.train_images);
    detail::read_field(j, "train_labels", d.train_labels);
    detail::read_field(j, "test_images", d.test_images);
    detail::read_field(j, "test_labels", d.test_labels);
    detail::read_field(j, "fitness_fraction", d.fitness_fraction);
}

inline void from_json_checked(const detail::json& j, BestPick& b) {
    detail::reject_unknown(j, {"policy", "tol"}, "best_pick");
    if (j.contains("policy")) {
        const std::string p = j.at("policy").get<std::string>();
        if (p == "min_error")
            b.policy = BestPickPolicy::kMinError;
        else if (p == "min_params_within_tolerance")
            b.policy = BestPickPolicy::kMinParamsWithinTolerance;
        else
            throw ConfigError("unknown best_pick.policy: " + p);
    }
    detail::read_field(j, "tol", b.tol);
}

inline RunConfig run_config_from_json(const detail::json& j) {
    detail::reject_unknown(j,
                           {"population_size", "generations", "bounds", "variation",
                            "selection", "fitness", "final_train", "seed", "dataset",
                            "best_pick"},
                           "run config");
    RunConfig cfg;
    detail::read_field(j, "population_size", cfg.population_size);
    detail::read_field(j, "generations", cfg.generations);
    detail::read_field(j, "seed", cfg.seed);
    if (j.contains("bounds")) from_json_checked(j.at("bounds"), cfg.bounds);
    if (j.contains("variation")) from_json_checked(j.at("variation"), cfg.variation);
    if (j.contains("selection")) from_json_checked(j.at("selection"), cfg.selection);
    if (j.contains("fitness")) from_json_checked(j.at("fitness"), cfg.fitness);
    if (j.contains("final_train"))
        from_json_checked(j.at("final_train"), cfg.final_train, "final_train");
    if (j.contains("dataset")) from_json_checked(j.at("dataset"), cfg.dataset);
    if (j.contains("best_pick")) from_json_checked(j.at("best_pick"), cfg.best_pick);
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    detail::json j;
    try {
        in >> j;
    } catch (const detail::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return run_config_from_json(j);
}

inline detail::json to_json(const RunConfig& cfg) {
    detail::json j;
    j["population_size"] = cfg.population_size;
    j["generations"] = cfg.generations;
    j["seed"] = cfg.seed;
    j["bounds"] = {{"min_filter_size", cfg.bounds.min_filter_size},
                   {"max_filter_size", cfg.bounds.max_filter_size},
                   {"min_kernel_size", cfg.bounds.min_kernel_size},
                   {"max_kernel_size", cfg.bounds.max_kernel_size},
                   {"min_feature_maps", cfg.bounds.min_feature_maps},
                   {"max_feature_maps", cfg.bounds.max_feature_maps},
                   {"min_neurons", cfg.bounds.min_neurons},
                   {"max_neurons", cfg.bounds.max_neurons},
                   {"mean_range", {cfg.bounds.mean_range.lo, cfg.bounds.mean_range.hi}},
                   {"std_range", {cfg.bounds.std_range.lo, cfg.bounds.std_range.hi}},
                   {"n_cp", cfg.bounds.n_cp},
                   {"n_f", cfg.bounds.n_f}};
    j["variation"] = {{"crossover_prob", cfg.variation.crossover_prob},
                      {"mutation_prob", cfg.variation.mutation_prob},
                      {"sbx_eta", cfg.variation.sbx_eta},
                      {"pm_eta", cfg.variation.pm_eta}};
    j["selection"] = {{"alpha", cfg.selection.alpha},
                      {"beta", cfg.selection.beta},
                      {"gamma", cfg.selection.gamma},
                      {"gap_returns_higher_mean", cfg.selection.gap_returns_higher_mean}};
    j["fitness"] = {{"k", cfg.fitness.k},
                    {"train",
                     {{"learning_rate", cfg.fitness.train.learning_rate},
                      {"batch_size", cfg.fitness.train.batch_size},
                      {"epochs", cfg.fitness.train.epochs},
                      {"seed", cfg.fitness.train.seed}}}};
    j["final_train"] = {{"learning_rate", cfg.final_train.learning_rate},
                        {"batch_size", cfg.final_train.batch_size},
                        {"epochs", cfg.final_train.epochs},
                        {"seed", cfg.final_train.seed}};
    j["dataset"] = {{"train_images", cfg.dataset.train_images},
                    {"train_labels", cfg.dataset.train_labels},
                    {"test_images", cfg.dataset.test_images},
                    {"test_labels", cfg.dataset.test_labels},
                    {"fitness_fraction", cfg.dataset.fitness_fraction}};
    j["best_pick"] = {{"policy", cfg.best_pick.policy == BestPickPolicy::kMinError
                                     ? "min_error"
                                     : "min_params_within_tolerance"},
                      {"tol", cfg.best_pick.tol}};
    return j;
}

} // namespace evonet
