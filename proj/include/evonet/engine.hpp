#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evonet/config.hpp"
#include "evonet/data.hpp"
#include "evonet/errors.hpp"
#include "evonet/fitness.hpp"
#include "evonet/genome.hpp"
#include "evonet/network.hpp"
#include "evonet/selection.hpp"
#include "evonet/variation.hpp"

namespace evonet {

struct GenerationStats {
    int generation = 0;
    double best_error = 1.0;
    double mean_error = 1.0;
    double worst_error = 1.0;
    long long best_params = 0;
    double wall_seconds = 0.0;
};

/// Complete resumable state of an evolution run.
struct RunState {
    int generation = 0;
    std::uint64_t next_id = 0;
    Rng rng;
    std::vector<Individual> population;
    std::vector<GenerationStats> history;
};

struct RunResult {
    std::vector<Individual> population;
    std::vector<GenerationStats> history;
};

struct RunOptions {
    std::string out_dir;          // empty: keep everything in memory
    int workers = 1;
    std::string resume_path;      // checkpoint to continue from
    int stop_after_generation = -1; // testing hook: pause once this generation
                                    // is checkpointed
    std::ostream* progress = nullptr;
};

// ---------------------------------------------------------------------------
// Generation statistics and logs
// ---------------------------------------------------------------------------

namespace detail {

inline GenerationStats summarize(int generation,
                                 const std::vector<Individual>& pop,
                                 double wall_seconds) {
    GenerationStats s;
    s.generation = generation;
    s.wall_seconds = wall_seconds;
    const Individual* best = &pop.front();
    double sum = 0.0;
    double worst = 0.0;
    for (const Individual& ind : pop) {
        const double e = ind.fitness->mean_error;
        sum += e;
        worst = std::max(worst, e);
        if (elite_less(ind, *best)) best = &ind;
    }
    s.best_error = best->fitness->mean_error;
    s.best_params = best->fitness->param_count;
    s.mean_error = sum / static_cast<double>(pop.size());
    s.worst_error = worst;
    return s;
}

// The history log is part of the determinism contract, so the wall time is
// deliberately left out of it.
inline std::string history_line(const GenerationStats& s) {
    nlohmann::json j;
    j["generation"] = s.generation;
    j["best_error"] = s.best_error;
    j["mean_error"] = s.mean_error;
    j["worst_error"] = s.worst_error;
    j["best_params"] = s.best_params;
    return j.dump();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Checkpointing: a plain-text record of generation, population, history, and
// the master random stream, protected by an FNV-1a checksum and written via
// temp-file-plus-rename.
// ---------------------------------------------------------------------------

namespace detail {

constexpr const char* kCheckpointHeader = "evonet-checkpoint 1";

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string checkpoint_payload(const RunConfig& cfg, const RunState& st) {
    std::ostringstream out;
    out << "config " << to_json(cfg).dump() << "\n";
    out << "generation " << st.generation << "\n";
    out << "next_id " << st.next_id << "\n";
    out << "rng ";
    st.rng.save(out);
    out << "\n";
    out << "history " << st.history.size() << "\n";
    for (const GenerationStats& s : st.history) {
        nlohmann::json j;
        j["generation"] = s.generation;
        j["best_error"] = s.best_error;
        j["mean_error"] = s.mean_error;
        j["worst_error"] = s.worst_error;
        j["best_params"] = s.best_params;
        j["wall_seconds"] = s.wall_seconds;
        out << j.dump() << "\n";
    }
    out << "population " << st.population.size() << "\n";
    for (const Individual& ind : st.population) {
        out << "individual id=" << ind.id << " seed=" << ind.rng_seed
            << " evaluated=" << (ind.fitness ? 1 : 0);
        if (ind.fitness) {
            const FitnessRecord& r = *ind.fitness;
            out << " mean=" << format_real(r.mean_error)
                << " std=" << format_real(r.std_error) << " params=" << r.param_count
                << " epochs=" << r.epochs_used << " diverged=" << (r.diverged ? 1 : 0);
        }
        out << "\n";
        const std::string genes = to_text(ind.chromosome);
        out << "genes " << ind.chromosome.depth() << "\n" << genes;
    }
    out << "end\n";
    return out.str();
}

} // namespace detail

inline void checkpoint_save(const std::string& path, const RunConfig& cfg,
                            const RunState& st) {
    const std::string payload = detail::checkpoint_payload(cfg, st);
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a(payload)));
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write checkpoint: " + tmp);
        out << detail::kCheckpointHeader << "\n";
        out << "checksum " << checksum << "\n";
        out << payload;
    }
    std::filesystem::rename(tmp, path);
}

inline std::pair<RunConfig, RunState> checkpoint_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    std::string header, checksum_line;
    if (!std::getline(in, header)) throw FormatError("empty checkpoint file");
    if (header != detail::kCheckpointHeader)
        throw VersionMismatch("unsupported checkpoint header: " + header);
    if (!std::getline(in, checksum_line) || checksum_line.rfind("checksum ", 0) != 0)
        throw FormatError("missing checksum line");
    const std::string payload((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    char expect[32];
    std::snprintf(expect, sizeof(expect), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a(payload)));
    if (checksum_line.substr(9) != expect)
        throw ChecksumError("checkpoint checksum mismatch in " + path);

    std::istringstream body(payload);
    std::string line;
    auto expect_prefix = [&](const char* prefix) -> std::string {
        if (!std::getline(body, line) || line.rfind(prefix, 0) != 0)
            throw FormatError(std::string("checkpoint: expected '") + prefix + "'");
        return line.substr(std::string(prefix).size());
    };

    RunConfig cfg;
    {
        const std::string cfg_text = expect_prefix("config ");
        cfg = run_config_from_json(nlohmann::json::parse(cfg_text));
    }
    RunState st;
    st.generation = std::stoi(expect_prefix("generation "));
    st.next_id = std::stoull(expect_prefix("next_id "));
    {
        std::istringstream rng_in(expect_prefix("rng "));
        st.rng.load(rng_in);
    }
    const int hist = std::stoi(expect_prefix("history "));
    for (int i = 0; i < hist; ++i) {
        if (!std::getline(body, line)) throw FormatError("truncated history");
        const nlohmann::json j = nlohmann::json::parse(line);
        GenerationStats s;
        s.generation = j.at("generation").get<int>();
        s.best_error = j.at("best_error").get<double>();
        s.mean_error = j.at("mean_error").get<double>();
        s.worst_error = j.at("worst_error").get<double>();
        s.best_params = j.at("best_params").get<long long>();
        s.wall_seconds = j.at("wall_seconds").get<double>();
        st.history.push_back(s);
    }
    const int pop = std::stoi(expect_prefix("population "));
    for (int i = 0; i < pop; ++i) {
        const std::string ind_line = expect_prefix("individual ");
        const auto tok = detail::split_ws(ind_line);
        Individual ind;
        ind.id = std::stoull(std::string(detail::field_value(tok.at(0), "id")));
        ind.rng_seed = std::stoull(std::string(detail::field_value(tok.at(1), "seed")));
        const bool evaluated =
            detail::field_value(tok.at(2), "evaluated") == "1";
        if (evaluated) {
            FitnessRecord r;
            r.mean_error = detail::parse_real(detail::field_value(tok.at(3), "mean"));
            r.std_error = detail::parse_real(detail::field_value(tok.at(4), "std"));
            r.param_count =
                detail::parse_int(detail::field_value(tok.at(5), "params"));
            r.epochs_used = static_cast<int>(
                detail::parse_int(detail::field_value(tok.at(6), "epochs")));
            r.diverged = detail::field_value(tok.at(7), "diverged") == "1";
            ind.fitness = r;
        }
        const int genes = std::stoi(expect_prefix("genes "));
        std::string chromo_text;
        for (int g = 0; g < genes; ++g) {
            if (!std::getline(body, line)) throw FormatError("truncated genes");
            chromo_text += line;
            chromo_text += '\n';
        }
        ind.chromosome = chromosome_from_text(chromo_text);
        st.population.push_back(std::move(ind));
    }
    expect_prefix("end");
    return {cfg, st};
}

// ---------------------------------------------------------------------------
// Best-individual policies, final training, initializer comparison
// ---------------------------------------------------------------------------

inline const Individual& select_best(const std::vector<Individual>& pop,
                                     const BestPick& pick) {
    if (pop.empty()) throw InsufficientCandidates("empty population");
    const Individual* best = &pop.front();
    for (const Individual& ind : pop) {
        detail::fitness_of(ind);
        if (detail::elite_less(ind, *best)) best = &ind;
    }
    if (pick.policy == BestPickPolicy::kMinError) return *best;

    const double cutoff = best->fitness->mean_error + pick.tol;
    const Individual* pick_best = best;
    for (const Individual& ind : pop) {
        if (ind.fitness->mean_error > cutoff) continue;
        const FitnessRecord& a = *ind.fitness;
        const FitnessRecord& b = *pick_best->fitness;
        if (a.param_count < b.param_count ||
            (a.param_count == b.param_count && a.mean_error < b.mean_error) ||
            (a.param_count == b.param_count && a.mean_error == b.mean_error &&
             ind.id < pick_best->id))
            pick_best = &ind;
    }
    return *pick_best;
}

enum class InitKind { kGaussian, kXavier };

struct TrainedNet {
    NetworkSpec spec;
    WeightSet<float> weights;
    double test_error = 1.0;
};

inline double dataset_error(const NetworkSpec& spec, const WeightSet<float>& ws,
                            const Dataset& data, int batch_size) {
    Batcher batcher(data, batch_size, /*drop_last=*/false);
    std::size_t wrong = 0;
    for (int j = 0; j < batcher.num_batches(); ++j) {
        auto [images, labels] = batcher.batch(j);
        const std::vector<int> pred = predict(spec, ws, images);
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (pred[i] != labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

/// Trains the decoded individual from scratch with the chosen initializer.
/// The epoch shuffle stream is seeded independently of the initializer stream
/// so two runs with different initializers see identical data order.
inline TrainedNet train_with_init(const Individual& ind, const Dataset& train,
                                  const Dataset& test, const TrainConfig& cfg,
                                  InitKind kind) {
    TrainedNet net;
    net.spec = decode(ind.chromosome, train.sample_shape(), train.num_classes);
    Rng init_rng(cfg.seed);
    Rng shuffle_rng(cfg.seed + 0x9e3779b97f4a7c15ull);
    net.weights = kind == InitKind::kGaussian
                      ? gaussian_init<float>(net.spec, init_rng)
                      : xavier_init<float>(net.spec, init_rng);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
        detail::train_one_epoch(net.spec, train, net.weights, cfg, shuffle_rng);
    net.test_error = dataset_error(net.spec, net.weights, test, cfg.batch_size);
    return net;
}

/// Deep training of the chosen individual from its evolved Gaussian
/// initialization; reports the held-out test error.
inline TrainedNet final_train(const Individual& ind, const Dataset& train,
                              const Dataset& test, const TrainConfig& cfg) {
    return train_with_init(ind, train, test, cfg, InitKind::kGaussian);
}

struct InitComparison {
    double gaussian_error = 1.0;
    double xavier_error = 1.0;
};

/// Trains the same architecture twice, evolved-Gaussian versus Xavier, with
/// identical epochs and identical data order, and reports both test errors.
inline InitComparison compare_initializers(const Individual& ind,
                                           const Dataset& train,
                                           const Dataset& test,
                                           const TrainConfig& cfg) {
    InitComparison cmp;
    cmp.gaussian_error =
        train_with_init(ind, train, test, cfg, InitKind::kGaussian).test_error;
    cmp.xavier_error =
        train_with_init(ind, train, test, cfg, InitKind::kXavier).test_error;
    return cmp;
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

/// Accuracy tiers (floor of percent accuracy) mapped to the smallest
/// parameter count achieving that tier in the population, best tier first.
inline std::vector<std::pair<int, long long>> accuracy_tier_table(
    const std::vector<Individual>& pop) {
    std::map<int, long long, std::greater<int>> tiers;
    for (const Individual& ind : pop) {
        if (!ind.fitness) continue;
        const int tier = static_cast<int>(
            std::floor((1.0 - ind.fitness->mean_error) * 100.0));
        auto it = tiers.find(tier);
        if (it == tiers.end() || ind.fitness->param_count < it->second)
            tiers[tier] = ind.fitness->param_count;
    }
    return {tiers.begin(), tiers.end()};
}

inline void write_report(std::ostream& out, const RunConfig& cfg,
                         const std::vector<Individual>& pop,
                         const std::vector<GenerationStats>& history) {
    out << "evonet run report\n";
    out << "=================\n";
    out << "population " << cfg.population_size << ", generations "
        << cfg.generations << ", seed " << cfg.seed << "\n\n";
    if (!history.empty()) {
        const GenerationStats& last = history.back();
        out << "final generation " << last.generation << ": best_error "
            << last.best_error << ", mean_error " << last.mean_error
            << ", worst_error " << last.worst_error << "\n\n";
    }
    const Individual& best = select_best(pop, BestPick{});
    out << "best individual: id " << best.id << ", mean_error "
        << best.fitness->mean_error << ", std_error " << best.fitness->std_error
        << ", params " << best.fitness->param_count << "\n";
    out << "chromosome:\n" << to_text(best.chromosome) << "\n";
    out << "accuracy tier vs smallest parameter count:\n";
    for (const auto& [tier, params] : accuracy_tier_table(pop))
        out << "  accuracy " << tier << "%: " << params << " parameters\n";
}

// ---------------------------------------------------------------------------
// The evolution driver
// ---------------------------------------------------------------------------

/// Runs initialization, then G rounds of evaluate / mating-pool selection /
/// offspring generation / environmental selection, checkpointing after every
/// generation. Deterministic for a fixed config: all randomness flows through
/// the checkpointed master stream plus per-individual seeds. Resuming from a
/// checkpoint reproduces the uninterrupted run exactly.
inline RunResult run_evolution(const RunConfig& cfg, Evaluator& eval,
                               const RunOptions& opt = {}) {
    cfg.validate();
    const bool resuming = !opt.resume_path.empty();

    RunState st;
    if (resuming) {
        auto [stored_cfg, state] = checkpoint_load(opt.resume_path);
        if (to_json(stored_cfg) != to_json(cfg))
            throw ConfigError("resume config differs from checkpointed config");
        st = std::move(state);
    } else {
        st.rng = Rng(cfg.seed);
        st.population =
            init_population(cfg.population_size, cfg.bounds, st.rng, 0);
        st.next_id = static_cast<std::uint64_t>(cfg.population_size);
    }

    const bool write_files = !opt.out_dir.empty();
    std::ofstream telemetry;
    std::string checkpoint_path, history_path;
    if (write_files) {
        std::filesystem::create_directories(opt.out_dir);
        checkpoint_path = opt.out_dir + "/checkpoint.txt";
        history_path = opt.out_dir + "/history.jsonl";
        telemetry.open(opt.out_dir + "/telemetry.log",
                       resuming ? std::ios::app : std::ios::trunc);
    }
    std::ostream* tele = write_files ? &telemetry : nullptr;

    const auto flush_history = [&] {
        if (!write_files) return;
        std::ofstream hist(history_path, std::ios::trunc);
        for (const GenerationStats& s : st.history)
            hist << detail::history_line(s) << "\n";
    };
    const auto progress_line = [&](const GenerationStats& s) {
        if (!opt.progress) return;
        (*opt.progress) << "gen " << s.generation << "/" << cfg.generations
                        << "  best " << s.best_error << "  mean " << s.mean_error
                        << "  best_params " << s.best_params << "  ("
                        << s.wall_seconds << "s)\n";
        opt.progress->flush();
    };

    if (!resuming) {
        const auto t0 = std::chrono::steady_clock::now();
        evaluate_population(st.population, eval, opt.workers, 0, tele);
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
        st.history.push_back(detail::summarize(0, st.population, secs));
        flush_history();
        if (write_files) checkpoint_save(checkpoint_path, cfg, st);
        progress_line(st.history.back());
    }

    while (st.generation < cfg.generations) {
        if (opt.stop_after_generation >= 0 &&
            st.generation >= opt.stop_after_generation)
            break;
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<Individual> pool =
            fill_mating_pool(st.population, cfg.selection, st.rng);
        std::vector<Individual> offspring = generate_offspring(
            pool, cfg.variation, cfg.bounds, st.rng, st.next_id);
        evaluate_population(offspring, eval, opt.workers, st.generation + 1, tele);

        std::vector<Individual> combined = st.population;
        combined.insert(combined.end(),
                        std::make_move_iterator(offspring.begin()),
                        std::make_move_iterator(offspring.end()));
        st.population = environmental_selection(combined, cfg.population_size,
                                                cfg.selection, st.rng);
        st.generation += 1;

        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
        st.history.push_back(
            detail::summarize(st.generation, st.population, secs));
        flush_history();
        if (write_files) checkpoint_save(checkpoint_path, cfg, st);
        progress_line(st.history.back());
    }

    if (write_files) {
        std::ofstream report(opt.out_dir + "/report.txt", std::ios::trunc);
        write_report(report, cfg, st.population, st.history);
    }
    return {std::move(st.population), std::move(st.history)};
}

} // namespace evonet
