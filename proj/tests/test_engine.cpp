#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "evonet/engine.hpp"
#include "oracles.hpp"

using namespace evonet;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("evonet-engine-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunConfig surrogate_run_config(int n, int g, std::uint64_t seed) {
    RunConfig cfg;
    cfg.population_size = n;
    cfg.generations = g;
    cfg.seed = seed;
    cfg.bounds.max_feature_maps = 8;
    cfg.bounds.max_neurons = 64;
    return cfg;
}

SurrogateConfig surrogate_objective() {
    SurrogateConfig sc;
    sc.input = {16, 16, 1};
    sc.num_classes = 2;
    sc.target_depth = 6;
    sc.target_params = 50000;
    return sc;
}

Individual evaluated_ind(std::uint64_t id, double mean, double sd, long long params) {
    Individual ind;
    ind.chromosome.head.push_back(ConvGene{});
    ind.chromosome.tail.push_back(FcGene{});
    ind.id = id;
    FitnessRecord r;
    r.mean_error = mean;
    r.std_error = sd;
    r.param_count = params;
    ind.fitness = r;
    return ind;
}

} // namespace

TEST_CASE("config parsing") {
    SECTION("empty object keeps defaults") {
        const RunConfig cfg = run_config_from_json(nlohmann::json::parse("{}"));
        REQUIRE(cfg.population_size == 100);
        REQUIRE(cfg.generations == 100);
        REQUIRE(cfg.selection.gamma == 0.2);
        REQUIRE(cfg.variation.crossover_prob == 0.9);
        REQUIRE(cfg.variation.sbx_eta == 20.0);
        REQUIRE(cfg.bounds.n_cp == 5);
        REQUIRE(cfg.fitness.k == 5);
        REQUIRE(cfg.final_train.epochs == 100);
    }
    SECTION("unknown keys are rejected at every level") {
        REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse(
                              R"({"popsize": 10})")),
                          ConfigError);
        REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse(
                              R"({"bounds": {"max_filters": 3}})")),
                          ConfigError);
        REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse(
                              R"({"fitness": {"train": {"lr": 0.1}}})")),
                          ConfigError);
    }
    SECTION("values land in the right fields") {
        const auto j = nlohmann::json::parse(R"({
            "population_size": 20,
            "generations": 30,
            "seed": 7,
            "bounds": {"max_filter_size": 5, "std_range": [0.02, 0.3], "n_cp": 3},
            "variation": {"mutation_prob": 0.2},
            "selection": {"alpha": 0.02, "gap_returns_higher_mean": true},
            "fitness": {"k": 3, "train": {"learning_rate": 0.05, "batch_size": 32}},
            "best_pick": {"policy": "min_params_within_tolerance", "tol": 0.01}
        })");
        const RunConfig cfg = run_config_from_json(j);
        REQUIRE(cfg.population_size == 20);
        REQUIRE(cfg.bounds.max_filter_size == 5);
        REQUIRE(cfg.bounds.std_range.lo == 0.02);
        REQUIRE(cfg.bounds.n_cp == 3);
        REQUIRE(cfg.variation.mutation_prob == 0.2);
        REQUIRE(cfg.selection.gap_returns_higher_mean);
        REQUIRE(cfg.fitness.k == 3);
        REQUIRE(cfg.fitness.train.batch_size == 32);
        REQUIRE(cfg.best_pick.policy == BestPickPolicy::kMinParamsWithinTolerance);
        REQUIRE(cfg.best_pick.tol == 0.01);
        // round trip through the emitter
        REQUIRE(run_config_from_json(to_json(cfg)).best_pick.tol == 0.01);
        REQUIRE(to_json(run_config_from_json(to_json(cfg))) == to_json(cfg));
    }
    SECTION("invalid settings are rejected") {
        REQUIRE_THROWS_AS(
            run_config_from_json(nlohmann::json::parse(R"({"population_size": 7})")),
            ConfigError);
        REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse(
                              R"({"selection": {"gamma": 0.0}})")),
                          ConfigError);
        REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse(
                              R"({"dataset": {"fitness_fraction": 1.5}})")),
                          ConfigError);
    }
}

TEST_CASE("select_best policies") {
    SECTION("single individual wins under any policy") {
        const std::vector<Individual> pop{evaluated_ind(1, 0.4, 0.1, 100)};
        REQUIRE(select_best(pop, BestPick{}).id == 1);
        REQUIRE(select_best(pop, {BestPickPolicy::kMinParamsWithinTolerance, 0.1}).id ==
                1);
    }
    SECTION("min error breaks ties by parameter count") {
        const std::vector<Individual> pop{evaluated_ind(1, 0.2, 0.1, 900),
                                          evaluated_ind(2, 0.2, 0.1, 500),
                                          evaluated_ind(3, 0.3, 0.0, 10)};
        REQUIRE(select_best(pop, BestPick{}).id == 2);
    }
    SECTION("parameter policy accepts slightly worse error") {
        const std::vector<Individual> pop{evaluated_ind(1, 0.100, 0.1, 1000000),
                                          evaluated_ind(2, 0.101, 0.1, 10000)};
        const BestPick pick{BestPickPolicy::kMinParamsWithinTolerance, 0.005};
        REQUIRE(select_best(pop, pick).id == 2);
        const BestPick tight{BestPickPolicy::kMinParamsWithinTolerance, 0.0001};
        REQUIRE(select_best(pop, tight).id == 1);
    }
}

TEST_CASE("accuracy tier table") {
    const std::vector<Individual> pop{
        evaluated_ind(1, 0.008, 0.0, 569250), // 99%
        evaluated_ind(2, 0.013, 0.0, 98588),  // 98%
        evaluated_ind(3, 0.016, 0.0, 120000), // 98%, more params
        evaluated_ind(4, 0.045, 0.0, 955)};   // 95%
    const auto table = accuracy_tier_table(pop);
    REQUIRE(table.size() == 3);
    REQUIRE(table[0] == std::pair<int, long long>{99, 569250});
    REQUIRE(table[1] == std::pair<int, long long>{98, 98588});
    REQUIRE(table[2] == std::pair<int, long long>{95, 955});
}

TEST_CASE("checkpoint save and load round trip") {
    TempDir tmp;
    RunConfig cfg = surrogate_run_config(6, 3, 17);
    RunState st;
    st.generation = 2;
    st.next_id = 42;
    st.rng = Rng(1234);
    st.rng.next_u64(); // advance a little
    GeneBounds b;
    Rng make(9);
    st.population = init_population(6, b, make, 0);
    st.population[0].fitness = FitnessRecord{0.25, 0.01, 1234, 3, false};
    st.population[1].fitness = FitnessRecord{1.0, 0.0, 0, 3, true};
    GenerationStats gs;
    gs.generation = 0;
    gs.best_error = 0.25;
    gs.mean_error = 0.5;
    gs.worst_error = 1.0;
    gs.best_params = 1234;
    gs.wall_seconds = 0.125;
    st.history.push_back(gs);

    const std::string path = tmp.file("ckpt.txt");
    checkpoint_save(path, cfg, st);
    const auto [cfg2, st2] = checkpoint_load(path);

    REQUIRE(to_json(cfg2) == to_json(cfg));
    REQUIRE(st2.generation == st.generation);
    REQUIRE(st2.next_id == st.next_id);
    REQUIRE(st2.rng == st.rng);
    REQUIRE(st2.population.size() == st.population.size());
    for (std::size_t i = 0; i < st.population.size(); ++i)
        REQUIRE(st2.population[i] == st.population[i]);
    REQUIRE(st2.history.size() == 1);
    REQUIRE(st2.history[0].best_error == 0.25);
    REQUIRE(st2.history[0].wall_seconds == 0.125);
}

TEST_CASE("checkpoint corruption and version mismatches are detected") {
    TempDir tmp;
    RunConfig cfg = surrogate_run_config(6, 3, 17);
    RunState st;
    st.rng = Rng(5);
    GeneBounds b;
    Rng make(10);
    st.population = init_population(6, b, make, 0);
    const std::string path = tmp.file("ckpt.txt");
    checkpoint_save(path, cfg, st);

    SECTION("flipping one payload byte trips the checksum") {
        std::string bytes = slurp(path);
        const std::size_t pos = bytes.size() - 10;
        bytes[pos] = bytes[pos] == 'x' ? 'y' : 'x';
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
        out.close();
        REQUIRE_THROWS_AS(checkpoint_load(path), ChecksumError);
    }
    SECTION("a different header is a version mismatch") {
        std::string bytes = slurp(path);
        bytes[bytes.find('1')] = '2';
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
        out.close();
        REQUIRE_THROWS_AS(checkpoint_load(path), VersionMismatch);
    }
}

TEST_CASE("zero generations returns the evaluated initial population") {
    SurrogateEvaluator eval(surrogate_objective());
    const RunConfig cfg = surrogate_run_config(10, 0, 3);
    const RunResult res = run_evolution(cfg, eval);
    REQUIRE(res.population.size() == 10);
    REQUIRE(res.history.size() == 1);
    for (const Individual& ind : res.population) REQUIRE(ind.evaluated());
}

TEST_CASE("surrogate evolution improves best fitness in at least 9 of 10 seeds") {
    int improved = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SurrogateEvaluator eval(surrogate_objective());
        const RunConfig cfg = surrogate_run_config(20, 30, seed);
        const RunResult res = run_evolution(cfg, eval);
        REQUIRE(res.history.size() == 31);
        const double first = res.history.front().best_error;
        const double last = res.history.back().best_error;
        REQUIRE(last <= first);
        if (last < first) ++improved;
        // elitism plus caching make the best mean error monotone
        for (std::size_t i = 1; i < res.history.size(); ++i)
            REQUIRE(res.history[i].best_error <= res.history[i - 1].best_error);
    }
    REQUIRE(improved >= 9);
}

TEST_CASE("full runs are reproducible byte for byte") {
    SurrogateEvaluator eval1(surrogate_objective());
    SurrogateEvaluator eval2(surrogate_objective());
    const RunConfig cfg = surrogate_run_config(12, 8, 77);

    TempDir d1, d2;
    RunOptions o1, o2;
    o1.out_dir = d1.file("run");
    o2.out_dir = d2.file("run");
    const RunResult r1 = run_evolution(cfg, eval1, o1);
    const RunResult r2 = run_evolution(cfg, eval2, o2);

    REQUIRE(slurp(d1.file("run") + "/history.jsonl") ==
            slurp(d2.file("run") + "/history.jsonl"));
    REQUIRE(r1.population.size() == r2.population.size());
    for (std::size_t i = 0; i < r1.population.size(); ++i)
        REQUIRE(r1.population[i] == r2.population[i]);
    REQUIRE(std::filesystem::exists(d1.file("run") + "/telemetry.log"));
    REQUIRE(std::filesystem::exists(d1.file("run") + "/report.txt"));
    REQUIRE(std::filesystem::exists(d1.file("run") + "/checkpoint.txt"));
}

TEST_CASE("a resumed run equals the uninterrupted run") {
    const RunConfig cfg = surrogate_run_config(12, 9, 123);

    TempDir full_dir, part_dir;
    SurrogateEvaluator eval(surrogate_objective());

    RunOptions full_opt;
    full_opt.out_dir = full_dir.file("run");
    const RunResult full = run_evolution(cfg, eval, full_opt);

    RunOptions first_half;
    first_half.out_dir = part_dir.file("run");
    first_half.stop_after_generation = 4;
    const RunResult half = run_evolution(cfg, eval, first_half);
    REQUIRE(half.history.size() == 5); // generations 0..4

    RunOptions second_half;
    second_half.out_dir = part_dir.file("run");
    second_half.resume_path = part_dir.file("run") + "/checkpoint.txt";
    const RunResult resumed = run_evolution(cfg, eval, second_half);

    REQUIRE(resumed.population.size() == full.population.size());
    for (std::size_t i = 0; i < full.population.size(); ++i)
        REQUIRE(resumed.population[i] == full.population[i]);
    REQUIRE(slurp(full_dir.file("run") + "/history.jsonl") ==
            slurp(part_dir.file("run") + "/history.jsonl"));

    SECTION("resume rejects a different config") {
        RunConfig other = cfg;
        other.seed = 999;
        RunOptions bad;
        bad.resume_path = part_dir.file("run") + "/checkpoint.txt";
        REQUIRE_THROWS_AS(run_evolution(other, eval, bad), ConfigError);
    }
}

TEST_CASE("population size stays fixed across generations") {
    SurrogateEvaluator eval(surrogate_objective());
    const RunConfig cfg = surrogate_run_config(14, 6, 5);
    const RunResult res = run_evolution(cfg, eval);
    REQUIRE(res.population.size() == 14);
    for (const Individual& ind : res.population) {
        REQUIRE(ind.evaluated());
        REQUIRE(is_valid(ind.chromosome, cfg.bounds));
    }
}

TEST_CASE("final training and initializer comparison") {
    const Dataset data = make_synthetic(SyntheticKind::kSeparableBlobs, 300, 6, 50);
    const Dataset test = make_synthetic(SyntheticKind::kSeparableBlobs, 100, 6, 51);

    Individual ind;
    ConvGene conv;
    conv.filter_size = 1;
    conv.feature_maps = 1;
    conv.weight_mean = 0.2;
    conv.weight_std = 0.1;
    ind.chromosome.head.push_back(conv);
    FcGene fc;
    fc.neurons = 8;
    fc.weight_std = 0.1;
    ind.chromosome.tail.push_back(fc);
    ind.id = 1;

    SECTION("zero epochs reports the untrained baseline") {
        TrainConfig tc;
        tc.epochs = 0;
        tc.seed = 9;
        const TrainedNet net = final_train(ind, data, test, tc);
        Rng init(9);
        const NetworkSpec spec = decode(ind.chromosome, {6, 6, 1}, 2);
        const WeightSet<float> fresh = gaussian_init<float>(spec, init);
        REQUIRE(net.test_error ==
                dataset_error(spec, fresh, test, tc.batch_size));
        for (std::size_t li = 0; li < fresh.weights.size(); ++li)
            REQUIRE(net.weights.weights[li].data == fresh.weights[li].data);
    }

    SECTION("twenty epochs solve the separable toy task") {
        TrainConfig tc;
        tc.epochs = 20;
        tc.batch_size = 16;
        tc.learning_rate = 0.2;
        tc.seed = 4;
        const TrainedNet net = final_train(ind, data, test, tc);
        REQUIRE(net.test_error <= 0.05);
    }

    SECTION("same seed gives identical final weights") {
        TrainConfig tc;
        tc.epochs = 3;
        tc.batch_size = 16;
        tc.seed = 12;
        const TrainedNet a = final_train(ind, data, test, tc);
        const TrainedNet b = final_train(ind, data, test, tc);
        REQUIRE(a.test_error == b.test_error);
        for (std::size_t li = 0; li < a.weights.weights.size(); ++li)
            REQUIRE(a.weights.weights[li].data == b.weights.weights[li].data);
    }

    SECTION("identical initializers give identical errors (control)") {
        TrainConfig tc;
        tc.epochs = 2;
        tc.batch_size = 16;
        tc.seed = 3;
        const TrainedNet x1 = train_with_init(ind, data, test, tc, InitKind::kXavier);
        const TrainedNet x2 = train_with_init(ind, data, test, tc, InitKind::kXavier);
        REQUIRE(x1.test_error == x2.test_error);
    }

    SECTION("compare_initializers reports both legs") {
        TrainConfig tc;
        tc.epochs = 2;
        tc.batch_size = 16;
        tc.seed = 3;
        const InitComparison cmp = compare_initializers(ind, data, test, tc);
        REQUIRE(cmp.gaussian_error >= 0.0);
        REQUIRE(cmp.gaussian_error <= 1.0);
        REQUIRE(cmp.xavier_error >= 0.0);
        REQUIRE(cmp.xavier_error <= 1.0);
        REQUIRE(cmp.gaussian_error ==
                train_with_init(ind, data, test, tc, InitKind::kGaussian).test_error);
        REQUIRE(cmp.xavier_error ==
                train_with_init(ind, data, test, tc, InitKind::kXavier).test_error);
    }
}

TEST_CASE("the report lists the best individual and the tier table") {
    SurrogateEvaluator eval(surrogate_objective());
    const RunConfig cfg = surrogate_run_config(10, 3, 8);
    const RunResult res = run_evolution(cfg, eval);
    std::ostringstream out;
    write_report(out, cfg, res.population, res.history);
    const std::string report = out.str();
    REQUIRE(report.find("best individual:") != std::string::npos);
    REQUIRE(report.find("accuracy tier vs smallest parameter count:") !=
            std::string::npos);
    REQUIRE(report.find("conv filter_size=") != std::string::npos);
}
