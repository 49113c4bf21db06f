#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "evonet/selection.hpp"
#include "oracles.hpp"

using namespace evonet;

namespace {

Individual make_ind(std::uint64_t id, double mean, double sd, long long params) {
    Individual ind;
    ConvGene conv;
    ind.chromosome.head.push_back(conv);
    ind.chromosome.tail.push_back(FcGene{});
    ind.id = id;
    FitnessRecord r;
    r.mean_error = mean;
    r.std_error = sd;
    r.param_count = params;
    r.epochs_used = 1;
    ind.fitness = r;
    return ind;
}

// Independent rule table: 0 -> a wins, 1 -> b wins, -1 -> fair coin.
int slack_reference(const Individual& a, const Individual& b, double alpha,
                    double beta) {
    const FitnessRecord& fa = *a.fitness;
    const FitnessRecord& fb = *b.fitness;
    const bool a_is_high =
        fa.mean_error > fb.mean_error ||
        (fa.mean_error == fb.mean_error && fa.param_count >= fb.param_count);
    const FitnessRecord& hi = a_is_high ? fa : fb;
    const FitnessRecord& lo = a_is_high ? fb : fa;
    const int hi_idx = a_is_high ? 0 : 1;
    const int lo_idx = 1 - hi_idx;
    if (hi.mean_error - lo.mean_error > alpha) return lo_idx;
    if (static_cast<double>(hi.param_count - lo.param_count) > beta) return lo_idx;
    if (hi.std_error < lo.std_error) return hi_idx;
    if (hi.std_error > lo.std_error) return lo_idx;
    return -1;
}

std::vector<Individual> random_population(int n, Rng& rng,
                                          std::uint64_t first_id = 0) {
    std::vector<Individual> pop;
    for (int i = 0; i < n; ++i)
        pop.push_back(make_ind(first_id + static_cast<std::uint64_t>(i),
                               rng.uniform_real(0.0, 1.0),
                               rng.uniform_real(0.0, 0.3),
                               rng.uniform_int(100, 2000000)));
    return pop;
}

} // namespace

TEST_CASE("tournament branch table") {
    SelectionConfig cfg;
    Rng rng(60);

    SECTION("mean gap beyond alpha picks the lower error") {
        cfg.alpha = 0.05;
        const Individual a = make_ind(1, 0.30, 0.01, 1000);
        const Individual b = make_ind(2, 0.10, 0.09, 900000);
        REQUIRE(slack_tournament(a, b, cfg, rng).id == 2);
        REQUIRE(slack_tournament(b, a, cfg, rng).id == 2);
    }

    SECTION("inside alpha the parameter gap decides") {
        cfg.alpha = 0.05;
        cfg.beta = 100000;
        const Individual heavy = make_ind(1, 0.101, 0.01, 2000000);
        const Individual light = make_ind(2, 0.100, 0.09, 10000);
        REQUIRE(slack_tournament(heavy, light, cfg, rng).id == 2);
        REQUIRE(slack_tournament(light, heavy, cfg, rng).id == 2);
    }

    SECTION("equal means and params fall back to the smaller std") {
        const Individual a = make_ind(1, 0.2, 0.02, 5000);
        const Individual b = make_ind(2, 0.2, 0.03, 5000);
        REQUIRE(slack_tournament(a, b, cfg, rng).id == 1);
        REQUIRE(slack_tournament(b, a, cfg, rng).id == 1);
    }

    SECTION("exact std tie flips a fair coin") {
        const Individual a = make_ind(1, 0.2, 0.02, 5000);
        const Individual b = make_ind(2, 0.2, 0.02, 5000);
        std::map<std::uint64_t, long long> wins;
        const int trials = 10000;
        for (int i = 0; i < trials; ++i) ++wins[slack_tournament(a, b, cfg, rng).id];
        REQUIRE(wins.size() == 2);
        REQUIRE(oracles::uniform_counts_within_5sigma({wins[1], wins[2]}, trials));
    }

    SECTION("fidelity switch hands the gap branch to the higher mean") {
        cfg.alpha = 0.05;
        cfg.gap_returns_higher_mean = true;
        const Individual a = make_ind(1, 0.30, 0.01, 1000);
        const Individual b = make_ind(2, 0.10, 0.09, 900000);
        REQUIRE(slack_tournament(a, b, cfg, rng).id == 1);
        REQUIRE(slack_tournament(b, a, cfg, rng).id == 1);
    }

    SECTION("unevaluated entrants are rejected") {
        Individual a = make_ind(1, 0.2, 0.02, 100);
        Individual b = make_ind(2, 0.3, 0.02, 100);
        b.fitness.reset();
        REQUIRE_THROWS_AS(slack_tournament(a, b, cfg, rng), UnevaluatedIndividual);
    }
}

TEST_CASE("tournament agrees with the reference comparator on random pairs") {
    Rng rng(61);
    SelectionConfig cfg;
    cfg.alpha = 0.03;
    cfg.beta = 50000;
    int deterministic_cases = 0;
    for (int i = 0; i < 5000; ++i) {
        const Individual a = make_ind(1, rng.uniform_real(0.0, 1.0),
                                      rng.uniform_real(0.0, 0.2),
                                      rng.uniform_int(0, 300000));
        const Individual b = make_ind(2, rng.uniform_real(0.0, 1.0),
                                      rng.uniform_real(0.0, 0.2),
                                      rng.uniform_int(0, 300000));
        const int want = slack_reference(a, b, cfg.alpha, cfg.beta);
        const Individual& got = slack_tournament(a, b, cfg, rng);
        if (want >= 0) {
            REQUIRE(got.id == (want == 0 ? a.id : b.id));
            ++deterministic_cases;
        }
    }
    REQUIRE(deterministic_cases > 4000);
}

TEST_CASE("an entrant worse by more than alpha never wins") {
    Rng rng(62);
    SelectionConfig cfg;
    cfg.alpha = 0.02;
    for (int i = 0; i < 2000; ++i) {
        const double base = rng.uniform_real(0.0, 0.7);
        const Individual good = make_ind(1, base, rng.uniform_real(0.0, 0.2),
                                         rng.uniform_int(0, 3000000));
        const Individual bad =
            make_ind(2, base + cfg.alpha + rng.uniform_real(0.001, 0.2),
                     rng.uniform_real(0.0, 0.2), rng.uniform_int(0, 3000000));
        REQUIRE(slack_tournament(good, bad, cfg, rng).id == 1);
    }
}

TEST_CASE("mating pool construction") {
    SelectionConfig cfg;
    Rng rng(63);

    SECTION("a dominant individual sweeps a two-individual population") {
        cfg.alpha = 0.01;
        const std::vector<Individual> pop{make_ind(1, 0.9, 0.0, 100),
                                          make_ind(2, 0.1, 0.0, 100)};
        const auto pool = fill_mating_pool(pop, cfg, rng);
        REQUIRE(pool.size() == 2);
        for (const Individual& ind : pool) REQUIRE(ind.id == 2);
    }

    SECTION("pool size equals population size") {
        const auto pop = random_population(100, rng);
        REQUIRE(fill_mating_pool(pop, cfg, rng).size() == 100);
    }

    SECTION("a strictly better individual is not under-represented") {
        cfg.alpha = 0.01;
        std::vector<Individual> pop = random_population(10, rng);
        for (Individual& ind : pop) ind.fitness->mean_error =
            0.5 + 0.4 * ind.fitness->mean_error;
        pop[3].fitness->mean_error = 0.05; // clearly best
        long long best_count = 0, total = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            for (const Individual& w : fill_mating_pool(pop, cfg, rng)) {
                if (w.id == pop[3].id) ++best_count;
                ++total;
            }
        }
        const double pool_freq = double(best_count) / double(total);
        REQUIRE(pool_freq >= 1.0 / 10.0);
    }

    SECTION("population of one is rejected") {
        const std::vector<Individual> pop{make_ind(1, 0.5, 0.0, 10)};
        REQUIRE_THROWS_AS(fill_mating_pool(pop, cfg, rng), InsufficientCandidates);
    }
}

TEST_CASE("environmental selection") {
    SelectionConfig cfg;
    Rng rng(64);

    SECTION("gamma one keeps exactly the n lowest means") {
        cfg.gamma = 1.0;
        auto pop = random_population(20, rng);
        const auto picked = environmental_selection(pop, 10, cfg, rng);
        REQUIRE(picked.size() == 10);
        std::sort(pop.begin(), pop.end(),
                  [](const Individual& a, const Individual& b) {
                      return a.fitness->mean_error < b.fitness->mean_error;
                  });
        std::set<std::uint64_t> expect, got;
        for (int i = 0; i < 10; ++i) expect.insert(pop[static_cast<std::size_t>(i)].id);
        for (const Individual& ind : picked) got.insert(ind.id);
        REQUIRE(got == expect);
    }

    SECTION("twenty percent elitism on n = 10 keeps the two best means") {
        cfg.gamma = 0.2;
        const auto pop = random_population(30, rng);
        const auto picked = environmental_selection(pop, 10, cfg, rng);
        REQUIRE(picked.size() == 10);
        std::vector<double> means;
        for (const Individual& ind : pop) means.push_back(ind.fitness->mean_error);
        std::sort(means.begin(), means.end());
        std::multiset<double> got;
        for (const Individual& ind : picked) got.insert(ind.fitness->mean_error);
        REQUIRE(got.count(means[0]) >= 1);
        REQUIRE(got.count(means[1]) >= 1);
    }

    SECTION("the global best survives every selection") {
        for (int trial = 0; trial < 1000; ++trial) {
            Rng prng(1000 + trial);
            const int n = 6 + static_cast<int>(prng.uniform_int(0, 10));
            const auto pop = random_population(2 * n, prng);
            SelectionConfig c2;
            c2.gamma = trial % 2 == 0 ? 0.2 : 1.0 / n; // down to a single elite
            const auto picked = environmental_selection(pop, n, c2, prng);
            REQUIRE(picked.size() == static_cast<std::size_t>(n));
            const auto best = std::min_element(
                pop.begin(), pop.end(), [](const Individual& a, const Individual& b) {
                    return a.fitness->mean_error < b.fitness->mean_error;
                });
            bool found = false;
            std::set<std::uint64_t> input_ids;
            for (const Individual& ind : pop) input_ids.insert(ind.id);
            for (const Individual& ind : picked) {
                if (ind.id == best->id) found = true;
                REQUIRE(input_ids.count(ind.id) == 1);
            }
            REQUIRE(found);
        }
    }

    SECTION("insufficient candidates are rejected") {
        const auto pop = random_population(5, rng);
        REQUIRE_THROWS_AS(environmental_selection(pop, 6, cfg, rng),
                          InsufficientCandidates);
    }

    SECTION("deterministic under a fixed seed") {
        const auto pop = random_population(24, rng);
        Rng r1(5), r2(5);
        const auto a = environmental_selection(pop, 12, cfg, r1);
        const auto b = environmental_selection(pop, 12, cfg, r2);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].id == b[i].id);
    }
}
