#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "evonet/errors.hpp"
#include "evonet/genome.hpp"
#include "evonet/rng.hpp"

namespace evonet {

struct SelectionConfig {
    double alpha = 0.01;   // mean-error gap threshold
    double beta = 100000;  // parameter-count gap threshold, in weights
    double gamma = 0.20;   // elitism fraction
    // When the mean-error gap exceeds alpha the tournament normally returns
    // the lower-error individual. This switch selects the alternate rule that
    // hands the win to the higher-error one instead, for fidelity experiments
    // against the inverted comparison.
    bool gap_returns_higher_mean = false;

    void validate() const {
        if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
        if (beta < 0.0) throw ConfigError("beta must be >= 0");
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw ConfigError("gamma must be in (0, 1]");
    }
};

namespace detail {

inline const FitnessRecord& fitness_of(const Individual& ind) {
    if (!ind.fitness)
        throw UnevaluatedIndividual("individual " + std::to_string(ind.id) +
                                    " has no fitness record");
    return *ind.fitness;
}

} // namespace detail

/// Slack binary tournament between two evaluated individuals. With s_hi the
/// larger-mean entrant (ties assign the one with more parameters as s_hi so
/// the parameter branch is symmetric):
///   mean gap  > alpha -> the lower-error individual wins
///   param gap > beta  -> the lower-error individual wins
///   otherwise the smaller error std wins; exact std ties flip a fair coin.
inline const Individual& slack_tournament(const Individual& a,
                                          const Individual& b,
                                          const SelectionConfig& cfg, Rng& rng) {
    const FitnessRecord& fa = detail::fitness_of(a);
    const FitnessRecord& fb = detail::fitness_of(b);

    const Individual* hi = &a;
    const Individual* lo = &b;
    if (fa.mean_error < fb.mean_error ||
        (fa.mean_error == fb.mean_error && fa.param_count < fb.param_count)) {
        hi = &b;
        lo = &a;
    }
    const FitnessRecord& fhi = *hi->fitness;
    const FitnessRecord& flo = *lo->fitness;

    if (fhi.mean_error - flo.mean_error > cfg.alpha)
        return cfg.gap_returns_higher_mean ? *hi : *lo;
    if (static_cast<double>(fhi.param_count - flo.param_count) > cfg.beta)
        return *lo;
    if (fhi.std_error < flo.std_error) return *hi;
    if (fhi.std_error > flo.std_error) return *lo;
    return rng.coin() ? a : b;
}

/// Fills a mating pool of |pop| tournament winners. Entrants of one
/// tournament are distinct; draws are with replacement across tournaments.
inline std::vector<Individual> fill_mating_pool(const std::vector<Individual>& pop,
                                                const SelectionConfig& cfg,
                                                Rng& rng) {
    const int n = static_cast<int>(pop.size());
    if (n < 2)
        throw InsufficientCandidates("mating pool needs a population of >= 2");
    std::vector<Individual> pool;
    pool.reserve(pop.size());
    for (int k = 0; k < n; ++k) {
        const int i = static_cast<int>(rng.uniform_int(0, n - 1));
        int j = static_cast<int>(rng.uniform_int(0, n - 2));
        if (j >= i) ++j;
        pool.push_back(slack_tournament(pop[static_cast<std::size_t>(i)],
                                        pop[static_cast<std::size_t>(j)], cfg, rng));
    }
    return pool;
}

namespace detail {

// Elite ordering: mean error, then parameter count, then std, then id.
inline bool elite_less(const Individual& a, const Individual& b) {
    const FitnessRecord& fa = *a.fitness;
    const FitnessRecord& fb = *b.fitness;
    if (fa.mean_error != fb.mean_error) return fa.mean_error < fb.mean_error;
    if (fa.param_count != fb.param_count) return fa.param_count < fb.param_count;
    if (fa.std_error != fb.std_error) return fa.std_error < fb.std_error;
    return a.id < b.id;
}

} // namespace detail

/// Environmental selection over parents plus offspring. The a = round(gamma*N)
/// best-mean individuals (at least one) are taken as elites and removed from
/// the candidate set; the remaining slots are filled by slack tournaments over
/// the residual set, whose winners stay available for later rounds.
inline std::vector<Individual> environmental_selection(
    const std::vector<Individual>& candidates, int n, const SelectionConfig& cfg,
    Rng& rng) {
    if (static_cast<int>(candidates.size()) < n)
        throw InsufficientCandidates(
            "environmental selection needs at least " + std::to_string(n) +
            " candidates, got " + std::to_string(candidates.size()));
    for (const Individual& ind : candidates) detail::fitness_of(ind);

    std::vector<const Individual*> order;
    order.reserve(candidates.size());
    for (const Individual& ind : candidates) order.push_back(&ind);
    std::sort(order.begin(), order.end(),
              [](const Individual* a, const Individual* b) {
                  return detail::elite_less(*a, *b);
              });

    const int elites =
        std::min(n, std::max(1, static_cast<int>(std::llround(cfg.gamma * n))));
    std::vector<Individual> next;
    next.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < elites; ++i) next.push_back(*order[static_cast<std::size_t>(i)]);

    std::vector<const Individual*> residual(order.begin() + elites, order.end());
    while (static_cast<int>(next.size()) < n) {
        if (residual.size() == 1) {
            next.push_back(*residual.front());
            continue;
        }
        const int i = static_cast<int>(rng.uniform_int(0, int(residual.size()) - 1));
        int j = static_cast<int>(rng.uniform_int(0, int(residual.size()) - 2));
        if (j >= i) ++j;
        const Individual& winner =
            slack_tournament(*residual[static_cast<std::size_t>(i)],
                             *residual[static_cast<std::size_t>(j)], cfg, rng);
        next.push_back(winner); // winners stay in the residual set for reuse
    }
    return next;
}

} // namespace evonet
