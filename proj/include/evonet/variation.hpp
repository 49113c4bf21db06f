#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "evonet/errors.hpp"
#include "evonet/genome.hpp"
#include "evonet/rng.hpp"

namespace evonet {

struct VariationConfig {
    double crossover_prob = 0.9;
    double mutation_prob = 0.1; // per unit position
    double sbx_eta = 20.0;
    double pm_eta = 20.0;

    void validate() const {
        if (crossover_prob < 0.0 || crossover_prob > 1.0)
            throw ConfigError("crossover_prob must be in [0,1]");
        if (mutation_prob < 0.0 || mutation_prob > 1.0)
            throw ConfigError("mutation_prob must be in [0,1]");
        if (sbx_eta <= 0.0 || pm_eta <= 0.0)
            throw ConfigError("distribution indices must be positive");
    }
};

/// Simulated binary crossover of two reals. One uniform draw u produces the
/// spread factor
///   beta = (2u)^(1/(eta+1))            if u <= 0.5
///        = (1/(2(1-u)))^(1/(eta+1))    otherwise
/// and the children 0.5[(1 +- beta) x1 + (1 -+ beta) x2], whose sum equals
/// x1 + x2 before clamping to [lower, upper].
inline std::pair<double, double> sbx(double x1, double x2, double eta,
                                     double lower, double upper, Rng& rng) {
    if (x1 == x2) return {x1, x2}; // exact fixed point, no draw consumed
    const double u = rng.uniform01();
    const double exponent = 1.0 / (eta + 1.0);
    const double beta = u <= 0.5 ? std::pow(2.0 * u, exponent)
                                 : std::pow(1.0 / (2.0 * (1.0 - u)), exponent);
    double c1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2);
    double c2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2);
    c1 = std::min(std::max(c1, lower), upper);
    c2 = std::min(std::max(c2, lower), upper);
    return {c1, c2};
}

/// Polynomial mutation: x + delta * (upper - lower) with
///   delta = (2u)^(1/(eta+1)) - 1        if u < 0.5
///         = 1 - (2(1-u))^(1/(eta+1))    otherwise
/// clamped to [lower, upper]. A zero-width domain returns x unchanged without
/// consuming a draw.
inline double polynomial_mutate(double x, double eta, double lower, double upper,
                                Rng& rng) {
    if (upper <= lower) return x;
    const double u = rng.uniform01();
    const double exponent = 1.0 / (eta + 1.0);
    const double delta = u < 0.5 ? std::pow(2.0 * u, exponent) - 1.0
                                 : 1.0 - std::pow(2.0 * (1.0 - u), exponent);
    const double y = x + delta * (upper - lower);
    return std::min(std::max(y, lower), upper);
}

// ---------------------------------------------------------------------------
// Unit Collection / Unit Alignment / Unit Restore crossover
// ---------------------------------------------------------------------------

struct PositionedGene {
    LayerGene gene;
    int original_position = 0; // index in head-then-tail order
};

struct UnitLists {
    std::vector<PositionedGene> conv_list;
    std::vector<PositionedGene> pool_list;
    std::vector<PositionedGene> fc_list;
    int head_size = 0;
    int tail_size = 0;
};

/// Splits a chromosome into per-kind unit lists, remembering where each unit
/// came from so restore_units can rebuild the chromosome exactly.
inline UnitLists collect_units(const Chromosome& c) {
    UnitLists u;
    u.head_size = static_cast<int>(c.head.size());
    u.tail_size = static_cast<int>(c.tail.size());
    int pos = 0;
    for (const LayerGene& g : c.head) {
        if (kind_of(g) == GeneKind::kConv)
            u.conv_list.push_back({g, pos});
        else
            u.pool_list.push_back({g, pos});
        ++pos;
    }
    for (const FcGene& f : c.tail)
        u.fc_list.push_back({LayerGene{f}, pos++});
    return u;
}

inline Chromosome restore_units(const UnitLists& u) {
    Chromosome c;
    c.head.resize(static_cast<std::size_t>(u.head_size));
    c.tail.resize(static_cast<std::size_t>(u.tail_size));
    for (const PositionedGene& pg : u.conv_list)
        c.head[static_cast<std::size_t>(pg.original_position)] = pg.gene;
    for (const PositionedGene& pg : u.pool_list)
        c.head[static_cast<std::size_t>(pg.original_position)] = pg.gene;
    for (const PositionedGene& pg : u.fc_list)
        c.tail[static_cast<std::size_t>(pg.original_position - u.head_size)] =
            std::get<FcGene>(pg.gene);
    return c;
}

namespace detail {

// Field-wise SBX over every free real of a paired unit, each field with its
// own uniform draw. Integer fields are rounded back afterwards.
inline void cross_genes(LayerGene& a, LayerGene& b, GeneKind kind, double eta,
                        const GeneBounds& bounds, Rng& rng) {
    const int fields = real_field_count(kind);
    for (int i = 0; i < fields; ++i) {
        const Interval dom = real_field_domain(kind, i, bounds);
        const auto [c1, c2] =
            sbx(get_real_field(a, i), get_real_field(b, i), eta, dom.lo, dom.hi, rng);
        set_real_field(a, i, c1);
        set_real_field(b, i, c2);
    }
    canonicalize_gene(a, bounds);
    canonicalize_gene(b, bounds);
}

inline void cross_lists(std::vector<PositionedGene>& la,
                        std::vector<PositionedGene>& lb, GeneKind kind,
                        double eta, const GeneBounds& bounds, Rng& rng) {
    const std::size_t paired = std::min(la.size(), lb.size());
    for (std::size_t i = 0; i < paired; ++i)
        cross_genes(la[i].gene, lb[i].gene, kind, eta, bounds, rng);
    // unpaired trailing units keep their genes and positions
}

} // namespace detail

/// Recombines two chromosomes of possibly different lengths. Units are
/// collected per kind, the lists aligned at the top, paired units crossed
/// field-wise with SBX, and everything written back to its original position,
/// so each child keeps its parent's layer-kind sequence and lengths.
inline std::pair<Chromosome, Chromosome> crossover(const Chromosome& p1,
                                                   const Chromosome& p2,
                                                   const VariationConfig& cfg,
                                                   const GeneBounds& bounds,
                                                   Rng& rng) {
    UnitLists u1 = collect_units(p1);
    UnitLists u2 = collect_units(p2);
    detail::cross_lists(u1.conv_list, u2.conv_list, GeneKind::kConv, cfg.sbx_eta,
                        bounds, rng);
    detail::cross_lists(u1.pool_list, u2.pool_list, GeneKind::kPool, cfg.sbx_eta,
                        bounds, rng);
    detail::cross_lists(u1.fc_list, u2.fc_list, GeneKind::kFc, cfg.sbx_eta,
                        bounds, rng);
    return {restore_units(u1), restore_units(u2)};
}

// ---------------------------------------------------------------------------
// Mutation
// ---------------------------------------------------------------------------

enum class MutationAction { kAdd, kDelete, kModify };

/// Uniform 1/3 draw over add/delete/modify; exposed so the sampler itself can
/// be tested.
inline MutationAction draw_mutation_action(Rng& rng) {
    switch (rng.uniform_int(0, 2)) {
    case 0: return MutationAction::kAdd;
    case 1: return MutationAction::kDelete;
    default: return MutationAction::kModify;
    }
}

inline GeneKind draw_gene_kind(Rng& rng) {
    switch (rng.uniform_int(0, 2)) {
    case 0: return GeneKind::kConv;
    case 1: return GeneKind::kPool;
    default: return GeneKind::kFc;
    }
}

namespace detail {

inline void modify_gene(LayerGene& g, double eta, const GeneBounds& bounds,
                        Rng& rng) {
    const GeneKind kind = kind_of(g);
    const int fields = real_field_count(kind);
    for (int i = 0; i < fields; ++i) {
        const Interval dom = real_field_domain(kind, i, bounds);
        set_real_field(g, i,
                       polynomial_mutate(get_real_field(g, i), eta, dom.lo, dom.hi,
                                         rng));
    }
    canonicalize_gene(g, bounds);
}

} // namespace detail

/// Structural mutation. Every unit position is independently selected with
/// probability cfg.mutation_prob; a selected point draws add/delete/modify
/// uniformly. Add inserts a fresh random gene before the position (conv/pool
/// genes go to the head, fc genes to the tail; a kind drawn for the wrong
/// region re-targets to the nearest legal spot). Delete removes the unit
/// unless that would break an invariant, in which case the point falls back
/// to modify. Modify perturbs every free field with polynomial mutation.
/// Insertions that would overflow n_cp/n_f are dropped. The result always
/// satisfies every chromosome invariant.
inline Chromosome mutate(const Chromosome& c, const VariationConfig& cfg,
                         const GeneBounds& bounds, Rng& rng) {
    Chromosome out = c;
    const int orig_head = static_cast<int>(c.head.size());
    const int orig_tail = static_cast<int>(c.tail.size());
    int head_offset = 0;
    int tail_offset = 0;

    for (int pos = 0; pos < orig_head + orig_tail; ++pos) {
        if (rng.uniform01() >= cfg.mutation_prob) continue;
        const bool in_head = pos < orig_head;
        MutationAction action = draw_mutation_action(rng);

        if (action == MutationAction::kAdd) {
            const GeneKind kind = draw_gene_kind(rng);
            LayerGene fresh = random_gene(kind, bounds, rng);
            if (kind == GeneKind::kFc) {
                if (static_cast<int>(out.tail.size()) >= bounds.n_f) continue;
                // fc genes can only live in the tail; a head draw inserts at
                // the tail's front
                const int at = in_head ? 0 : std::min(pos - orig_head + tail_offset,
                                                      int(out.tail.size()));
                out.tail.insert(out.tail.begin() + at, std::get<FcGene>(fresh));
                ++tail_offset; // every remaining tail unit shifts right
            } else {
                if (static_cast<int>(out.head.size()) >= bounds.n_cp) continue;
                int at = in_head ? pos + head_offset : int(out.head.size());
                // position 0 must stay convolutional
                if (at == 0 && kind == GeneKind::kPool) at = 1;
                out.head.insert(out.head.begin() + at, std::move(fresh));
                if (in_head) ++head_offset;
            }
            continue;
        }

        if (action == MutationAction::kDelete) {
            bool deleted = false;
            if (in_head) {
                const int at = pos + head_offset;
                const bool keeps_grammar =
                    out.head.size() > 1 &&
                    (at > 0 || kind_of(out.head[1]) == GeneKind::kConv);
                if (keeps_grammar) {
                    out.head.erase(out.head.begin() + at);
                    --head_offset;
                    deleted = true;
                }
            } else {
                if (out.tail.size() > 1) {
                    const int at = pos - orig_head + tail_offset;
                    out.tail.erase(out.tail.begin() + at);
                    --tail_offset;
                    deleted = true;
                }
            }
            if (deleted) continue;
            action = MutationAction::kModify; // rejected deletes fall back
        }

        if (in_head) {
            LayerGene& g = out.head[static_cast<std::size_t>(pos + head_offset)];
            detail::modify_gene(g, cfg.pm_eta, bounds, rng);
        } else {
            LayerGene g{out.tail[static_cast<std::size_t>(pos - orig_head +
                                                          tail_offset)]};
            detail::modify_gene(g, cfg.pm_eta, bounds, rng);
            out.tail[static_cast<std::size_t>(pos - orig_head + tail_offset)] =
                std::get<FcGene>(g);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Offspring generation
// ---------------------------------------------------------------------------

/// Consumes the mating pool two parents at a time (uniform draws without
/// replacement), applies crossover with probability cfg.crossover_prob (else
/// clones), mutates both children, and returns |pool| offspring with fresh
/// ids, fresh training seeds, and no fitness.
inline std::vector<Individual> generate_offspring(
    const std::vector<Individual>& pool, const VariationConfig& cfg,
    const GeneBounds& bounds, Rng& rng, std::uint64_t& next_id) {
    if (pool.size() % 2 != 0)
        throw OddPoolSize("mating pool size must be even, got " +
                          std::to_string(pool.size()));
    std::vector<const Individual*> remaining;
    remaining.reserve(pool.size());
    for (const Individual& ind : pool) remaining.push_back(&ind);

    std::vector<Individual> offspring;
    offspring.reserve(pool.size());
    while (remaining.size() >= 2) {
        const auto take = [&](std::size_t i) {
            const Individual* p = remaining[i];
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
            return p;
        };
        const Individual* a =
            take(static_cast<std::size_t>(rng.uniform_int(0, int(remaining.size()) - 1)));
        const Individual* b =
            take(static_cast<std::size_t>(rng.uniform_int(0, int(remaining.size()) - 1)));

        Chromosome c1 = a->chromosome;
        Chromosome c2 = b->chromosome;
        if (rng.uniform01() < cfg.crossover_prob) {
            auto [x1, x2] = crossover(c1, c2, cfg, bounds, rng);
            c1 = std::move(x1);
            c2 = std::move(x2);
        }
        for (Chromosome* child : {&c1, &c2}) {
            Individual ind;
            ind.chromosome = mutate(*child, cfg, bounds, rng);
            ind.id = next_id++;
            ind.rng_seed = rng.next_u64();
            offspring.push_back(std::move(ind));
        }
    }
    return offspring;
}

} // namespace evonet
