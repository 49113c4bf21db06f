#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evonet/errors.hpp"
#include "evonet/net_spec.hpp"
#include "evonet/rng.hpp"

namespace evonet {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Ranges every gene field is drawn from and clamped to. All integer ranges
/// are closed; mins default to 1 so a degenerate range (min == max) can pin a
/// field to one value.
struct GeneBounds {
    int min_filter_size = 1;
    int max_filter_size = 7;
    int min_kernel_size = 1;
    int max_kernel_size = 4;
    int min_feature_maps = 1;
    int max_feature_maps = 64;
    int min_neurons = 1;
    int max_neurons = 512;
    Interval mean_range{-0.5, 0.5};
    Interval std_range{0.01, 0.5};
    int n_cp = 5; // max head length (conv + pool genes combined)
    int n_f = 5;  // max tail length (fc genes)

    void validate() const {
        auto check = [](bool ok, const char* what) {
            if (!ok) throw ConfigError(std::string("invalid gene bounds: ") + what);
        };
        check(min_filter_size >= 1 && max_filter_size >= min_filter_size,
              "filter size range");
        check(min_kernel_size >= 1 && max_kernel_size >= min_kernel_size,
              "kernel size range");
        check(min_feature_maps >= 1 && max_feature_maps >= min_feature_maps,
              "feature map range");
        check(min_neurons >= 1 && max_neurons >= min_neurons, "neuron range");
        check(mean_range.lo <= mean_range.hi, "mean range");
        check(std_range.lo > 0.0 && std_range.lo <= std_range.hi,
              "std range must be positive");
        check(n_cp >= 1, "n_cp");
        check(n_f >= 1, "n_f");
    }
};

// ---------------------------------------------------------------------------
// Genes. One gene encodes one layer. Widths and heights are square by
// construction, the conv stride is pinned to 1, the conv mode to SAME, and a
// pool gene's stride always equals its kernel size. The pooling type is
// carried as a real code in [0, 1] and thresholded at 0.5 when decoded
// (< 0.5 max, otherwise average) so variation operators can treat every free
// field as a real number.
// ---------------------------------------------------------------------------

struct ConvGene {
    int filter_size = 3;
    int feature_maps = 8;
    int stride = 1;
    ConvMode mode = ConvMode::kSame;
    double weight_std = 0.05;
    double weight_mean = 0.0;

    friend bool operator==(const ConvGene&, const ConvGene&) = default;
};

struct PoolGene {
    int kernel_size = 2;
    int stride = 2;
    double pool_type_code = 0.0;

    PoolMode pool_type() const {
        return pool_type_code < 0.5 ? PoolMode::kMax : PoolMode::kAvg;
    }

    friend bool operator==(const PoolGene&, const PoolGene&) = default;
};

struct FcGene {
    int neurons = 16;
    double weight_std = 0.05;
    double weight_mean = 0.0;

    friend bool operator==(const FcGene&, const FcGene&) = default;
};

using LayerGene = std::variant<ConvGene, PoolGene, FcGene>;

enum class GeneKind { kConv, kPool, kFc };

inline GeneKind kind_of(const LayerGene& g) {
    if (std::holds_alternative<ConvGene>(g)) return GeneKind::kConv;
    if (std::holds_alternative<PoolGene>(g)) return GeneKind::kPool;
    return GeneKind::kFc;
}

/// Variable-length encoding of one network: a head of conv/pool genes that
/// must start with a convolution, followed by a non-empty tail of fully
/// connected genes.
struct Chromosome {
    std::vector<LayerGene> head;
    std::vector<FcGene> tail;

    int depth() const {
        return static_cast<int>(head.size() + tail.size());
    }

    friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

// ---------------------------------------------------------------------------
// Real-coded field view. Every free field of a gene is addressable as a real
// number with a domain derived from the bounds; integer fields are rounded
// back after an operator has run. Fixed fields (conv stride/mode, pool
// stride) are not part of the view.
// ---------------------------------------------------------------------------

inline int real_field_count(GeneKind k) {
    switch (k) {
    case GeneKind::kConv: return 4; // filter_size, feature_maps, weight_std, weight_mean
    case GeneKind::kPool: return 2; // kernel_size, pool_type_code
    case GeneKind::kFc: return 3;   // neurons, weight_std, weight_mean
    }
    return 0;
}

inline double get_real_field(const LayerGene& g, int i) {
    if (const auto* c = std::get_if<ConvGene>(&g)) {
        switch (i) {
        case 0: return c->filter_size;
        case 1: return c->feature_maps;
        case 2: return c->weight_std;
        default: return c->weight_mean;
        }
    }
    if (const auto* p = std::get_if<PoolGene>(&g)) {
        return i == 0 ? static_cast<double>(p->kernel_size) : p->pool_type_code;
    }
    const auto& f = std::get<FcGene>(g);
    switch (i) {
    case 0: return f.neurons;
    case 1: return f.weight_std;
    default: return f.weight_mean;
    }
}

namespace detail {
inline int round_to_int(double v) {
    return static_cast<int>(std::llround(v));
}
} // namespace detail

/// Raw write; call canonicalize_gene afterwards to restore invariants.
inline void set_real_field(LayerGene& g, int i, double v) {
    if (auto* c = std::get_if<ConvGene>(&g)) {
        switch (i) {
        case 0: c->filter_size = detail::round_to_int(v); break;
        case 1: c->feature_maps = detail::round_to_int(v); break;
        case 2: c->weight_std = v; break;
        default: c->weight_mean = v; break;
        }
        return;
    }
    if (auto* p = std::get_if<PoolGene>(&g)) {
        if (i == 0)
            p->kernel_size = detail::round_to_int(v);
        else
            p->pool_type_code = v;
        return;
    }
    auto& f = std::get<FcGene>(g);
    switch (i) {
    case 0: f.neurons = detail::round_to_int(v); break;
    case 1: f.weight_std = v; break;
    default: f.weight_mean = v; break;
    }
}

inline Interval real_field_domain(GeneKind k, int i, const GeneBounds& b) {
    switch (k) {
    case GeneKind::kConv:
        switch (i) {
        case 0: return {double(b.min_filter_size), double(b.max_filter_size)};
        case 1: return {double(b.min_feature_maps), double(b.max_feature_maps)};
        case 2: return b.std_range;
        default: return b.mean_range;
        }
    case GeneKind::kPool:
        return i == 0
                   ? Interval{double(b.min_kernel_size), double(b.max_kernel_size)}
                   : Interval{0.0, 1.0};
    case GeneKind::kFc:
        switch (i) {
        case 0: return {double(b.min_neurons), double(b.max_neurons)};
        case 1: return b.std_range;
        default: return b.mean_range;
        }
    }
    return {0.0, 0.0};
}

inline bool real_field_is_integer(GeneKind k, int i) {
    switch (k) {
    case GeneKind::kConv: return i <= 1;
    case GeneKind::kPool: return i == 0;
    case GeneKind::kFc: return i == 0;
    }
    return false;
}

namespace detail {
inline int clamp_int(int v, int lo, int hi) {
    return std::min(std::max(v, lo), hi);
}
inline double clamp_real(double v, const Interval& iv) {
    return std::min(std::max(v, iv.lo), iv.hi);
}
} // namespace detail

/// Rounds integer fields to the nearest in-range value, clamps reals, and
/// re-ties derived fields (pool stride = kernel size, conv stride = 1).
inline void canonicalize_gene(LayerGene& g, const GeneBounds& b) {
    if (auto* c = std::get_if<ConvGene>(&g)) {
        c->filter_size = detail::clamp_int(c->filter_size, b.min_filter_size,
                                           b.max_filter_size);
        c->feature_maps = detail::clamp_int(c->feature_maps, b.min_feature_maps,
                                            b.max_feature_maps);
        c->weight_std = detail::clamp_real(c->weight_std, b.std_range);
        c->weight_mean = detail::clamp_real(c->weight_mean, b.mean_range);
        c->stride = 1;
        c->mode = ConvMode::kSame;
    } else if (auto* p = std::get_if<PoolGene>(&g)) {
        p->kernel_size = detail::clamp_int(p->kernel_size, b.min_kernel_size,
                                           b.max_kernel_size);
        p->pool_type_code = detail::clamp_real(p->pool_type_code, {0.0, 1.0});
        p->stride = p->kernel_size;
    } else {
        auto& f = std::get<FcGene>(g);
        f.neurons = detail::clamp_int(f.neurons, b.min_neurons, b.max_neurons);
        f.weight_std = detail::clamp_real(f.weight_std, b.std_range);
        f.weight_mean = detail::clamp_real(f.weight_mean, b.mean_range);
    }
}

// ---------------------------------------------------------------------------
// Validity
// ---------------------------------------------------------------------------

inline std::optional<std::string> validity_violation(const Chromosome& c,
                                                     const GeneBounds& b) {
    if (c.head.empty()) return "head is empty";
    if (c.tail.empty()) return "tail is empty";
    if (kind_of(c.head.front()) != GeneKind::kConv)
        return "head does not start with a conv gene";
    if (static_cast<int>(c.head.size()) > b.n_cp) return "head exceeds n_cp";
    if (static_cast<int>(c.tail.size()) > b.n_f) return "tail exceeds n_f";
    for (const LayerGene& g : c.head) {
        if (const auto* conv = std::get_if<ConvGene>(&g)) {
            if (conv->filter_size < b.min_filter_size ||
                conv->filter_size > b.max_filter_size)
                return "conv filter_size out of range";
            if (conv->feature_maps < b.min_feature_maps ||
                conv->feature_maps > b.max_feature_maps)
                return "conv feature_maps out of range";
            if (conv->weight_std <= 0.0) return "conv weight_std not positive";
            if (conv->weight_std < b.std_range.lo ||
                conv->weight_std > b.std_range.hi)
                return "conv weight_std out of range";
            if (conv->weight_mean < b.mean_range.lo ||
                conv->weight_mean > b.mean_range.hi)
                return "conv weight_mean out of range";
            if (conv->stride < 1) return "conv stride < 1";
        } else if (const auto* pool = std::get_if<PoolGene>(&g)) {
            if (pool->kernel_size < b.min_kernel_size ||
                pool->kernel_size > b.max_kernel_size)
                return "pool kernel_size out of range";
            if (pool->stride != pool->kernel_size)
                return "pool stride != kernel_size";
            if (pool->pool_type_code < 0.0 || pool->pool_type_code > 1.0)
                return "pool_type_code outside [0,1]";
        } else {
            return "fc gene in head";
        }
    }
    for (const FcGene& f : c.tail) {
        if (f.neurons < b.min_neurons || f.neurons > b.max_neurons)
            return "fc neurons out of range";
        if (f.weight_std <= 0.0) return "fc weight_std not positive";
        if (f.weight_std < b.std_range.lo || f.weight_std > b.std_range.hi)
            return "fc weight_std out of range";
        if (f.weight_mean < b.mean_range.lo || f.weight_mean > b.mean_range.hi)
            return "fc weight_mean out of range";
    }
    return std::nullopt;
}

inline bool is_valid(const Chromosome& c, const GeneBounds& b) {
    return !validity_violation(c, b).has_value();
}

inline void check_valid(const Chromosome& c, const GeneBounds& b) {
    if (auto why = validity_violation(c, b))
        throw ConfigError("invalid chromosome: " + *why);
}

// ---------------------------------------------------------------------------
// Fitness record and individual
// ---------------------------------------------------------------------------

/// The three fitness indicators plus evaluation metadata. Lower mean_error is
/// better; std_error breaks near-ties; param_count is the Occam's-razor
/// indicator.
struct FitnessRecord {
    double mean_error = 1.0;
    double std_error = 0.0;
    long long param_count = 0;
    int epochs_used = 0;
    bool diverged = false;

    static FitnessRecord worst(long long params, int epochs) {
        FitnessRecord r;
        r.mean_error = 1.0;
        r.std_error = 0.0;
        r.param_count = params;
        r.epochs_used = epochs;
        r.diverged = true;
        return r;
    }

    friend bool operator==(const FitnessRecord&, const FitnessRecord&) = default;
};

struct Individual {
    Chromosome chromosome;
    std::optional<FitnessRecord> fitness;
    std::uint64_t id = 0;
    std::uint64_t rng_seed = 0;

    bool evaluated() const { return fitness.has_value(); }

    friend bool operator==(const Individual&, const Individual&) = default;
};

// ---------------------------------------------------------------------------
// Random construction
// ---------------------------------------------------------------------------

/// Draws a fresh gene of the requested kind, every free field uniform on its
/// bound range.
inline LayerGene random_gene(GeneKind kind, const GeneBounds& b, Rng& rng) {
    switch (kind) {
    case GeneKind::kConv: {
        ConvGene g;
        g.filter_size =
            static_cast<int>(rng.uniform_int(b.min_filter_size, b.max_filter_size));
        g.feature_maps = static_cast<int>(
            rng.uniform_int(b.min_feature_maps, b.max_feature_maps));
        g.stride = 1;
        g.mode = ConvMode::kSame;
        g.weight_std = rng.uniform_real(b.std_range.lo, b.std_range.hi);
        g.weight_mean = rng.uniform_real(b.mean_range.lo, b.mean_range.hi);
        return g;
    }
    case GeneKind::kPool: {
        PoolGene g;
        g.kernel_size =
            static_cast<int>(rng.uniform_int(b.min_kernel_size, b.max_kernel_size));
        g.stride = g.kernel_size;
        g.pool_type_code = rng.uniform01();
        return g;
    }
    default: {
        FcGene g;
        g.neurons = static_cast<int>(rng.uniform_int(b.min_neurons, b.max_neurons));
        g.weight_std = rng.uniform_real(b.std_range.lo, b.std_range.hi);
        g.weight_mean = rng.uniform_real(b.mean_range.lo, b.mean_range.hi);
        return g;
    }
    }
}

inline Chromosome random_chromosome(const GeneBounds& b, Rng& rng) {
    Chromosome c;
    const int head_len = static_cast<int>(rng.uniform_int(1, b.n_cp));
    c.head.push_back(random_gene(GeneKind::kConv, b, rng));
    for (int i = 1; i < head_len; ++i) {
        const GeneKind kind =
            rng.uniform01() <= 0.5 ? GeneKind::kConv : GeneKind::kPool;
        c.head.push_back(random_gene(kind, b, rng));
    }
    const int tail_len = static_cast<int>(rng.uniform_int(1, b.n_f));
    for (int i = 0; i < tail_len; ++i)
        c.tail.push_back(std::get<FcGene>(random_gene(GeneKind::kFc, b, rng)));
    return c;
}

/// Builds N unevaluated individuals with uniformly drawn structures. Ids are
/// assigned sequentially from first_id; each individual gets its own training
/// seed drawn from the master stream.
inline std::vector<Individual> init_population(int n, const GeneBounds& b,
                                               Rng& rng,
                                               std::uint64_t first_id = 0) {
    b.validate();
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Individual ind;
        ind.chromosome = random_chromosome(b, rng);
        ind.id = first_id + static_cast<std::uint64_t>(i);
        ind.rng_seed = rng.next_u64();
        pop.push_back(std::move(ind));
    }
    return pop;
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

/// Resolves a chromosome against a concrete input shape into an executable
/// network description: conv/pool head, flatten, fc tail, then the implicit
/// classification layer (num_classes outputs, no ReLU, softmax applied by the
/// loss). The output layer reuses the last fc gene's initializer statistics.
/// Throws ShapeUnderflow if any spatial dimension would drop below 1.
inline NetworkSpec decode(const Chromosome& c, Shape3 input, int num_classes) {
    if (c.head.empty() || c.tail.empty() ||
        kind_of(c.head.front()) != GeneKind::kConv)
        throw ConfigError("decode: chromosome violates head/tail grammar");
    if (input.h < 1 || input.w < 1 || input.c < 1 || num_classes < 1)
        throw ConfigError("decode: bad input shape or class count");

    NetworkSpec spec;
    spec.input = input;
    spec.num_classes = num_classes;

    Shape3 cur = input;
    for (const LayerGene& g : c.head) {
        if (const auto* conv = std::get_if<ConvGene>(&g)) {
            ConvLayerSpec layer;
            layer.in = cur;
            layer.filter_size = conv->filter_size;
            layer.feature_maps = conv->feature_maps;
            layer.stride = conv->stride;
            layer.mode = conv->mode;
            layer.relu = true;
            layer.init_mean = conv->weight_mean;
            layer.init_std = conv->weight_std;
            layer.out = {detail::conv_out_dim(cur.h, conv->filter_size,
                                              conv->stride, conv->mode),
                         detail::conv_out_dim(cur.w, conv->filter_size,
                                              conv->stride, conv->mode),
                         conv->feature_maps};
            if (layer.out.h < 1 || layer.out.w < 1)
                throw ShapeUnderflow("conv output below 1x1");
            cur = layer.out;
            spec.layers.emplace_back(layer);
        } else {
            const auto& pool = std::get<PoolGene>(g);
            PoolLayerSpec layer;
            layer.in = cur;
            layer.kernel_size = pool.kernel_size;
            layer.stride = pool.stride;
            layer.mode = pool.pool_type();
            layer.out = {detail::pool_out_dim(cur.h, pool.kernel_size, pool.stride),
                         detail::pool_out_dim(cur.w, pool.kernel_size, pool.stride),
                         cur.c};
            if (layer.out.h < 1 || layer.out.w < 1)
                throw ShapeUnderflow("pool output below 1x1");
            cur = layer.out;
            spec.layers.emplace_back(layer);
        }
    }

    FlattenLayerSpec flatten;
    flatten.in = cur;
    flatten.out_dim = static_cast<int>(cur.count());
    spec.layers.emplace_back(flatten);

    int dim = flatten.out_dim;
    for (const FcGene& f : c.tail) {
        FcLayerSpec layer;
        layer.in_dim = dim;
        layer.out_dim = f.neurons;
        layer.relu = true;
        layer.init_mean = f.weight_mean;
        layer.init_std = f.weight_std;
        dim = f.neurons;
        spec.layers.emplace_back(layer);
    }

    FcLayerSpec out;
    out.in_dim = dim;
    out.out_dim = num_classes;
    out.relu = false;
    out.init_mean = c.tail.back().weight_mean;
    out.init_std = c.tail.back().weight_std;
    spec.layers.emplace_back(out);

    return spec;
}

/// Trainable parameter total (weights + one bias per feature map / neuron),
/// including the implicit classification layer; pooling contributes nothing.
/// Walks the chromosome directly so it can cross-check the decoded spec.
inline long long count_parameters(const Chromosome& c, Shape3 input,
                                  int num_classes) {
    if (c.head.empty() || c.tail.empty() ||
        kind_of(c.head.front()) != GeneKind::kConv)
        throw ConfigError("count_parameters: chromosome violates grammar");

    long long total = 0;
    Shape3 cur = input;
    for (const LayerGene& g : c.head) {
        if (const auto* conv = std::get_if<ConvGene>(&g)) {
            const long long f = conv->filter_size;
            total += f * f * cur.c * conv->feature_maps + conv->feature_maps;
            const int h =
                detail::conv_out_dim(cur.h, conv->filter_size, conv->stride, conv->mode);
            const int w =
                detail::conv_out_dim(cur.w, conv->filter_size, conv->stride, conv->mode);
            if (h < 1 || w < 1) throw ShapeUnderflow("conv output below 1x1");
            cur = {h, w, conv->feature_maps};
        } else {
            const auto& pool = std::get<PoolGene>(g);
            const int h = detail::pool_out_dim(cur.h, pool.kernel_size, pool.stride);
            const int w = detail::pool_out_dim(cur.w, pool.kernel_size, pool.stride);
            if (h < 1 || w < 1) throw ShapeUnderflow("pool output below 1x1");
            cur = {h, w, cur.c};
        }
    }
    long long dim = cur.count();
    for (const FcGene& f : c.tail) {
        total += dim * f.neurons + f.neurons;
        dim = f.neurons;
    }
    total += dim * num_classes + num_classes;
    return total;
}

// ---------------------------------------------------------------------------
// Text serialization: one gene per line, kind first, then the encoded fields
// in their canonical order. Reals are printed with shortest round-trip
// precision so parsing reproduces the exact double.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline double parse_real(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("bad real value: " + std::string(s));
    return v;
}

inline long long parse_int(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("bad integer value: " + std::string(s));
    return v;
}

// key=value tokens after the kind tag
inline std::string_view field_value(std::string_view token, std::string_view key) {
    if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
        token[key.size()] != '=')
        throw FormatError("expected field '" + std::string(key) + "', got '" +
                          std::string(token) + "'");
    return token.substr(key.size() + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace detail

inline std::string to_text(const LayerGene& g) {
    std::string line;
    if (const auto* c = std::get_if<ConvGene>(&g)) {
        line = "conv filter_size=" + std::to_string(c->filter_size) +
               " feature_maps=" + std::to_string(c->feature_maps) +
               " stride=" + std::to_string(c->stride) +
               " conv_type=" + to_string(c->mode) +
               " weight_std=" + detail::format_real(c->weight_std) +
               " weight_mean=" + detail::format_real(c->weight_mean);
    } else if (const auto* p = std::get_if<PoolGene>(&g)) {
        line = "pool kernel_size=" + std::to_string(p->kernel_size) +
               " stride=" + std::to_string(p->stride) +
               " pool_type_code=" + detail::format_real(p->pool_type_code);
    } else {
        const auto& f = std::get<FcGene>(g);
        line = "fc neurons=" + std::to_string(f.neurons) +
               " weight_std=" + detail::format_real(f.weight_std) +
               " weight_mean=" + detail::format_real(f.weight_mean);
    }
    return line;
}

inline LayerGene gene_from_text(std::string_view line) {
    const auto tok = detail::split_ws(line);
    if (tok.empty()) throw FormatError("empty gene line");
    if (tok[0] == "conv") {
        if (tok.size() != 7) throw FormatError("conv gene needs 6 fields");
        ConvGene g;
        g.filter_size =
            static_cast<int>(detail::parse_int(detail::field_value(tok[1], "filter_size")));
        g.feature_maps =
            static_cast<int>(detail::parse_int(detail::field_value(tok[2], "feature_maps")));
        g.stride = static_cast<int>(detail::parse_int(detail::field_value(tok[3], "stride")));
        const auto mode = detail::field_value(tok[4], "conv_type");
        if (mode == "SAME")
            g.mode = ConvMode::kSame;
        else if (mode == "VALID")
            g.mode = ConvMode::kValid;
        else
            throw FormatError("bad conv_type: " + std::string(mode));
        g.weight_std = detail::parse_real(detail::field_value(tok[5], "weight_std"));
        g.weight_mean = detail::parse_real(detail::field_value(tok[6], "weight_mean"));
        return g;
    }
    if (tok[0] == "pool") {
        if (tok.size() != 4) throw FormatError("pool gene needs 3 fields");
        PoolGene g;
        g.kernel_size =
            static_cast<int>(detail::parse_int(detail::field_value(tok[1], "kernel_size")));
        g.stride = static_cast<int>(detail::parse_int(detail::field_value(tok[2], "stride")));
        g.pool_type_code =
            detail::parse_real(detail::field_value(tok[3], "pool_type_code"));
        return g;
    }
    if (tok[0] == "fc") {
        if (tok.size() != 4) throw FormatError("fc gene needs 3 fields");
        FcGene g;
        g.neurons = static_cast<int>(detail::parse_int(detail::field_value(tok[1], "neurons")));
        g.weight_std = detail::parse_real(detail::field_value(tok[2], "weight_std"));
        g.weight_mean = detail::parse_real(detail::field_value(tok[3], "weight_mean"));
        return g;
    }
    throw FormatError("unknown gene kind: " + std::string(tok[0]));
}

inline std::string to_text(const Chromosome& c) {
    std::string out;
    for (const LayerGene& g : c.head) {
        out += to_text(g);
        out += '\n';
    }
    for (const FcGene& f : c.tail) {
        out += to_text(LayerGene{f});
        out += '\n';
    }
    return out;
}

inline Chromosome chromosome_from_text(std::string_view text) {
    Chromosome c;
    bool in_tail = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        LayerGene g = gene_from_text(line);
        if (kind_of(g) == GeneKind::kFc) {
            in_tail = true;
            c.tail.push_back(std::get<FcGene>(g));
        } else {
            if (in_tail)
                throw FormatError("conv/pool gene after fc genes");
            c.head.push_back(std::move(g));
        }
    }
    if (c.head.empty() || c.tail.empty())
        throw FormatError("chromosome record missing head or tail genes");
    if (kind_of(c.head.front()) != GeneKind::kConv)
        throw FormatError("chromosome record does not start with a conv gene");
    return c;
}

} // namespace evonet
