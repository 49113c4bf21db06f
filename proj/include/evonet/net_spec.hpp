#pragma once

#include <string>
#include <variant>
#include <vector>

namespace evonet {

enum class ConvMode { kSame, kValid };
enum class PoolMode { kMax, kAvg };

struct Shape3 {
    int h = 0;
    int w = 0;
    int c = 0;

    long long count() const {
        return static_cast<long long>(h) * w * c;
    }
    friend bool operator==(const Shape3& a, const Shape3& b) {
        return a.h == b.h && a.w == b.w && a.c == b.c;
    }
};

// Shape-resolved layer descriptors. decode() produces these; the compute
// engine consumes them without ever looking back at the genome.

struct ConvLayerSpec {
    Shape3 in;
    Shape3 out;
    int filter_size = 0;
    int feature_maps = 0;
    int stride = 1;
    ConvMode mode = ConvMode::kSame;
    bool relu = true;
    double init_mean = 0.0;
    double init_std = 0.0;

    long long parameter_count() const {
        const long long f = filter_size;
        return f * f * in.c * feature_maps + feature_maps;
    }

    friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

struct PoolLayerSpec {
    Shape3 in;
    Shape3 out;
    int kernel_size = 0;
    int stride = 0;
    PoolMode mode = PoolMode::kMax;

    friend bool operator==(const PoolLayerSpec&, const PoolLayerSpec&) = default;
};

struct FlattenLayerSpec {
    Shape3 in;
    int out_dim = 0;

    friend bool operator==(const FlattenLayerSpec&, const FlattenLayerSpec&) = default;
};

struct FcLayerSpec {
    int in_dim = 0;
    int out_dim = 0;
    bool relu = true; // false on the final classification layer
    double init_mean = 0.0;
    double init_std = 0.0;

    long long parameter_count() const {
        return static_cast<long long>(in_dim) * out_dim + out_dim;
    }

    friend bool operator==(const FcLayerSpec&, const FcLayerSpec&) = default;
};

using LayerSpec =
    std::variant<ConvLayerSpec, PoolLayerSpec, FlattenLayerSpec, FcLayerSpec>;

/// A decoded, shape-resolved network: layers chain input -> logits. The last
/// layer is always a non-ReLU fully connected layer with num_classes outputs;
/// classification applies softmax over those logits.
struct NetworkSpec {
    Shape3 input;
    int num_classes = 0;
    std::vector<LayerSpec> layers;

    long long parameter_count() const {
        long long total = 0;
        for (const LayerSpec& layer : layers) {
            if (const auto* conv = std::get_if<ConvLayerSpec>(&layer))
                total += conv->parameter_count();
            else if (const auto* fc = std::get_if<FcLayerSpec>(&layer))
                total += fc->parameter_count();
        }
        return total;
    }

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

namespace detail {

// Output spatial extent of one axis. SAME pads to ceil(in/stride); VALID and
// pooling truncate, returning 0 when the window does not fit at all.
inline int conv_out_dim(int in, int filter, int stride, ConvMode mode) {
    if (mode == ConvMode::kSame) return (in + stride - 1) / stride;
    if (filter > in) return 0;
    return (in - filter) / stride + 1;
}

inline int pool_out_dim(int in, int kernel, int stride) {
    if (kernel > in) return 0;
    return (in - kernel) / stride + 1;
}

} // namespace detail

inline std::string to_string(ConvMode m) {
    return m == ConvMode::kSame ? "SAME" : "VALID";
}
inline std::string to_string(PoolMode m) {
    return m == PoolMode::kMax ? "MAX" : "AVG";
}

} // namespace evonet
