#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include "evonet/errors.hpp"
#include "evonet/net_spec.hpp"
#include "evonet/rng.hpp"
#include "evonet/tensor.hpp"

namespace evonet {

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 64;
    int epochs = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (epochs < 0) throw ConfigError("epochs must be >= 0");
    }
};

/// All trainable arrays of one network, index-aligned with spec.layers.
/// Layers without parameters (pool, flatten) hold empty tensors.
template <typename S>
struct WeightSet {
    std::vector<Tensor<S>> weights;
    std::vector<Tensor<S>> biases;

    long long parameter_count() const {
        long long n = 0;
        for (const auto& t : weights) n += static_cast<long long>(t.size());
        for (const auto& t : biases) n += static_cast<long long>(t.size());
        return n;
    }
};

namespace detail {

template <typename S>
inline bool is_batched(const Tensor<S>& t) {
    return t.rank() == 4;
}

inline void same_padding(int in, int filter, int stride, int out, int* pad_lead) {
    const int total = std::max(0, (out - 1) * stride + filter - in);
    *pad_lead = total / 2; // extra padding goes to the bottom/right
}

} // namespace detail

/// Convolution of an image (H x W x C) or batch (N x H x W x C) with filters
/// (f x f x C x M) and per-map bias (M). Every output element is the sum of
/// products across the filter window and input channels, plus the bias. No
/// nonlinearity is applied here.
template <typename S>
Tensor<S> conv_forward(const Tensor<S>& input, const Tensor<S>& filters,
                       const Tensor<S>& bias, int stride, ConvMode mode) {
    if (filters.rank() != 4 || filters.dim(0) != filters.dim(1))
        throw ShapeError("conv filters must be f x f x C x M");
    const bool batched = detail::is_batched(input);
    if (!batched && input.rank() != 3)
        throw ShapeError("conv input must be rank 3 or 4");
    const int n = batched ? input.dim(0) : 1;
    const int h = input.dim(batched ? 1 : 0);
    const int w = input.dim(batched ? 2 : 1);
    const int c = input.dim(batched ? 3 : 2);
    const int f = filters.dim(0);
    const int m = filters.dim(3);
    if (filters.dim(2) != c) throw ShapeError("conv channel mismatch");
    if (static_cast<int>(bias.size()) != m) throw ShapeError("conv bias size mismatch");
    if (stride < 1) throw ShapeError("conv stride must be >= 1");
    if (mode == ConvMode::kValid && (f > h || f > w))
        throw ShapeError("VALID conv filter exceeds input");

    const int out_h = detail::conv_out_dim(h, f, stride, mode);
    const int out_w = detail::conv_out_dim(w, f, stride, mode);
    int pad_top = 0, pad_left = 0;
    if (mode == ConvMode::kSame) {
        detail::same_padding(h, f, stride, out_h, &pad_top);
        detail::same_padding(w, f, stride, out_w, &pad_left);
    }

    Tensor<S> out(batched ? std::vector<int>{n, out_h, out_w, m}
                          : std::vector<int>{out_h, out_w, m});
    const S* in_base = input.data.data();
    const S* w_base = filters.data.data();
    S* out_base = out.data.data();
    const std::size_t in_img = static_cast<std::size_t>(h) * w * c;
    const std::size_t out_img = static_cast<std::size_t>(out_h) * out_w * m;

    for (int ni = 0; ni < n; ++ni) {
        const S* in_n = in_base + ni * in_img;
        S* out_n = out_base + ni * out_img;
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                S* out_px = out_n + (static_cast<std::size_t>(oy) * out_w + ox) * m;
                for (int mi = 0; mi < m; ++mi) out_px[mi] = bias[mi];
                const int iy0 = oy * stride - pad_top;
                const int ix0 = ox * stride - pad_left;
                for (int ky = 0; ky < f; ++ky) {
                    const int iy = iy0 + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < f; ++kx) {
                        const int ix = ix0 + kx;
                        if (ix < 0 || ix >= w) continue;
                        const S* in_px =
                            in_n + (static_cast<std::size_t>(iy) * w + ix) * c;
                        const S* w_px =
                            w_base + (static_cast<std::size_t>(ky) * f + kx) * c * m;
                        for (int ci = 0; ci < c; ++ci) {
                            const S v = in_px[ci];
                            const S* w_row = w_px + static_cast<std::size_t>(ci) * m;
                            for (int mi = 0; mi < m; ++mi)
                                out_px[mi] += v * w_row[mi];
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// Max/average pooling with VALID-style truncation: output dim is
/// floor((H - kernel) / stride) + 1 and windows never cross the border.
/// Channels are pooled independently.
template <typename S>
Tensor<S> pool_forward(const Tensor<S>& input, int kernel, int stride,
                       PoolMode mode) {
    const bool batched = detail::is_batched(input);
    if (!batched && input.rank() != 3)
        throw ShapeError("pool input must be rank 3 or 4");
    const int n = batched ? input.dim(0) : 1;
    const int h = input.dim(batched ? 1 : 0);
    const int w = input.dim(batched ? 2 : 1);
    const int c = input.dim(batched ? 3 : 2);
    if (kernel < 1 || stride < 1) throw ShapeError("pool kernel/stride must be >= 1");
    if (kernel > h || kernel > w) throw ShapeError("pool kernel exceeds input");

    const int out_h = detail::pool_out_dim(h, kernel, stride);
    const int out_w = detail::pool_out_dim(w, kernel, stride);
    Tensor<S> out(batched ? std::vector<int>{n, out_h, out_w, c}
                          : std::vector<int>{out_h, out_w, c});
    const std::size_t in_img = static_cast<std::size_t>(h) * w * c;
    const std::size_t out_img = static_cast<std::size_t>(out_h) * out_w * c;
    const S inv_area = S(1) / static_cast<S>(kernel * kernel);

    for (int ni = 0; ni < n; ++ni) {
        const S* in_n = input.data.data() + ni * in_img;
        S* out_n = out.data.data() + ni * out_img;
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                S* out_px = out_n + (static_cast<std::size_t>(oy) * out_w + ox) * c;
                const int iy0 = oy * stride;
                const int ix0 = ox * stride;
                for (int ci = 0; ci < c; ++ci) {
                    if (mode == PoolMode::kMax) {
                        S best = std::numeric_limits<S>::lowest();
                        for (int ky = 0; ky < kernel; ++ky)
                            for (int kx = 0; kx < kernel; ++kx) {
                                const S v = in_n[(static_cast<std::size_t>(iy0 + ky) * w +
                                                  (ix0 + kx)) * c + ci];
                                if (v > best) best = v;
                            }
                        out_px[ci] = best;
                    } else {
                        S sum = 0;
                        for (int ky = 0; ky < kernel; ++ky)
                            for (int kx = 0; kx < kernel; ++kx)
                                sum += in_n[(static_cast<std::size_t>(iy0 + ky) * w +
                                             (ix0 + kx)) * c + ci];
                        out_px[ci] = sum * inv_area;
                    }
                }
            }
        }
    }
    return out;
}

template <typename S>
struct ForwardCache {
    std::vector<Tensor<S>> inputs; // input tensor of each layer, in order
    Tensor<S> logits;
};

namespace detail {

template <typename S>
void apply_relu(Tensor<S>& t) {
    for (S& v : t.data)
        if (v < S(0)) v = S(0);
}

template <typename S>
Tensor<S> fc_forward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
    const int n = x.dim(0);
    const int in = x.dim(1);
    const int out = w.dim(1);
    if (w.dim(0) != in) throw ShapeError("fc weight shape mismatch");
    Tensor<S> y({n, out});
    for (int ni = 0; ni < n; ++ni) {
        S* y_row = y.data.data() + static_cast<std::size_t>(ni) * out;
        for (int o = 0; o < out; ++o) y_row[o] = b[o];
        const S* x_row = x.data.data() + static_cast<std::size_t>(ni) * in;
        for (int i = 0; i < in; ++i) {
            const S v = x_row[i];
            if (v == S(0)) continue;
            const S* w_row = w.data.data() + static_cast<std::size_t>(i) * out;
            for (int o = 0; o < out; ++o) y_row[o] += v * w_row[o];
        }
    }
    return y;
}

} // namespace detail

/// Runs the full layer chain on a batch (N x H x W x C). ReLU is applied
/// after each layer whose spec requests it; the final layer emits raw logits.
template <typename S>
Tensor<S> forward(const NetworkSpec& spec, const Tensor<S>& batch,
                  const WeightSet<S>& ws, ForwardCache<S>* cache = nullptr) {
    if (batch.rank() != 4) throw ShapeError("forward expects an N x H x W x C batch");
    if (batch.dim(1) != spec.input.h || batch.dim(2) != spec.input.w ||
        batch.dim(3) != spec.input.c)
        throw ShapeError("batch shape does not match network input");
    if (ws.weights.size() != spec.layers.size())
        throw ShapeError("weight set does not match network spec");

    Tensor<S> x = batch;
    if (cache) {
        cache->inputs.clear();
        cache->inputs.reserve(spec.layers.size());
    }
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        if (cache) cache->inputs.push_back(x);
        const LayerSpec& layer = spec.layers[li];
        if (const auto* conv = std::get_if<ConvLayerSpec>(&layer)) {
            x = conv_forward(x, ws.weights[li], ws.biases[li], conv->stride,
                             conv->mode);
            if (conv->relu) detail::apply_relu(x);
        } else if (const auto* pool = std::get_if<PoolLayerSpec>(&layer)) {
            x = pool_forward(x, pool->kernel_size, pool->stride, pool->mode);
        } else if (const auto* flat = std::get_if<FlattenLayerSpec>(&layer)) {
            x.shape = {x.dim(0), flat->out_dim};
        } else {
            const auto& fc = std::get<FcLayerSpec>(layer);
            x = detail::fc_forward(x, ws.weights[li], ws.biases[li]);
            if (fc.relu) detail::apply_relu(x);
        }
    }
    if (cache) cache->logits = x;
    return x;
}

/// Row-wise stable softmax of an N x K logit matrix.
template <typename S>
Tensor<S> softmax(const Tensor<S>& logits) {
    Tensor<S> p = logits;
    const int n = logits.dim(0);
    const int k = logits.dim(1);
    for (int ni = 0; ni < n; ++ni) {
        S* row = p.data.data() + static_cast<std::size_t>(ni) * k;
        S mx = row[0];
        for (int i = 1; i < k; ++i) mx = std::max(mx, row[i]);
        S sum = 0;
        for (int i = 0; i < k; ++i) {
            row[i] = std::exp(row[i] - mx);
            sum += row[i];
        }
        for (int i = 0; i < k; ++i) row[i] /= sum;
    }
    return p;
}

/// Mean softmax cross-entropy of a logit batch against integer labels.
template <typename S>
S softmax_cross_entropy(const Tensor<S>& logits, const std::vector<int>& labels) {
    const int n = logits.dim(0);
    const int k = logits.dim(1);
    if (static_cast<int>(labels.size()) != n)
        throw ShapeError("label count does not match batch");
    const Tensor<S> p = softmax(logits);
    S loss = 0;
    for (int ni = 0; ni < n; ++ni) {
        const int label = labels[static_cast<std::size_t>(ni)];
        if (label < 0 || label >= k) throw ShapeError("label out of range");
        loss -= std::log(p.data[static_cast<std::size_t>(ni) * k + label]);
    }
    return loss / static_cast<S>(n);
}

namespace detail {

// dY arrives as the gradient wrt a layer's (post-ReLU) output; masking by the
// output sign converts it to the gradient wrt the linear pre-activation.
template <typename S>
void mask_relu(Tensor<S>& dy, const Tensor<S>& out) {
    for (std::size_t i = 0; i < dy.size(); ++i)
        if (out.data[i] <= S(0)) dy.data[i] = S(0);
}

template <typename S>
Tensor<S> conv_backward(const Tensor<S>& x, const Tensor<S>& w, int stride,
                        ConvMode mode, const Tensor<S>& dy, Tensor<S>& dw,
                        Tensor<S>& db) {
    const int n = x.dim(0), h = x.dim(1), wd = x.dim(2), c = x.dim(3);
    const int f = w.dim(0), m = w.dim(3);
    const int out_h = dy.dim(1), out_w = dy.dim(2);
    int pad_top = 0, pad_left = 0;
    if (mode == ConvMode::kSame) {
        same_padding(h, f, stride, out_h, &pad_top);
        same_padding(wd, f, stride, out_w, &pad_left);
    }
    Tensor<S> dx(x.shape);
    const std::size_t in_img = static_cast<std::size_t>(h) * wd * c;
    const std::size_t out_img = static_cast<std::size_t>(out_h) * out_w * m;
    for (int ni = 0; ni < n; ++ni) {
        const S* x_n = x.data.data() + ni * in_img;
        S* dx_n = dx.data.data() + ni * in_img;
        const S* dy_n = dy.data.data() + ni * out_img;
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                const S* d_px = dy_n + (static_cast<std::size_t>(oy) * out_w + ox) * m;
                for (int mi = 0; mi < m; ++mi) db[mi] += d_px[mi];
                const int iy0 = oy * stride - pad_top;
                const int ix0 = ox * stride - pad_left;
                for (int ky = 0; ky < f; ++ky) {
                    const int iy = iy0 + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < f; ++kx) {
                        const int ix = ix0 + kx;
                        if (ix < 0 || ix >= wd) continue;
                        const S* x_px = x_n + (static_cast<std::size_t>(iy) * wd + ix) * c;
                        S* dx_px = dx_n + (static_cast<std::size_t>(iy) * wd + ix) * c;
                        const std::size_t w_off =
                            (static_cast<std::size_t>(ky) * f + kx) * c * m;
                        const S* w_px = w.data.data() + w_off;
                        S* dw_px = dw.data.data() + w_off;
                        for (int ci = 0; ci < c; ++ci) {
                            const S xv = x_px[ci];
                            const S* w_row = w_px + static_cast<std::size_t>(ci) * m;
                            S* dw_row = dw_px + static_cast<std::size_t>(ci) * m;
                            S acc = 0;
                            for (int mi = 0; mi < m; ++mi) {
                                dw_row[mi] += xv * d_px[mi];
                                acc += w_row[mi] * d_px[mi];
                            }
                            dx_px[ci] += acc;
                        }
                    }
                }
            }
        }
    }
    return dx;
}

template <typename S>
Tensor<S> pool_backward(const Tensor<S>& x, int kernel, int stride, PoolMode mode,
                        const Tensor<S>& dy) {
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    const int out_h = dy.dim(1), out_w = dy.dim(2);
    Tensor<S> dx(x.shape);
    const std::size_t in_img = static_cast<std::size_t>(h) * w * c;
    const std::size_t out_img = static_cast<std::size_t>(out_h) * out_w * c;
    const S inv_area = S(1) / static_cast<S>(kernel * kernel);
    for (int ni = 0; ni < n; ++ni) {
        const S* x_n = x.data.data() + ni * in_img;
        S* dx_n = dx.data.data() + ni * in_img;
        const S* dy_n = dy.data.data() + ni * out_img;
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                const S* d_px = dy_n + (static_cast<std::size_t>(oy) * out_w + ox) * c;
                const int iy0 = oy * stride;
                const int ix0 = ox * stride;
                for (int ci = 0; ci < c; ++ci) {
                    if (mode == PoolMode::kMax) {
                        // gradient goes to the first maximum in scan order,
                        // matching the forward tie choice deterministically
                        S best = std::numeric_limits<S>::lowest();
                        std::size_t best_idx = 0;
                        for (int ky = 0; ky < kernel; ++ky)
                            for (int kx = 0; kx < kernel; ++kx) {
                                const std::size_t idx =
                                    (static_cast<std::size_t>(iy0 + ky) * w +
                                     (ix0 + kx)) * c + ci;
                                if (x_n[idx] > best) {
                                    best = x_n[idx];
                                    best_idx = idx;
                                }
                            }
                        dx_n[best_idx] += d_px[ci];
                    } else {
                        for (int ky = 0; ky < kernel; ++ky)
                            for (int kx = 0; kx < kernel; ++kx)
                                dx_n[(static_cast<std::size_t>(iy0 + ky) * w +
                                      (ix0 + kx)) * c + ci] += d_px[ci] * inv_area;
                    }
                }
            }
        }
    }
    return dx;
}

} // namespace detail

/// Computes the batch loss and the gradient of every weight and bias.
/// Throws NonFiniteLoss if the loss is NaN or infinite.
template <typename S>
std::pair<S, WeightSet<S>> loss_and_gradients(const NetworkSpec& spec,
                                              const Tensor<S>& batch,
                                              const std::vector<int>& labels,
                                              const WeightSet<S>& ws) {
    ForwardCache<S> cache;
    forward(spec, batch, ws, &cache);
    const S loss = softmax_cross_entropy(cache.logits, labels);
    if (!std::isfinite(static_cast<double>(loss)))
        throw NonFiniteLoss("training loss is not finite");

    const int n = cache.logits.dim(0);
    const int k = cache.logits.dim(1);
    Tensor<S> dy = softmax(cache.logits);
    for (int ni = 0; ni < n; ++ni)
        dy.data[static_cast<std::size_t>(ni) * k + labels[static_cast<std::size_t>(ni)]] -=
            S(1);
    const S inv_n = S(1) / static_cast<S>(n);
    for (S& v : dy.data) v *= inv_n;

    WeightSet<S> grads;
    grads.weights.resize(spec.layers.size());
    grads.biases.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        grads.weights[i] = Tensor<S>(ws.weights[i].shape);
        grads.biases[i] = Tensor<S>(ws.biases[i].shape);
    }

    for (std::size_t li = spec.layers.size(); li-- > 0;) {
        const LayerSpec& layer = spec.layers[li];
        const Tensor<S>& x = cache.inputs[li];
        const Tensor<S>& out =
            li + 1 < spec.layers.size() ? cache.inputs[li + 1] : cache.logits;
        if (const auto* conv = std::get_if<ConvLayerSpec>(&layer)) {
            if (conv->relu) detail::mask_relu(dy, out);
            dy = detail::conv_backward(x, ws.weights[li], conv->stride, conv->mode,
                                       dy, grads.weights[li], grads.biases[li]);
        } else if (const auto* pool = std::get_if<PoolLayerSpec>(&layer)) {
            dy = detail::pool_backward(x, pool->kernel_size, pool->stride,
                                       pool->mode, dy);
        } else if (std::get_if<FlattenLayerSpec>(&layer)) {
            dy.shape = x.shape;
        } else {
            const auto& fc = std::get<FcLayerSpec>(layer);
            if (fc.relu) detail::mask_relu(dy, out);
            const int in = fc.in_dim, outd = fc.out_dim;
            Tensor<S> dx({n, in});
            Tensor<S>& dw = grads.weights[li];
            Tensor<S>& db = grads.biases[li];
            for (int ni = 0; ni < n; ++ni) {
                const S* x_row = x.data.data() + static_cast<std::size_t>(ni) * in;
                const S* d_row = dy.data.data() + static_cast<std::size_t>(ni) * outd;
                S* dx_row = dx.data.data() + static_cast<std::size_t>(ni) * in;
                for (int o = 0; o < outd; ++o) db[o] += d_row[o];
                for (int i = 0; i < in; ++i) {
                    const S xv = x_row[i];
                    const S* w_row =
                        ws.weights[li].data.data() + static_cast<std::size_t>(i) * outd;
                    S* dw_row = dw.data.data() + static_cast<std::size_t>(i) * outd;
                    S acc = 0;
                    for (int o = 0; o < outd; ++o) {
                        dw_row[o] += xv * d_row[o];
                        acc += w_row[o] * d_row[o];
                    }
                    dx_row[i] = acc;
                }
            }
            dy = std::move(dx);
        }
    }
    return {loss, std::move(grads)};
}

/// One SGD step: computes gradients on the batch and applies
/// w <- w - lr * grad. Returns the loss measured before the step.
template <typename S>
S backward_and_step(const NetworkSpec& spec, const Tensor<S>& batch,
                    const std::vector<int>& labels, WeightSet<S>& ws,
                    const TrainConfig& cfg) {
    auto [loss, grads] = loss_and_gradients(spec, batch, labels, ws);
    const S lr = static_cast<S>(cfg.learning_rate);
    for (std::size_t li = 0; li < ws.weights.size(); ++li) {
        for (std::size_t i = 0; i < ws.weights[li].size(); ++i)
            ws.weights[li].data[i] -= lr * grads.weights[li].data[i];
        for (std::size_t i = 0; i < ws.biases[li].size(); ++i)
            ws.biases[li].data[i] -= lr * grads.biases[li].data[i];
    }
    return loss;
}

namespace detail {

inline std::vector<int> weight_shape(const LayerSpec& layer) {
    if (const auto* conv = std::get_if<ConvLayerSpec>(&layer))
        return {conv->filter_size, conv->filter_size, conv->in.c, conv->feature_maps};
    if (const auto* fc = std::get_if<FcLayerSpec>(&layer))
        return {fc->in_dim, fc->out_dim};
    return {};
}

inline std::vector<int> bias_shape(const LayerSpec& layer) {
    if (const auto* conv = std::get_if<ConvLayerSpec>(&layer))
        return {conv->feature_maps};
    if (const auto* fc = std::get_if<FcLayerSpec>(&layer))
        return {fc->out_dim};
    return {};
}

} // namespace detail

/// Samples every layer's weights i.i.d. from the layer's evolved Gaussian
/// statistics; biases start at the layer mean.
template <typename S>
WeightSet<S> gaussian_init(const NetworkSpec& spec, Rng& rng) {
    WeightSet<S> ws;
    ws.weights.reserve(spec.layers.size());
    ws.biases.reserve(spec.layers.size());
    for (const LayerSpec& layer : spec.layers) {
        Tensor<S> w(detail::weight_shape(layer));
        Tensor<S> b(detail::bias_shape(layer));
        double mean = 0.0, stddev = 0.0;
        if (const auto* conv = std::get_if<ConvLayerSpec>(&layer)) {
            mean = conv->init_mean;
            stddev = conv->init_std;
        } else if (const auto* fc = std::get_if<FcLayerSpec>(&layer)) {
            mean = fc->init_mean;
            stddev = fc->init_std;
        }
        for (S& v : w.data) v = static_cast<S>(rng.normal(mean, stddev));
        for (S& v : b.data) v = static_cast<S>(mean);
        ws.weights.push_back(std::move(w));
        ws.biases.push_back(std::move(b));
    }
    return ws;
}

inline void xavier_fans(const LayerSpec& layer, long long* n1, long long* n2) {
    if (const auto* conv = std::get_if<ConvLayerSpec>(&layer)) {
        const long long f = conv->filter_size;
        *n1 = f * f * conv->in.c;
        *n2 = f * f * conv->feature_maps;
    } else if (const auto* fc = std::get_if<FcLayerSpec>(&layer)) {
        *n1 = fc->in_dim;
        *n2 = fc->out_dim;
    } else {
        *n1 = *n2 = 0;
    }
}

/// Uniform initialization on [-sqrt(6/(n1+n2)), +sqrt(6/(n1+n2))] per layer;
/// biases start at zero.
template <typename S>
WeightSet<S> xavier_init(const NetworkSpec& spec, Rng& rng) {
    WeightSet<S> ws;
    ws.weights.reserve(spec.layers.size());
    ws.biases.reserve(spec.layers.size());
    for (const LayerSpec& layer : spec.layers) {
        Tensor<S> w(detail::weight_shape(layer));
        Tensor<S> b(detail::bias_shape(layer));
        long long n1 = 0, n2 = 0;
        xavier_fans(layer, &n1, &n2);
        const double bound = (n1 + n2) > 0 ? std::sqrt(6.0 / double(n1 + n2)) : 0.0;
        for (S& v : w.data) v = static_cast<S>(rng.uniform_real(-bound, bound));
        ws.weights.push_back(std::move(w));
        ws.biases.push_back(std::move(b));
    }
    return ws;
}

/// Argmax predictions; ties resolve to the lowest class index.
template <typename S>
std::vector<int> predict(const NetworkSpec& spec, const WeightSet<S>& ws,
                         const Tensor<S>& batch) {
    const Tensor<S> logits = forward(spec, batch, ws);
    const int n = logits.dim(0);
    const int k = logits.dim(1);
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int ni = 0; ni < n; ++ni) {
        const S* row = logits.data.data() + static_cast<std::size_t>(ni) * k;
        int best = 0;
        for (int i = 1; i < k; ++i)
            if (row[i] > row[best]) best = i;
        out[static_cast<std::size_t>(ni)] = best;
    }
    return out;
}

template <typename S>
double classification_error(const NetworkSpec& spec, const WeightSet<S>& ws,
                            const Tensor<S>& batch, const std::vector<int>& labels) {
    const std::vector<int> pred = predict(spec, ws, batch);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] != labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

} // namespace evonet
