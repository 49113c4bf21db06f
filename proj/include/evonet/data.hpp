#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "evonet/errors.hpp"
#include "evonet/net_spec.hpp"
#include "evonet/rng.hpp"
#include "evonet/tensor.hpp"

namespace evonet {

/// A labelled image set. Pixels are stored normalized to [0, 1] on the 1/255
/// grid, so writing to IDX and reading back is lossless.
struct Dataset {
    Tensor<float> images; // [N, H, W, C]
    std::vector<int> labels;
    int num_classes = 0;

    int size() const { return images.rank() == 4 ? images.dim(0) : 0; }
    Shape3 sample_shape() const {
        return {images.dim(1), images.dim(2), images.dim(3)};
    }
};

namespace detail {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

inline std::uint32_t read_be32(std::istream& in, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError(std::string("truncated IDX header: ") + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace detail

/// Reads an IDX image/label file pair (big-endian, magic 0x00000803 /
/// 0x00000801). Images come back as [N, H, W, 1] scaled by 1/255.
inline Dataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot open image file: " + images_path);
    if (detail::read_be32(img, "image magic") != detail::kIdxImageMagic)
        throw FormatError("bad image magic in " + images_path);
    const std::uint32_t n = detail::read_be32(img, "image count");
    const std::uint32_t h = detail::read_be32(img, "rows");
    const std::uint32_t w = detail::read_be32(img, "cols");
    if (n == 0 || h == 0 || w == 0)
        throw FormatError("zero dimension in image header of " + images_path);

    std::vector<unsigned char> raw(static_cast<std::size_t>(n) * h * w);
    img.read(reinterpret_cast<char*>(raw.data()),
             static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(img.gcount()) != raw.size())
        throw FormatError("truncated image data in " + images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot open label file: " + labels_path);
    if (detail::read_be32(lab, "label magic") != detail::kIdxLabelMagic)
        throw FormatError("bad label magic in " + labels_path);
    const std::uint32_t ln = detail::read_be32(lab, "label count");
    if (ln != n)
        throw CountMismatch("image count " + std::to_string(n) +
                            " != label count " + std::to_string(ln));
    std::vector<unsigned char> lraw(ln);
    lab.read(reinterpret_cast<char*>(lraw.data()),
             static_cast<std::streamsize>(lraw.size()));
    if (static_cast<std::size_t>(lab.gcount()) != lraw.size())
        throw FormatError("truncated label data in " + labels_path);

    Dataset d;
    d.images = Tensor<float>({static_cast<int>(n), static_cast<int>(h),
                              static_cast<int>(w), 1});
    for (std::size_t i = 0; i < raw.size(); ++i)
        d.images.data[i] = static_cast<float>(raw[i]) / 255.0f;
    d.labels.resize(ln);
    int max_label = 0;
    for (std::size_t i = 0; i < lraw.size(); ++i) {
        d.labels[i] = static_cast<int>(lraw[i]);
        max_label = std::max(max_label, d.labels[i]);
    }
    d.num_classes = max_label + 1;
    return d;
}

/// Writes the dataset as an IDX pair. Pixels must lie on the 1/255 grid for
/// a bit-identical round trip (guaranteed for everything produced here).
inline void save_idx(const Dataset& d, const std::string& images_path,
                     const std::string& labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot create image file: " + images_path);
    detail::write_be32(img, detail::kIdxImageMagic);
    detail::write_be32(img, static_cast<std::uint32_t>(d.size()));
    detail::write_be32(img, static_cast<std::uint32_t>(d.images.dim(1)));
    detail::write_be32(img, static_cast<std::uint32_t>(d.images.dim(2)));
    std::vector<unsigned char> raw(d.images.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = static_cast<unsigned char>(
            std::lround(std::clamp(d.images.data[i], 0.0f, 1.0f) * 255.0f));
    img.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot create label file: " + labels_path);
    detail::write_be32(lab, detail::kIdxLabelMagic);
    detail::write_be32(lab, static_cast<std::uint32_t>(d.labels.size()));
    std::vector<unsigned char> lraw(d.labels.size());
    for (std::size_t i = 0; i < lraw.size(); ++i)
        lraw[i] = static_cast<unsigned char>(d.labels[i]);
    lab.write(reinterpret_cast<const char*>(lraw.data()),
              static_cast<std::streamsize>(lraw.size()));
}

inline Dataset subset(const Dataset& d, const std::vector<int>& indices) {
    Dataset out;
    const int h = d.images.dim(1), w = d.images.dim(2), c = d.images.dim(3);
    out.images = Tensor<float>({static_cast<int>(indices.size()), h, w, c});
    out.labels.resize(indices.size());
    out.num_classes = d.num_classes;
    const std::size_t img_sz = static_cast<std::size_t>(h) * w * c;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const float* src = d.images.data.data() + indices[i] * img_sz;
        std::copy(src, src + img_sz, out.images.data.data() + i * img_sz);
        out.labels[i] = d.labels[static_cast<std::size_t>(indices[i])];
    }
    return out;
}

/// Disjoint uniformly random split; the second part receives
/// round(fraction * N) samples and is held out from candidate training.
inline std::pair<Dataset, Dataset> split_train_fitness(const Dataset& d,
                                                       double fraction,
                                                       std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split fraction must be in (0, 1)");
    const int n = d.size();
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(0, i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    const int n_fit = static_cast<int>(std::llround(fraction * n));
    std::vector<int> fit_idx(idx.begin(), idx.begin() + n_fit);
    std::vector<int> train_idx(idx.begin() + n_fit, idx.end());
    return {subset(d, train_idx), subset(d, fit_idx)};
}

/// Deterministic batch access. Training mode shuffles a fresh permutation per
/// epoch and keeps the final partial batch; fitness mode iterates in storage
/// order and drops the remainder so exactly floor(N / batch) batches are seen.
class Batcher {
public:
    Batcher(const Dataset& d, int batch_size, bool drop_last)
        : data_(&d), batch_size_(batch_size), drop_last_(drop_last),
          order_(static_cast<std::size_t>(d.size())) {
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        std::iota(order_.begin(), order_.end(), 0);
    }

    void reshuffle(Rng& rng) {
        const int n = static_cast<int>(order_.size());
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform_int(0, i));
            std::swap(order_[static_cast<std::size_t>(i)],
                      order_[static_cast<std::size_t>(j)]);
        }
    }

    int num_batches() const {
        const int n = data_->size();
        return drop_last_ ? n / batch_size_
                          : (n + batch_size_ - 1) / batch_size_;
    }

    /// Materializes batch j as an [B, H, W, C] tensor plus labels.
    std::pair<Tensor<float>, std::vector<int>> batch(int j) const {
        const int n = data_->size();
        const int start = j * batch_size_;
        const int count = std::min(batch_size_, n - start);
        const Shape3 s = data_->sample_shape();
        Tensor<float> images({count, s.h, s.w, s.c});
        std::vector<int> labels(static_cast<std::size_t>(count));
        const std::size_t img_sz = static_cast<std::size_t>(s.h) * s.w * s.c;
        for (int i = 0; i < count; ++i) {
            const int src = order_[static_cast<std::size_t>(start + i)];
            std::copy(data_->images.data.data() + src * img_sz,
                      data_->images.data.data() + (src + 1) * img_sz,
                      images.data.data() + static_cast<std::size_t>(i) * img_sz);
            labels[static_cast<std::size_t>(i)] =
                data_->labels[static_cast<std::size_t>(src)];
        }
        return {std::move(images), std::move(labels)};
    }

private:
    const Dataset* data_;
    int batch_size_;
    bool drop_last_;
    std::vector<int> order_;
};

// ---------------------------------------------------------------------------
// Synthetic datasets
// ---------------------------------------------------------------------------

enum class SyntheticKind { kSeparableBlobs, kRectangleToy };

namespace detail {

inline float quantize_pixel(double v) {
    const double q = std::clamp(v, 0.0, 1.0);
    return static_cast<float>(std::lround(q * 255.0)) / 255.0f;
}

// Hollow axis-aligned rectangle outline.
inline void draw_rectangle(float* img, int size, int r0, int c0, int r1, int c1,
                           double intensity) {
    for (int c = c0; c <= c1; ++c) {
        img[r0 * size + c] = quantize_pixel(intensity);
        img[r1 * size + c] = quantize_pixel(intensity);
    }
    for (int r = r0; r <= r1; ++r) {
        img[r * size + c0] = quantize_pixel(intensity);
        img[r * size + c1] = quantize_pixel(intensity);
    }
}

inline void draw_segment(float* img, int size, int r, int c, int len,
                         bool horizontal, double intensity) {
    for (int i = 0; i < len; ++i) {
        const int rr = horizontal ? r : r + i;
        const int cc = horizontal ? c + i : c;
        img[rr * size + cc] = quantize_pixel(intensity);
    }
}

} // namespace detail

/// Two-class desk-scale datasets.
///
/// kSeparableBlobs: each class is a Gaussian bump at a class-specific corner
/// plus small pixel noise; the class means are separated by far more than
/// four noise standard deviations, so a linear model can reach zero error.
///
/// kRectangleToy: label 1 images contain one hollow axis-aligned rectangle;
/// label 0 images contain either scattered segments or an L of two adjacent
/// rectangle sides. Segment lengths are drawn so total ink overlaps between
/// classes, keeping brightness alone an incomplete cue. Labels alternate,
/// keeping the classes balanced.
inline Dataset make_synthetic(SyntheticKind kind, int n, int size,
                              std::uint64_t seed) {
    if (n < 2) throw ConfigError("synthetic dataset needs n >= 2");
    if (size < 4) throw ConfigError("synthetic dataset needs size >= 4");
    Rng rng(seed);
    Dataset d;
    d.images = Tensor<float>({n, size, size, 1});
    d.labels.resize(static_cast<std::size_t>(n));
    d.num_classes = 2;
    const std::size_t img_sz = static_cast<std::size_t>(size) * size;

    for (int i = 0; i < n; ++i) {
        float* img = d.images.data.data() + i * img_sz;
        const int label = i % 2;
        d.labels[static_cast<std::size_t>(i)] = label;

        if (kind == SyntheticKind::kSeparableBlobs) {
            const double cy = label == 0 ? size * 0.25 : size * 0.75;
            const double cx = cy;
            const double sigma = size / 5.0;
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c) {
                    const double dy = r - cy, dx = c - cx;
                    const double bump =
                        0.9 * std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
                    const double noise = rng.normal(0.0, 0.05);
                    img[r * size + c] = detail::quantize_pixel(bump + noise);
                }
        } else {
            for (std::size_t p = 0; p < img_sz; ++p)
                img[p] = detail::quantize_pixel(
                    std::max(0.0, rng.normal(0.0, 0.02)));
            const double intensity = rng.uniform_real(0.8, 1.0);
            const int r0 = static_cast<int>(rng.uniform_int(0, size - 4));
            const int c0 = static_cast<int>(rng.uniform_int(0, size - 4));
            const int r1 = static_cast<int>(rng.uniform_int(r0 + 3, size - 1));
            const int c1 = static_cast<int>(rng.uniform_int(c0 + 3, size - 1));
            if (label == 1) {
                detail::draw_rectangle(img, size, r0, c0, r1, c1, intensity);
            } else if (rng.coin()) {
                // L of two adjacent sides: a corner without closure
                for (int cc = c0; cc <= c1; ++cc)
                    img[r1 * size + cc] = detail::quantize_pixel(intensity);
                for (int rr = r0; rr <= r1; ++rr)
                    img[rr * size + c0] = detail::quantize_pixel(intensity);
            } else {
                const int segments = static_cast<int>(rng.uniform_int(2, 4));
                for (int s = 0; s < segments; ++s) {
                    const bool horizontal = rng.coin();
                    const int len = static_cast<int>(
                        rng.uniform_int(4, std::max(5, size - 2)));
                    const int r = static_cast<int>(
                        rng.uniform_int(0, horizontal ? size - 1 : size - len));
                    const int c = static_cast<int>(
                        rng.uniform_int(0, horizontal ? size - len : size - 1));
                    detail::draw_segment(img, size, r, c, len, horizontal,
                                         intensity);
                }
            }
        }
    }
    return d;
}

} // namespace evonet
