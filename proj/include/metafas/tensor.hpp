#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace metafas {

// Dense CHW tensor of doubles. Channel-major so that a single channel is a
// contiguous h*w block, which is what the conv/GEMM kernels want.
struct Tensor {
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {}

    static Tensor zeros(int c, int h, int w) { return Tensor(c, h, w); }

    std::int64_t size() const { return static_cast<std::int64_t>(c) * h * w; }
    int plane() const { return h * w; }

    double& at(int ci, int yi, int xi) { return v[(static_cast<size_t>(ci) * h + yi) * w + xi]; }
    double at(int ci, int yi, int xi) const { return v[(static_cast<size_t>(ci) * h + yi) * w + xi]; }

    double* channel(int ci) { return v.data() + static_cast<size_t>(ci) * h * w; }
    const double* channel(int ci) const { return v.data() + static_cast<size_t>(ci) * h * w; }

    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

// Integer label mask (per-pixel class indices).
struct Mask {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> v;

    Mask() = default;
    Mask(int h_, int w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, 0) {}

    std::uint8_t& at(int yi, int xi) { return v[static_cast<size_t>(yi) * w + xi]; }
    std::uint8_t at(int yi, int xi) const { return v[static_cast<size_t>(yi) * w + xi]; }
};

}  // namespace metafas
