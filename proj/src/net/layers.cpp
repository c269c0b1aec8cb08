#include "metafas/net/layers.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace metafas::net {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXd;

// col(ci*k*k, h*w): one column per output pixel.
void im2col(const Tensor& in, int k, double* col) {
    const int pad = k / 2;
    const int hw = in.h * in.w;
    const int patch = in.c * k * k;
    std::fill(col, col + static_cast<size_t>(patch) * hw, 0.0);
    for (int ci = 0; ci < in.c; ++ci) {
        const double* src = in.channel(ci);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const int row = (ci * k + ky) * k + kx;
                double* dst = col + static_cast<size_t>(row) * hw;
                const int dy = ky - pad, dx = kx - pad;
                const int y0 = std::max(0, -dy), y1 = std::min(in.h, in.h - dy);
                const int x0 = std::max(0, -dx), x1 = std::min(in.w, in.w - dx);
                for (int y = y0; y < y1; ++y) {
                    const double* s = src + static_cast<size_t>(y + dy) * in.w + (x0 + dx);
                    double* d = dst + static_cast<size_t>(y) * in.w + x0;
                    std::copy(s, s + (x1 - x0), d);
                }
            }
        }
    }
}

// Adjoint of im2col: scatters column gradients back into the input grid.
void col2im(const double* col, int c, int h, int w, int k, Tensor& d_in) {
    const int pad = k / 2;
    const int hw = h * w;
    for (int ci = 0; ci < c; ++ci) {
        double* dst = d_in.channel(ci);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const int row = (ci * k + ky) * k + kx;
                const double* src = col + static_cast<size_t>(row) * hw;
                const int dy = ky - pad, dx = kx - pad;
                const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
                const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                for (int y = y0; y < y1; ++y) {
                    const double* s = src + static_cast<size_t>(y) * w + x0;
                    double* d = dst + static_cast<size_t>(y + dy) * w + (x0 + dx);
                    for (int x = 0; x < x1 - x0; ++x) d[x] += s[x];
                }
            }
        }
    }
}

}  // namespace

void conv2d_forward(const Tensor& in, const Blob& w, const Blob& b, Tensor& out, Workspace& ws) {
    const int co = w.shape[0], ci = w.shape[1], k = w.shape[2];
    if (ci != in.c) throw std::invalid_argument("conv2d: channel mismatch");
    const int hw = in.h * in.w;
    const int patch = ci * k * k;
    out = Tensor(co, in.h, in.w);

    ws.col.resize(static_cast<size_t>(patch) * hw);
    im2col(in, k, ws.col.data());

    Eigen::Map<const RowMat> wm(w.v.data(), co, patch);
    Eigen::Map<const ColMat> colm(ws.col.data(), hw, patch);  // transposed view of col
    Eigen::Map<RowMat> outm(out.v.data(), co, hw);
    outm.noalias() = wm * colm.transpose();
    for (int c = 0; c < co; ++c) {
        double* plane = out.channel(c);
        const double bias = b.v[c];
        for (int i = 0; i < hw; ++i) plane[i] += bias;
    }
}

void conv2d_backward(const Tensor& in, const Blob& w, const Tensor& d_out, Tensor* d_in,
                     std::vector<double>* d_w, std::vector<double>* d_b, Workspace& ws) {
    const int co = w.shape[0], ci = w.shape[1], k = w.shape[2];
    const int hw = in.h * in.w;
    const int patch = ci * k * k;

    Eigen::Map<const RowMat> dym(d_out.v.data(), co, hw);

    if (d_w) {
        ws.col.resize(static_cast<size_t>(patch) * hw);
        im2col(in, k, ws.col.data());
        Eigen::Map<const ColMat> colm(ws.col.data(), hw, patch);
        Eigen::Map<RowMat> dwm(d_w->data(), co, patch);
        dwm.noalias() += dym * colm;
    }
    if (d_b) {
        for (int c = 0; c < co; ++c) {
            const double* plane = d_out.channel(c);
            double acc = 0.0;
            for (int i = 0; i < hw; ++i) acc += plane[i];
            (*d_b)[c] += acc;
        }
    }
    if (d_in) {
        ws.dcol.resize(static_cast<size_t>(patch) * hw);
        Eigen::Map<const RowMat> wm(w.v.data(), co, patch);
        Eigen::Map<ColMat> dcolm(ws.dcol.data(), hw, patch);
        dcolm.noalias() = dym.transpose() * wm;
        *d_in = Tensor(in.c, in.h, in.w);  // col2im accumulates, so start from zeros
        col2im(ws.dcol.data(), in.c, in.h, in.w, k, *d_in);
    }
}

int norm_groups_for(int c, int requested) {
    int g = std::min(c, std::max(1, requested));
    while (c % g != 0) --g;
    return g;
}

void groupnorm_forward(const Tensor& in, const Blob& gamma, const Blob& beta, int groups, Tensor& out,
                       NormCache* cache) {
    const int g = norm_groups_for(in.c, groups);
    const int cpg = in.c / g;
    const int plane = in.h * in.w;
    const int gsize = cpg * plane;
    constexpr double eps = 1e-5;

    out = Tensor(in.c, in.h, in.w);
    if (cache) {
        cache->xhat.resize(in.v.size());
        cache->inv_std.assign(g, 0.0);
    }
    for (int gi = 0; gi < g; ++gi) {
        const double* x = in.v.data() + static_cast<size_t>(gi) * gsize;
        double mean = 0.0;
        for (int i = 0; i < gsize; ++i) mean += x[i];
        mean /= gsize;
        double var = 0.0;
        for (int i = 0; i < gsize; ++i) {
            const double d = x[i] - mean;
            var += d * d;
        }
        var /= gsize;
        const double inv_std = 1.0 / std::sqrt(var + eps);
        if (cache) cache->inv_std[gi] = inv_std;
        for (int ci = 0; ci < cpg; ++ci) {
            const int c = gi * cpg + ci;
            const double ga = gamma.v[c], be = beta.v[c];
            const double* xin = in.channel(c);
            double* xout = out.channel(c);
            double* xh = cache ? cache->xhat.data() + static_cast<size_t>(c) * plane : nullptr;
            for (int i = 0; i < plane; ++i) {
                const double h = (xin[i] - mean) * inv_std;
                if (xh) xh[i] = h;
                xout[i] = ga * h + be;
            }
        }
    }
}

void groupnorm_backward(const NormCache& cache, const Blob& gamma, int groups, const Tensor& d_out,
                        Tensor& d_in, std::vector<double>* d_gamma, std::vector<double>* d_beta) {
    const int c_total = d_out.c;
    const int g = norm_groups_for(c_total, groups);
    const int cpg = c_total / g;
    const int plane = d_out.h * d_out.w;
    const int gsize = cpg * plane;

    if (!d_in.same_shape(d_out)) d_in = Tensor(d_out.c, d_out.h, d_out.w);

    for (int gi = 0; gi < g; ++gi) {
        // dxhat = d_out * gamma; dx = inv_std*(dxhat - mean(dxhat) - xhat*mean(dxhat*xhat))
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (int ci = 0; ci < cpg; ++ci) {
            const int c = gi * cpg + ci;
            const double ga = gamma.v[c];
            const double* dy = d_out.channel(c);
            const double* xh = cache.xhat.data() + static_cast<size_t>(c) * plane;
            double dg = 0.0, db = 0.0;
            for (int i = 0; i < plane; ++i) {
                const double dxh = dy[i] * ga;
                sum_dxhat += dxh;
                sum_dxhat_xhat += dxh * xh[i];
                dg += dy[i] * xh[i];
                db += dy[i];
            }
            if (d_gamma) (*d_gamma)[c] += dg;
            if (d_beta) (*d_beta)[c] += db;
        }
        const double mean_dxhat = sum_dxhat / gsize;
        const double mean_dxhat_xhat = sum_dxhat_xhat / gsize;
        const double inv_std = cache.inv_std[gi];
        for (int ci = 0; ci < cpg; ++ci) {
            const int c = gi * cpg + ci;
            const double ga = gamma.v[c];
            const double* dy = d_out.channel(c);
            const double* xh = cache.xhat.data() + static_cast<size_t>(c) * plane;
            double* dx = d_in.channel(c);
            for (int i = 0; i < plane; ++i)
                dx[i] = inv_std * (dy[i] * ga - mean_dxhat - xh[i] * mean_dxhat_xhat);
        }
    }
}

void relu_inplace(Tensor& t) {
    for (double& x : t.v)
        if (x < 0.0) x = 0.0;
}

void relu_backward_inplace(const Tensor& out, Tensor& d) {
    for (size_t i = 0; i < d.v.size(); ++i)
        if (out.v[i] <= 0.0) d.v[i] = 0.0;
}

Tensor avgpool2_forward(const Tensor& in) {
    Tensor out(in.c, in.h / 2, in.w / 2);
    for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x)
                out.at(c, y, x) = 0.25 * (in.at(c, 2 * y, 2 * x) + in.at(c, 2 * y, 2 * x + 1) +
                                          in.at(c, 2 * y + 1, 2 * x) + in.at(c, 2 * y + 1, 2 * x + 1));
    return out;
}

Tensor avgpool2_backward(const Tensor& d_out, int in_h, int in_w) {
    Tensor d_in(d_out.c, in_h, in_w);
    for (int c = 0; c < d_out.c; ++c)
        for (int y = 0; y < d_out.h; ++y)
            for (int x = 0; x < d_out.w; ++x) {
                const double v = 0.25 * d_out.at(c, y, x);
                d_in.at(c, 2 * y, 2 * x) = v;
                d_in.at(c, 2 * y, 2 * x + 1) = v;
                d_in.at(c, 2 * y + 1, 2 * x) = v;
                d_in.at(c, 2 * y + 1, 2 * x + 1) = v;
            }
    return d_in;
}

Tensor avgpool_factor_forward(const Tensor& in, int factor) {
    Tensor out(in.c, in.h / factor, in.w / factor);
    const double inv = 1.0 / (factor * factor);
    for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x) {
                double acc = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx) acc += in.at(c, y * factor + dy, x * factor + dx);
                out.at(c, y, x) = acc * inv;
            }
    return out;
}

Tensor avgpool_factor_backward(const Tensor& d_out, int factor) {
    Tensor d_in(d_out.c, d_out.h * factor, d_out.w * factor);
    const double inv = 1.0 / (factor * factor);
    for (int c = 0; c < d_out.c; ++c)
        for (int y = 0; y < d_out.h; ++y)
            for (int x = 0; x < d_out.w; ++x) {
                const double v = d_out.at(c, y, x) * inv;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx) d_in.at(c, y * factor + dy, x * factor + dx) = v;
            }
    return d_in;
}

Tensor upsample2_forward(const Tensor& in) {
    Tensor out(in.c, in.h * 2, in.w * 2);
    for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x) out.at(c, y, x) = in.at(c, y / 2, x / 2);
    return out;
}

Tensor upsample2_backward(const Tensor& d_out) {
    Tensor d_in(d_out.c, d_out.h / 2, d_out.w / 2);
    for (int c = 0; c < d_out.c; ++c)
        for (int y = 0; y < d_out.h; ++y)
            for (int x = 0; x < d_out.w; ++x) d_in.at(c, y / 2, x / 2) += d_out.at(c, y, x);
    return d_in;
}

namespace {
struct LerpCoord {
    int i0, i1;
    double w1;  // weight of i1; weight of i0 is 1-w1
};
LerpCoord lerp_coord(int out_i, int in_n, int out_n) {
    double f = (out_i + 0.5) * (static_cast<double>(in_n) / out_n) - 0.5;
    if (f < 0.0) f = 0.0;
    if (f > in_n - 1) f = in_n - 1;
    LerpCoord c;
    c.i0 = static_cast<int>(f);
    c.i1 = std::min(c.i0 + 1, in_n - 1);
    c.w1 = f - c.i0;
    return c;
}
}  // namespace

Tensor resize_bilinear_forward(const Tensor& in, int out_h, int out_w) {
    if (in.h == out_h && in.w == out_w) return in;
    Tensor out(in.c, out_h, out_w);
    for (int y = 0; y < out_h; ++y) {
        const LerpCoord cy = lerp_coord(y, in.h, out_h);
        for (int x = 0; x < out_w; ++x) {
            const LerpCoord cx = lerp_coord(x, in.w, out_w);
            for (int c = 0; c < in.c; ++c) {
                const double top = (1.0 - cx.w1) * in.at(c, cy.i0, cx.i0) + cx.w1 * in.at(c, cy.i0, cx.i1);
                const double bot = (1.0 - cx.w1) * in.at(c, cy.i1, cx.i0) + cx.w1 * in.at(c, cy.i1, cx.i1);
                out.at(c, y, x) = (1.0 - cy.w1) * top + cy.w1 * bot;
            }
        }
    }
    return out;
}

Tensor resize_bilinear_backward(const Tensor& d_out, int in_h, int in_w) {
    if (d_out.h == in_h && d_out.w == in_w) return d_out;
    Tensor d_in(d_out.c, in_h, in_w);
    for (int y = 0; y < d_out.h; ++y) {
        const LerpCoord cy = lerp_coord(y, in_h, d_out.h);
        for (int x = 0; x < d_out.w; ++x) {
            const LerpCoord cx = lerp_coord(x, in_w, d_out.w);
            for (int c = 0; c < d_out.c; ++c) {
                const double g = d_out.at(c, y, x);
                d_in.at(c, cy.i0, cx.i0) += (1.0 - cy.w1) * (1.0 - cx.w1) * g;
                d_in.at(c, cy.i0, cx.i1) += (1.0 - cy.w1) * cx.w1 * g;
                d_in.at(c, cy.i1, cx.i0) += cy.w1 * (1.0 - cx.w1) * g;
                d_in.at(c, cy.i1, cx.i1) += cy.w1 * cx.w1 * g;
            }
        }
    }
    return d_in;
}

std::vector<double> global_avg_pool(const Tensor& in) {
    std::vector<double> out(in.c, 0.0);
    const int plane = in.h * in.w;
    for (int c = 0; c < in.c; ++c) {
        const double* p = in.channel(c);
        double acc = 0.0;
        for (int i = 0; i < plane; ++i) acc += p[i];
        out[c] = acc / plane;
    }
    return out;
}

void global_avg_pool_backward(const std::vector<double>& d_pooled, Tensor& d_in_accum) {
    const int plane = d_in_accum.h * d_in_accum.w;
    for (int c = 0; c < d_in_accum.c; ++c) {
        const double v = d_pooled[c] / plane;
        double* p = d_in_accum.channel(c);
        for (int i = 0; i < plane; ++i) p[i] += v;
    }
}

std::vector<double> linear_forward(const std::vector<double>& x, const Blob& w, const Blob& b) {
    const int out = w.shape[0], in = w.shape[1];
    std::vector<double> y(out);
    Eigen::Map<const RowMat> wm(w.v.data(), out, in);
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), in);
    Eigen::Map<Eigen::VectorXd> yv(y.data(), out);
    yv.noalias() = wm * xv;
    for (int i = 0; i < out; ++i) y[i] += b.v[i];
    return y;
}

void linear_backward(const std::vector<double>& x, const Blob& w, const std::vector<double>& d_y,
                     std::vector<double>* d_x, std::vector<double>* d_w, std::vector<double>* d_b) {
    const int out = w.shape[0], in = w.shape[1];
    if (d_w) {
        Eigen::Map<RowMat> dwm(d_w->data(), out, in);
        Eigen::Map<const Eigen::VectorXd> dyv(d_y.data(), out);
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), in);
        dwm.noalias() += dyv * xv.transpose();
    }
    if (d_b)
        for (int i = 0; i < out; ++i) (*d_b)[i] += d_y[i];
    if (d_x) {
        d_x->assign(in, 0.0);
        Eigen::Map<const RowMat> wm(w.v.data(), out, in);
        Eigen::Map<const Eigen::VectorXd> dyv(d_y.data(), out);
        Eigen::Map<Eigen::VectorXd> dxv(d_x->data(), in);
        dxv.noalias() = wm.transpose() * dyv;
    }
}

void eca_forward(const Tensor& in, const std::vector<double>& w, Tensor& out, EcaCache* cache) {
    const int k = static_cast<int>(w.size());
    const int off = k / 2;
    const std::vector<double> z = global_avg_pool(in);
    const int c_total = in.c;
    std::vector<double> s(c_total);
    for (int c = 0; c < c_total; ++c) {
        double a = 0.0;
        for (int j = 0; j < k; ++j) {
            const int src = c + j - off;
            if (src >= 0 && src < c_total) a += w[j] * z[src];
        }
        s[c] = 1.0 / (1.0 + std::exp(-a));
    }
    out = Tensor(in.c, in.h, in.w);
    const int plane = in.h * in.w;
    for (int c = 0; c < c_total; ++c) {
        const double* src = in.channel(c);
        double* dst = out.channel(c);
        for (int i = 0; i < plane; ++i) dst[i] = src[i] * s[c];
    }
    if (cache) {
        cache->z = z;
        cache->s = std::move(s);
    }
}

void eca_backward(const Tensor& in, const std::vector<double>& w, const EcaCache& cache, const Tensor& d_out,
                  Tensor& d_in, std::vector<double>* d_w) {
    const int k = static_cast<int>(w.size());
    const int off = k / 2;
    const int c_total = in.c;
    const int plane = in.h * in.w;

    if (!d_in.same_shape(in)) d_in = Tensor(in.c, in.h, in.w);

    std::vector<double> d_s(c_total, 0.0);
    for (int c = 0; c < c_total; ++c) {
        const double* dy = d_out.channel(c);
        const double* x = in.channel(c);
        double* dx = d_in.channel(c);
        double acc = 0.0;
        for (int i = 0; i < plane; ++i) {
            dx[i] = dy[i] * cache.s[c];
            acc += dy[i] * x[i];
        }
        d_s[c] = acc;
    }
    std::vector<double> d_a(c_total);
    for (int c = 0; c < c_total; ++c) d_a[c] = d_s[c] * cache.s[c] * (1.0 - cache.s[c]);

    std::vector<double> d_z(c_total, 0.0);
    for (int c = 0; c < c_total; ++c)
        for (int j = 0; j < k; ++j) {
            const int src = c + j - off;
            if (src >= 0 && src < c_total) {
                if (d_w) (*d_w)[j] += d_a[c] * cache.z[src];
                d_z[src] += d_a[c] * w[j];
            }
        }
    for (int c = 0; c < c_total; ++c) {
        const double v = d_z[c] / plane;
        double* dx = d_in.channel(c);
        for (int i = 0; i < plane; ++i) dx[i] += v;
    }
}

void sigmoid_inplace(Tensor& t) {
    for (double& x : t.v) x = 1.0 / (1.0 + std::exp(-x));
}

}  // namespace metafas::net
