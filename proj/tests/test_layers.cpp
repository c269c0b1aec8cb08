#include <doctest.h>

#include <cmath>

#include "metafas/net/layers.hpp"
#include "metafas/rng.hpp"
#include "support/testutil.hpp"

using namespace metafas;
using namespace metafas::net;
using testutil::random_tensor;

namespace {

Blob random_blob(const std::string& name, std::vector<int> shape, Rng& rng) {
    Blob b;
    b.name = name;
    b.shape = std::move(shape);
    int64_t n = 1;
    for (int d : b.shape) n *= d;
    b.v.resize(n);
    for (double& v : b.v) v = rng.normal(0.0, 0.5);
    return b;
}

// Direct convolution loop, the oracle for the im2col/GEMM path.
Tensor conv_naive(const Tensor& in, const Blob& w, const Blob& b) {
    const int co = w.shape[0], ci = w.shape[1], k = w.shape[2], pad = k / 2;
    Tensor out(co, in.h, in.w);
    for (int oc = 0; oc < co; ++oc)
        for (int y = 0; y < in.h; ++y)
            for (int x = 0; x < in.w; ++x) {
                double acc = b.v[oc];
                for (int ic = 0; ic < ci; ++ic)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int sy = y + ky - pad, sx = x + kx - pad;
                            if (sy < 0 || sy >= in.h || sx < 0 || sx >= in.w) continue;
                            acc += w.v[((oc * ci + ic) * k + ky) * k + kx] * in.at(ic, sy, sx);
                        }
                out.at(oc, y, x) = acc;
            }
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) acc += a.v[i] * b.v[i];
    return acc;
}

}  // namespace

TEST_CASE("conv2d matches the direct-loop oracle") {
    Rng rng(21);
    Workspace ws;
    for (int trial = 0; trial < 5; ++trial) {
        const int ci = 1 + rng.uniform_int(4), co = 1 + rng.uniform_int(4);
        const int h = 3 + rng.uniform_int(6);
        const Tensor in = random_tensor(ci, h, h, rng, -1.0, 1.0);
        const Blob w = random_blob("w", {co, ci, 3, 3}, rng);
        const Blob b = random_blob("b", {co}, rng);
        Tensor out;
        conv2d_forward(in, w, b, out, ws);
        const Tensor oracle = conv_naive(in, w, b);
        for (size_t i = 0; i < out.v.size(); ++i) CHECK(out.v[i] == doctest::Approx(oracle.v[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d backward is the adjoint of forward") {
    // <conv(x), y> == <x, conv_backward(y)> for the linear (bias-free) part.
    Rng rng(22);
    Workspace ws;
    const Tensor x = random_tensor(3, 6, 6, rng, -1.0, 1.0);
    const Blob w = random_blob("w", {4, 3, 3, 3}, rng);
    Blob zero_bias = random_blob("b", {4}, rng);
    std::fill(zero_bias.v.begin(), zero_bias.v.end(), 0.0);

    Tensor ax;
    conv2d_forward(x, w, zero_bias, ax, ws);
    const Tensor y = random_tensor(4, 6, 6, rng, -1.0, 1.0);
    Tensor aty;
    conv2d_backward(x, w, y, &aty, nullptr, nullptr, ws);
    CHECK(dot(ax, y) == doctest::Approx(dot(x, aty)).epsilon(1e-10));
}

TEST_CASE("conv2d weight gradient matches finite differences") {
    Rng rng(23);
    Workspace ws;
    const Tensor x = random_tensor(2, 5, 5, rng, -1.0, 1.0);
    Blob w = random_blob("w", {3, 2, 3, 3}, rng);
    const Blob b = random_blob("b", {3}, rng);
    const Tensor r = random_tensor(3, 5, 5, rng, -1.0, 1.0);  // random projection

    auto f = [&]() {
        Tensor out;
        conv2d_forward(x, w, b, out, ws);
        return dot(out, r);
    };
    std::vector<double> dw(w.v.size(), 0.0), db(b.v.size(), 0.0);
    conv2d_backward(x, w, r, nullptr, &dw, &db, ws);
    for (size_t i = 0; i < w.v.size(); i += 7) {
        const double saved = w.v[i];
        w.v[i] = saved + 1e-6;
        const double fp = f();
        w.v[i] = saved - 1e-6;
        const double fm = f();
        w.v[i] = saved;
        CHECK(dw[i] == doctest::Approx((fp - fm) / 2e-6).epsilon(1e-5));
    }
}

TEST_CASE("group normalization produces zero-mean unit-variance groups") {
    Rng rng(24);
    const Tensor in = random_tensor(8, 4, 4, rng, -2.0, 2.0);
    Blob gamma = random_blob("g", {8}, rng);
    Blob beta = random_blob("b", {8}, rng);
    std::fill(gamma.v.begin(), gamma.v.end(), 1.0);
    std::fill(beta.v.begin(), beta.v.end(), 0.0);
    Tensor out;
    groupnorm_forward(in, gamma, beta, 4, out, nullptr);
    const int group_size = 2 * 16;
    for (int g = 0; g < 4; ++g) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < group_size; ++i) mean += out.v[g * group_size + i];
        mean /= group_size;
        for (int i = 0; i < group_size; ++i) {
            const double d = out.v[g * group_size + i] - mean;
            var += d * d;
        }
        var /= group_size;
        CHECK(std::abs(mean) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shifts variance slightly
    }
}

TEST_CASE("group normalization gradients match finite differences") {
    Rng rng(25);
    Tensor in = random_tensor(4, 3, 3, rng, -1.0, 1.0);
    const Blob gamma = random_blob("g", {4}, rng);
    const Blob beta = random_blob("b", {4}, rng);
    const Tensor r = random_tensor(4, 3, 3, rng, -1.0, 1.0);

    auto f = [&]() {
        Tensor out;
        groupnorm_forward(in, gamma, beta, 2, out, nullptr);
        return dot(out, r);
    };
    Tensor out;
    NormCache cache;
    groupnorm_forward(in, gamma, beta, 2, out, &cache);
    Tensor d_in;
    std::vector<double> dg(4, 0.0), db(4, 0.0);
    groupnorm_backward(cache, gamma, 2, r, d_in, &dg, &db);
    for (size_t i = 0; i < in.v.size(); i += 3) {
        const double saved = in.v[i];
        in.v[i] = saved + 1e-6;
        const double fp = f();
        in.v[i] = saved - 1e-6;
        const double fm = f();
        in.v[i] = saved;
        CHECK(d_in.v[i] == doctest::Approx((fp - fm) / 2e-6).epsilon(1e-4));
    }
}

TEST_CASE("pooling, upsampling and resize backward are adjoints") {
    Rng rng(26);
    {
        const Tensor x = random_tensor(3, 8, 8, rng);
        const Tensor y = random_tensor(3, 4, 4, rng);
        CHECK(dot(avgpool2_forward(x), y) == doctest::Approx(dot(x, avgpool2_backward(y, 8, 8))));
    }
    {
        const Tensor x = random_tensor(2, 4, 4, rng);
        const Tensor y = random_tensor(2, 8, 8, rng);
        CHECK(dot(upsample2_forward(x), y) == doctest::Approx(dot(x, upsample2_backward(y))));
    }
    {
        const Tensor x = random_tensor(2, 8, 8, rng);
        const Tensor y = random_tensor(2, 2, 2, rng);
        CHECK(dot(avgpool_factor_forward(x, 4), y) == doctest::Approx(dot(x, avgpool_factor_backward(y, 4))));
    }
    {
        const Tensor x = random_tensor(1, 4, 4, rng);
        const Tensor y = random_tensor(1, 9, 9, rng);
        CHECK(dot(resize_bilinear_forward(x, 9, 9), y) ==
              doctest::Approx(dot(x, resize_bilinear_backward(y, 4, 4))));
    }
}

TEST_CASE("linear layer gradients match finite differences") {
    Rng rng(27);
    std::vector<double> x(5);
    for (double& v : x) v = rng.normal();
    Blob w = random_blob("w", {3, 5}, rng);
    const Blob b = random_blob("b", {3}, rng);
    std::vector<double> r(3);
    for (double& v : r) v = rng.normal();

    auto f = [&]() {
        const auto y = linear_forward(x, w, b);
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) acc += y[i] * r[i];
        return acc;
    };
    std::vector<double> dx, dw(w.v.size(), 0.0), db(3, 0.0);
    linear_backward(x, w, r, &dx, &dw, &db);
    for (size_t i = 0; i < w.v.size(); ++i) {
        const double saved = w.v[i];
        w.v[i] = saved + 1e-6;
        const double fp = f();
        w.v[i] = saved - 1e-6;
        const double fm = f();
        w.v[i] = saved;
        CHECK(dw[i] == doctest::Approx((fp - fm) / 2e-6).epsilon(1e-5));
    }
    for (size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + 1e-6;
        const double fp = f();
        x[i] = saved - 1e-6;
        const double fm = f();
        x[i] = saved;
        CHECK(dx[i] == doctest::Approx((fp - fm) / 2e-6).epsilon(1e-5));
    }
}

TEST_CASE("eca attention weights lie in (0,1) and rescale channelwise") {
    Rng rng(28);
    const Tensor in = random_tensor(6, 4, 4, rng, -1.0, 1.0);
    const std::vector<double> w = {0.3, 0.8, -0.2};
    Tensor out;
    EcaCache cache;
    eca_forward(in, w, out, &cache);
    for (double s : cache.s) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
    for (int c = 0; c < in.c; ++c)
        for (int i = 0; i < in.plane(); ++i)
            CHECK(out.channel(c)[i] == doctest::Approx(in.channel(c)[i] * cache.s[c]));
}

TEST_CASE("eca matches a hand computation on a 4-channel constant input") {
    // Channels hold constants (a,b,c,d); GAP returns them unchanged.
    const double a = 0.2, b = -0.4, c = 0.9, d = 0.1;
    Tensor in(4, 2, 2);
    for (int i = 0; i < 4; ++i) in.channel(0)[i] = a;
    for (int i = 0; i < 4; ++i) in.channel(1)[i] = b;
    for (int i = 0; i < 4; ++i) in.channel(2)[i] = c;
    for (int i = 0; i < 4; ++i) in.channel(3)[i] = d;
    const std::vector<double> w = {0.5, 1.0, -0.25};

    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    // Zero-padded 1-D conv over the channel axis.
    const double s0 = sigmoid(1.0 * a - 0.25 * b);
    const double s1 = sigmoid(0.5 * a + 1.0 * b - 0.25 * c);
    const double s2 = sigmoid(0.5 * b + 1.0 * c - 0.25 * d);
    const double s3 = sigmoid(0.5 * c + 1.0 * d);

    Tensor out;
    eca_forward(in, w, out, nullptr);
    CHECK(out.channel(0)[0] == doctest::Approx(a * s0).epsilon(1e-12));
    CHECK(out.channel(1)[0] == doctest::Approx(b * s1).epsilon(1e-12));
    CHECK(out.channel(2)[0] == doctest::Approx(c * s2).epsilon(1e-12));
    CHECK(out.channel(3)[0] == doctest::Approx(d * s3).epsilon(1e-12));
}

TEST_CASE("eca of a zero tensor is zero") {
    Tensor in(3, 4, 4);
    Tensor out;
    eca_forward(in, {0.1, 0.9, 0.2}, out, nullptr);
    for (double v : out.v) CHECK(v == 0.0);
}

TEST_CASE("eca gradients match finite differences") {
    Rng rng(29);
    Tensor in = random_tensor(5, 3, 3, rng, -1.0, 1.0);
    std::vector<double> w = {0.4, 0.7, -0.3};
    const Tensor r = random_tensor(5, 3, 3, rng, -1.0, 1.0);
    auto f = [&]() {
        Tensor out;
        eca_forward(in, w, out, nullptr);
        return dot(out, r);
    };
    Tensor out, d_in;
    EcaCache cache;
    eca_forward(in, w, out, &cache);
    std::vector<double> dw(3, 0.0);
    eca_backward(in, w, cache, r, d_in, &dw);
    for (size_t i = 0; i < in.v.size(); i += 4) {
        const double saved = in.v[i];
        in.v[i] = saved + 1e-6;
        const double fp = f();
        in.v[i] = saved - 1e-6;
        const double fm = f();
        in.v[i] = saved;
        CHECK(d_in.v[i] == doctest::Approx((fp - fm) / 2e-6).epsilon(1e-5));
    }
    for (int i = 0; i < 3; ++i) {
        const double saved = w[i];
        w[i] = saved + 1e-6;
        const double fp = f();
        w[i] = saved - 1e-6;
        const double fm = f();
        w[i] = saved;
        CHECK(dw[i] == doctest::Approx((fp - fm) / 2e-6).epsilon(1e-5));
    }
}

TEST_CASE("norm_groups_for picks the largest divisor") {
    CHECK(norm_groups_for(8, 8) == 8);
    CHECK(norm_groups_for(4, 8) == 4);
    CHECK(norm_groups_for(6, 4) == 3);
    CHECK(norm_groups_for(13, 8) == 1);
}
