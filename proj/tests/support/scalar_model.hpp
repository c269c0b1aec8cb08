#pragma once

#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "metafas/meta/model.hpp"

namespace testutil {

// A four-scalar model wired to the engine interface so bilevel behaviour can
// be checked against pencil-and-paper values. With u=theta_F, v=theta_D,
// w=theta_S, m=theta_M and xbar the mean image value:
//   embedding   e  = u * xbar
//   live prob      = sigmoid(m * e)          (cls = clamped mean BCE)
//   trip embedding = m * e                    (one-side triplet in 1-D)
//   dep            = mean_i (sigmoid(v*e_i) - dbar_i)^2
//   seg            = mean_i (w*e_i - sbar_i)^2
class ScalarModel : public metafas::meta::MetaModel {
    using Batch = metafas::data::Batch;
    using ParamGroup = metafas::net::ParamGroup;
    using NetworkParams = metafas::net::NetworkParams;
    using GradBuffer = metafas::net::GradBuffer;

    struct Cache : metafas::meta::ContextCacheBase {
        std::vector<double> xbar, dbar, sbar;
    };
    struct HCache : metafas::meta::HeadCacheBase {
        std::vector<std::vector<double>> trip_embeddings;
        metafas::loss::TripletConfig trip_cfg;
    };

    static ParamGroup scalar_group(const char* name, double value) {
        ParamGroup g;
        g.blobs.push_back({name, {1}, {value}});
        return g;
    }

  public:
    static NetworkParams make_params(double u, double v, double w, double m) {
        return {scalar_group("u", u), scalar_group("v", v), scalar_group("w", w), scalar_group("m", m)};
    }

    metafas::net::NetworkParams init_params(metafas::Rng& rng) const override {
        return make_params(rng.uniform(0.5, 1.5), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                           rng.uniform(0.5, 1.5));
    }

    metafas::meta::ContextResult forward_context(const NetworkParams& params,
                                                 const Batch& batch) const override {
        const double u = params.theta_f.blobs[0].v[0];
        const double v = params.theta_d.blobs[0].v[0];
        const double w = params.theta_s.blobs[0].v[0];
        auto cache = std::make_unique<Cache>();
        metafas::meta::ContextResult ctx;
        const int n = static_cast<int>(batch.samples.size());
        for (const auto* s : batch.samples) {
            const double xbar =
                std::accumulate(s->rgb.v.begin(), s->rgb.v.end(), 0.0) / static_cast<double>(s->rgb.v.size());
            const double dbar = std::accumulate(s->depth_gt.v.begin(), s->depth_gt.v.end(), 0.0) /
                                static_cast<double>(s->depth_gt.v.size());
            double sbar = 0.0;
            for (auto p : s->parsing_gt.v) sbar += p;
            sbar /= 12.0 * static_cast<double>(s->parsing_gt.v.size());
            cache->xbar.push_back(xbar);
            cache->dbar.push_back(dbar);
            cache->sbar.push_back(sbar);
            const double e = u * xbar;
            ctx.embeddings.push_back({e});
            ctx.labels.push_back(s->label);
            const double sd = 1.0 / (1.0 + std::exp(-v * e));
            ctx.dep_loss += (sd - dbar) * (sd - dbar) / n;
            ctx.seg_loss += (w * e - sbar) * (w * e - sbar) / n;
        }
        ctx.cache = std::move(cache);
        return ctx;
    }

    metafas::meta::HeadResult forward_head(const ParamGroup& theta_m, const metafas::meta::ContextResult& ctx,
                                           const metafas::loss::TripletConfig& trip_cfg) const override {
        const double m = theta_m.blobs[0].v[0];
        auto cache = std::make_unique<HCache>();
        cache->trip_cfg = trip_cfg;
        metafas::meta::HeadResult head;
        for (const auto& e : ctx.embeddings) {
            const double z = m * e[0];
            head.probs.push_back(1.0 / (1.0 + std::exp(-z)));
            cache->trip_embeddings.push_back({z});
        }
        head.cls_loss = metafas::loss::cls_loss(head.probs, ctx.labels);
        const auto trip = metafas::loss::one_side_triplet_loss(cache->trip_embeddings, ctx.labels, trip_cfg);
        head.trip_loss = trip.loss;
        head.trip_stats = trip.stats;
        head.cache = std::move(cache);
        return head;
    }

    void backward_head(const ParamGroup& theta_m, const metafas::meta::ContextResult& ctx,
                       const metafas::meta::HeadResult& head, double w_cls, double w_trip,
                       GradBuffer* d_theta_m, std::vector<std::vector<double>>* d_embeddings) const override {
        const double m = theta_m.blobs[0].v[0];
        const auto& cache = static_cast<const HCache&>(*head.cache);
        const int n = static_cast<int>(ctx.embeddings.size());

        std::vector<double> d_z(n, 0.0);
        if (w_cls != 0.0) {
            std::vector<double> d_probs(n, 0.0);
            metafas::loss::cls_loss_backward(head.probs, ctx.labels, w_cls, d_probs);
            for (int i = 0; i < n; ++i) d_z[i] += d_probs[i] * head.probs[i] * (1.0 - head.probs[i]);
        }
        if (w_trip != 0.0) {
            std::vector<std::vector<double>> d_t(n, std::vector<double>(1, 0.0));
            metafas::loss::one_side_triplet_loss_grad(cache.trip_embeddings, ctx.labels, cache.trip_cfg,
                                                      w_trip, d_t);
            for (int i = 0; i < n; ++i) d_z[i] += d_t[i][0];
        }
        for (int i = 0; i < n; ++i) {
            if (d_theta_m) d_theta_m->g[0][0] += d_z[i] * ctx.embeddings[i][0];
            if (d_embeddings) (*d_embeddings)[i][0] += d_z[i] * m;
        }
    }

    void backward_context(const NetworkParams& params, const metafas::meta::ContextResult& ctx,
                          const std::vector<std::vector<double>>& d_embeddings, double w_dep, double w_seg,
                          metafas::net::NetworkGrads& grads) const override {
        const double u = params.theta_f.blobs[0].v[0];
        const double v = params.theta_d.blobs[0].v[0];
        const double w = params.theta_s.blobs[0].v[0];
        const auto& cache = static_cast<const Cache&>(*ctx.cache);
        const int n = static_cast<int>(ctx.embeddings.size());
        for (int i = 0; i < n; ++i) {
            const double xbar = cache.xbar[i];
            const double e = u * xbar;
            grads.f.g[0][0] += d_embeddings[i][0] * xbar;
            if (w_dep != 0.0) {
                const double sd = 1.0 / (1.0 + std::exp(-v * e));
                const double d_a = w_dep * 2.0 * (sd - cache.dbar[i]) * sd * (1.0 - sd) / n;
                grads.d.g[0][0] += d_a * e;
                grads.f.g[0][0] += d_a * v * xbar;
            }
            if (w_seg != 0.0) {
                const double d_b = w_seg * 2.0 * (w * e - cache.sbar[i]) / n;
                grads.s.g[0][0] += d_b * e;
                grads.f.g[0][0] += d_b * w * xbar;
            }
        }
    }
};

// A 1x1 sample carrying the scalar quantities the model reads.
inline metafas::data::ImageSample scalar_sample(double x, int label, double dbar, double sbar) {
    metafas::data::ImageSample s;
    s.label = label;
    s.rgb = metafas::Tensor(3, 1, 1);
    s.rgb.v = {x, x, x};
    s.depth_gt = metafas::Tensor(1, 32, 32);
    if (label == 1)
        for (double& v : s.depth_gt.v) v = dbar;
    s.parsing_gt = metafas::Mask(1, 1);
    s.parsing_gt.v[0] = static_cast<std::uint8_t>(std::lround(sbar * 12.0));
    return s;
}

}  // namespace testutil
