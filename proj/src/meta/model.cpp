#include "metafas/meta/model.hpp"

#include <cmath>

#include "metafas/data/color.hpp"
#include "metafas/parallel.hpp"

namespace metafas::meta {

namespace {

struct NetContextCache : ContextCacheBase {
    std::vector<net::SampleCache> samples;
    std::vector<const data::ImageSample*> inputs;
};

struct NetHeadCache : HeadCacheBase {
    std::vector<net::MetaHeadCache> heads;
    std::vector<std::vector<double>> trip_embeddings;
    loss::TripletConfig trip_cfg;
};

}  // namespace

NetModel::NetModel(net::NetConfig cfg, int threads) : net_(cfg), threads_(std::max(1, threads)) {}

net::NetworkParams NetModel::init_params(Rng& rng) const { return net_.init_params(rng); }

ContextResult NetModel::forward_context(const net::NetworkParams& params, const data::Batch& batch) const {
    const int n = static_cast<int>(batch.samples.size());
    auto cache = std::make_unique<NetContextCache>();
    cache->samples.resize(n);
    cache->inputs = batch.samples;

    ContextResult ctx;
    ctx.embeddings.resize(n);
    ctx.labels.resize(n);
    std::vector<double> dep(n, 0.0), seg(n, 0.0);

    const int side = net_.config().image_size;
    parallel_for(n, threads_, [&](int i, int) {
        net::Workspace ws;
        const data::ImageSample& s = *batch.samples[i];
        const Tensor input = data::make_model_input(s, side);
        net_.forward_cached(params, input, cache->samples[i], ws);
        ctx.embeddings[i] = cache->samples[i].embedding;
        dep[i] = loss::depth_loss(cache->samples[i].depth_pred, s.depth_gt);
        const Mask gt = data::resize_nearest(s.parsing_gt, side, side);
        seg[i] = loss::seg_loss(cache->samples[i].logits, gt);
    });
    for (int i = 0; i < n; ++i) {
        ctx.labels[i] = batch.samples[i]->label;
        ctx.dep_loss += dep[i] / n;
        ctx.seg_loss += seg[i] / n;
    }
    ctx.cache = std::move(cache);
    return ctx;
}

HeadResult NetModel::forward_head(const net::ParamGroup& theta_m, const ContextResult& ctx,
                                  const loss::TripletConfig& trip_cfg) const {
    const int n = static_cast<int>(ctx.embeddings.size());
    auto cache = std::make_unique<NetHeadCache>();
    cache->trip_cfg = trip_cfg;
    cache->heads.resize(n);
    cache->trip_embeddings.resize(n);

    HeadResult head;
    head.probs.resize(n);
    for (int i = 0; i < n; ++i) {
        cache->heads[i] = net_.head_forward(theta_m, ctx.embeddings[i]);
        head.probs[i] = cache->heads[i].prob;
        cache->trip_embeddings[i] = cache->heads[i].hidden;
    }
    head.cls_loss = loss::cls_loss(head.probs, ctx.labels);
    const loss::TripletResult trip = loss::one_side_triplet_loss(cache->trip_embeddings, ctx.labels, trip_cfg);
    head.trip_loss = trip.loss;
    head.trip_stats = trip.stats;
    head.cache = std::move(cache);
    return head;
}

void NetModel::backward_head(const net::ParamGroup& theta_m, const ContextResult& ctx, const HeadResult& head,
                             double w_cls, double w_trip, net::GradBuffer* d_theta_m,
                             std::vector<std::vector<double>>* d_embeddings) const {
    const auto& cache = static_cast<const NetHeadCache&>(*head.cache);
    const int n = static_cast<int>(ctx.embeddings.size());

    std::vector<double> d_probs(n, 0.0);
    if (w_cls != 0.0) loss::cls_loss_backward(head.probs, ctx.labels, w_cls, d_probs);

    std::vector<std::vector<double>> d_hidden(n);
    for (int i = 0; i < n; ++i) d_hidden[i].assign(cache.heads[i].hidden.size(), 0.0);
    if (w_trip != 0.0)
        loss::one_side_triplet_loss_grad(cache.trip_embeddings, ctx.labels, cache.trip_cfg, w_trip, d_hidden);

    for (int i = 0; i < n; ++i) {
        const double p = cache.heads[i].prob;
        const double d_logit = d_probs[i] * p * (1.0 - p);
        std::vector<double> d_emb;
        net_.head_backward(theta_m, cache.heads[i], d_logit, &d_hidden[i], d_theta_m,
                           d_embeddings ? &d_emb : nullptr);
        if (d_embeddings)
            for (size_t k = 0; k < d_emb.size(); ++k) (*d_embeddings)[i][k] += d_emb[k];
    }
}

void NetModel::backward_context(const net::NetworkParams& params, const ContextResult& ctx,
                                const std::vector<std::vector<double>>& d_embeddings, double w_dep,
                                double w_seg, net::NetworkGrads& grads) const {
    auto& cache = const_cast<NetContextCache&>(static_cast<const NetContextCache&>(*ctx.cache));
    const int n = static_cast<int>(cache.samples.size());
    const int side = net_.config().image_size;

    const int workers = std::min(threads_, n);
    std::vector<net::NetworkGrads> partial(workers, net::NetworkGrads::zeros_like(params));
    parallel_for(n, workers, [&](int i, int tid) {
        net::Workspace ws;
        const data::ImageSample& s = *cache.inputs[i];
        net::SampleCache& sc = cache.samples[i];

        Tensor d_logits(sc.logits.c, sc.logits.h, sc.logits.w);
        if (w_seg != 0.0) {
            const Mask gt = data::resize_nearest(s.parsing_gt, side, side);
            loss::seg_loss_backward(sc.logits, gt, w_seg / n, d_logits);
        }
        Tensor d_depth(1, sc.depth_pred.h, sc.depth_pred.w);
        if (w_dep != 0.0) loss::depth_loss_backward(sc.depth_pred, s.depth_gt, w_dep / n, d_depth);

        net::Network::BackwardSeeds seeds;
        seeds.d_embedding = &d_embeddings[i];
        seeds.d_logits = &d_logits;
        seeds.d_depth = &d_depth;
        net_.backward_cached(params, sc, seeds, &partial[tid], nullptr, ws);
    });
    for (int t = 0; t < workers; ++t) grads.add(partial[t]);
}

}  // namespace metafas::meta
