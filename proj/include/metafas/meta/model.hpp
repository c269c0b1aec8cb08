#pragma once

#include <memory>
#include <vector>

#include "metafas/data/types.hpp"
#include "metafas/loss/losses.hpp"
#include "metafas/net/network.hpp"
#include "metafas/net/params.hpp"
#include "metafas/rng.hpp"

namespace metafas::meta {

// The meta engine factors every model into a theta_M-independent "context"
// (everything up to the pooled embeddings, plus the depth and segmentation
// losses) and a theta_M "head" (classification + triplet). The split is what
// lets inner updates and per-theta_M_i' meta-test evaluations reuse one
// context forward, and lets tests drive the engine with a scalar model.

struct ContextCacheBase {
    virtual ~ContextCacheBase() = default;
};
struct HeadCacheBase {
    virtual ~HeadCacheBase() = default;
};

struct ContextResult {
    std::vector<std::vector<double>> embeddings;  // n x emb, input to the meta learner
    std::vector<int> labels;
    double dep_loss = 0.0;  // batch means
    double seg_loss = 0.0;
    std::unique_ptr<ContextCacheBase> cache;
};

struct HeadResult {
    double cls_loss = 0.0;
    double trip_loss = 0.0;
    loss::TripletStats trip_stats;
    std::vector<double> probs;
    std::unique_ptr<HeadCacheBase> cache;
};

class MetaModel {
  public:
    virtual ~MetaModel() = default;

    virtual net::NetworkParams init_params(Rng& rng) const = 0;

    virtual ContextResult forward_context(const net::NetworkParams& params, const data::Batch& batch) const = 0;

    virtual HeadResult forward_head(const net::ParamGroup& theta_m, const ContextResult& ctx,
                                    const loss::TripletConfig& trip_cfg) const = 0;

    // Accumulates d(w_cls*cls + w_trip*trip)/d(theta_m) into d_theta_m and
    // the same gradient w.r.t. the embeddings into d_embeddings (either may
    // be null).
    virtual void backward_head(const net::ParamGroup& theta_m, const ContextResult& ctx, const HeadResult& head,
                               double w_cls, double w_trip, net::GradBuffer* d_theta_m,
                               std::vector<std::vector<double>>* d_embeddings) const = 0;

    // Accumulates d(w_dep*dep + w_seg*seg + <d_embeddings, embeddings>)/d(theta)
    // into grads for theta_F, theta_D, theta_S.
    virtual void backward_context(const net::NetworkParams& params, const ContextResult& ctx,
                                  const std::vector<std::vector<double>>& d_embeddings, double w_dep,
                                  double w_seg, net::NetworkGrads& grads) const = 0;
};

// The real network bound to the engine interface.
class NetModel : public MetaModel {
  public:
    NetModel(net::NetConfig cfg, int threads = 1);

    const net::Network& network() const { return net_; }
    int threads() const { return threads_; }

    net::NetworkParams init_params(Rng& rng) const override;
    ContextResult forward_context(const net::NetworkParams& params, const data::Batch& batch) const override;
    HeadResult forward_head(const net::ParamGroup& theta_m, const ContextResult& ctx,
                            const loss::TripletConfig& trip_cfg) const override;
    void backward_head(const net::ParamGroup& theta_m, const ContextResult& ctx, const HeadResult& head,
                       double w_cls, double w_trip, net::GradBuffer* d_theta_m,
                       std::vector<std::vector<double>>* d_embeddings) const override;
    void backward_context(const net::NetworkParams& params, const ContextResult& ctx,
                          const std::vector<std::vector<double>>& d_embeddings, double w_dep, double w_seg,
                          net::NetworkGrads& grads) const override;

  private:
    net::Network net_;
    int threads_;
};

}  // namespace metafas::meta
