#pragma once

#include <vector>

#include "metafas/net/layers.hpp"
#include "metafas/net/params.hpp"
#include "metafas/rng.hpp"
#include "metafas/tensor.hpp"

namespace metafas::net {

// Architecture hyperparameters. The defaults are the desk-scale structure:
// three encoder blocks of (conv3x3, norm, relu) x2 + 2x downsample with
// widths base/2*base/4*base, a mirrored three-stage decoder, a two-conv
// depth head, and a two-layer meta learner.
struct NetConfig {
    int image_size = 64;
    int base_channels = 32;
    int asc_channels = 32;  // attention-skip output width
    int hidden = 128;       // meta learner hidden width
    int norm_groups = 8;
    int eca_kernel = 3;

    bool operator==(const NetConfig&) const = default;
};

// Spatial feature after the 3-block encoder plus the two intermediate
// activations retained for the U-net decoder.
struct FeatureMap {
    Tensor values;  // 4*base x h x w, h = w = image_size/8
    Tensor skip1;   // base x H/2 x W/2
    Tensor skip2;   // 2*base x H/4 x W/4
};

struct ForwardOutputs {
    Tensor depth_pred;                   // 1 x 32 x 32, in [0,1]
    Tensor parsing_logits;               // 13 x H x W
    Tensor asc_feature;                  // asc_channels x h x w
    std::vector<double> embedding;       // pooled [f ; asc], fed to the meta learner
    std::vector<double> trip_embedding;  // meta learner hidden activation (triplet space)
    double live_logit = 0.0;
    double live_prob = 0.0;
};

struct ConvIds {
    int w = -1, b = -1;
};
struct CnrIds {
    int w = -1, b = -1, gamma = -1, beta = -1;
};

// Activation cache for one conv+norm+relu unit. The unit's input lives with
// its producer; backward passes receive it explicitly.
struct CnrCache {
    NormCache norm;
    Tensor out;
};

// Everything the backward pass needs for one sample, theta_M excluded.
struct SampleCache {
    Tensor input;  // 6 x H x W
    CnrCache e1a, e1b, e2a, e2b, e3a, e3b;
    Tensor p1, p2, f;  // post-pool encoder outputs; p1/p2 double as the skips
    Tensor cat1, cat2, up3;  // decoder stage inputs
    CnrCache d1a, d1b, d2a, d2b, d3a, d3b;
    Tensor logits;
    CnrCache asc;
    EcaCache eca;
    Tensor eca_out;
    Tensor asc_pooled;
    CnrCache dep1;
    Tensor dep_sig;  // 1 x h x w, post-sigmoid
    Tensor depth_pred;
    std::vector<double> embedding;
};

// Meta learner activations for one sample under one theta_M.
struct MetaHeadCache {
    std::vector<double> emb;
    std::vector<double> hidden;  // post-relu fc1 output
    double logit = 0.0;
    double prob = 0.0;
};

class Network {
  public:
    explicit Network(NetConfig cfg);

    const NetConfig& config() const { return cfg_; }
    int feature_channels() const { return 4 * cfg_.base_channels; }
    int feature_side() const { return cfg_.image_size / 8; }
    int embedding_size() const { return feature_channels() + cfg_.asc_channels; }

    // Freshly initialized parameter groups (He-style init, deterministic in rng).
    NetworkParams init_params(Rng& rng) const;
    // Zero-valued groups with the right layout (used for gradient layouts in tests).
    NetworkParams param_layout() const;

    // --- stateless forward operations ---
    FeatureMap extract_features(const ParamGroup& theta_f, const Tensor& x) const;
    Tensor estimate_depth(const ParamGroup& theta_d, const FeatureMap& f) const;

    struct ParseOut {
        Tensor logits;      // 13 x H x W
        Tensor last_stage;  // decoder last-stage activation
    };
    ParseOut parse_face(const ParamGroup& theta_s, const FeatureMap& f) const;
    Tensor attention_skip(const ParamGroup& theta_s, const Tensor& decoder_last) const;
    Tensor eca_op(const ParamGroup& theta_s, const Tensor& feature) const;

    struct ClassifyOut {
        double live_prob = 0.0;
        double live_logit = 0.0;
        std::vector<double> embedding;
        std::vector<double> trip_embedding;
    };
    ClassifyOut classify(const ParamGroup& theta_m, const FeatureMap& f, const Tensor& asc_feature) const;

    ForwardOutputs forward(const NetworkParams& params, const Tensor& x) const;

    // --- training path (explicit caches) ---
    void forward_cached(const NetworkParams& params, const Tensor& x, SampleCache& cache, Workspace& ws) const;
    MetaHeadCache head_forward(const ParamGroup& theta_m, const std::vector<double>& embedding) const;
    // d_hidden may be null; d_theta_m/d_embedding may be null when unused.
    void head_backward(const ParamGroup& theta_m, const MetaHeadCache& hc, double d_logit,
                       const std::vector<double>* d_hidden, GradBuffer* d_theta_m,
                       std::vector<double>* d_embedding) const;

    struct BackwardSeeds {
        const std::vector<double>* d_embedding = nullptr;
        const Tensor* d_logits = nullptr;
        const Tensor* d_depth = nullptr;
    };
    // Accumulates into grads (f/d/s used; m untouched). When d_feature_out is
    // non-null the pass stops at the encoder output and writes the total
    // gradient w.r.t. the feature map there (grad-CAM path).
    void backward_cached(const NetworkParams& params, SampleCache& cache, const BackwardSeeds& seeds,
                         NetworkGrads* grads, Tensor* d_feature_out, Workspace& ws) const;

  private:
    struct BlobSpec {
        enum class Init { conv_he, conv_out, bias, gamma, beta, linear_he, linear_out, eca } init;
    };

    NetConfig cfg_;
    ParamGroup layout_f_, layout_d_, layout_s_, layout_m_;
    std::vector<BlobSpec> specs_f_, specs_d_, specs_s_, specs_m_;

    // blob indices
    CnrIds e1a_, e1b_, e2a_, e2b_, e3a_, e3b_;
    CnrIds dep1_;
    ConvIds dep2_;
    CnrIds d1a_, d1b_, d2a_, d2b_, d3a_, d3b_;
    ConvIds seg_;
    CnrIds asc_;
    int eca_w_ = -1;
    int fc1_w_ = -1, fc1_b_ = -1, fc2_w_ = -1, fc2_b_ = -1;

    int w1() const { return cfg_.base_channels; }
    int w2() const { return 2 * cfg_.base_channels; }
    int w3() const { return 4 * cfg_.base_channels; }
    int d1() const { return w2(); }
    int d2() const { return w1(); }
    int d3() const { return std::max(cfg_.base_channels / 2, 2); }

    const Tensor& cnr_forward(const Tensor& in, const CnrIds& ids, const ParamGroup& g, CnrCache& cache,
                              Workspace& ws) const;
    void cnr_backward(const Tensor& in, const CnrCache& cache, const CnrIds& ids, const ParamGroup& g,
                      Tensor& d_out, Tensor* d_in, GradBuffer* grads, Workspace& ws) const;
    void encode(const ParamGroup& theta_f, const Tensor& x, SampleCache& cache, Workspace& ws) const;
    void decode_and_heads(const NetworkParams& params, SampleCache& cache, Workspace& ws) const;
};

}  // namespace metafas::net
