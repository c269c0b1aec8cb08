#include "metafas/net/network.hpp"

#include <cmath>
#include <stdexcept>

#include "metafas/common.hpp"

namespace metafas::net {

namespace {
constexpr int kParsingChannels = 13;
constexpr int kDepthSize = 32;

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    Tensor out(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), out.v.begin());
    std::copy(b.v.begin(), b.v.end(), out.v.begin() + a.size());
    return out;
}
}  // namespace

Network::Network(NetConfig cfg) : cfg_(cfg) {
    if (cfg_.image_size % 8 != 0 || cfg_.image_size < 8)
        throw ConfigError("image_size must be a positive multiple of 8");
    if (cfg_.base_channels < 2) throw ConfigError("base_channels must be >= 2");
    if (cfg_.eca_kernel % 2 == 0 || cfg_.eca_kernel < 1) throw ConfigError("eca_kernel must be odd");

    auto add_cnr = [](ParamGroup& g, std::vector<BlobSpec>& specs, const std::string& name, int co, int ci,
                      int k) {
        CnrIds ids;
        ids.w = static_cast<int>(g.blobs.size());
        g.blobs.push_back({name + ".w", {co, ci, k, k}, std::vector<double>(static_cast<size_t>(co) * ci * k * k)});
        specs.push_back({BlobSpec::Init::conv_he});
        ids.b = static_cast<int>(g.blobs.size());
        g.blobs.push_back({name + ".b", {co}, std::vector<double>(co)});
        specs.push_back({BlobSpec::Init::bias});
        ids.gamma = static_cast<int>(g.blobs.size());
        g.blobs.push_back({name + ".gamma", {co}, std::vector<double>(co)});
        specs.push_back({BlobSpec::Init::gamma});
        ids.beta = static_cast<int>(g.blobs.size());
        g.blobs.push_back({name + ".beta", {co}, std::vector<double>(co)});
        specs.push_back({BlobSpec::Init::beta});
        return ids;
    };
    auto add_conv = [](ParamGroup& g, std::vector<BlobSpec>& specs, const std::string& name, int co, int ci,
                       int k, BlobSpec::Init init) {
        ConvIds ids;
        ids.w = static_cast<int>(g.blobs.size());
        g.blobs.push_back({name + ".w", {co, ci, k, k}, std::vector<double>(static_cast<size_t>(co) * ci * k * k)});
        specs.push_back({init});
        ids.b = static_cast<int>(g.blobs.size());
        g.blobs.push_back({name + ".b", {co}, std::vector<double>(co)});
        specs.push_back({BlobSpec::Init::bias});
        return ids;
    };

    // theta_F: the shared encoder (also the parsing U-net encoder).
    e1a_ = add_cnr(layout_f_, specs_f_, "enc1a", w1(), 6, 3);
    e1b_ = add_cnr(layout_f_, specs_f_, "enc1b", w1(), w1(), 3);
    e2a_ = add_cnr(layout_f_, specs_f_, "enc2a", w2(), w1(), 3);
    e2b_ = add_cnr(layout_f_, specs_f_, "enc2b", w2(), w2(), 3);
    e3a_ = add_cnr(layout_f_, specs_f_, "enc3a", w3(), w2(), 3);
    e3b_ = add_cnr(layout_f_, specs_f_, "enc3b", w3(), w3(), 3);

    // theta_D: depth head.
    dep1_ = add_cnr(layout_d_, specs_d_, "dep1", w2(), w3(), 3);
    dep2_ = add_conv(layout_d_, specs_d_, "dep2", 1, w2(), 3, BlobSpec::Init::conv_out);

    // theta_S: parsing decoder + attention skip branch.
    d1a_ = add_cnr(layout_s_, specs_s_, "dec1a", d1(), w3() + w2(), 3);
    d1b_ = add_cnr(layout_s_, specs_s_, "dec1b", d1(), d1(), 3);
    d2a_ = add_cnr(layout_s_, specs_s_, "dec2a", d2(), d1() + w1(), 3);
    d2b_ = add_cnr(layout_s_, specs_s_, "dec2b", d2(), d2(), 3);
    d3a_ = add_cnr(layout_s_, specs_s_, "dec3a", d3(), d2(), 3);
    d3b_ = add_cnr(layout_s_, specs_s_, "dec3b", d3(), d3(), 3);
    seg_ = add_conv(layout_s_, specs_s_, "seg", kParsingChannels, d3(), 1, BlobSpec::Init::conv_out);
    asc_ = add_cnr(layout_s_, specs_s_, "asc", cfg_.asc_channels, d3(), 3);
    eca_w_ = static_cast<int>(layout_s_.blobs.size());
    layout_s_.blobs.push_back({"eca.w", {cfg_.eca_kernel}, std::vector<double>(cfg_.eca_kernel)});
    specs_s_.push_back({BlobSpec::Init::eca});

    // theta_M: two fully connected layers.
    const int emb = embedding_size();
    fc1_w_ = static_cast<int>(layout_m_.blobs.size());
    layout_m_.blobs.push_back(
        {"fc1.w", {cfg_.hidden, emb}, std::vector<double>(static_cast<size_t>(cfg_.hidden) * emb)});
    specs_m_.push_back({BlobSpec::Init::linear_he});
    fc1_b_ = static_cast<int>(layout_m_.blobs.size());
    layout_m_.blobs.push_back({"fc1.b", {cfg_.hidden}, std::vector<double>(cfg_.hidden)});
    specs_m_.push_back({BlobSpec::Init::bias});
    fc2_w_ = static_cast<int>(layout_m_.blobs.size());
    layout_m_.blobs.push_back({"fc2.w", {1, cfg_.hidden}, std::vector<double>(cfg_.hidden)});
    specs_m_.push_back({BlobSpec::Init::linear_out});
    fc2_b_ = static_cast<int>(layout_m_.blobs.size());
    layout_m_.blobs.push_back({"fc2.b", {1}, std::vector<double>(1)});
    specs_m_.push_back({BlobSpec::Init::bias});
}

NetworkParams Network::param_layout() const { return {layout_f_, layout_d_, layout_s_, layout_m_}; }

NetworkParams Network::init_params(Rng& rng) const {
    NetworkParams p = param_layout();
    auto init_group = [&](ParamGroup& g, const std::vector<BlobSpec>& specs) {
        for (size_t i = 0; i < g.blobs.size(); ++i) {
            Blob& b = g.blobs[i];
            switch (specs[i].init) {
                case BlobSpec::Init::conv_he:
                case BlobSpec::Init::linear_he: {
                    const int fan_in = b.shape.size() == 4 ? b.shape[1] * b.shape[2] * b.shape[3] : b.shape[1];
                    const double std = std::sqrt(2.0 / fan_in);
                    for (double& x : b.v) x = rng.normal(0.0, std);
                    break;
                }
                case BlobSpec::Init::conv_out:
                case BlobSpec::Init::linear_out: {
                    const int fan_in = b.shape.size() == 4 ? b.shape[1] * b.shape[2] * b.shape[3] : b.shape[1];
                    const double std = std::sqrt(1.0 / fan_in);
                    for (double& x : b.v) x = rng.normal(0.0, std);
                    break;
                }
                case BlobSpec::Init::gamma:
                    std::fill(b.v.begin(), b.v.end(), 1.0);
                    break;
                case BlobSpec::Init::eca:
                    std::fill(b.v.begin(), b.v.end(), 0.0);
                    b.v[b.v.size() / 2] = 1.0;  // start as an identity gate
                    break;
                case BlobSpec::Init::bias:
                case BlobSpec::Init::beta:
                    std::fill(b.v.begin(), b.v.end(), 0.0);
                    break;
            }
        }
    };
    init_group(p.theta_f, specs_f_);
    init_group(p.theta_d, specs_d_);
    init_group(p.theta_s, specs_s_);
    init_group(p.theta_m, specs_m_);
    return p;
}

const Tensor& Network::cnr_forward(const Tensor& in, const CnrIds& ids, const ParamGroup& g, CnrCache& cache,
                                   Workspace& ws) const {
    Tensor pre;
    conv2d_forward(in, g.blobs[ids.w], g.blobs[ids.b], pre, ws);
    groupnorm_forward(pre, g.blobs[ids.gamma], g.blobs[ids.beta], cfg_.norm_groups, cache.out, &cache.norm);
    relu_inplace(cache.out);
    return cache.out;
}

void Network::cnr_backward(const Tensor& in, const CnrCache& cache, const CnrIds& ids, const ParamGroup& g,
                           Tensor& d_out, Tensor* d_in, GradBuffer* grads, Workspace& ws) const {
    relu_backward_inplace(cache.out, d_out);
    Tensor d_pre;
    groupnorm_backward(cache.norm, g.blobs[ids.gamma], cfg_.norm_groups, d_out, d_pre,
                       grads ? &grads->g[ids.gamma] : nullptr, grads ? &grads->g[ids.beta] : nullptr);
    conv2d_backward(in, g.blobs[ids.w], d_pre, d_in, grads ? &grads->g[ids.w] : nullptr,
                    grads ? &grads->g[ids.b] : nullptr, ws);
}

void Network::encode(const ParamGroup& theta_f, const Tensor& x, SampleCache& cache, Workspace& ws) const {
    if (x.c != 6) throw std::invalid_argument("extract_features: input must have 6 channels");
    if (x.h != x.w || x.h % 8 != 0)
        throw std::invalid_argument("extract_features: input must be square with side divisible by 8");
    cache.input = x;
    cnr_forward(cache.input, e1a_, theta_f, cache.e1a, ws);
    cnr_forward(cache.e1a.out, e1b_, theta_f, cache.e1b, ws);
    cache.p1 = avgpool2_forward(cache.e1b.out);
    cnr_forward(cache.p1, e2a_, theta_f, cache.e2a, ws);
    cnr_forward(cache.e2a.out, e2b_, theta_f, cache.e2b, ws);
    cache.p2 = avgpool2_forward(cache.e2b.out);
    cnr_forward(cache.p2, e3a_, theta_f, cache.e3a, ws);
    cnr_forward(cache.e3a.out, e3b_, theta_f, cache.e3b, ws);
    cache.f = avgpool2_forward(cache.e3b.out);
}

void Network::decode_and_heads(const NetworkParams& params, SampleCache& cache, Workspace& ws) const {
    const ParamGroup& ts = params.theta_s;
    // Parsing decoder: three upsampling stages mirroring the encoder, with
    // the matching encoder skip concatenated at the first two.
    cache.cat1 = concat_channels(upsample2_forward(cache.f), cache.p2);
    cnr_forward(cache.cat1, d1a_, ts, cache.d1a, ws);
    cnr_forward(cache.d1a.out, d1b_, ts, cache.d1b, ws);
    cache.cat2 = concat_channels(upsample2_forward(cache.d1b.out), cache.p1);
    cnr_forward(cache.cat2, d2a_, ts, cache.d2a, ws);
    cnr_forward(cache.d2a.out, d2b_, ts, cache.d2b, ws);
    cache.up3 = upsample2_forward(cache.d2b.out);
    cnr_forward(cache.up3, d3a_, ts, cache.d3a, ws);
    cnr_forward(cache.d3a.out, d3b_, ts, cache.d3b, ws);
    conv2d_forward(cache.d3b.out, ts.blobs[seg_.w], ts.blobs[seg_.b], cache.logits, ws);

    // Attention-based skip connection off the decoder's last stage.
    cnr_forward(cache.d3b.out, asc_, ts, cache.asc, ws);
    eca_forward(cache.asc.out, ts.blobs[eca_w_].v, cache.eca_out, &cache.eca);
    cache.asc_pooled = avgpool_factor_forward(cache.eca_out, cache.eca_out.h / feature_side());

    // Depth head.
    cnr_forward(cache.f, dep1_, params.theta_d, cache.dep1, ws);
    conv2d_forward(cache.dep1.out, params.theta_d.blobs[dep2_.w], params.theta_d.blobs[dep2_.b], cache.dep_sig,
                   ws);
    sigmoid_inplace(cache.dep_sig);
    cache.depth_pred = resize_bilinear_forward(cache.dep_sig, kDepthSize, kDepthSize);

    // Pooled embedding fed to the meta learner.
    cache.embedding = global_avg_pool(cache.f);
    const std::vector<double> gap_asc = global_avg_pool(cache.asc_pooled);
    cache.embedding.insert(cache.embedding.end(), gap_asc.begin(), gap_asc.end());
}

void Network::forward_cached(const NetworkParams& params, const Tensor& x, SampleCache& cache,
                             Workspace& ws) const {
    encode(params.theta_f, x, cache, ws);
    decode_and_heads(params, cache, ws);
}

MetaHeadCache Network::head_forward(const ParamGroup& theta_m, const std::vector<double>& embedding) const {
    MetaHeadCache hc;
    hc.emb = embedding;
    hc.hidden = linear_forward(hc.emb, theta_m.blobs[fc1_w_], theta_m.blobs[fc1_b_]);
    for (double& h : hc.hidden)
        if (h < 0.0) h = 0.0;
    const std::vector<double> out = linear_forward(hc.hidden, theta_m.blobs[fc2_w_], theta_m.blobs[fc2_b_]);
    hc.logit = out[0];
    hc.prob = 1.0 / (1.0 + std::exp(-hc.logit));
    return hc;
}

void Network::head_backward(const ParamGroup& theta_m, const MetaHeadCache& hc, double d_logit,
                            const std::vector<double>* d_hidden, GradBuffer* d_theta_m,
                            std::vector<double>* d_embedding) const {
    std::vector<double> d_h = d_hidden ? *d_hidden : std::vector<double>(hc.hidden.size(), 0.0);
    if (d_logit != 0.0) {
        const std::vector<double> d_out{d_logit};
        std::vector<double> d_h2;
        linear_backward(hc.hidden, theta_m.blobs[fc2_w_], d_out, &d_h2,
                        d_theta_m ? &d_theta_m->g[fc2_w_] : nullptr,
                        d_theta_m ? &d_theta_m->g[fc2_b_] : nullptr);
        for (size_t i = 0; i < d_h.size(); ++i) d_h[i] += d_h2[i];
    }
    for (size_t i = 0; i < d_h.size(); ++i)
        if (hc.hidden[i] <= 0.0) d_h[i] = 0.0;
    linear_backward(hc.emb, theta_m.blobs[fc1_w_], d_h, d_embedding,
                    d_theta_m ? &d_theta_m->g[fc1_w_] : nullptr, d_theta_m ? &d_theta_m->g[fc1_b_] : nullptr);
}

void Network::backward_cached(const NetworkParams& params, SampleCache& cache, const BackwardSeeds& seeds,
                              NetworkGrads* grads, Tensor* d_feature_out, Workspace& ws) const {
    const ParamGroup& ts = params.theta_s;
    const int side = feature_side();
    Tensor d_f(w3(), side, side);

    // Embedding gradient splits into the two pooled halves.
    Tensor d_asc_pooled(cfg_.asc_channels, side, side);
    if (seeds.d_embedding) {
        const std::vector<double>& de = *seeds.d_embedding;
        const std::vector<double> d_gap_f(de.begin(), de.begin() + w3());
        const std::vector<double> d_gap_asc(de.begin() + w3(), de.end());
        global_avg_pool_backward(d_gap_f, d_f);
        global_avg_pool_backward(d_gap_asc, d_asc_pooled);
    }

    // Attention skip branch back to the decoder's last stage.
    Tensor d_t3;
    {
        Tensor d_eca_out = avgpool_factor_backward(d_asc_pooled, cache.eca_out.h / side);
        Tensor d_asc_in;
        eca_backward(cache.asc.out, ts.blobs[eca_w_].v, cache.eca, d_eca_out, d_asc_in,
                     grads ? &grads->s.g[eca_w_] : nullptr);
        cnr_backward(cache.d3b.out, cache.asc, asc_, ts, d_asc_in, &d_t3, grads ? &grads->s : nullptr, ws);
    }

    // Segmentation head.
    if (seeds.d_logits) {
        Tensor d_t3_seg;
        conv2d_backward(cache.d3b.out, ts.blobs[seg_.w], *seeds.d_logits, &d_t3_seg,
                        grads ? &grads->s.g[seg_.w] : nullptr, grads ? &grads->s.g[seg_.b] : nullptr, ws);
        for (size_t i = 0; i < d_t3.v.size(); ++i) d_t3.v[i] += d_t3_seg.v[i];
    }

    // Decoder stages in reverse.
    Tensor d_skip1, d_skip2;
    {
        Tensor d_d3a;
        cnr_backward(cache.d3a.out, cache.d3b, d3b_, ts, d_t3, &d_d3a, grads ? &grads->s : nullptr, ws);
        Tensor d_up3;
        cnr_backward(cache.up3, cache.d3a, d3a_, ts, d_d3a, &d_up3, grads ? &grads->s : nullptr, ws);
        Tensor d_t2 = upsample2_backward(d_up3);

        Tensor d_d2a;
        cnr_backward(cache.d2a.out, cache.d2b, d2b_, ts, d_t2, &d_d2a, grads ? &grads->s : nullptr, ws);
        Tensor d_cat2;
        cnr_backward(cache.cat2, cache.d2a, d2a_, ts, d_d2a, &d_cat2, grads ? &grads->s : nullptr, ws);
        Tensor d_up2(d1(), d_cat2.h, d_cat2.w);
        d_skip1 = Tensor(w1(), d_cat2.h, d_cat2.w);
        std::copy(d_cat2.v.begin(), d_cat2.v.begin() + d_up2.size(), d_up2.v.begin());
        std::copy(d_cat2.v.begin() + d_up2.size(), d_cat2.v.end(), d_skip1.v.begin());
        Tensor d_t1 = upsample2_backward(d_up2);

        Tensor d_d1a;
        cnr_backward(cache.d1a.out, cache.d1b, d1b_, ts, d_t1, &d_d1a, grads ? &grads->s : nullptr, ws);
        Tensor d_cat1;
        cnr_backward(cache.cat1, cache.d1a, d1a_, ts, d_d1a, &d_cat1, grads ? &grads->s : nullptr, ws);
        Tensor d_up1(w3(), d_cat1.h, d_cat1.w);
        d_skip2 = Tensor(w2(), d_cat1.h, d_cat1.w);
        std::copy(d_cat1.v.begin(), d_cat1.v.begin() + d_up1.size(), d_up1.v.begin());
        std::copy(d_cat1.v.begin() + d_up1.size(), d_cat1.v.end(), d_skip2.v.begin());
        const Tensor d_f_dec = upsample2_backward(d_up1);
        for (size_t i = 0; i < d_f.v.size(); ++i) d_f.v[i] += d_f_dec.v[i];
    }

    // Depth head.
    if (seeds.d_depth) {
        Tensor d_sig = resize_bilinear_backward(*seeds.d_depth, cache.dep_sig.h, cache.dep_sig.w);
        for (size_t i = 0; i < d_sig.v.size(); ++i) {
            const double s = cache.dep_sig.v[i];
            d_sig.v[i] *= s * (1.0 - s);
        }
        Tensor d_dep1;
        conv2d_backward(cache.dep1.out, params.theta_d.blobs[dep2_.w], d_sig, &d_dep1,
                        grads ? &grads->d.g[dep2_.w] : nullptr, grads ? &grads->d.g[dep2_.b] : nullptr, ws);
        Tensor d_f_dep;
        cnr_backward(cache.f, cache.dep1, dep1_, params.theta_d, d_dep1, &d_f_dep,
                     grads ? &grads->d : nullptr, ws);
        for (size_t i = 0; i < d_f.v.size(); ++i) d_f.v[i] += d_f_dep.v[i];
    }

    if (d_feature_out) {
        *d_feature_out = std::move(d_f);
        return;
    }

    // Encoder backward; the skips pick up their decoder contributions.
    const ParamGroup& tf = params.theta_f;
    GradBuffer* gf = grads ? &grads->f : nullptr;
    Tensor d_e3b = avgpool2_backward(d_f, cache.e3b.out.h, cache.e3b.out.w);
    Tensor d_e3a;
    cnr_backward(cache.e3a.out, cache.e3b, e3b_, tf, d_e3b, &d_e3a, gf, ws);
    Tensor d_p2;
    cnr_backward(cache.p2, cache.e3a, e3a_, tf, d_e3a, &d_p2, gf, ws);
    if (d_skip2.size() > 0)
        for (size_t i = 0; i < d_p2.v.size(); ++i) d_p2.v[i] += d_skip2.v[i];

    Tensor d_e2b = avgpool2_backward(d_p2, cache.e2b.out.h, cache.e2b.out.w);
    Tensor d_e2a;
    cnr_backward(cache.e2a.out, cache.e2b, e2b_, tf, d_e2b, &d_e2a, gf, ws);
    Tensor d_p1;
    cnr_backward(cache.p1, cache.e2a, e2a_, tf, d_e2a, &d_p1, gf, ws);
    if (d_skip1.size() > 0)
        for (size_t i = 0; i < d_p1.v.size(); ++i) d_p1.v[i] += d_skip1.v[i];

    Tensor d_e1b = avgpool2_backward(d_p1, cache.e1b.out.h, cache.e1b.out.w);
    Tensor d_e1a;
    cnr_backward(cache.e1a.out, cache.e1b, e1b_, tf, d_e1b, &d_e1a, gf, ws);
    cnr_backward(cache.input, cache.e1a, e1a_, tf, d_e1a, nullptr, gf, ws);
}

// --- stateless operations ---

FeatureMap Network::extract_features(const ParamGroup& theta_f, const Tensor& x) const {
    SampleCache cache;
    Workspace ws;
    encode(theta_f, x, cache, ws);
    FeatureMap fm;
    fm.values = std::move(cache.f);
    fm.skip1 = std::move(cache.p1);
    fm.skip2 = std::move(cache.p2);
    return fm;
}

Tensor Network::estimate_depth(const ParamGroup& theta_d, const FeatureMap& f) const {
    Workspace ws;
    CnrCache c1;
    cnr_forward(f.values, dep1_, theta_d, c1, ws);
    Tensor pre;
    conv2d_forward(c1.out, theta_d.blobs[dep2_.w], theta_d.blobs[dep2_.b], pre, ws);
    sigmoid_inplace(pre);
    return resize_bilinear_forward(pre, kDepthSize, kDepthSize);
}

Network::ParseOut Network::parse_face(const ParamGroup& theta_s, const FeatureMap& f) const {
    if (f.skip1.size() == 0 || f.skip2.size() == 0)
        throw std::invalid_argument("parse_face: encoder skips missing");
    if (f.values.c != w3() || f.skip1.c != w1() || f.skip2.c != w2())
        throw std::invalid_argument("parse_face: channel mismatch");
    if (f.skip2.h != f.values.h * 2 || f.skip1.h != f.values.h * 4)
        throw std::invalid_argument("parse_face: skip shape mismatch");
    Workspace ws;
    CnrCache c;
    ParseOut out;
    Tensor t = cnr_forward(concat_channels(upsample2_forward(f.values), f.skip2), d1a_, theta_s, c, ws);
    t = cnr_forward(t, d1b_, theta_s, c, ws);
    t = cnr_forward(concat_channels(upsample2_forward(t), f.skip1), d2a_, theta_s, c, ws);
    t = cnr_forward(t, d2b_, theta_s, c, ws);
    t = cnr_forward(upsample2_forward(t), d3a_, theta_s, c, ws);
    out.last_stage = cnr_forward(t, d3b_, theta_s, c, ws);
    conv2d_forward(out.last_stage, theta_s.blobs[seg_.w], theta_s.blobs[seg_.b], out.logits, ws);
    return out;
}

Tensor Network::attention_skip(const ParamGroup& theta_s, const Tensor& decoder_last) const {
    Workspace ws;
    CnrCache c;
    const Tensor& conv_out = cnr_forward(decoder_last, asc_, theta_s, c, ws);
    Tensor gated;
    eca_forward(conv_out, theta_s.blobs[eca_w_].v, gated, nullptr);
    return avgpool_factor_forward(gated, gated.h / feature_side());
}

Tensor Network::eca_op(const ParamGroup& theta_s, const Tensor& feature) const {
    Tensor out;
    eca_forward(feature, theta_s.blobs[eca_w_].v, out, nullptr);
    return out;
}

Network::ClassifyOut Network::classify(const ParamGroup& theta_m, const FeatureMap& f,
                                       const Tensor& asc_feature) const {
    ClassifyOut out;
    out.embedding = global_avg_pool(f.values);
    const std::vector<double> gap_asc = global_avg_pool(asc_feature);
    out.embedding.insert(out.embedding.end(), gap_asc.begin(), gap_asc.end());
    const MetaHeadCache hc = head_forward(theta_m, out.embedding);
    out.trip_embedding = hc.hidden;
    out.live_logit = hc.logit;
    out.live_prob = hc.prob;
    return out;
}

ForwardOutputs Network::forward(const NetworkParams& params, const Tensor& x) const {
    SampleCache cache;
    Workspace ws;
    forward_cached(params, x, cache, ws);
    const MetaHeadCache hc = head_forward(params.theta_m, cache.embedding);
    ForwardOutputs out;
    out.depth_pred = std::move(cache.depth_pred);
    out.parsing_logits = std::move(cache.logits);
    out.asc_feature = std::move(cache.asc_pooled);
    out.embedding = std::move(cache.embedding);
    out.trip_embedding = hc.hidden;
    out.live_logit = hc.logit;
    out.live_prob = hc.prob;
    return out;
}

}  // namespace metafas::net
