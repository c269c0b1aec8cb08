#include "metafas/meta/engine.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "metafas/common.hpp"
#include "metafas/data/episode.hpp"
#include "metafas/net/checkpoint.hpp"

namespace metafas::meta {

namespace fs = std::filesystem;
using loss::LossBundle;
using loss::LossWeights;
using loss::TripletConfig;
using net::GradBuffer;
using net::NetworkGrads;
using net::NetworkParams;
using net::ParamGroup;

void MetaConfig::validate() const {
    if (inner_lr < 0.0) throw ConfigError("inner_lr must be >= 0");
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (batch_size < 3) throw ConfigError("batch_size must be >= 3");
    if (schedule.stage1_margin < 0.0 || schedule.stage2_margin < 0.0)
        throw ConfigError("triplet margins must be >= 0");
    if (schedule.switch_iteration > iterations)
        throw ConfigError("switch_iteration must be <= iterations");
}

namespace {

ParamGroup axpy(const ParamGroup& base, double alpha, const GradBuffer& dir) {
    ParamGroup out = base;
    for (size_t i = 0; i < out.blobs.size(); ++i)
        for (size_t j = 0; j < out.blobs[i].v.size(); ++j) out.blobs[i].v[j] += alpha * dir.g[i][j];
    return out;
}

LossBundle make_bundle(const HeadResult& head, const ContextResult& ctx, const LossWeights& w) {
    LossBundle b;
    b.cls = head.cls_loss;
    b.trip = head.trip_loss;
    b.seg = ctx.seg_loss;
    b.dep = ctx.dep_loss;
    b.triplet_stats = head.trip_stats;
    b.total = loss::stage_total(b, w);
    return b;
}

LossBundle mean_bundles(const std::vector<LossBundle>& bs, const LossWeights& w) {
    LossBundle agg;
    if (bs.empty()) return agg;
    for (const LossBundle& b : bs) {
        agg.cls += b.cls;
        agg.trip += b.trip;
        agg.seg += b.seg;
        agg.dep += b.dep;
        agg.triplet_stats.n_valid += b.triplet_stats.n_valid;
        agg.triplet_stats.n_active += b.triplet_stats.n_active;
    }
    const double inv = 1.0 / static_cast<double>(bs.size());
    agg.cls *= inv;
    agg.trip *= inv;
    agg.seg *= inv;
    agg.dep *= inv;
    agg.total = loss::stage_total(agg, w);
    return agg;
}

std::vector<std::vector<double>> zero_like_embeddings(const ContextResult& ctx) {
    std::vector<std::vector<double>> d(ctx.embeddings.size());
    for (size_t i = 0; i < d.size(); ++i) d[i].assign(ctx.embeddings[i].size(), 0.0);
    return d;
}

// Central-difference Hessian-vector product for the second-order term: the
// correction to d(total)/d(theta) is -inner_lr * d/d(theta) <g_inner, v>,
// estimated by re-evaluating the inner gradient at theta_M +/- eps*v.
void second_order_correction(const MetaModel& model, const NetworkParams& params, const ContextResult& ctx,
                             const TripletConfig& trip_cfg, double trip_gate, const GradBuffer& v,
                             double inner_lr, NetworkGrads& grads) {
    const double vnorm = std::sqrt(v.sq_norm());
    if (vnorm < 1e-12) return;
    const double eps = 1e-2 / vnorm;

    NetworkGrads side[2] = {NetworkGrads::zeros_like(params), NetworkGrads::zeros_like(params)};
    for (int s = 0; s < 2; ++s) {
        const double sign = s == 0 ? 1.0 : -1.0;
        const ParamGroup theta_pm = axpy(params.theta_m, sign * eps, v);
        const HeadResult head = model.forward_head(theta_pm, ctx, trip_cfg);
        std::vector<std::vector<double>> d_emb = zero_like_embeddings(ctx);
        model.backward_head(theta_pm, ctx, head, 1.0, trip_gate, &side[s].m, &d_emb);
        model.backward_context(params, ctx, d_emb, 0.0, 0.0, side[s]);
    }
    const double scale = -inner_lr / (2.0 * eps);
    auto apply = [&](GradBuffer& dst, const GradBuffer& plus, const GradBuffer& minus) {
        for (size_t i = 0; i < dst.g.size(); ++i)
            for (size_t j = 0; j < dst.g[i].size(); ++j)
                dst.g[i][j] += scale * (plus.g[i][j] - minus.g[i][j]);
    };
    apply(grads.f, side[0].f, side[1].f);
    apply(grads.s, side[0].s, side[1].s);
    apply(grads.m, side[0].m, side[1].m);
}

MetaStepReport joint_losses_and_grads(const MetaModel& model, const NetworkParams& params,
                                      const data::EpisodeSplit& episode, const LossWeights& weights,
                                      const TripletConfig& trip_cfg, NetworkGrads& grads) {
    std::vector<const data::Batch*> batches;
    for (const data::Batch& b : episode.meta_train) batches.push_back(&b);
    batches.push_back(&episode.meta_test);

    MetaStepReport report;
    const double c = 1.0 / static_cast<double>(batches.size());
    for (const data::Batch* batch : batches) {
        const ContextResult ctx = model.forward_context(params, *batch);
        const HeadResult head = model.forward_head(params.theta_m, ctx, trip_cfg);
        report.mtrn.push_back(make_bundle(head, ctx, weights));
        std::vector<std::vector<double>> d_emb = zero_like_embeddings(ctx);
        model.backward_head(params.theta_m, ctx, head, c * weights.lambda_cls, c * weights.lambda_trip,
                            &grads.m, &d_emb);
        model.backward_context(params, ctx, d_emb, c * weights.lambda_dep, c * weights.lambda_seg, grads);
    }
    report.mtrn_agg = mean_bundles(report.mtrn, weights);
    report.total = report.mtrn_agg.total;
    if (!std::isfinite(report.total))
        throw NumericError("joint training step produced a non-finite loss: " + std::to_string(report.total));
    return report;
}

}  // namespace

ParamGroup inner_update(const MetaModel& model, const NetworkParams& params, const data::Batch& batch,
                        double inner_lr, const TripletConfig& trip_cfg) {
    const ContextResult ctx = model.forward_context(params, batch);
    const HeadResult head = model.forward_head(params.theta_m, ctx, trip_cfg);
    GradBuffer g_inner = GradBuffer::zeros_like(params.theta_m);
    model.backward_head(params.theta_m, ctx, head, 1.0, 1.0, &g_inner, nullptr);
    return axpy(params.theta_m, -inner_lr, g_inner);
}

std::vector<LossBundle> meta_test_losses(const MetaModel& model, const NetworkParams& params,
                                         const std::vector<ParamGroup>& theta_m_primes,
                                         const data::Batch& meta_test, const TripletConfig& trip_cfg) {
    if (theta_m_primes.empty()) throw std::invalid_argument("meta_test_losses: need >= 1 updated meta learner");
    const ContextResult ctx = model.forward_context(params, meta_test);
    std::vector<LossBundle> bundles;
    bundles.reserve(theta_m_primes.size());
    const LossWeights unit;  // bundle totals use the default weights here
    for (const ParamGroup& theta : theta_m_primes) {
        const HeadResult head = model.forward_head(theta, ctx, trip_cfg);
        bundles.push_back(make_bundle(head, ctx, unit));
    }
    return bundles;
}

MetaStepReport meta_losses_and_grads(const MetaModel& model, const NetworkParams& params,
                                     const data::EpisodeSplit& episode, const MetaConfig& cfg,
                                     const LossWeights& weights, const TripletConfig& trip_cfg,
                                     NetworkGrads& grads) {
    weights.validate();
    if (!cfg.meta_enabled) return joint_losses_and_grads(model, params, episode, weights, trip_cfg, grads);

    const int n1 = static_cast<int>(episode.meta_train.size());
    if (n1 < 1) throw std::invalid_argument("meta_step: episode has no meta-train domains");

    MetaStepReport report;

    // The inner update follows the unweighted L_cls + L_trip form; the
    // triplet term is gated off when lambda_trip is zero so the ablation
    // removes it everywhere.
    const double trip_gate = weights.lambda_trip > 0.0 ? 1.0 : 0.0;
    const double c_mtrn = weights.lambda_mtrn / n1;
    const double c_mtst = weights.lambda_mtst / n1;
    const bool want_second = cfg.second_order && cfg.inner_lr != 0.0;

    std::vector<ParamGroup> theta_primes(n1);
    std::vector<ContextResult> kept_ctx;
    if (want_second) kept_ctx.reserve(n1);

    for (int i = 0; i < n1; ++i) {
        ContextResult ctx = model.forward_context(params, episode.meta_train[i]);
        const HeadResult head = model.forward_head(params.theta_m, ctx, trip_cfg);
        report.mtrn.push_back(make_bundle(head, ctx, weights));

        std::vector<std::vector<double>> d_emb = zero_like_embeddings(ctx);
        model.backward_head(params.theta_m, ctx, head, c_mtrn * weights.lambda_cls,
                            c_mtrn * weights.lambda_trip, &grads.m, &d_emb);
        model.backward_context(params, ctx, d_emb, c_mtrn * weights.lambda_dep, c_mtrn * weights.lambda_seg,
                               grads);

        GradBuffer g_inner = GradBuffer::zeros_like(params.theta_m);
        model.backward_head(params.theta_m, ctx, head, 1.0, trip_gate, &g_inner, nullptr);
        theta_primes[i] = axpy(params.theta_m, -cfg.inner_lr, g_inner);

        if (want_second) kept_ctx.push_back(std::move(ctx));
    }

    const ContextResult ctx_k = model.forward_context(params, episode.meta_test);
    std::vector<std::vector<double>> d_emb_k = zero_like_embeddings(ctx_k);
    for (int i = 0; i < n1; ++i) {
        const HeadResult head = model.forward_head(theta_primes[i], ctx_k, trip_cfg);
        report.mtst.push_back(make_bundle(head, ctx_k, weights));
        // First-order: the gradient w.r.t. theta_M_i' lands on theta_M.
        model.backward_head(theta_primes[i], ctx_k, head, c_mtst * weights.lambda_cls,
                            c_mtst * weights.lambda_trip, &grads.m, &d_emb_k);
        if (want_second) {
            GradBuffer v = GradBuffer::zeros_like(params.theta_m);
            model.backward_head(theta_primes[i], ctx_k, head, c_mtst * weights.lambda_cls,
                                c_mtst * weights.lambda_trip, &v, nullptr);
            second_order_correction(model, params, kept_ctx[i], trip_cfg, trip_gate, v, cfg.inner_lr, grads);
        }
    }
    model.backward_context(params, ctx_k, d_emb_k, weights.lambda_mtst * weights.lambda_dep,
                           weights.lambda_mtst * weights.lambda_seg, grads);

    report.mtrn_agg = mean_bundles(report.mtrn, weights);
    report.mtst_agg = mean_bundles(report.mtst, weights);
    report.total = loss::overall_loss(report.mtrn_agg, report.mtst_agg, weights);
    if (!std::isfinite(report.total))
        throw NumericError("meta_step produced a non-finite total loss (cls=" +
                           std::to_string(report.mtrn_agg.cls) + ", trip=" + std::to_string(report.mtrn_agg.trip) +
                           ", seg=" + std::to_string(report.mtrn_agg.seg) + ", dep=" +
                           std::to_string(report.mtrn_agg.dep) + ")");
    return report;
}

MetaStepReport meta_step(const MetaModel& model, NetworkParams& params, Adam& adam,
                         const data::EpisodeSplit& episode, const MetaConfig& cfg,
                         const LossWeights& weights, const TripletConfig& trip_cfg) {
    NetworkGrads grads = NetworkGrads::zeros_like(params);
    MetaStepReport report = meta_losses_and_grads(model, params, episode, cfg, weights, trip_cfg, grads);
    report.grad_norm_f = std::sqrt(grads.f.sq_norm());
    report.grad_norm_d = std::sqrt(grads.d.sq_norm());
    report.grad_norm_s = std::sqrt(grads.s.sq_norm());
    report.grad_norm_m = std::sqrt(grads.m.sq_norm());
    adam.step(params, grads);
    return report;
}

namespace {

nlohmann::ordered_json bundle_to_json(const LossBundle& b) {
    return {{"cls", b.cls},
            {"trip", b.trip},
            {"seg", b.seg},
            {"dep", b.dep},
            {"total", b.total},
            {"n_valid", b.triplet_stats.n_valid},
            {"n_active", b.triplet_stats.n_active}};
}

void save_training_checkpoint(const std::string& dir, const NetModel& model, const NetworkParams& params,
                              const Adam& adam, std::int64_t step, const Rng& rng) {
    net::Checkpoint ck;
    ck.config = model.network().config();
    ck.step = step;
    ck.rng_state = rng.state();
    ck.params = params;
    ck.adam_t = adam.t();
    ck.extras.emplace_back("adam_m_theta_f", adam.moment1().f);
    ck.extras.emplace_back("adam_m_theta_d", adam.moment1().d);
    ck.extras.emplace_back("adam_m_theta_s", adam.moment1().s);
    ck.extras.emplace_back("adam_m_theta_m", adam.moment1().m);
    ck.extras.emplace_back("adam_v_theta_f", adam.moment2().f);
    ck.extras.emplace_back("adam_v_theta_d", adam.moment2().d);
    ck.extras.emplace_back("adam_v_theta_s", adam.moment2().s);
    ck.extras.emplace_back("adam_v_theta_m", adam.moment2().m);
    net::save_checkpoint(dir, ck);
}

}  // namespace

TrainResult train(const NetModel& model, const std::vector<data::DomainDataset>& domains,
                  const TrainConfig& cfg) {
    cfg.meta.validate();
    cfg.weights.validate();
    if (domains.size() < 2) throw DataError("train: need at least 2 source domains");
    fs::create_directories(cfg.out_dir);

    Rng rng(cfg.seed);
    NetworkParams params = model.init_params(rng);
    Adam adam(cfg.meta.outer, params);
    std::int64_t start = 0;

    if (!cfg.resume.empty()) {
        net::Checkpoint ck = net::load_checkpoint(cfg.resume);
        if (!(ck.config == model.network().config()))
            throw ConfigError("resume checkpoint architecture does not match the configured network");
        params = std::move(ck.params);
        rng.set_state(ck.rng_state);
        start = ck.step;
        NetworkGrads m = NetworkGrads::zeros_like(params);
        NetworkGrads v = NetworkGrads::zeros_like(params);
        for (auto& [name, buf] : ck.extras) {
            if (name == "adam_m_theta_f") m.f = std::move(buf);
            else if (name == "adam_m_theta_d") m.d = std::move(buf);
            else if (name == "adam_m_theta_s") m.s = std::move(buf);
            else if (name == "adam_m_theta_m") m.m = std::move(buf);
            else if (name == "adam_v_theta_f") v.f = std::move(buf);
            else if (name == "adam_v_theta_d") v.d = std::move(buf);
            else if (name == "adam_v_theta_s") v.s = std::move(buf);
            else if (name == "adam_v_theta_m") v.m = std::move(buf);
        }
        adam.restore(std::move(m), std::move(v), ck.adam_t);
    }

    const std::string log_path = (fs::path(cfg.out_dir) / "train_log.jsonl").string();
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) throw DataError("cannot write training log at " + log_path);

    for (std::int64_t it = start; it < cfg.meta.iterations; ++it) {
        const TripletConfig trip_cfg = cfg.meta.triplet_at(static_cast<int>(it));
        const data::EpisodeSplit episode = data::sample_episode(domains, cfg.meta.batch_size, rng);

        const auto t0 = std::chrono::steady_clock::now();
        const MetaStepReport rep = meta_step(model, params, adam, episode, cfg.meta, cfg.weights, trip_cfg);
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

        nlohmann::ordered_json line;
        line["iteration"] = it;
        line["mtrn"] = bundle_to_json(rep.mtrn_agg);
        line["mtst"] = bundle_to_json(rep.mtst_agg);
        line["total"] = rep.total;
        line["margin"] = trip_cfg.margin;
        line["mining"] = trip_cfg.mining == loss::Mining::batch_all ? "batch_all" : "batch_hard";
        line["grad_norms"] = {{"theta_f", rep.grad_norm_f},
                              {"theta_d", rep.grad_norm_d},
                              {"theta_s", rep.grad_norm_s},
                              {"theta_m", rep.grad_norm_m}};
        line["wall_ms"] = wall_ms;
        log << line.dump() << std::endl;

        if (cfg.meta.checkpoint_every > 0 && (it + 1) % cfg.meta.checkpoint_every == 0 &&
            it + 1 < cfg.meta.iterations) {
            const std::string dir = (fs::path(cfg.out_dir) / ("ckpt_" + std::to_string(it + 1))).string();
            try {
                save_training_checkpoint(dir, model, params, adam, it + 1, rng);
            } catch (const DataError& e) {
                throw DataError("checkpoint write failed at " + dir + ": " + e.what());
            }
        }
    }

    const std::string final_dir = (fs::path(cfg.out_dir) / "ckpt_final").string();
    save_training_checkpoint(final_dir, model, params, adam, cfg.meta.iterations, rng);
    return {final_dir, log_path};
}

}  // namespace metafas::meta
