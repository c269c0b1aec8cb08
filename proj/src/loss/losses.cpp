#include "metafas/loss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metafas::loss {

namespace {
constexpr double kProbClamp = 1e-7;
constexpr int kSegClasses = 13;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}
}  // namespace

void LossWeights::validate() const {
    for (double w : {lambda_mtrn, lambda_mtst, lambda_cls, lambda_dep, lambda_seg, lambda_trip})
        if (w < 0.0) throw std::invalid_argument("loss weights must be nonnegative");
}

double stage_total(const LossBundle& b, const LossWeights& w) {
    return w.lambda_cls * b.cls + w.lambda_dep * b.dep + w.lambda_seg * b.seg + w.lambda_trip * b.trip;
}

double overall_loss(const LossBundle& mtrn, const LossBundle& mtst, const LossWeights& w) {
    w.validate();
    return w.lambda_mtrn * stage_total(mtrn, w) + w.lambda_mtst * stage_total(mtst, w);
}

double cls_loss(const std::vector<double>& probs, const std::vector<int>& labels) {
    if (probs.size() != labels.size() || probs.empty())
        throw std::invalid_argument("cls_loss: probs/labels length mismatch or empty");
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
        acc += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return acc / probs.size();
}

void cls_loss_backward(const std::vector<double>& probs, const std::vector<int>& labels, double upstream,
                       std::vector<double>& d_probs) {
    if (probs.size() != labels.size() || probs.empty())
        throw std::invalid_argument("cls_loss: probs/labels length mismatch or empty");
    const double inv_n = 1.0 / probs.size();
    for (size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < kProbClamp || probs[i] > 1.0 - kProbClamp) continue;  // inside the clamp
        const double g = labels[i] == 1 ? -1.0 / probs[i] : 1.0 / (1.0 - probs[i]);
        d_probs[i] += upstream * inv_n * g;
    }
}

std::vector<Triple> mine_one_side_triplets(const std::vector<int>& labels, Mining mode,
                                           const std::vector<double>* distances) {
    const int n = static_cast<int>(labels.size());
    std::vector<int> lives, spoofs;
    for (int i = 0; i < n; ++i) (labels[i] == 1 ? lives : spoofs).push_back(i);
    if (static_cast<int>(lives.size()) < 2 || spoofs.empty())
        throw std::invalid_argument("one-side mining needs >=2 live and >=1 spoof samples");

    std::vector<Triple> triples;
    if (mode == Mining::batch_all) {
        triples.reserve(lives.size() * (lives.size() - 1) * spoofs.size());
        for (int a : lives)
            for (int p : lives) {
                if (p == a) continue;
                for (int s : spoofs) triples.push_back({a, p, s});
            }
        return triples;
    }

    if (!distances || distances->size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("batch_hard mining needs an n x n distance matrix");
    const std::vector<double>& d = *distances;
    triples.reserve(lives.size());
    for (int a : lives) {
        int hardest_p = -1, hardest_n = -1;
        double max_dp = -1.0, min_dn = 0.0;
        for (int p : lives) {
            if (p == a) continue;
            if (d[static_cast<size_t>(a) * n + p] > max_dp) {
                max_dp = d[static_cast<size_t>(a) * n + p];
                hardest_p = p;
            }
        }
        for (int s : spoofs) {
            if (hardest_n < 0 || d[static_cast<size_t>(a) * n + s] < min_dn) {
                min_dn = d[static_cast<size_t>(a) * n + s];
                hardest_n = s;
            }
        }
        triples.push_back({a, hardest_p, hardest_n});
    }
    return triples;
}

namespace {

TripletResult triplet_core(const std::vector<std::vector<double>>& embeddings, const std::vector<int>& labels,
                           const TripletConfig& cfg, double upstream,
                           std::vector<std::vector<double>>* d_embeddings) {
    if (embeddings.size() != labels.size())
        throw std::invalid_argument("one_side_triplet_loss: embeddings/labels length mismatch");
    if (cfg.margin < 0.0) throw std::invalid_argument("triplet margin must be nonnegative");
    const int n = static_cast<int>(labels.size());

    std::vector<double> dist;
    const std::vector<double>* dist_ptr = nullptr;
    if (cfg.mining == Mining::batch_hard) {
        dist.assign(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double d = sq_dist(embeddings[i], embeddings[j]);
                dist[static_cast<size_t>(i) * n + j] = d;
                dist[static_cast<size_t>(j) * n + i] = d;
            }
        dist_ptr = &dist;
    }
    const std::vector<Triple> triples = mine_one_side_triplets(labels, cfg.mining, dist_ptr);

    TripletResult res;
    res.stats.n_valid = static_cast<int>(triples.size());

    std::vector<double> terms(triples.size());
    for (size_t t = 0; t < triples.size(); ++t) {
        const Triple& tr = triples[t];
        const double term =
            sq_dist(embeddings[tr.a], embeddings[tr.p]) - sq_dist(embeddings[tr.a], embeddings[tr.n]) + cfg.margin;
        terms[t] = term;
        if (term > 0.0) {
            res.stats.n_active += 1;
            res.loss += term;
        }
    }

    // batch_all averages over the active triples, batch_hard over anchors.
    const int denom = cfg.mining == Mining::batch_all ? std::max(res.stats.n_active, 1)
                                                      : std::max(res.stats.n_valid, 1);
    res.loss /= denom;

    if (d_embeddings) {
        const double scale = upstream / denom;
        for (size_t t = 0; t < triples.size(); ++t) {
            if (terms[t] <= 0.0) continue;
            const Triple& tr = triples[t];
            const std::vector<double>& ea = embeddings[tr.a];
            const std::vector<double>& ep = embeddings[tr.p];
            const std::vector<double>& en = embeddings[tr.n];
            std::vector<double>& da = (*d_embeddings)[tr.a];
            std::vector<double>& dp = (*d_embeddings)[tr.p];
            std::vector<double>& dn = (*d_embeddings)[tr.n];
            for (size_t k = 0; k < ea.size(); ++k) {
                const double ap = ea[k] - ep[k];
                const double an = ea[k] - en[k];
                da[k] += scale * 2.0 * (ap - an);
                dp[k] += scale * -2.0 * ap;
                dn[k] += scale * 2.0 * an;
            }
        }
    }
    return res;
}

}  // namespace

TripletResult one_side_triplet_loss(const std::vector<std::vector<double>>& embeddings,
                                    const std::vector<int>& labels, const TripletConfig& cfg) {
    return triplet_core(embeddings, labels, cfg, 0.0, nullptr);
}

TripletResult one_side_triplet_loss_grad(const std::vector<std::vector<double>>& embeddings,
                                         const std::vector<int>& labels, const TripletConfig& cfg,
                                         double upstream, std::vector<std::vector<double>>& d_embeddings) {
    return triplet_core(embeddings, labels, cfg, upstream, &d_embeddings);
}

double seg_loss(const Tensor& parsing_logits, const Mask& parsing_gt) {
    if (parsing_logits.c != kSegClasses) throw std::invalid_argument("seg_loss: expected 13 channels");
    if (parsing_logits.h != parsing_gt.h || parsing_logits.w != parsing_gt.w)
        throw std::invalid_argument("seg_loss: spatial shape mismatch");
    const int plane = parsing_logits.plane();
    double acc = 0.0;
    for (int i = 0; i < plane; ++i) {
        const int gt = parsing_gt.v[i];
        if (gt >= kSegClasses) throw std::invalid_argument("seg_loss: label outside {0..12}");
        double mx = parsing_logits.v[i];
        for (int c = 1; c < kSegClasses; ++c)
            mx = std::max(mx, parsing_logits.v[static_cast<size_t>(c) * plane + i]);
        double denom = 0.0;
        for (int c = 0; c < kSegClasses; ++c)
            denom += std::exp(parsing_logits.v[static_cast<size_t>(c) * plane + i] - mx);
        acc += -(parsing_logits.v[static_cast<size_t>(gt) * plane + i] - mx - std::log(denom));
    }
    return acc / plane;
}

void seg_loss_backward(const Tensor& parsing_logits, const Mask& parsing_gt, double upstream,
                       Tensor& d_logits) {
    if (parsing_logits.h != parsing_gt.h || parsing_logits.w != parsing_gt.w)
        throw std::invalid_argument("seg_loss: spatial shape mismatch");
    const int plane = parsing_logits.plane();
    const double scale = upstream / plane;
    for (int i = 0; i < plane; ++i) {
        const int gt = parsing_gt.v[i];
        if (gt >= kSegClasses) throw std::invalid_argument("seg_loss: label outside {0..12}");
        double mx = parsing_logits.v[i];
        for (int c = 1; c < kSegClasses; ++c)
            mx = std::max(mx, parsing_logits.v[static_cast<size_t>(c) * plane + i]);
        double denom = 0.0;
        double e[kSegClasses];
        for (int c = 0; c < kSegClasses; ++c) {
            e[c] = std::exp(parsing_logits.v[static_cast<size_t>(c) * plane + i] - mx);
            denom += e[c];
        }
        for (int c = 0; c < kSegClasses; ++c) {
            const double softmax = e[c] / denom;
            d_logits.v[static_cast<size_t>(c) * plane + i] += scale * (softmax - (c == gt ? 1.0 : 0.0));
        }
    }
}

double depth_loss(const Tensor& depth_pred, const Tensor& depth_gt) {
    if (!depth_pred.same_shape(depth_gt)) throw std::invalid_argument("depth_loss: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < depth_pred.v.size(); ++i) {
        const double d = depth_pred.v[i] - depth_gt.v[i];
        acc += d * d;
    }
    return acc / depth_pred.v.size();
}

void depth_loss_backward(const Tensor& depth_pred, const Tensor& depth_gt, double upstream, Tensor& d_pred) {
    if (!depth_pred.same_shape(depth_gt)) throw std::invalid_argument("depth_loss: shape mismatch");
    const double scale = 2.0 * upstream / depth_pred.v.size();
    for (size_t i = 0; i < depth_pred.v.size(); ++i)
        d_pred.v[i] += scale * (depth_pred.v[i] - depth_gt.v[i]);
}

}  // namespace metafas::loss
