#pragma once

#include <vector>

#include "metafas/tensor.hpp"

namespace metafas::loss {

// Weights of the overall objective. Defaults follow the stated
// hyperparameters: lambda_cls=1, lambda_dep=10, lambda_seg=1,
// lambda_trip=0.5, with the meta-train and meta-test halves balanced.
struct LossWeights {
    double lambda_mtrn = 1.0;
    double lambda_mtst = 1.0;
    double lambda_cls = 1.0;
    double lambda_dep = 10.0;
    double lambda_seg = 1.0;
    double lambda_trip = 0.5;

    void validate() const;  // rejects negative weights
};

enum class Mining { batch_all, batch_hard };

struct TripletConfig {
    double margin = 0.1;
    Mining mining = Mining::batch_all;
};

struct TripletStats {
    int n_valid = 0;   // mined triples (batch_all) or anchors (batch_hard)
    int n_active = 0;  // triples with a strictly positive hinge term
};

struct LossBundle {
    double cls = 0.0;
    double trip = 0.0;
    double seg = 0.0;
    double dep = 0.0;
    double total = 0.0;  // weighted within-stage combination, no hidden terms
    TripletStats triplet_stats;
};

// lambda_cls*cls + lambda_dep*dep + lambda_seg*seg + lambda_trip*trip.
double stage_total(const LossBundle& b, const LossWeights& w);
// lambda_mtrn * stage(mtrn) + lambda_mtst * stage(mtst).
double overall_loss(const LossBundle& mtrn, const LossBundle& mtst, const LossWeights& w);

// Mean binary cross-entropy with probabilities clamped 1e-7 from the
// boundary. Gradients are the exact derivatives of the clamped expression.
double cls_loss(const std::vector<double>& probs, const std::vector<int>& labels);
void cls_loss_backward(const std::vector<double>& probs, const std::vector<int>& labels, double upstream,
                       std::vector<double>& d_probs);  // accumulates

struct Triple {
    int a, p, n;
};

// One-side mining: anchors are live only, positives live (!= anchor),
// negatives spoof. batch_all returns every valid triple; batch_hard returns
// one triple per anchor (farthest positive, closest negative) using the
// caller-supplied squared-distance matrix (row-major n x n).
std::vector<Triple> mine_one_side_triplets(const std::vector<int>& labels, Mining mode,
                                           const std::vector<double>* distances = nullptr);

struct TripletResult {
    double loss = 0.0;
    TripletStats stats;
};

// Hinge over squared Euclidean distances per mined triple. batch_all
// averages over active triples, batch_hard over anchors.
TripletResult one_side_triplet_loss(const std::vector<std::vector<double>>& embeddings,
                                    const std::vector<int>& labels, const TripletConfig& cfg);
TripletResult one_side_triplet_loss_grad(const std::vector<std::vector<double>>& embeddings,
                                         const std::vector<int>& labels, const TripletConfig& cfg,
                                         double upstream,
                                         std::vector<std::vector<double>>& d_embeddings);  // accumulates

// Per-pixel 13-way softmax cross-entropy averaged over pixels.
double seg_loss(const Tensor& parsing_logits, const Mask& parsing_gt);
void seg_loss_backward(const Tensor& parsing_logits, const Mask& parsing_gt, double upstream,
                       Tensor& d_logits);  // accumulates

// Mean squared error.
double depth_loss(const Tensor& depth_pred, const Tensor& depth_gt);
void depth_loss_backward(const Tensor& depth_pred, const Tensor& depth_gt, double upstream,
                         Tensor& d_pred);  // accumulates

}  // namespace metafas::loss
