#pragma once

#include <string>
#include <utility>
#include <vector>

#include "metafas/data/types.hpp"
#include "metafas/net/network.hpp"
#include "metafas/net/params.hpp"

namespace metafas::eval {

// Live-probability per sample, order preserving, eval mode. Scoring is
// read-only on params and parallelizes across samples.
std::pair<std::vector<double>, std::vector<int>> score_domain(const net::Network& net,
                                                              const net::NetworkParams& params,
                                                              const data::DomainDataset& dataset,
                                                              int threads = 1);

// CSV with header domain,label,e0,...,eK; one row per sample, embedding =
// the pooled pre-meta-learner vector (the t-SNE input).
void export_embeddings(const net::Network& net, const net::NetworkParams& params,
                       const std::vector<const data::DomainDataset*>& datasets, const std::string& path,
                       int threads = 1);

struct EmbeddingRow {
    int domain = 0;
    int label = 0;
    std::vector<double> values;
};
std::vector<EmbeddingRow> load_embeddings_csv(const std::string& path);

enum class CamTarget { live, spoof };

// Gradient of the target-class score (the live logit, negated for spoof)
// w.r.t. the last extractor feature map.
Tensor grad_cam_feature_grad(const net::Network& net, const net::NetworkParams& params, const Tensor& input,
                             CamTarget target);

// The Grad-CAM combination: channel-mean gradients as weights, rectified
// weighted channel sum, bilinear upsample to out_h x out_w, max-normalized
// (an all-zero map stays zero).
Tensor cam_from_feature_grad(const Tensor& feature, const Tensor& feature_grad, int out_h, int out_w);

// Grad-CAM over the last extractor feature map.
Tensor grad_cam(const net::Network& net, const net::NetworkParams& params, const Tensor& input,
                CamTarget target);

}  // namespace metafas::eval
