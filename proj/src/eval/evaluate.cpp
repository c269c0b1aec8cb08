#include "metafas/eval/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "metafas/common.hpp"
#include "metafas/data/color.hpp"
#include "metafas/net/layers.hpp"
#include "metafas/parallel.hpp"

namespace metafas::eval {

std::pair<std::vector<double>, std::vector<int>> score_domain(const net::Network& net,
                                                              const net::NetworkParams& params,
                                                              const data::DomainDataset& dataset,
                                                              int threads) {
    const int n = static_cast<int>(dataset.samples.size());
    if (n == 0) throw DataError("score_domain: empty dataset " + dataset.name);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    const int side = net.config().image_size;
    parallel_for(n, threads, [&](int i, int) {
        const Tensor input = data::make_model_input(dataset.samples[i], side);
        scores[i] = net.forward(params, input).live_prob;
        labels[i] = dataset.samples[i].label;
    });
    return {std::move(scores), std::move(labels)};
}

void export_embeddings(const net::Network& net, const net::NetworkParams& params,
                       const std::vector<const data::DomainDataset*>& datasets, const std::string& path,
                       int threads) {
    if (datasets.empty()) throw DataError("export_embeddings: no datasets given");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write embeddings to " + path);

    out << "domain,label";
    for (int k = 0; k < net.embedding_size(); ++k) out << ",e" << k;
    out << "\n";

    char buf[32];
    for (const data::DomainDataset* ds : datasets) {
        const int n = static_cast<int>(ds->samples.size());
        std::vector<std::vector<double>> embs(n);
        const int side = net.config().image_size;
        parallel_for(n, threads, [&](int i, int) {
            const Tensor input = data::make_model_input(ds->samples[i], side);
            embs[i] = net.forward(params, input).embedding;
        });
        for (int i = 0; i < n; ++i) {
            out << ds->samples[i].domain_id << "," << ds->samples[i].label;
            for (double v : embs[i]) {
                std::snprintf(buf, sizeof(buf), "%.10g", v);
                out << "," << buf;
            }
            out << "\n";
        }
    }
}

std::vector<EmbeddingRow> load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read embeddings from " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty embeddings file " + path);
    std::vector<EmbeddingRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        EmbeddingRow row;
        std::getline(ss, tok, ',');
        row.domain = std::stoi(tok);
        std::getline(ss, tok, ',');
        row.label = std::stoi(tok);
        while (std::getline(ss, tok, ',')) row.values.push_back(std::stod(tok));
        rows.push_back(std::move(row));
    }
    return rows;
}

Tensor grad_cam_feature_grad(const net::Network& net, const net::NetworkParams& params, const Tensor& input,
                             CamTarget target) {
    net::SampleCache cache;
    net::Workspace ws;
    net.forward_cached(params, input, cache, ws);
    const net::MetaHeadCache hc = net.head_forward(params.theta_m, cache.embedding);

    // Class score: the live logit for "live", its negation for "spoof".
    const double d_logit = target == CamTarget::live ? 1.0 : -1.0;
    std::vector<double> d_embedding;
    net.head_backward(params.theta_m, hc, d_logit, nullptr, nullptr, &d_embedding);

    net::Network::BackwardSeeds seeds;
    seeds.d_embedding = &d_embedding;
    Tensor d_f;
    net.backward_cached(params, cache, seeds, nullptr, &d_f, ws);
    return d_f;
}

Tensor cam_from_feature_grad(const Tensor& feature, const Tensor& feature_grad, int out_h, int out_w) {
    Tensor cam(1, feature.h, feature.w);
    for (int c = 0; c < feature.c; ++c) {
        double wgt = 0.0;
        const double* g = feature_grad.channel(c);
        for (int i = 0; i < feature.plane(); ++i) wgt += g[i];
        wgt /= feature.plane();
        const double* fc = feature.channel(c);
        for (int i = 0; i < feature.plane(); ++i) cam.v[i] += wgt * fc[i];
    }
    for (double& v : cam.v)
        if (v < 0.0) v = 0.0;

    Tensor up = net::resize_bilinear_forward(cam, out_h, out_w);
    double mx = 0.0;
    for (double v : up.v) mx = std::max(mx, v);
    if (mx > 0.0)
        for (double& v : up.v) v /= mx;
    return up;
}

Tensor grad_cam(const net::Network& net, const net::NetworkParams& params, const Tensor& input,
                CamTarget target) {
    net::SampleCache cache;
    net::Workspace ws;
    net.forward_cached(params, input, cache, ws);
    const net::MetaHeadCache hc = net.head_forward(params.theta_m, cache.embedding);

    const double d_logit = target == CamTarget::live ? 1.0 : -1.0;
    std::vector<double> d_embedding;
    net.head_backward(params.theta_m, hc, d_logit, nullptr, nullptr, &d_embedding);

    net::Network::BackwardSeeds seeds;
    seeds.d_embedding = &d_embedding;
    Tensor d_f;
    net.backward_cached(params, cache, seeds, nullptr, &d_f, ws);
    return cam_from_feature_grad(cache.f, d_f, input.h, input.w);
}

}  // namespace metafas::eval
