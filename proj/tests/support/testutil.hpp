#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "metafas/data/types.hpp"
#include "metafas/rng.hpp"
#include "metafas/tensor.hpp"

namespace testutil {

using metafas::Rng;
using metafas::Tensor;

inline Tensor random_tensor(int c, int h, int w, Rng& rng, double lo = 0.0, double hi = 1.0) {
    Tensor t(c, h, w);
    for (double& v : t.v) v = rng.uniform(lo, hi);
    return t;
}

// A synthetic-looking sample at an arbitrary resolution: random image,
// dome depth for live / zero for spoof, random parsing labels.
inline metafas::data::ImageSample random_sample(int size, int label, Rng& rng, int domain_id = 0) {
    metafas::data::ImageSample s;
    s.id = "t" + std::to_string(rng.next_u64() % 100000);
    s.label = label;
    s.domain_id = domain_id;
    s.rgb = random_tensor(3, size, size, rng);
    s.depth_gt = Tensor(1, 32, 32);
    if (label == 1)
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                const double dx = (x - 15.5) / 16.0, dy = (y - 15.5) / 16.0;
                const double q = dx * dx + dy * dy;
                s.depth_gt.at(0, y, x) = q < 1.0 ? std::sqrt(1.0 - q) : 0.0;
            }
    s.parsing_gt = metafas::Mask(size, size);
    for (auto& v : s.parsing_gt.v) v = static_cast<std::uint8_t>(rng.uniform_int(13));
    return s;
}

// Batch with n_live live then n_spoof spoof samples. The returned samples
// must outlive the batch.
inline metafas::data::Batch make_batch(std::vector<metafas::data::ImageSample>& storage, int size,
                                       int n_live, int n_spoof, Rng& rng, int domain_id = 0) {
    metafas::data::Batch b;
    b.domain_id = domain_id;
    const size_t start = storage.size();
    for (int i = 0; i < n_live; ++i) storage.push_back(random_sample(size, 1, rng, domain_id));
    for (int i = 0; i < n_spoof; ++i) storage.push_back(random_sample(size, 0, rng, domain_id));
    for (size_t i = start; i < storage.size(); ++i) b.samples.push_back(&storage[i]);
    return b;
}

}  // namespace testutil
