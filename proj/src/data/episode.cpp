#include "metafas/data/episode.hpp"

#include <numeric>

#include "metafas/common.hpp"

namespace metafas::data {

namespace {

Batch sample_batch(const DomainDataset& domain, int domain_pos, int batch_size, Rng& rng) {
    std::vector<int> live_idx, spoof_idx;
    for (int i = 0; i < static_cast<int>(domain.samples.size()); ++i)
        (domain.samples[i].label == 1 ? live_idx : spoof_idx).push_back(i);

    if (static_cast<int>(live_idx.size()) < 2 || spoof_idx.empty())
        throw DataError("domain " + domain.name + " cannot fill the live/spoof minimum (needs >=2 live, >=1 spoof)");

    const int n_live = (batch_size + 1) / 2;
    const int n_spoof = batch_size - n_live;

    rng.shuffle(live_idx);
    rng.shuffle(spoof_idx);

    Batch batch;
    batch.domain_id = domain_pos;
    batch.samples.reserve(batch_size);
    for (int i = 0; i < n_live; ++i) batch.samples.push_back(&domain.samples[live_idx[i % live_idx.size()]]);
    for (int i = 0; i < n_spoof; ++i) batch.samples.push_back(&domain.samples[spoof_idx[i % spoof_idx.size()]]);
    return batch;
}

}  // namespace

EpisodeSplit sample_episode(const std::vector<DomainDataset>& domains, int batch_size, Rng& rng) {
    if (domains.size() < 2) throw DataError("sample_episode needs at least 2 source domains");
    if (batch_size < 3) throw DataError("batch_size must be >= 3 to satisfy the live/spoof minimums");

    const int n = static_cast<int>(domains.size());
    const int test_idx = rng.uniform_int(n);

    EpisodeSplit episode;
    for (int i = 0; i < n; ++i) {
        Batch batch = sample_batch(domains[i], i, batch_size, rng);
        if (i == test_idx) episode.meta_test = std::move(batch);
        else episode.meta_train.push_back(std::move(batch));
    }
    return episode;
}

}  // namespace metafas::data
