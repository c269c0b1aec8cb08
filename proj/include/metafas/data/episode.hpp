#pragma once

#include <vector>

#include "metafas/data/types.hpp"
#include "metafas/rng.hpp"

namespace metafas::data {

// Draws one meta-learning episode: one source domain chosen uniformly as
// meta-test, the others as meta-train, with a balanced batch (ceil(b/2)
// live) sampled from every domain. Domains that cannot provide at least two
// live and one spoof sample are rejected. Domains smaller than the batch
// quota are sampled with wraparound over a shuffled order.
EpisodeSplit sample_episode(const std::vector<DomainDataset>& domains, int batch_size, Rng& rng);

}  // namespace metafas::data
