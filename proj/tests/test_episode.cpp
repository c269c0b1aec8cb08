#include <doctest.h>

#include <set>

#include "metafas/common.hpp"
#include "metafas/data/episode.hpp"
#include "metafas/data/synth.hpp"

using namespace metafas;
using namespace metafas::data;

namespace {
std::vector<DomainDataset> make_domains(int n, int live = 30, int spoof = 30, int size = 32) {
    SynthConfig cfg;
    cfg.image_size = size;
    cfg.n_domains = n;
    cfg.live_per_domain = live;
    cfg.spoof_per_domain = spoof;
    cfg.seed = 9;
    std::vector<DomainDataset> out;
    for (Domain& d : generate_all_domains(cfg)) out.push_back(std::move(d.train));
    return out;
}
}  // namespace

TEST_CASE("three domains split into two meta-train and one meta-test") {
    const auto domains = make_domains(3);
    Rng rng(1);
    const EpisodeSplit ep = sample_episode(domains, 6, rng);
    CHECK(ep.meta_train.size() == 2);
    std::set<int> train_ids;
    for (const Batch& b : ep.meta_train) train_ids.insert(b.domain_id);
    CHECK(train_ids.size() == 2);
    CHECK(train_ids.count(ep.meta_test.domain_id) == 0);
}

TEST_CASE("meta-test choice is uniform over domains") {
    // Frequency oracle: 10000 draws over 4 domains, each within 25% +/- 2%.
    const auto domains = make_domains(4, 10, 10);
    Rng rng(2);
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < 10000; ++i) {
        const EpisodeSplit ep = sample_episode(domains, 4, rng);
        counts[ep.meta_test.domain_id]++;
    }
    for (int c : counts) {
        CHECK(c > 2300);
        CHECK(c < 2700);
    }
}

TEST_CASE("batches are balanced: 10 live and 10 spoof at batch size 20") {
    const auto domains = make_domains(2);
    Rng rng(3);
    const EpisodeSplit ep = sample_episode(domains, 20, rng);
    auto count = [](const Batch& b) {
        int live = 0;
        for (const auto* s : b.samples)
            if (s->label == 1) ++live;
        return std::pair<int, int>{live, static_cast<int>(b.samples.size()) - live};
    };
    for (const Batch* b : {&ep.meta_train[0], &ep.meta_test}) {
        const auto [live, spoof] = count(*b);
        CHECK(live == 10);
        CHECK(spoof == 10);
    }
}

TEST_CASE("episode invariants hold over random configurations") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + rng.uniform_int(3);
        const int batch = 3 + rng.uniform_int(10);
        const auto domains = make_domains(n, 6 + rng.uniform_int(10), 6 + rng.uniform_int(10), 16);
        const EpisodeSplit ep = sample_episode(domains, batch, rng);
        CHECK(static_cast<int>(ep.meta_train.size()) == n - 1);
        std::set<int> ids;
        for (const Batch& b : ep.meta_train) ids.insert(b.domain_id);
        CHECK(ids.count(ep.meta_test.domain_id) == 0);
        auto check_batch = [&](const Batch& b) {
            CHECK(static_cast<int>(b.samples.size()) == batch);
            int live = 0, spoof = 0;
            for (const auto* s : b.samples) (s->label == 1 ? live : spoof)++;
            CHECK(live >= 2);
            CHECK(spoof >= 1);
            CHECK(live == (batch + 1) / 2);
        };
        for (const Batch& b : ep.meta_train) check_batch(b);
        check_batch(ep.meta_test);
    }
}

TEST_CASE("domains that cannot fill the minimums are rejected") {
    auto domains = make_domains(2, 6, 6, 16);
    // Strip all spoof samples from one domain.
    auto& samples = domains[1].samples;
    samples.erase(std::remove_if(samples.begin(), samples.end(),
                                 [](const ImageSample& s) { return s.label == 0; }),
                  samples.end());
    Rng rng(5);
    CHECK_THROWS_AS(sample_episode(domains, 6, rng), DataError);

    CHECK_THROWS_AS(sample_episode({domains[0]}, 6, rng), DataError);   // one domain
    CHECK_THROWS_AS(sample_episode(domains, 2, rng), DataError);        // batch too small
}

TEST_CASE("small domains are sampled with wraparound") {
    const auto domains = make_domains(2, 6, 6, 16);
    Rng rng(6);
    const EpisodeSplit ep = sample_episode(domains, 20, rng);
    CHECK(ep.meta_test.samples.size() == 20);
}

TEST_CASE("episode sampling is deterministic in the rng stream") {
    const auto domains = make_domains(3);
    Rng a(8), b(8);
    for (int i = 0; i < 5; ++i) {
        const EpisodeSplit ea = sample_episode(domains, 8, a);
        const EpisodeSplit eb = sample_episode(domains, 8, b);
        CHECK(ea.meta_test.domain_id == eb.meta_test.domain_id);
        for (size_t k = 0; k < ea.meta_test.samples.size(); ++k)
            CHECK(ea.meta_test.samples[k]->id == eb.meta_test.samples[k]->id);
    }
}
