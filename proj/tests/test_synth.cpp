#include <doctest.h>

#include <set>

#include "metafas/common.hpp"
#include "metafas/data/synth.hpp"

using namespace metafas;
using namespace metafas::data;

namespace {
SynthConfig small_cfg() {
    SynthConfig cfg;
    cfg.image_size = 64;
    cfg.n_domains = 2;
    cfg.live_per_domain = 10;
    cfg.spoof_per_domain = 10;
    cfg.seed = 77;
    return cfg;
}

bool samples_equal(const ImageSample& a, const ImageSample& b) {
    return a.id == b.id && a.label == b.label && a.domain_id == b.domain_id && a.rgb.v == b.rgb.v &&
           a.depth_gt.v == b.depth_gt.v && a.parsing_gt.v == b.parsing_gt.v;
}
}  // namespace

TEST_CASE("generation is byte-identical for a fixed seed") {
    const SynthConfig cfg = small_cfg();
    const Domain a = generate_synthetic_domain(cfg, 1);
    const Domain b = generate_synthetic_domain(cfg, 1);
    for (Split s : {Split::train, Split::dev, Split::test}) {
        REQUIRE(a.split(s).samples.size() == b.split(s).samples.size());
        for (size_t i = 0; i < a.split(s).samples.size(); ++i)
            CHECK(samples_equal(a.split(s).samples[i], b.split(s).samples[i]));
    }
}

TEST_CASE("spoof samples carry an all-zero depth map") {
    const Domain d = generate_synthetic_domain(small_cfg(), 0);
    int spoofs = 0;
    for (Split s : {Split::train, Split::dev, Split::test})
        for (const ImageSample& sample : d.split(s).samples)
            if (sample.label == 0) {
                ++spoofs;
                double sum = 0.0;
                for (double v : sample.depth_gt.v) sum += v;
                CHECK(sum == 0.0);
            }
    CHECK(spoofs == 10);
}

TEST_CASE("every live sample shows all 13 parsing labels") {
    const Domain d = generate_synthetic_domain(small_cfg(), 0);
    for (Split s : {Split::train, Split::dev, Split::test})
        for (const ImageSample& sample : d.split(s).samples) {
            if (sample.label != 1) continue;
            std::set<int> present(sample.parsing_gt.v.begin(), sample.parsing_gt.v.end());
            CHECK(present.size() == 13);
        }
}

TEST_CASE("generated values satisfy the image invariants") {
    const Domain d = generate_synthetic_domain(small_cfg(), 1);
    for (Split s : {Split::train, Split::dev, Split::test}) {
        CHECK(!d.split(s).samples.empty());
        bool live = false, spoof = false;
        for (const ImageSample& sample : d.split(s).samples) {
            (sample.label == 1 ? live : spoof) = true;
            for (double v : sample.rgb.v) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            for (auto p : sample.parsing_gt.v) CHECK(p <= 12);
            CHECK(sample.depth_gt.h == 32);
            CHECK(sample.depth_gt.w == 32);
        }
        CHECK(live);
        CHECK(spoof);
    }
}

TEST_CASE("live depth decays radially from the face center") {
    const Domain d = generate_synthetic_domain(small_cfg(), 0);
    const ImageSample* live = nullptr;
    for (const ImageSample& s : d.train.samples)
        if (s.label == 1) {
            live = &s;
            break;
        }
    REQUIRE(live != nullptr);
    double center = 0.0, border = 0.0;
    for (int y = 14; y < 20; ++y)
        for (int x = 14; x < 20; ++x) center += live->depth_gt.at(0, y, x);
    for (int x = 0; x < 32; ++x) border += live->depth_gt.at(0, 0, x) + live->depth_gt.at(0, 31, x);
    CHECK(center / 36.0 > 0.5);
    CHECK(border == 0.0);
}

TEST_CASE("invalid synth configs are rejected") {
    SynthConfig cfg = small_cfg();
    cfg.image_size = 60;  // not a multiple of 8
    CHECK_THROWS_AS(generate_synthetic_domain(cfg, 0), DataError);
    cfg = small_cfg();
    cfg.n_domains = 1;
    CHECK_THROWS_AS(generate_synthetic_domain(cfg, 0), DataError);
    cfg = small_cfg();
    CHECK_THROWS_AS(generate_synthetic_domain(cfg, 5), DataError);
    cfg = small_cfg();
    cfg.live_per_domain = 3;
    CHECK_THROWS_AS(generate_synthetic_domain(cfg, 0), DataError);
}

TEST_CASE("parallel generation matches sequential generation") {
    SynthConfig cfg = small_cfg();
    cfg.n_domains = 3;
    const auto seq = generate_all_domains(cfg, 1);
    const auto par = generate_all_domains(cfg, 3);
    REQUIRE(seq.size() == par.size());
    for (size_t i = 0; i < seq.size(); ++i)
        for (Split s : {Split::train, Split::dev, Split::test}) {
            REQUIRE(seq[i].split(s).samples.size() == par[i].split(s).samples.size());
            for (size_t k = 0; k < seq[i].split(s).samples.size(); ++k)
                CHECK(samples_equal(seq[i].split(s).samples[k], par[i].split(s).samples[k]));
        }
}
