#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "metafas/common.hpp"
#include "metafas/data/dataset_io.hpp"
#include "metafas/data/synth.hpp"
#include "metafas/png_io.hpp"

using namespace metafas;
using namespace metafas::data;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("metafas_io_" + std::to_string(::getpid()) + "_" +
                                                  std::to_string(counter++))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

Domain make_domain() {
    SynthConfig cfg;
    cfg.image_size = 32;
    cfg.n_domains = 2;
    cfg.live_per_domain = 6;
    cfg.spoof_per_domain = 6;
    cfg.seed = 5;
    return generate_synthetic_domain(cfg, 0);
}
}  // namespace

TEST_CASE("save then load reproduces the dataset exactly") {
    TempDir tmp;
    const Domain out = make_domain();
    save_domain(out, tmp.path.string());
    const Domain in = load_domain((tmp.path / out.name).string());
    CHECK(in.name == out.name);
    for (Split s : {Split::train, Split::dev, Split::test}) {
        REQUIRE(in.split(s).samples.size() == out.split(s).samples.size());
        for (size_t i = 0; i < in.split(s).samples.size(); ++i) {
            const ImageSample& a = in.split(s).samples[i];
            const ImageSample& b = out.split(s).samples[i];
            CHECK(a.id == b.id);
            CHECK(a.label == b.label);
            CHECK(a.rgb.v == b.rgb.v);
            CHECK(a.depth_gt.v == b.depth_gt.v);
            CHECK(a.parsing_gt.v == b.parsing_gt.v);
        }
    }
}

TEST_CASE("a manifest entry with a missing file is rejected by name") {
    TempDir tmp;
    const Domain out = make_domain();
    save_domain(out, tmp.path.string());
    const fs::path dir = tmp.path / out.name;
    const std::string victim = out.train.samples[0].id;
    fs::remove(dir / "depth" / (victim + ".png"));
    try {
        load_domain(dir.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(victim) != std::string::npos);
    }
}

TEST_CASE("a spoof sample with a nonzero depth map fails validation") {
    TempDir tmp;
    const Domain out = make_domain();
    save_domain(out, tmp.path.string());
    const fs::path dir = tmp.path / out.name;
    const ImageSample* spoof = nullptr;
    for (const auto& s : out.train.samples)
        if (s.label == 0) {
            spoof = &s;
            break;
        }
    REQUIRE(spoof != nullptr);
    Tensor bad(1, 32, 32);
    bad.fill(0.5);
    png::write((dir / "depth" / (spoof->id + ".png")).string(), png::from_tensor_gray(bad));
    try {
        load_domain(dir.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("nonzero depth") != std::string::npos);
        CHECK(std::string(e.what()).find(spoof->id) != std::string::npos);
    }
}

TEST_CASE("malformed manifests are rejected") {
    TempDir tmp;
    fs::create_directories(tmp.path / "bad");
    std::ofstream(tmp.path / "bad" / "manifest.json") << "{ not json";
    CHECK_THROWS_AS(load_domain((tmp.path / "bad").string()), DataError);

    std::ofstream(tmp.path / "bad" / "manifest.json") << "{\"domain\": \"bad\"}";
    CHECK_THROWS_AS(load_domain((tmp.path / "bad").string()), DataError);

    std::ofstream(tmp.path / "bad" / "manifest.json") << "{\"domain\": \"bad\", \"records\": []}";
    CHECK_THROWS_AS(load_domain((tmp.path / "bad").string()), DataError);

    CHECK_THROWS_AS(load_domain((tmp.path / "missing").string()), DataError);
}
