#include "metafas/data/dataset_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "metafas/common.hpp"
#include "metafas/png_io.hpp"

namespace metafas::data {

namespace fs = std::filesystem;
using nlohmann::json;

void save_domain(const Domain& domain, const std::string& root) {
    const fs::path dir = fs::path(root) / domain.name;
    fs::create_directories(dir / "img");
    fs::create_directories(dir / "depth");
    fs::create_directories(dir / "parsing");

    json records = json::array();
    for (Split s : {Split::train, Split::dev, Split::test}) {
        for (const ImageSample& sample : domain.split(s).samples) {
            const std::string img_rel = "img/" + sample.id + ".png";
            const std::string depth_rel = "depth/" + sample.id + ".png";
            const std::string parsing_rel = "parsing/" + sample.id + ".png";

            png::write((dir / img_rel).string(), png::from_tensor_rgb(sample.rgb));
            png::write((dir / depth_rel).string(), png::from_tensor_gray(sample.depth_gt));

            png::Image8 mask;
            mask.h = sample.parsing_gt.h;
            mask.w = sample.parsing_gt.w;
            mask.channels = 1;
            mask.v = sample.parsing_gt.v;
            png::write((dir / parsing_rel).string(), mask);

            records.push_back({{"id", sample.id},
                               {"split", split_name(s)},
                               {"label", sample.label},
                               {"image", img_rel},
                               {"depth", depth_rel},
                               {"parsing", parsing_rel}});
        }
    }

    json manifest = {{"domain", domain.name}, {"records", records}};
    std::ofstream out(dir / "manifest.json");
    if (!out) throw DataError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
}

namespace {

std::string require_string(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_string())
        throw DataError("malformed manifest: record " + ctx + " missing string field '" + key + "'");
    return j[key].get<std::string>();
}

}  // namespace

Domain load_domain(const std::string& path) {
    const fs::path dir(path);
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw DataError("no manifest.json in " + path);

    json manifest;
    try {
        std::ifstream in(manifest_path);
        in >> manifest;
    } catch (const std::exception& e) {
        throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("domain") || !manifest.contains("records") || !manifest["records"].is_array())
        throw DataError("malformed manifest " + manifest_path.string() + ": expected {domain, records[]}");

    Domain domain;
    domain.name = manifest["domain"].get<std::string>();
    for (Split s : {Split::train, Split::dev, Split::test}) {
        domain.split(s).name = domain.name;
        domain.split(s).split = s;
    }

    if (manifest["records"].empty()) throw DataError("manifest lists no records: " + manifest_path.string());

    int index = 0;
    for (const json& rec : manifest["records"]) {
        const std::string ctx = "#" + std::to_string(index++);
        const std::string id = require_string(rec, "id", ctx);
        const Split split = split_from_name(require_string(rec, "split", ctx));
        if (!rec.contains("label") || !rec["label"].is_number_integer())
            throw DataError("malformed manifest: record " + id + " missing integer label");
        const int label = rec["label"].get<int>();
        if (label != 0 && label != 1) throw DataError("sample " + id + ": label must be 0 or 1");

        auto resolve = [&](const char* key) {
            const fs::path p = dir / require_string(rec, key, id);
            if (!fs::exists(p)) throw DataError("sample " + id + ": missing file " + p.string());
            return p.string();
        };

        ImageSample sample;
        sample.id = id;
        sample.label = label;
        sample.rgb = png::to_tensor_rgb(png::read(resolve("image")));
        sample.depth_gt = png::to_tensor_gray(png::read(resolve("depth")));
        if (sample.depth_gt.h != kDepthSize || sample.depth_gt.w != kDepthSize)
            throw DataError("sample " + id + ": depth map must be 32x32");

        const png::Image8 mask = png::read(resolve("parsing"));
        if (mask.channels != 1) throw DataError("sample " + id + ": parsing mask must be grayscale");
        if (mask.h != sample.rgb.h || mask.w != sample.rgb.w)
            throw DataError("sample " + id + ": parsing mask size must match the image");
        sample.parsing_gt.h = mask.h;
        sample.parsing_gt.w = mask.w;
        sample.parsing_gt.v = mask.v;
        for (std::uint8_t v : sample.parsing_gt.v)
            if (v >= kNumParsingLabels) throw DataError("sample " + id + ": parsing label out of range");

        if (label == 0) {
            for (double v : sample.depth_gt.v)
                if (v != 0.0) throw DataError("sample " + id + ": spoof sample with nonzero depth map");
        }
        domain.split(split).samples.push_back(std::move(sample));
    }

    for (Split s : {Split::train, Split::dev, Split::test}) {
        const DomainDataset& ds = domain.split(s);
        if (ds.samples.empty()) continue;
        bool has_live = false, has_spoof = false;
        for (const ImageSample& sample : ds.samples) (sample.label == 1 ? has_live : has_spoof) = true;
        if (!has_live || !has_spoof)
            throw DataError("domain " + domain.name + " split " + split_name(s) +
                            " must contain both live and spoof samples");
    }

    // Domain ids are assigned by the caller (position in the training list);
    // default to 0 here.
    return domain;
}

}  // namespace metafas::data
