#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "metafas/data/types.hpp"
#include "metafas/loss/losses.hpp"
#include "metafas/meta/engine.hpp"
#include "metafas/net/network.hpp"

namespace metafas::cli {

// Fully resolved run configuration. The file format is a single JSON object
// with flat dotted keys ("train.iterations": 500); command-line --set
// key=value entries override file values. Unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency

    data::SynthConfig synth;      // synth.* (seed mirrors the top-level seed)
    net::NetConfig net;           // net.*
    loss::LossWeights weights;    // loss.*
    meta::MetaConfig meta;        // train.* (threads mirrors the top-level value)

    std::string data_root = "data";
    std::string out_dir = "out";

    std::vector<std::string> train_domains;  // empty: every domain under data_root
    std::string train_resume;

    std::string eval_checkpoint;
    std::string eval_test_domain;
    std::vector<std::string> eval_dev_domains;

    std::string export_checkpoint;
    std::string export_kind = "embeddings";  // embeddings | gradcam
    std::vector<std::string> export_domains;
    std::vector<std::string> export_splits = {"test"};
    std::string export_gradcam_target = "live";

    int resolved_threads() const;

    // Builds from a flat-key JSON object, applying defaults for absent keys.
    static RunConfig from_flat_json(const nlohmann::json& flat);
    // Reads the config file (optional, "" for defaults) and applies
    // key=value overrides in order.
    static RunConfig load(const std::string& path, const std::vector<std::string>& overrides);

    nlohmann::ordered_json to_flat_json() const;
};

}  // namespace metafas::cli
