#include "metafas/cli/config.hpp"

#include <fstream>
#include <thread>

#include "metafas/common.hpp"

namespace metafas::cli {

using nlohmann::json;

namespace {


data::DomainShift shift_from_json(const json& j) {
    data::DomainShift s;
    for (const auto& [key, value] : j.items()) {
        if (key == "hue_deg") s.hue_deg = value.get<double>();
        else if (key == "blur_radius") s.blur_radius = value.get<double>();
        else if (key == "noise_sigma") s.noise_sigma = value.get<double>();
        else if (key == "moire_period") s.moire_period = value.get<double>();
        else if (key == "moire_angle_deg") s.moire_angle_deg = value.get<double>();
        else throw ConfigError("unknown domain-shift field: " + key);
    }
    return s;
}

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::vector<std::string> string_list(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("config key '" + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(get_as<std::string>(e, key));
    return out;
}

}  // namespace

int RunConfig::resolved_threads() const {
    if (threads > 0) return threads;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    return hw > 0 ? hw : 1;
}

RunConfig RunConfig::from_flat_json(const json& flat) {
    if (!flat.is_object()) throw ConfigError("config must be a JSON object with flat dotted keys");
    RunConfig c;
    for (const auto& [key, v] : flat.items()) {
        if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
        else if (key == "threads") c.threads = get_as<int>(v, key);
        else if (key == "data.root") c.data_root = get_as<std::string>(v, key);
        else if (key == "out.dir") c.out_dir = get_as<std::string>(v, key);

        else if (key == "synth.image_size") c.synth.image_size = get_as<int>(v, key);
        else if (key == "synth.n_domains") c.synth.n_domains = get_as<int>(v, key);
        else if (key == "synth.live_per_domain") c.synth.live_per_domain = get_as<int>(v, key);
        else if (key == "synth.spoof_per_domain") c.synth.spoof_per_domain = get_as<int>(v, key);
        else if (key == "synth.shifts") {
            if (!v.is_array()) throw ConfigError("synth.shifts must be a list");
            c.synth.shifts.clear();
            for (const auto& e : v) c.synth.shifts.push_back(shift_from_json(e));
        }

        else if (key == "net.image_size") c.net.image_size = get_as<int>(v, key);
        else if (key == "net.base_channels") c.net.base_channels = get_as<int>(v, key);
        else if (key == "net.asc_channels") c.net.asc_channels = get_as<int>(v, key);
        else if (key == "net.hidden") c.net.hidden = get_as<int>(v, key);
        else if (key == "net.norm_groups") c.net.norm_groups = get_as<int>(v, key);
        else if (key == "net.eca_kernel") c.net.eca_kernel = get_as<int>(v, key);

        else if (key == "loss.lambda_mtrn") c.weights.lambda_mtrn = get_as<double>(v, key);
        else if (key == "loss.lambda_mtst") c.weights.lambda_mtst = get_as<double>(v, key);
        else if (key == "loss.lambda_cls") c.weights.lambda_cls = get_as<double>(v, key);
        else if (key == "loss.lambda_dep") c.weights.lambda_dep = get_as<double>(v, key);
        else if (key == "loss.lambda_seg") c.weights.lambda_seg = get_as<double>(v, key);
        else if (key == "loss.lambda_trip") c.weights.lambda_trip = get_as<double>(v, key);

        else if (key == "train.inner_lr") c.meta.inner_lr = get_as<double>(v, key);
        else if (key == "train.lr") c.meta.outer.lr = get_as<double>(v, key);
        else if (key == "train.beta1") c.meta.outer.beta1 = get_as<double>(v, key);
        else if (key == "train.beta2") c.meta.outer.beta2 = get_as<double>(v, key);
        else if (key == "train.weight_decay") c.meta.outer.weight_decay = get_as<double>(v, key);
        else if (key == "train.iterations") c.meta.iterations = get_as<int>(v, key);
        else if (key == "train.batch_size") c.meta.batch_size = get_as<int>(v, key);
        else if (key == "train.second_order") c.meta.second_order = get_as<bool>(v, key);
        else if (key == "train.meta_enabled") c.meta.meta_enabled = get_as<bool>(v, key);
        else if (key == "train.margin_stage1") c.meta.schedule.stage1_margin = get_as<double>(v, key);
        else if (key == "train.margin_stage2") c.meta.schedule.stage2_margin = get_as<double>(v, key);
        else if (key == "train.switch_iteration") c.meta.schedule.switch_iteration = get_as<int>(v, key);
        else if (key == "train.checkpoint_every") c.meta.checkpoint_every = get_as<int>(v, key);
        else if (key == "train.domains") c.train_domains = string_list(v, key);
        else if (key == "train.resume") c.train_resume = get_as<std::string>(v, key);

        else if (key == "eval.checkpoint") c.eval_checkpoint = get_as<std::string>(v, key);
        else if (key == "eval.test_domain") c.eval_test_domain = get_as<std::string>(v, key);
        else if (key == "eval.dev_domains") c.eval_dev_domains = string_list(v, key);

        else if (key == "export.checkpoint") c.export_checkpoint = get_as<std::string>(v, key);
        else if (key == "export.kind") c.export_kind = get_as<std::string>(v, key);
        else if (key == "export.domains") c.export_domains = string_list(v, key);
        else if (key == "export.splits") c.export_splits = string_list(v, key);
        else if (key == "export.gradcam_target") c.export_gradcam_target = get_as<std::string>(v, key);

        else throw ConfigError("unknown config key: " + key);
    }
    c.synth.seed = c.seed;
    c.meta.threads = c.resolved_threads();
    return c;
}

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
    json flat = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        try {
            in >> flat;
        } catch (const std::exception& e) {
            throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
    }
    for (const std::string& kv : overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const std::exception&) {
            value = raw;  // treat unparseable values as plain strings
        }
        flat[key] = value;
    }
    return from_flat_json(flat);
}

nlohmann::ordered_json RunConfig::to_flat_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["threads"] = threads;
    j["data.root"] = data_root;
    j["out.dir"] = out_dir;
    j["synth.image_size"] = synth.image_size;
    j["synth.n_domains"] = synth.n_domains;
    j["synth.live_per_domain"] = synth.live_per_domain;
    j["synth.spoof_per_domain"] = synth.spoof_per_domain;
    {
        nlohmann::ordered_json shifts = nlohmann::ordered_json::array();
        for (const auto& s : synth.shifts.empty() ? data::default_shifts(synth.n_domains) : synth.shifts) {
            nlohmann::ordered_json e;
            e["hue_deg"] = s.hue_deg;
            e["blur_radius"] = s.blur_radius;
            e["noise_sigma"] = s.noise_sigma;
            e["moire_period"] = s.moire_period;
            e["moire_angle_deg"] = s.moire_angle_deg;
            shifts.push_back(e);
        }
        j["synth.shifts"] = shifts;
    }
    j["net.image_size"] = net.image_size;
    j["net.base_channels"] = net.base_channels;
    j["net.asc_channels"] = net.asc_channels;
    j["net.hidden"] = net.hidden;
    j["net.norm_groups"] = net.norm_groups;
    j["net.eca_kernel"] = net.eca_kernel;
    j["loss.lambda_mtrn"] = weights.lambda_mtrn;
    j["loss.lambda_mtst"] = weights.lambda_mtst;
    j["loss.lambda_cls"] = weights.lambda_cls;
    j["loss.lambda_dep"] = weights.lambda_dep;
    j["loss.lambda_seg"] = weights.lambda_seg;
    j["loss.lambda_trip"] = weights.lambda_trip;
    j["train.inner_lr"] = meta.inner_lr;
    j["train.lr"] = meta.outer.lr;
    j["train.beta1"] = meta.outer.beta1;
    j["train.beta2"] = meta.outer.beta2;
    j["train.weight_decay"] = meta.outer.weight_decay;
    j["train.iterations"] = meta.iterations;
    j["train.batch_size"] = meta.batch_size;
    j["train.second_order"] = meta.second_order;
    j["train.meta_enabled"] = meta.meta_enabled;
    j["train.margin_stage1"] = meta.schedule.stage1_margin;
    j["train.margin_stage2"] = meta.schedule.stage2_margin;
    j["train.switch_iteration"] = meta.schedule.switch_iteration;
    j["train.checkpoint_every"] = meta.checkpoint_every;
    j["train.domains"] = train_domains;
    j["train.resume"] = train_resume;
    j["eval.checkpoint"] = eval_checkpoint;
    j["eval.test_domain"] = eval_test_domain;
    j["eval.dev_domains"] = eval_dev_domains;
    j["export.checkpoint"] = export_checkpoint;
    j["export.kind"] = export_kind;
    j["export.domains"] = export_domains;
    j["export.splits"] = export_splits;
    j["export.gradcam_target"] = export_gradcam_target;
    return j;
}

}  // namespace metafas::cli
