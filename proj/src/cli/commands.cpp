#include "metafas/cli/commands.hpp"

#include <filesystem>
#include <iostream>

#include "metafas/common.hpp"
#include "metafas/data/color.hpp"
#include "metafas/data/dataset_io.hpp"
#include "metafas/data/synth.hpp"
#include "metafas/eval/evaluate.hpp"
#include "metafas/eval/metrics.hpp"
#include "metafas/net/checkpoint.hpp"
#include "metafas/png_io.hpp"

namespace metafas::cli {

namespace fs = std::filesystem;

namespace {

void set_domain_ids(data::Domain& domain, int id) {
    for (data::Split s : {data::Split::train, data::Split::dev, data::Split::test})
        for (data::ImageSample& sample : domain.split(s).samples) sample.domain_id = id;
}

std::vector<data::Domain> load_domains(const RunConfig& cfg, const std::vector<std::string>& names) {
    if (names.empty()) throw ConfigError("no domains requested");
    std::vector<data::Domain> domains;
    domains.reserve(names.size());
    for (size_t i = 0; i < names.size(); ++i) {
        data::Domain d = data::load_domain((fs::path(cfg.data_root) / names[i]).string());
        set_domain_ids(d, static_cast<int>(i));
        domains.push_back(std::move(d));
    }
    return domains;
}

net::Checkpoint load_checkpoint_checked(const RunConfig& cfg, const std::string& path) {
    if (path.empty()) throw ConfigError("no checkpoint path configured");
    net::Checkpoint ck = net::load_checkpoint(path);
    if (!(ck.config == cfg.net)) {
        const auto a = ck.config;
        const auto b = cfg.net;
        std::string diff;
        auto field = [&](const char* name, int x, int y) {
            if (x != y) diff += std::string(" ") + name + "=" + std::to_string(x) + "/" + std::to_string(y);
        };
        field("image_size", a.image_size, b.image_size);
        field("base_channels", a.base_channels, b.base_channels);
        field("asc_channels", a.asc_channels, b.asc_channels);
        field("hidden", a.hidden, b.hidden);
        field("norm_groups", a.norm_groups, b.norm_groups);
        field("eca_kernel", a.eca_kernel, b.eca_kernel);
        throw ConfigError("checkpoint architecture differs from config (checkpoint/config):" + diff);
    }
    return ck;
}

}  // namespace

void cmd_synth(const RunConfig& cfg, bool force) {
    const fs::path root(cfg.data_root);
    if (fs::exists(root) && !fs::is_empty(root) && !force)
        throw ConfigError("output data directory " + cfg.data_root + " is not empty (use --force to overwrite)");
    fs::create_directories(root);

    const std::vector<data::Domain> domains = data::generate_all_domains(cfg.synth, cfg.resolved_threads());
    for (const data::Domain& d : domains) {
        data::save_domain(d, cfg.data_root);
        // Self-check: what we wrote must load back clean.
        data::load_domain((root / d.name).string());
        std::cout << d.name << ": train=" << d.train.samples.size() << " dev=" << d.dev.samples.size()
                  << " test=" << d.test.samples.size() << "\n";
    }
    std::cout << "wrote " << domains.size() << " domains under " << cfg.data_root << "\n";
}

void cmd_train(const RunConfig& cfg) {
    std::vector<std::string> names = cfg.train_domains;
    if (names.empty()) throw ConfigError("train.domains must list at least 2 source domains");
    const std::vector<data::Domain> domains = load_domains(cfg, names);

    std::vector<data::DomainDataset> train_splits;
    for (const data::Domain& d : domains) train_splits.push_back(d.train);

    meta::NetModel model(cfg.net, cfg.resolved_threads());
    meta::TrainConfig tc;
    tc.meta = cfg.meta;
    tc.weights = cfg.weights;
    tc.seed = cfg.seed;
    tc.out_dir = cfg.out_dir;
    tc.resume = cfg.train_resume;
    const meta::TrainResult res = meta::train(model, train_splits, tc);
    std::cout << "final checkpoint: " << res.final_checkpoint << "\n";
    std::cout << "training log: " << res.log_path << "\n";
}

void cmd_eval(const RunConfig& cfg) {
    const net::Checkpoint ck = load_checkpoint_checked(cfg, cfg.eval_checkpoint);
    if (cfg.eval_test_domain.empty()) throw ConfigError("eval.test_domain is required");
    if (cfg.eval_dev_domains.empty()) throw ConfigError("eval.dev_domains must list at least one domain");

    const net::Network network(ck.config);
    const int threads = cfg.resolved_threads();

    // Threshold comes from the source domains' dev splits, applied unchanged
    // to the full held-out domain.
    std::vector<double> dev_scores;
    std::vector<int> dev_labels;
    for (const std::string& name : cfg.eval_dev_domains) {
        data::Domain d = data::load_domain((fs::path(cfg.data_root) / name).string());
        const auto [s, l] = eval::score_domain(network, ck.params, d.dev, threads);
        dev_scores.insert(dev_scores.end(), s.begin(), s.end());
        dev_labels.insert(dev_labels.end(), l.begin(), l.end());
    }
    const double threshold = eval::select_threshold(dev_scores, dev_labels);

    data::Domain test = data::load_domain((fs::path(cfg.data_root) / cfg.eval_test_domain).string());
    std::vector<double> scores;
    std::vector<int> labels;
    for (data::Split s : {data::Split::train, data::Split::dev, data::Split::test}) {
        if (test.split(s).samples.empty()) continue;
        const auto [sc, lb] = eval::score_domain(network, ck.params, test.split(s), threads);
        scores.insert(scores.end(), sc.begin(), sc.end());
        labels.insert(labels.end(), lb.begin(), lb.end());
    }

    const eval::EvalReport report = eval::make_report(std::move(scores), std::move(labels), threshold);
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / ("eval_" + cfg.eval_test_domain + ".json")).string();
    eval::write_report_json(report, path);
    std::cout << "test domain " << cfg.eval_test_domain << ": auc=" << report.auc << " hter=" << report.hter
              << " (far=" << report.far << ", frr=" << report.frr << ", threshold=" << report.threshold
              << ")\n";
    std::cout << "report: " << path << "\n";
}

void cmd_export(const RunConfig& cfg) {
    const net::Checkpoint ck = load_checkpoint_checked(cfg, cfg.export_checkpoint);
    if (cfg.export_domains.empty()) throw ConfigError("export.domains must list at least one domain");
    const net::Network network(ck.config);
    const int threads = cfg.resolved_threads();
    fs::create_directories(cfg.out_dir);

    std::vector<data::Domain> domains = load_domains(cfg, cfg.export_domains);

    if (cfg.export_kind == "embeddings") {
        for (const std::string& split_name : cfg.export_splits) {
            const data::Split split = data::split_from_name(split_name);
            std::vector<const data::DomainDataset*> sets;
            for (const data::Domain& d : domains)
                if (!d.split(split).samples.empty()) sets.push_back(&d.split(split));
            if (sets.empty()) throw DataError("no samples in requested split " + split_name);
            const std::string path =
                (fs::path(cfg.out_dir) / ("embeddings_" + split_name + ".csv")).string();
            eval::export_embeddings(network, ck.params, sets, path, threads);
            std::cout << "wrote " << path << "\n";
        }
        return;
    }
    if (cfg.export_kind == "gradcam") {
        const eval::CamTarget target =
            cfg.export_gradcam_target == "spoof" ? eval::CamTarget::spoof : eval::CamTarget::live;
        const fs::path dir = fs::path(cfg.out_dir) / "gradcam";
        fs::create_directories(dir);
        int count = 0;
        for (const data::Domain& d : domains)
            for (data::Split s : {data::Split::train, data::Split::dev, data::Split::test}) {
                if (std::find(cfg.export_splits.begin(), cfg.export_splits.end(),
                              data::split_name(s)) == cfg.export_splits.end())
                    continue;
                for (const data::ImageSample& sample : d.split(s).samples) {
                    const Tensor input = data::make_model_input(sample, network.config().image_size);
                    const Tensor cam = eval::grad_cam(network, ck.params, input, target);
                    const std::string name =
                        sample.id + "_" + cfg.export_gradcam_target + ".png";
                    png::write((dir / name).string(), png::from_tensor_gray(cam));
                    ++count;
                }
            }
        std::cout << "wrote " << count << " saliency maps under " << dir.string() << "\n";
        return;
    }
    throw ConfigError("export.kind must be 'embeddings' or 'gradcam', got: " + cfg.export_kind);
}

}  // namespace metafas::cli
