#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metafas/cli/commands.hpp"
#include "metafas/cli/config.hpp"
#include "metafas/common.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    bool print_config = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "JSON config file with flat dotted keys");
    cmd->add_option("--set", args.sets, "Override a config key (key=value), repeatable");
    cmd->add_flag("--print-config", args.print_config, "Print the fully resolved config and exit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-learned multi-task face anti-spoofing toolkit"};
    app.require_subcommand(1);

    CommonArgs synth_args, train_args, eval_args, export_args;
    bool force = false;

    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic multi-domain datasets");
    add_common(synth, synth_args);
    synth->add_flag("--force", force, "Overwrite a non-empty data directory");

    CLI::App* train = app.add_subcommand("train", "Run meta-learning training");
    add_common(train, train_args);

    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a held-out domain");
    add_common(eval_cmd, eval_args);

    CLI::App* export_cmd = app.add_subcommand("export", "Export embeddings or saliency maps");
    add_common(export_cmd, export_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    const CommonArgs& args = synth->parsed()   ? synth_args
                             : train->parsed() ? train_args
                             : eval_cmd->parsed() ? eval_args
                                                  : export_args;
    try {
        const metafas::cli::RunConfig cfg = metafas::cli::RunConfig::load(args.config_path, args.sets);
        if (args.print_config) {
            std::cout << cfg.to_flat_json().dump(2) << "\n";
            return 0;
        }
        if (synth->parsed()) metafas::cli::cmd_synth(cfg, force);
        else if (train->parsed()) metafas::cli::cmd_train(cfg);
        else if (eval_cmd->parsed()) metafas::cli::cmd_eval(cfg);
        else metafas::cli::cmd_export(cfg);
        return 0;
    } catch (const metafas::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const metafas::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const metafas::NumericError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
