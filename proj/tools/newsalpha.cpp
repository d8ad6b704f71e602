#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "newsalpha/errors.hpp"

namespace fs = std::filesystem;
using namespace newsalpha;

namespace {

int exit_code(ErrorClass c) {
    switch (c) {
        case ErrorClass::Config: return 2;
        case ErrorClass::Data: return 3;
        case ErrorClass::Incompatible: return 4;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"News-driven sentiment classification and long-short backtesting"};
    app.set_version_flag("--version", NEWSALPHA_VERSION);
    app.require_subcommand(1);

    fs::path config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "INI configuration file");
    app.add_option("-s,--set", overrides, "Override a configuration value, e.g. rnn.seed=7")->take_all();

    fs::path labels, model, scores, precomputed, output, ledger_dir;
    std::vector<fs::path> embeddings;

    cli::SynthOptions synth;
    std::string preset = "strong";
    auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-signal corpus");
    synth_cmd->add_option("-o,--out", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--preset", preset, "strong or zero")->check(CLI::IsMember({"strong", "zero"}));
    synth_cmd->add_option("--seed", synth.spec.seed);
    synth_cmd->add_option("--stocks", synth.spec.n_stocks);
    synth_cmd->add_option("--days", synth.spec.n_days);
    synth_cmd->add_option("--per-day", synth.spec.headlines_per_day);
    synth_cmd->add_option("--vocabulary", synth.spec.vocabulary_size);
    synth_cmd->add_option("--effect", synth.spec.effect_size);
    synth_cmd->add_option("--noise", synth.spec.noise_volatility);
    synth_cmd->add_option("--table-dim", synth.table_dim);
    synth_cmd->add_option("--layers", synth.layers, "Also write synthetic contextual embeddings for these layers")
        ->delimiter(',');

    auto* label_cmd = app.add_subcommand("label", "Compute forward returns and labels for one window");
    label_cmd->add_option("-o,--output", output)->required();

    auto* train_cmd = app.add_subcommand("train", "Train the configured model");
    train_cmd->add_option("-l,--labels", labels)->required();
    train_cmd->add_option("-o,--output", output)->required();

    auto* score_cmd = app.add_subcommand("score", "Score every labeled headline");
    score_cmd->add_option("-l,--labels", labels)->required();
    auto* model_opt = score_cmd->add_option("-m,--model", model);
    score_cmd->add_option("--precomputed", precomputed, "news_id,p_plus CSV")->excludes(model_opt);
    score_cmd->add_option("-o,--output", output)->required();

    auto* eval_cmd = app.add_subcommand("eval", "Accuracy and MCC on the extreme sets");
    eval_cmd->add_option("-l,--labels", labels)->required();
    eval_cmd->add_option("-S,--scores", scores)->required();
    eval_cmd->add_option("-o,--output", output)->required();

    auto* bt_cmd = app.add_subcommand("backtest", "Simulate S1 and S2 over the test span");
    bt_cmd->add_option("-S,--scores", scores)->required();
    bt_cmd->add_option("-o,--output", output, "Summary CSV")->required();
    bt_cmd->add_option("--ledgers", ledger_dir, "Directory for per-run ledgers");

    auto* ab_cmd = app.add_subcommand("ablate-layer", "Compare contextual embeddings from different layers");
    ab_cmd->add_option("-l,--labels", labels)->required();
    ab_cmd->add_option("-e,--embeddings", embeddings)->required()->expected(3);
    ab_cmd->add_option("-o,--output", output)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) {
            if (preset == "zero" && synth_cmd->count("--effect") == 0) synth.spec.effect_size = 0;
            cli::cmd_synth(synth);
            return 0;
        }
        RunConfig cfg;
        fs::path base;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot open " + config_path.string());
            base = config_path.parent_path();
            cfg = parse_run_config(f, base);
        }
        for (const auto& o : overrides) {
            auto eq = o.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + o + "'");
            set_run_config_value(cfg, o.substr(0, eq), o.substr(eq + 1));
        }
        cfg.validate();

        if (label_cmd->parsed()) cli::cmd_label(cfg, output);
        else if (train_cmd->parsed()) cli::cmd_train(cfg, labels, output);
        else if (score_cmd->parsed()) cli::cmd_score(cfg, labels, model, precomputed, output);
        else if (eval_cmd->parsed()) cli::cmd_eval(cfg, labels, scores, output);
        else if (bt_cmd->parsed()) cli::cmd_backtest(cfg, scores, output, ledger_dir);
        else if (ab_cmd->parsed()) cli::cmd_ablate(cfg, labels, embeddings, output);
        return 0;
    } catch (const Error& e) {
        std::cerr << "newsalpha: " << e.what() << '\n';
        return exit_code(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "newsalpha: " << e.what() << '\n';
        return 1;
    }
}
