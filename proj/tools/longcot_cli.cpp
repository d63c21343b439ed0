#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "longcot/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"batch pipeline for two-stage reasoning data synthesis and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    bool resume = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* config_opt = sub->add_option("--config", config_path, "pipeline config JSON");
        if (config_required) {
            config_opt->required();
        }
        sub->add_option("--out-dir", out_dir, "override the config's output directory");
        sub->add_option("--seed-override", seed_override, "replace every stage seed with this value");
        sub->add_flag("--resume", resume, "skip stages whose recorded outputs are unchanged");
        return sub;
    };

    add_common(app.add_subcommand("ingest", "validate the corpus and write corpus.clean.jsonl"), true);
    add_common(app.add_subcommand("synthesize", "generate two-turn candidate chains"), true);
    add_common(app.add_subcommand("curate", "filter, balance, and concatenate chains"), true);
    add_common(app.add_subcommand("reject-sample", "run the escalating sampling campaign"), true);
    add_common(app.add_subcommand("assemble", "build the trainer-ready datasets"), true);
    add_common(app.add_subcommand("evaluate", "score benchmark suites and write the report"), true);
    add_common(app.add_subcommand("run", "run every enabled stage in order"), true);
    add_common(app.add_subcommand("report", "rebuild report.md from stored eval results"), false);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();

        if (name == "report") {
            std::string dir = out_dir;
            if (dir.empty()) {
                if (config_path.empty()) {
                    std::cerr << "report needs --config or --out-dir\n";
                    return 1;
                }
                dir = longcot::PipelineConfig::load(config_path).out_dir;
            }
            std::cout << longcot::regenerate_report(dir);
            return 0;
        }

        longcot::PipelineConfig config = longcot::PipelineConfig::load(config_path);
        if (!out_dir.empty()) {
            config.out_dir = out_dir;
        }
        if (name != "run") {
            // single-stage subcommands run exactly their stage (plus ingest,
            // which every stage depends on and which always executes)
            longcot::StageToggles only{false, false, false, false, false};
            if (name == "synthesize") only.synthesize = true;
            if (name == "curate") only.curate = true;
            if (name == "reject-sample") only.reject_sample = true;
            if (name == "assemble") only.assemble = true;
            if (name == "evaluate") only.evaluate = true;
            config.stages = only;
        }

        longcot::RunOptions options;
        options.resume = resume;
        options.seed_override = seed_override;
        longcot::RunSummary summary = longcot::run_pipeline(config, options);

        for (const auto& stage : summary.stages_run) {
            std::cout << "stage " << stage << ": done\n";
        }
        for (const auto& stage : summary.stages_skipped) {
            std::cout << "stage " << stage << ": skipped (outputs unchanged)\n";
        }
        for (const auto& [file, path] : summary.outputs) {
            std::cout << "  " << file << " -> " << path << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
