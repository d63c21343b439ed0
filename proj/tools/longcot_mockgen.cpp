#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "longcot/mockgen.hpp"

int main(int argc, char** argv) {
    CLI::App app{"deterministic response-script generator for the mock backend"};

    std::string config_path;
    std::string out_path;
    longcot::MockgenSettings plan;

    app.add_option("--config", config_path, "pipeline config JSON naming the corpus and suites")->required();
    app.add_option("--out", out_path, "where to write the script")->required();
    app.add_option("--plan-seed", plan.plan_seed, "seed for every scripted behavior choice");
    app.add_option("--ft-weight", plan.ft_weight, "weight of wrong-then-right dialogues");
    app.add_option("--tf-weight", plan.tf_weight, "weight of right-then-wrong dialogues");
    app.add_option("--tt-weight", plan.tt_weight, "weight of right-then-right dialogues");
    app.add_option("--ff-weight", plan.ff_weight, "weight of wrong-then-wrong dialogues");
    app.add_option("--short-transition-rate", plan.short_transition_rate,
                   "fraction of dialogues given a transition below the length floor");
    app.add_option("--contradiction-rate", plan.summary_contradiction_rate,
                   "fraction of dialogues whose summary contradicts its category");
    app.add_option("--unsolved-rate", plan.rejection_unsolved_rate,
                   "fraction of problems no sampled solution ever solves");
    app.add_option("--eval-correct-rate", plan.eval_correct_rate, "per-sample benchmark success rate");

    CLI11_PARSE(app, argc, argv);

    try {
        longcot::PipelineConfig config = longcot::PipelineConfig::load(config_path);
        longcot::MockScript script = longcot::build_mock_script(config, plan);
        script.save(out_path);
        std::cout << "wrote " << script.entries.size() << " entries to " << out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
