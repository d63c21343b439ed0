#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "longcot/assembler.hpp"
#include "longcot/curator.hpp"
#include "longcot/mockgen.hpp"
#include "longcot/pipeline.hpp"
#include "longcot/verifier.hpp"

namespace py = pybind11;
using namespace longcot;

namespace {

PipelineConfig load_config(const std::string& config_path, const std::string& out_dir) {
    PipelineConfig config = PipelineConfig::load(config_path);
    if (!out_dir.empty()) {
        config.out_dir = out_dir;
    }
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Batch synthesis, curation, rejection sampling, and evaluation for "
              "long chain-of-thought training data.";

    m.attr("MULTI_TURN_MARKER") = py::str(std::string(kMultiTurnMarker));
    m.attr("REJECTION_MARKER") = py::str(std::string(kRejectionMarker));

    // answer grading ---------------------------------------------------------
    m.def(
        "extract_boxed",
        [](const std::string& text) -> std::optional<std::string> {
            auto answer = extract_boxed(text);
            if (!answer) {
                return std::nullopt;
            }
            return answer->raw;
        },
        py::arg("text"), "Contents of the last balanced \\boxed{...} group, or None.");
    m.def(
        "canonical", [](const std::string& text) { return render(canonicalize(text)); },
        py::arg("text"), "Canonical rendering of an answer (reduced fraction, tuple, or "
                         "normalized symbolic text).");
    m.def("equivalent", [](const std::string& a, const std::string& b) { return equivalent(a, b); },
          py::arg("a"), py::arg("b"), "Whether two answer strings grade as the same value.");
    m.def(
        "response_correct",
        [](const std::string& text, const std::string& ground_truth) {
            return response_correct(text, ground_truth);
        },
        py::arg("text"), py::arg("ground_truth"),
        "Grades a model response's last boxed answer against the ground truth.");

    // curation primitives ----------------------------------------------------
    py::class_<CandidateChain>(m, "CandidateChain")
        .def(py::init([](std::string problem_id, std::string a1, std::string y1, std::string a2,
                         std::string y2_final, bool a1_correct, bool a2_correct) {
                 CandidateChain chain;
                 chain.problem_id = std::move(problem_id);
                 chain.a1 = std::move(a1);
                 chain.y1 = std::move(y1);
                 chain.a2 = std::move(a2);
                 chain.y2_final = std::move(y2_final);
                 chain.a1_correct = a1_correct;
                 chain.a2_correct = a2_correct;
                 return chain;
             }),
             py::arg("problem_id"), py::arg("a1"), py::arg("y1"), py::arg("a2"),
             py::arg("y2_final"), py::arg("a1_correct"), py::arg("a2_correct"))
        .def_readwrite("problem_id", &CandidateChain::problem_id)
        .def_readwrite("a1", &CandidateChain::a1)
        .def_readwrite("y1", &CandidateChain::y1)
        .def_readwrite("a2", &CandidateChain::a2)
        .def_readwrite("y2_final", &CandidateChain::y2_final)
        .def_readwrite("a1_correct", &CandidateChain::a1_correct)
        .def_readwrite("a2_correct", &CandidateChain::a2_correct);

    m.def(
        "classify",
        [](const CandidateChain& chain) { return std::string(category_name(classify(chain))); },
        py::arg("chain"), "Chain category name from the (a1, a2) correctness pair.");
    m.def(
        "filter_chain",
        [](const CandidateChain& chain, std::size_t min_section_chars, std::size_t repetition_window,
           int repetition_limit) {
            FilterRules rules{min_section_chars, repetition_window, repetition_limit};
            return filter_chain(chain, rules);
        },
        py::arg("chain"), py::arg("min_section_chars") = 20, py::arg("repetition_window") = 40,
        py::arg("repetition_limit") = 5, "All quality-filter failure reasons; empty means pass.");
    m.def(
        "balance",
        [](const std::vector<CandidateChain>& chains, std::uint64_t seed) {
            BalanceResult result = balance(chains, seed);
            std::vector<std::string> selected;
            for (const auto& chain : result.selected) {
                selected.push_back(chain.problem_id);
            }
            py::dict report;
            report["sum1"] = result.report.sum1;
            report["sum2"] = result.report.sum2;
            report["tt_needed"] = result.report.tt_needed;
            report["tt_selected"] = result.report.tt_selected;
            report["tt_shortfall"] = result.report.tt_shortfall;
            report["tf_selected"] = result.report.tf_selected;
            report["selected_ids"] = result.report.selected_ids;
            report["selected"] = selected;
            report["discarded_counts"] = result.report.discarded_counts;
            return report;
        },
        py::arg("chains"), py::arg("seed"),
        "1:1 category balancing; returns the report with selected problem ids in order.");

    m.def("append_marker", &append_marker, py::arg("prompt"), py::arg("source"),
          "Appends the byte-exact source marker for 'multi' or 'rejection'.");

    // pipeline ----------------------------------------------------------------
    m.def(
        "run_pipeline",
        [](const std::string& config_path, bool resume, std::optional<std::uint64_t> seed_override,
           const std::string& out_dir) {
            PipelineConfig config = load_config(config_path, out_dir);
            RunOptions options;
            options.resume = resume;
            options.seed_override = seed_override;
            RunSummary summary;
            {
                py::gil_scoped_release release;
                summary = run_pipeline(config, options);
            }
            py::dict out;
            out["stages_run"] = summary.stages_run;
            out["stages_skipped"] = summary.stages_skipped;
            out["outputs"] = summary.outputs;
            return out;
        },
        py::arg("config_path"), py::arg("resume") = false, py::arg("seed_override") = py::none(),
        py::arg("out_dir") = std::string(),
        "Runs the enabled pipeline stages; returns stage lists and output paths.");

    m.def(
        "build_mock_script",
        [](const std::string& config_path, const std::string& out_path, std::uint64_t plan_seed,
           double ft_weight, double tf_weight, double tt_weight, double ff_weight,
           double short_transition_rate, double summary_contradiction_rate,
           double rejection_unsolved_rate, double eval_correct_rate) {
            PipelineConfig config = PipelineConfig::load(config_path);
            MockgenSettings plan;
            plan.plan_seed = plan_seed;
            plan.ft_weight = ft_weight;
            plan.tf_weight = tf_weight;
            plan.tt_weight = tt_weight;
            plan.ff_weight = ff_weight;
            plan.short_transition_rate = short_transition_rate;
            plan.summary_contradiction_rate = summary_contradiction_rate;
            plan.rejection_unsolved_rate = rejection_unsolved_rate;
            plan.eval_correct_rate = eval_correct_rate;
            MockScript script;
            {
                py::gil_scoped_release release;
                script = build_mock_script(config, plan);
                script.save(out_path);
            }
            return script.entries.size();
        },
        py::arg("config_path"), py::arg("out_path"), py::arg("plan_seed") = 1,
        py::arg("ft_weight") = 0.35, py::arg("tf_weight") = 0.25, py::arg("tt_weight") = 0.30,
        py::arg("ff_weight") = 0.10, py::arg("short_transition_rate") = 0.0,
        py::arg("summary_contradiction_rate") = 0.0, py::arg("rejection_unsolved_rate") = 0.10,
        py::arg("eval_correct_rate") = 0.60,
        "Writes a scripted-backend response table covering every request the "
        "config's pipeline can issue; returns the entry count.");

    m.def("regenerate_report", &regenerate_report, py::arg("out_dir"),
          "Rebuilds report.md from the eval result files in out_dir; returns the markdown.");
}
