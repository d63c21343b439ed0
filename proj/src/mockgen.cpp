#include "longcot/mockgen.hpp"

#include <numeric>
#include <stdexcept>

#include "longcot/common.hpp"
#include "longcot/verifier.hpp"

namespace longcot {

namespace {

std::uint64_t plan_hash(std::uint64_t plan_seed, const ProblemRecord& problem, std::string_view tag) {
    std::uint64_t h = fnv1a64(std::to_string(plan_seed));
    h = fnv1a64(problem.problem, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(problem.ground_truth, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(tag, h);
    return h;
}

// uniform in [0, 1), 53 significant bits
double hash01(std::uint64_t h) { return static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53); }

const char* const kOpenings[] = {
    "Let me work through this from the given quantities.",
    "I will set up the relationships stated in the problem first.",
    "Start by naming the unknowns and writing down the constraints.",
    "Reading the problem again, the quantities combine in one natural way.",
    "First translate the statement into arithmetic, then simplify.",
};

const char* const kMoves[] = {
    "substitute the known values and simplify the expression",
    "combine the terms and reduce the resulting fraction",
    "isolate the unknown on one side of the equation",
    "check the units and carry the computation forward",
    "expand the product and collect like terms",
    "compare both sides and cancel the common factor",
    "evaluate the remaining expression directly",
};

std::string make_attempt_text(const std::string& final_answer, std::uint64_t h) {
    std::string out = kOpenings[h % (sizeof(kOpenings) / sizeof(kOpenings[0]))];
    int steps = 2 + static_cast<int>((h >> 8) % 3);
    for (int i = 1; i <= steps; ++i) {
        std::uint64_t pick = (h >> (8 + 4 * i)) % (sizeof(kMoves) / sizeof(kMoves[0]));
        out += "\nStep " + std::to_string(i) + ": " + kMoves[pick] + ".";
    }
    out += "\nThe final answer is \\boxed{" + final_answer + "}.";
    return out;
}

std::string make_transition_text(bool too_short, std::uint64_t h) {
    if (too_short) {
        return "Hmm, retry.";
    }
    const char* const concerns[] = {"arithmetic in the middle step", "setup of the first equation",
                                    "sign handling near the end", "way the quantities were paired"};
    return std::string("Wait - before accepting this, let me question the ") +
           concerns[h % (sizeof(concerns) / sizeof(concerns[0]))] +
           ". I will redo the whole solution from a clean slate and compare the outcomes.";
}

std::string make_summary_text(const std::string& committed_answer, std::uint64_t h) {
    const char* const closers[] = {
        "Weighing both attempts against the checks above, the verified line of reasoning settles it.",
        "After reconciling the two attempts step by step, one of them survives every check.",
        "Re-examining both solutions, the consistent computation points to a single result.",
    };
    return std::string(closers[h % (sizeof(closers) / sizeof(closers[0]))]) + " The final answer is \\boxed{" +
           committed_answer + "}.";
}

std::string make_solution_text(const std::string& final_answer, std::uint64_t h) {
    return make_attempt_text(final_answer, h);
}

}  // namespace

std::string planned_wrong_answer(const std::string& ground_truth) {
    for (int candidate = 99991;; ++candidate) {
        std::string text = std::to_string(candidate);
        if (!equivalent(text, ground_truth)) {
            return text;
        }
    }
}

ProblemPlan plan_for_problem(const ProblemRecord& problem, const MockgenSettings& settings, int total_budget) {
    if (total_budget < 1) {
        throw std::invalid_argument("total_budget must be >= 1");
    }
    ProblemPlan plan;

    double weight_sum = settings.ft_weight + settings.tf_weight + settings.tt_weight + settings.ff_weight;
    if (weight_sum <= 0.0) {
        throw std::invalid_argument("category weights must sum to a positive value");
    }
    double u = hash01(plan_hash(settings.plan_seed, problem, "category")) * weight_sum;
    if (u < settings.ft_weight) {
        plan.category = ChainCategory::false_to_true;
    } else if (u < settings.ft_weight + settings.tf_weight) {
        plan.category = ChainCategory::true_to_false;
    } else if (u < settings.ft_weight + settings.tf_weight + settings.tt_weight) {
        plan.category = ChainCategory::true_to_true;
    } else {
        plan.category = ChainCategory::false_to_false;
    }

    plan.short_transition = hash01(plan_hash(settings.plan_seed, problem, "short")) < settings.short_transition_rate;
    plan.contradictory_summary =
        hash01(plan_hash(settings.plan_seed, problem, "contra")) < settings.summary_contradiction_rate;
    plan.rejection_unsolved =
        hash01(plan_hash(settings.plan_seed, problem, "unsolved")) < settings.rejection_unsolved_rate;
    plan.first_correct_index =
        plan.rejection_unsolved
            ? total_budget
            : static_cast<int>(plan_hash(settings.plan_seed, problem, "first") % static_cast<std::uint64_t>(total_budget));
    return plan;
}

bool planned_eval_verdict(const std::string& request_fingerprint, const MockgenSettings& settings) {
    std::uint64_t h = fnv1a64(request_fingerprint, fnv1a64(std::to_string(settings.plan_seed)));
    h = fnv1a64("eval", h);
    return hash01(h) < settings.eval_correct_rate;
}

void add_synthesis_entries(MockScript& script, const std::vector<ProblemRecord>& corpus,
                           const PromptTemplateSet& templates, const SynthesisSettings& settings,
                           const MockgenSettings& plan_settings) {
    for (const auto& problem : corpus) {
        ProblemPlan plan = plan_for_problem(problem, plan_settings, 1);
        bool a1_correct = plan.category == ChainCategory::true_to_true ||
                          plan.category == ChainCategory::true_to_false;
        bool a2_correct = plan.category == ChainCategory::true_to_true ||
                          plan.category == ChainCategory::false_to_true;

        const std::string wrong = planned_wrong_answer(problem.ground_truth);
        std::string a1_text = make_attempt_text(a1_correct ? problem.ground_truth : wrong,
                                                plan_hash(plan_settings.plan_seed, problem, "a1-text"));
        std::string a2_text = make_attempt_text(a2_correct ? problem.ground_truth : wrong,
                                                plan_hash(plan_settings.plan_seed, problem, "a2-text"));

        script.add(make_synthesis_request(problem.id + "#a1", build_answer1_messages(problem, templates), settings),
                   {a1_text});
        script.add(make_synthesis_request(problem.id + "#a2",
                                          build_answer2_messages(problem, a1_text, templates), settings),
                   {a2_text});
        script.add(
            make_synthesis_request(problem.id + "#y1",
                                   build_transition_messages(problem, a1_text, a1_correct, templates), settings),
            {make_transition_text(plan.short_transition,
                                  plan_hash(plan_settings.plan_seed, problem, "y1-text"))});

        // The closing summary restates the answer of the attempt the category
        // marks as correct (the first for true_to_false, the second otherwise).
        std::string committed = (plan.category == ChainCategory::true_to_false)
                                    ? (a1_correct ? problem.ground_truth : wrong)
                                    : (a2_correct ? problem.ground_truth : wrong);
        if (plan.contradictory_summary) {
            committed = planned_wrong_answer(committed);
        }
        script.add(make_synthesis_request(
                       problem.id + "#y2",
                       build_summary_messages(problem, a1_text, a2_text, a1_correct, a2_correct, templates),
                       settings),
                   {make_summary_text(committed, plan_hash(plan_settings.plan_seed, problem, "y2-text"))});
    }
}

void add_rejection_entries(MockScript& script, const std::vector<ProblemRecord>& corpus,
                           const RejectionSettings& settings, const MockgenSettings& plan_settings) {
    const int total_budget = std::accumulate(settings.schedule.begin(), settings.schedule.end(), 0);
    for (const auto& problem : corpus) {
        ProblemPlan plan = plan_for_problem(problem, plan_settings, total_budget);
        const std::string wrong = planned_wrong_answer(problem.ground_truth);
        for (int index = 0; index < total_budget; ++index) {
            bool correct = !plan.rejection_unsolved && index >= plan.first_correct_index;
            std::uint64_t h =
                plan_hash(plan_settings.plan_seed, problem, "rej-text-" + std::to_string(index));
            script.add(make_rejection_request(problem, settings, index),
                       {make_solution_text(correct ? problem.ground_truth : wrong, h)});
        }
    }
}

void add_eval_entries(MockScript& script, const std::vector<EvalSuite>& suites,
                      const std::vector<InteractionFormat>& formats, const EvalSettings& settings,
                      const MockgenSettings& plan_settings) {
    for (const auto& suite : suites) {
        const int samples = suite.hard ? settings.hard_suite_samples : settings.default_samples;
        for (const auto& item : suite.items) {
            const std::string wrong = planned_wrong_answer(item.ground_truth);
            for (auto format : formats) {
                for (int s = 0; s < samples; ++s) {
                    GenerationRequest request = make_eval_request(item, format, settings, s);
                    std::string fp = fingerprint(request);
                    bool correct = planned_eval_verdict(fp, plan_settings);
                    std::uint64_t h = fnv1a64(fp, fnv1a64("eval-text"));
                    script.add(request, {make_solution_text(correct ? item.ground_truth : wrong, h)});
                }
            }
        }
    }
}

MockScript build_mock_script(const PipelineConfig& config, const MockgenSettings& plan) {
    MockScript script;

    IngestResult ingest = ingest_corpus(config.corpus_path, config.min_corpus_records);
    PromptTemplateSet templates =
        config.templates_path.empty() ? PromptTemplateSet::defaults() : PromptTemplateSet::load(config.templates_path);
    templates.validate();

    SynthesisSettings synthesis{config.backend.model_id, config.sampling};
    add_synthesis_entries(script, ingest.records, templates, synthesis, plan);

    RejectionSettings rejection;
    rejection.model_id = config.backend.model_id;
    rejection.sampling = config.sampling;
    rejection.schedule = config.schedule;
    rejection.prompt_template = templates.rejection_template;
    add_rejection_entries(script, ingest.records, rejection, plan);

    if (!config.eval_suites.empty()) {
        EvalSettings eval;
        eval.model_id = config.backend.model_id;
        eval.sampling = config.sampling;
        eval.hard_suite_samples = config.hard_suite_samples;
        eval.default_samples = config.default_samples;
        std::vector<EvalSuite> suites;
        for (const auto& suite : config.eval_suites) {
            suites.push_back(load_eval_suite(suite.name, suite.path, suite.hard));
        }
        add_eval_entries(script, suites, config.eval_formats, eval, plan);
    }
    return script;
}

}  // namespace longcot
