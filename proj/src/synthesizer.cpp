#include "longcot/synthesizer.hpp"

#include <condition_variable>
#include <mutex>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "longcot/common.hpp"
#include "longcot/verifier.hpp"

namespace longcot {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kPlaceholders = {"problem", "answer1", "answer2", "correct1", "correct2"};

std::vector<std::string> placeholders_in(std::string_view tmpl) {
    std::vector<std::string> found;
    for (const auto& name : kPlaceholders) {
        if (tmpl.find("{" + name + "}") != std::string_view::npos) {
            found.push_back(name);
        }
    }
    return found;
}

void check_allowed(std::string_view label, std::string_view tmpl, const std::set<std::string>& allowed) {
    for (const auto& name : placeholders_in(tmpl)) {
        if (!allowed.count(name)) {
            throw std::invalid_argument(std::string(label) + " cannot fill placeholder {" + name + "}");
        }
    }
}

std::string correctness_word(bool correct) { return correct ? "correct" : "incorrect"; }

}  // namespace

PromptTemplateSet PromptTemplateSet::defaults() {
    PromptTemplateSet t;
    t.answer1_template =
        "Solve the following math problem. Reason step by step, and put the final answer in \\boxed{}.\n\n{problem}";
    t.answer2_instruction =
        "Please review the solution above, rethink the problem from scratch, and solve it again. Put the final "
        "answer in \\boxed{}.";
    t.transition_template =
        "A solution to this problem is shown below. It is {correct1}.\n\nProblem:\n{problem}\n\nSolution:\n{answer1}"
        "\n\nWrite a short reflection, in the solver's voice, that questions this solution and decides to try the "
        "problem again. Do not reveal whether it is correct.";
    t.summary_template =
        "Two attempts at this problem are shown below. The first attempt is {correct1}; the second attempt is "
        "{correct2}.\n\nProblem:\n{problem}\n\nFirst attempt:\n{answer1}\n\nSecond attempt:\n{answer2}\n\nWrite a "
        "closing summary, in the solver's voice, that commits to the answer from the attempt marked correct and "
        "puts it in \\boxed{}. If neither attempt is correct, restate the second attempt's answer.";
    t.rejection_template = "{problem}\n\nPlease reason step by step, and put your final answer within \\boxed{}.";
    return t;
}

PromptTemplateSet PromptTemplateSet::load(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    PromptTemplateSet t;
    std::vector<std::string> missing;
    auto require = [&](const char* key, std::string& slot) {
        if (doc.contains(key) && doc[key].is_string()) {
            slot = doc[key].get<std::string>();
        } else {
            missing.push_back(key);
        }
    };
    require("answer1_template", t.answer1_template);
    require("answer2_instruction", t.answer2_instruction);
    require("transition_template", t.transition_template);
    require("summary_template", t.summary_template);
    require("rejection_template", t.rejection_template);
    if (!missing.empty()) {
        std::string joined;
        for (const auto& key : missing) {
            joined += joined.empty() ? key : ", " + key;
        }
        throw std::runtime_error("template file " + path.string() + " is missing keys: " + joined);
    }
    t.validate();
    return t;
}

void PromptTemplateSet::save(const std::filesystem::path& path) const {
    json doc = {{"answer1_template", answer1_template},
                {"answer2_instruction", answer2_instruction},
                {"transition_template", transition_template},
                {"summary_template", summary_template},
                {"rejection_template", rejection_template}};
    write_file(path, doc.dump(2) + "\n");
}

void PromptTemplateSet::validate() const {
    check_allowed("answer1_template", answer1_template, {"problem"});
    check_allowed("answer2_instruction", answer2_instruction, {});
    check_allowed("transition_template", transition_template, {"problem", "answer1", "correct1"});
    check_allowed("summary_template", summary_template,
                  {"problem", "answer1", "answer2", "correct1", "correct2"});
    check_allowed("rejection_template", rejection_template, {"problem"});
    if (answer1_template.find("{problem}") == std::string::npos) {
        throw std::invalid_argument("answer1_template must reference {problem}");
    }
    if (rejection_template.find("{problem}") == std::string::npos) {
        throw std::invalid_argument("rejection_template must reference {problem}");
    }
    if (rejection_template == answer1_template) {
        throw std::invalid_argument(
            "rejection_template must differ from answer1_template: identical prompts collide in "
            "response caches");
    }
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& context) {
    std::string out(tmpl);
    for (const auto& [key, value] : context) {
        const std::string needle = "{" + key + "}";
        std::size_t at = 0;
        while ((at = out.find(needle, at)) != std::string::npos) {
            out.replace(at, needle.size(), value);
            at += value.size();
        }
    }
    return out;
}

std::vector<Message> build_answer1_messages(const ProblemRecord& problem, const PromptTemplateSet& templates) {
    return {{Role::user, fill_template(templates.answer1_template, {{"problem", problem.problem}})}};
}

std::vector<Message> build_answer2_messages(const ProblemRecord& problem, const std::string& a1_text,
                                            const PromptTemplateSet& templates) {
    return {{Role::user, fill_template(templates.answer1_template, {{"problem", problem.problem}})},
            {Role::assistant, a1_text},
            {Role::user, templates.answer2_instruction}};
}

std::vector<Message> build_transition_messages(const ProblemRecord& problem, const std::string& a1_text,
                                               bool a1_correct, const PromptTemplateSet& templates) {
    return {{Role::user, fill_template(templates.transition_template,
                                       {{"problem", problem.problem},
                                        {"answer1", a1_text},
                                        {"correct1", correctness_word(a1_correct)}})}};
}

std::vector<Message> build_summary_messages(const ProblemRecord& problem, const std::string& a1_text,
                                            const std::string& a2_text, bool a1_correct, bool a2_correct,
                                            const PromptTemplateSet& templates) {
    return {{Role::user, fill_template(templates.summary_template,
                                       {{"problem", problem.problem},
                                        {"answer1", a1_text},
                                        {"answer2", a2_text},
                                        {"correct1", correctness_word(a1_correct)},
                                        {"correct2", correctness_word(a2_correct)}})}};
}

GenerationRequest make_synthesis_request(const std::string& request_id, std::vector<Message> messages,
                                         const SynthesisSettings& settings) {
    GenerationRequest request;
    request.request_id = request_id;
    request.model_id = settings.model_id;
    request.messages = std::move(messages);
    request.sampling = settings.sampling;
    request.sample_index = 0;
    return request;
}

SynthesisOutcome synthesize_chain(const ProblemRecord& problem, const PromptTemplateSet& templates,
                                  Backend& backend, const SynthesisSettings& settings, int h) {
    if (h != 2) {
        throw std::invalid_argument("only two-turn synthesis is supported");
    }
    SynthesisOutcome outcome;
    auto fail = [&](const char* reason) {
        outcome.rejection = ChainRejection{problem.id, reason};
        return outcome;
    };

    GenerationResult a1 = backend.generate(
        make_synthesis_request(problem.id + "#a1", build_answer1_messages(problem, templates), settings));
    if (a1.finish_reason == FinishReason::error) {
        return fail("generation-failure");
    }
    bool a1_correct = response_correct(a1.text, problem.ground_truth);

    GenerationResult a2 = backend.generate(make_synthesis_request(
        problem.id + "#a2", build_answer2_messages(problem, a1.text, templates), settings));
    if (a2.finish_reason == FinishReason::error) {
        return fail("generation-failure");
    }
    bool a2_correct = response_correct(a2.text, problem.ground_truth);

    GenerationResult y1 = backend.generate(make_synthesis_request(
        problem.id + "#y1", build_transition_messages(problem, a1.text, a1_correct, templates), settings));
    if (y1.finish_reason == FinishReason::error) {
        return fail("generation-failure");
    }

    GenerationResult y2 = backend.generate(make_synthesis_request(
        problem.id + "#y2",
        build_summary_messages(problem, a1.text, a2.text, a1_correct, a2_correct, templates), settings));
    if (y2.finish_reason == FinishReason::error) {
        return fail("generation-failure");
    }
    if (!extract_boxed(y2.text)) {
        return fail("no-final-answer");
    }

    CandidateChain chain;
    chain.problem_id = problem.id;
    chain.a1 = a1.text;
    chain.y1 = y1.text;
    chain.a2 = a2.text;
    chain.y2_final = y2.text;
    chain.a1_correct = a1_correct;
    chain.a2_correct = a2_correct;
    chain.turn_count = 2;
    outcome.chain = chain;
    return outcome;
}

Stage1Result run_stage1(const std::vector<ProblemRecord>& corpus, const PromptTemplateSet& templates,
                        Backend& backend, const SynthesisSettings& settings, int max_in_flight,
                        const std::function<void(const SynthesisOutcome&)>& on_outcome) {
    templates.validate();
    {
        std::set<std::string> ids;
        for (const auto& p : corpus) {
            if (p.id.empty() || p.problem.empty() || p.ground_truth.empty()) {
                throw std::invalid_argument("corpus record with empty field (id: '" + p.id + "')");
            }
            if (!ids.insert(p.id).second) {
                throw std::invalid_argument("duplicate problem id: " + p.id);
            }
        }
    }

    std::vector<SynthesisOutcome> outcomes(corpus.size());
    std::vector<bool> done(corpus.size(), false);
    std::mutex emit_mutex;
    std::size_t next_to_emit = 0;

    run_bounded(corpus.size(), max_in_flight, [&](std::size_t i) {
        SynthesisOutcome outcome = synthesize_chain(corpus[i], templates, backend, settings);
        std::lock_guard<std::mutex> lock(emit_mutex);
        outcomes[i] = std::move(outcome);
        done[i] = true;
        while (next_to_emit < corpus.size() && done[next_to_emit]) {
            if (on_outcome) {
                on_outcome(outcomes[next_to_emit]);
            }
            ++next_to_emit;
        }
    });

    Stage1Result result;
    for (auto& outcome : outcomes) {
        if (outcome.chain) {
            result.chains.push_back(std::move(*outcome.chain));
        } else if (outcome.rejection) {
            result.rejections.push_back(std::move(*outcome.rejection));
        }
    }
    return result;
}

}  // namespace longcot
