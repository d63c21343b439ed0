#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "longcot/gateway.hpp"

namespace longcot {

struct ProblemRecord {
    std::string id;
    std::string problem;
    std::string ground_truth;
};

// Stage prompts with named placeholders. Only the five known names are
// treated as placeholders; literal braces in math text pass through.
// Placeholders available per stage:
//   answer1_template:    {problem}
//   answer2_instruction: (none; it continues the answer-1 dialogue)
//   transition_template: {problem} {answer1} {correct1}
//   summary_template:    {problem} {answer1} {answer2} {correct1} {correct2}
//   rejection_template:  {problem}
struct PromptTemplateSet {
    std::string answer1_template;
    std::string answer2_instruction;
    std::string transition_template;
    std::string summary_template;
    // Single-shot solve prompt for the sampling campaign. Deliberately not
    // answer1_template: identical prompts would collide in response caches.
    std::string rejection_template;

    static PromptTemplateSet defaults();
    static PromptTemplateSet load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Throws if a template references a placeholder its stage cannot fill.
    void validate() const;
};

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& context);

// One problem's multi-turn trace: first answer, transition text, revised
// answer, and the closing summary, with per-answer correctness.
struct CandidateChain {
    std::string problem_id;
    std::string a1;
    std::string y1;
    std::string a2;
    std::string y2_final;
    bool a1_correct{false};
    bool a2_correct{false};
    int turn_count{2};
};

struct ChainRejection {
    std::string problem_id;
    std::string reason;  // "generation-failure" | "no-final-answer"
};

struct SynthesisSettings {
    std::string model_id;
    Sampling sampling{0.6, 1.0, 8192};
};

struct SynthesisOutcome {
    std::optional<CandidateChain> chain;
    std::optional<ChainRejection> rejection;
};

// Prompt builders shared by the synthesizer and the mock-script generator.
std::vector<Message> build_answer1_messages(const ProblemRecord& problem, const PromptTemplateSet& templates);
std::vector<Message> build_answer2_messages(const ProblemRecord& problem, const std::string& a1_text,
                                            const PromptTemplateSet& templates);
std::vector<Message> build_transition_messages(const ProblemRecord& problem, const std::string& a1_text,
                                               bool a1_correct, const PromptTemplateSet& templates);
std::vector<Message> build_summary_messages(const ProblemRecord& problem, const std::string& a1_text,
                                            const std::string& a2_text, bool a1_correct, bool a2_correct,
                                            const PromptTemplateSet& templates);

GenerationRequest make_synthesis_request(const std::string& request_id, std::vector<Message> messages,
                                         const SynthesisSettings& settings);

// Drives the four-call dialogue A1 -> A2 -> Y1 -> Y2 for one problem.
// Ground truth enters only the Y1/Y2 prompts, as a correct/incorrect signal.
// Only h == 2 is supported.
SynthesisOutcome synthesize_chain(const ProblemRecord& problem, const PromptTemplateSet& templates,
                                  Backend& backend, const SynthesisSettings& settings, int h = 2);

struct Stage1Result {
    std::vector<CandidateChain> chains;
    std::vector<ChainRejection> rejections;
};

// One synthesis attempt per problem, concurrently up to max_in_flight.
// Validates corpus invariants (unique non-empty ids, non-empty fields) before
// any generation. on_outcome, when set, is invoked in corpus order as results
// become final, for incremental checkpointing.
Stage1Result run_stage1(const std::vector<ProblemRecord>& corpus, const PromptTemplateSet& templates,
                        Backend& backend, const SynthesisSettings& settings, int max_in_flight,
                        const std::function<void(const SynthesisOutcome&)>& on_outcome = nullptr);

}  // namespace longcot
