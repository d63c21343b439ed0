#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longcot/curator.hpp"
#include "longcot/eval.hpp"
#include "longcot/pipeline.hpp"
#include "longcot/rejection.hpp"
#include "longcot/synthesizer.hpp"

namespace longcot {

// Deterministic behavior plan for scripted-backend fixtures. Every choice is
// a pure function of (plan_seed, problem text), so regenerating a script for
// the same corpus and settings reproduces it byte for byte, and duplicate
// problem texts (which share request fingerprints) get identical entries.
struct MockgenSettings {
    double ft_weight{0.35};  // dialogue fixes a wrong first answer
    double tf_weight{0.25};  // dialogue breaks a right first answer
    double tt_weight{0.30};
    double ff_weight{0.10};
    double short_transition_rate{0.0};      // planned length-filter failures
    double summary_contradiction_rate{0.0}; // planned concatenation drops
    double rejection_unsolved_rate{0.10};   // problems no sample ever solves
    double eval_correct_rate{0.60};
    std::uint64_t plan_seed{1};
};

struct ProblemPlan {
    ChainCategory category{ChainCategory::false_to_true};
    bool short_transition{false};
    bool contradictory_summary{false};
    bool rejection_unsolved{false};
    int first_correct_index{0};  // samples at or after this index verify correct
};

// total_budget is the sum of the schedule; first_correct_index is uniform
// over [0, total_budget) for solvable problems.
ProblemPlan plan_for_problem(const ProblemRecord& problem, const MockgenSettings& settings, int total_budget);

// Per-sample evaluation verdict, derived from the request fingerprint so
// colliding requests (same item in two suites) agree with themselves.
bool planned_eval_verdict(const std::string& request_fingerprint, const MockgenSettings& settings);

// An answer string guaranteed not to grade as equivalent to ground_truth.
std::string planned_wrong_answer(const std::string& ground_truth);

void add_synthesis_entries(MockScript& script, const std::vector<ProblemRecord>& corpus,
                           const PromptTemplateSet& templates, const SynthesisSettings& settings,
                           const MockgenSettings& plan);

void add_rejection_entries(MockScript& script, const std::vector<ProblemRecord>& corpus,
                           const RejectionSettings& settings, const MockgenSettings& plan);

void add_eval_entries(MockScript& script, const std::vector<EvalSuite>& suites,
                      const std::vector<InteractionFormat>& formats, const EvalSettings& settings,
                      const MockgenSettings& plan);

// Full script for one pipeline config: loads the corpus, templates, and eval
// suites the config names and covers every request the run can issue.
MockScript build_mock_script(const PipelineConfig& config, const MockgenSettings& plan);

}  // namespace longcot
