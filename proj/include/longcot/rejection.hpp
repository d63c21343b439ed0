#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "longcot/gateway.hpp"
#include "longcot/synthesizer.hpp"

namespace longcot {

struct RejectionSettings {
    std::string model_id;
    Sampling sampling{};                    // temperature 0.6, top_p 1.0 defaults
    std::vector<int> schedule{2, 10, 100};  // per-round sample budgets
    std::string prompt_template;            // {problem} placeholder
};

struct SampledResponse {
    std::string problem_id;
    int round_index{0};
    int sample_index{0};  // cumulative across rounds
    std::string text;
    int completion_tokens{0};
    bool correct{false};
};

struct RoundLedgerEntry {
    std::string problem_id;
    int round_index{0};
    int samples_drawn{0};
    int correct_count{0};
    bool solved{false};  // at least one correct so far (any round)
};

struct RetainedResponse {
    std::string problem_id;
    int round_index{0};
    int sample_index{0};
    std::string text;
    int completion_tokens{0};
};

struct CampaignResult {
    std::vector<RetainedResponse> retained;        // one per solved problem
    std::vector<std::string> unsolved_ids;         // survived every round with zero correct
    std::vector<RoundLedgerEntry> ledger;          // (problem, round) rows in draw order
    std::map<std::string, std::size_t> round_pool_sizes;  // "D0", "D1", ... -> problem count
};

std::vector<Message> build_rejection_messages(const ProblemRecord& problem, const std::string& prompt_template);

GenerationRequest make_rejection_request(const ProblemRecord& problem, const RejectionSettings& settings,
                                         int cumulative_sample_index);

// Draws exactly `budget` samples for each problem in the pool and verifies
// each against its ground truth. sample_index is cumulative: round k sample j
// maps to (sum of earlier budgets) + j, so identical prompts across rounds
// stay distinct.
std::vector<SampledResponse> run_round(Backend& backend, const std::vector<ProblemRecord>& pool,
                                       const RejectionSettings& settings, int round_index, int budget,
                                       int cumulative_base, std::size_t max_in_flight);

// Medium-length pick among a problem's correct samples: sort by
// (text length, round_index, text, sample_index) and take index (k-1)/2.
// Returns nullopt for an empty list.
std::optional<RetainedResponse> select_medium(const std::vector<SampledResponse>& correct_samples);

// Difficulty-aware escalation over the schedule: every problem enters D0;
// only problems with zero correct samples so far advance to the next round,
// so D0 ⊇ D1 ⊇ ... Problems solved in an earlier round draw nothing in later
// ones. One retained response per solved problem.
CampaignResult run_campaign(Backend& backend, const std::vector<ProblemRecord>& corpus,
                            const RejectionSettings& settings, std::size_t max_in_flight,
                            const std::function<void(const RoundLedgerEntry&)>& on_round_entry = {});

}  // namespace longcot
