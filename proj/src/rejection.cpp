#include "longcot/rejection.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "longcot/verifier.hpp"

namespace longcot {

std::vector<Message> build_rejection_messages(const ProblemRecord& problem, const std::string& prompt_template) {
    return {{Role::user, fill_template(prompt_template, {{"problem", problem.problem}})}};
}

GenerationRequest make_rejection_request(const ProblemRecord& problem, const RejectionSettings& settings,
                                         int cumulative_sample_index) {
    GenerationRequest request;
    request.request_id = problem.id + "#rej" + std::to_string(cumulative_sample_index);
    request.model_id = settings.model_id;
    request.messages = build_rejection_messages(problem, settings.prompt_template);
    request.sampling = settings.sampling;
    request.sample_index = cumulative_sample_index;
    return request;
}

std::vector<SampledResponse> run_round(Backend& backend, const std::vector<ProblemRecord>& pool,
                                       const RejectionSettings& settings, int round_index, int budget,
                                       int cumulative_base, std::size_t max_in_flight) {
    if (budget < 1) {
        throw std::invalid_argument("round budget must be >= 1");
    }
    std::vector<GenerationRequest> requests;
    requests.reserve(pool.size() * static_cast<std::size_t>(budget));
    for (const auto& problem : pool) {
        for (int j = 0; j < budget; ++j) {
            requests.push_back(make_rejection_request(problem, settings, cumulative_base + j));
        }
    }
    std::vector<GenerationResult> results =
        generate_batch(backend, requests, static_cast<int>(max_in_flight));

    std::vector<SampledResponse> responses;
    responses.reserve(requests.size());
    for (std::size_t p = 0; p < pool.size(); ++p) {
        for (int j = 0; j < budget; ++j) {
            const GenerationResult& r = results[p * static_cast<std::size_t>(budget) + j];
            SampledResponse sample;
            sample.problem_id = pool[p].id;
            sample.round_index = round_index;
            sample.sample_index = cumulative_base + j;
            sample.text = r.text;
            sample.completion_tokens = static_cast<int>(r.completion_tokens);
            sample.correct =
                r.finish_reason != FinishReason::error && response_correct(r.text, pool[p].ground_truth);
            responses.push_back(std::move(sample));
        }
    }
    return responses;
}

std::optional<RetainedResponse> select_medium(const std::vector<SampledResponse>& correct_samples) {
    if (correct_samples.empty()) {
        return std::nullopt;
    }
    std::vector<const SampledResponse*> sorted;
    sorted.reserve(correct_samples.size());
    for (const auto& s : correct_samples) {
        sorted.push_back(&s);
    }
    std::sort(sorted.begin(), sorted.end(), [](const SampledResponse* a, const SampledResponse* b) {
        if (a->text.size() != b->text.size()) {
            return a->text.size() < b->text.size();
        }
        if (a->round_index != b->round_index) {
            return a->round_index < b->round_index;
        }
        if (a->text != b->text) {
            return a->text < b->text;
        }
        // identical texts happen under scripted backends; without this the
        // pick would hinge on std::sort internals
        return a->sample_index < b->sample_index;
    });
    const SampledResponse& pick = *sorted[(sorted.size() - 1) / 2];
    return RetainedResponse{pick.problem_id, pick.round_index, pick.sample_index, pick.text,
                            pick.completion_tokens};
}

CampaignResult run_campaign(Backend& backend, const std::vector<ProblemRecord>& corpus,
                            const RejectionSettings& settings, std::size_t max_in_flight,
                            const std::function<void(const RoundLedgerEntry&)>& on_round_entry) {
    if (settings.schedule.empty()) {
        throw std::invalid_argument("rejection schedule is empty");
    }
    {
        std::set<std::string> ids;
        for (const auto& p : corpus) {
            if (p.id.empty()) {
                throw std::invalid_argument("corpus record with empty id");
            }
            if (!ids.insert(p.id).second) {
                throw std::invalid_argument("duplicate problem id: " + p.id);
            }
        }
    }

    CampaignResult result;
    std::map<std::string, std::vector<SampledResponse>> correct_by_problem;
    std::vector<ProblemRecord> pool = corpus;
    int cumulative_base = 0;

    for (std::size_t k = 0; k < settings.schedule.size(); ++k) {
        result.round_pool_sizes["D" + std::to_string(k)] = pool.size();
        int budget = settings.schedule[k];
        if (pool.empty()) {
            cumulative_base += budget;
            continue;
        }

        auto responses =
            run_round(backend, pool, settings, static_cast<int>(k), budget, cumulative_base, max_in_flight);

        std::map<std::string, int> round_correct;
        for (const auto& sample : responses) {
            if (sample.correct) {
                ++round_correct[sample.problem_id];
                correct_by_problem[sample.problem_id].push_back(sample);
            }
        }

        std::vector<ProblemRecord> next_pool;
        for (const auto& problem : pool) {
            int correct_count = round_correct.count(problem.id) ? round_correct[problem.id] : 0;
            RoundLedgerEntry entry{problem.id, static_cast<int>(k), budget, correct_count, correct_count > 0};
            result.ledger.push_back(entry);
            if (on_round_entry) {
                on_round_entry(entry);
            }
            if (correct_count == 0) {
                next_pool.push_back(problem);
            }
        }
        pool = std::move(next_pool);
        cumulative_base += budget;
    }

    for (const auto& problem : corpus) {
        auto at = correct_by_problem.find(problem.id);
        if (at != correct_by_problem.end()) {
            auto retained = select_medium(at->second);
            if (retained) {
                result.retained.push_back(std::move(*retained));
            }
        }
    }
    for (const auto& problem : pool) {
        result.unsolved_ids.push_back(problem.id);
    }
    return result;
}

}  // namespace longcot
