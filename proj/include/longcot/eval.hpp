#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "longcot/gateway.hpp"

namespace longcot {

struct EvalItem {
    std::string id;
    std::string problem;
    std::string ground_truth;
};

struct EvalSuite {
    std::string name;
    bool hard{false};  // hard suites draw 8 samples per item, others 1
    std::vector<EvalItem> items;
};

// Prompt shapes differ only in the suffix appended to the problem text.
enum class InteractionFormat { direct, multi_turn_marker, rejection_marker };

std::string_view interaction_format_name(InteractionFormat format);
InteractionFormat interaction_format_from_name(std::string_view name);

std::string eval_prompt(const std::string& problem, InteractionFormat format);

struct EvalSettings {
    std::string model_id;
    Sampling sampling{};       // temperature 0.6, top_p 1.0
    int hard_suite_samples{8};
    int default_samples{1};
};

struct ItemResult {
    std::string item_id;
    int samples{0};
    int correct{0};
    double item_accuracy{0.0};  // correct / samples
    std::vector<int> sample_tokens;
};

// JSONL of {id, problem, ground_truth}; malformed rows are an error here
// (benchmark fixtures are curated by hand, unlike the training corpus).
EvalSuite load_eval_suite(const std::string& name, const std::string& path, bool hard);

// The exact request evaluate_suite issues for (item, format, sample_index);
// shared with the mock-script generator.
GenerationRequest make_eval_request(const EvalItem& item, InteractionFormat format, const EvalSettings& settings,
                                    int sample_index);

struct SuiteResult {
    std::string suite;
    InteractionFormat format{InteractionFormat::direct};
    int samples_per_item{1};
    double accuracy{0.0};    // mean item accuracy x 100, 1 decimal half-even
    double avg_tokens{0.0};  // mean over all samples, 2 decimals half-even
    std::vector<ItemResult> items;
};

// Round-half-even at `decimals` places (banker's rounding).
double round_half_even(double value, int decimals);

SuiteResult evaluate_suite(Backend& backend, const EvalSuite& suite, InteractionFormat format,
                           const EvalSettings& settings, std::size_t max_in_flight);

// Markdown tables, one row per suite, columns per format. Missing
// (suite, format) cells render as an em-dash sentinel, never 0.0.
std::string report_tables(const std::vector<SuiteResult>& results);

std::string suite_result_to_json(const SuiteResult& result);
SuiteResult suite_result_from_json(const std::string& text);

}  // namespace longcot
