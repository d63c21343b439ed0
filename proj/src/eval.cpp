#include "longcot/eval.hpp"

#include <cfenv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"
#include "longcot/assembler.hpp"
#include "longcot/jsonl.hpp"
#include "longcot/verifier.hpp"

namespace longcot {

using json = nlohmann::json;

std::string_view interaction_format_name(InteractionFormat format) {
    switch (format) {
        case InteractionFormat::direct: return "direct";
        case InteractionFormat::multi_turn_marker: return "multi_turn_marker";
        case InteractionFormat::rejection_marker: return "rejection_marker";
    }
    return "direct";
}

InteractionFormat interaction_format_from_name(std::string_view name) {
    if (name == "direct") return InteractionFormat::direct;
    if (name == "multi_turn_marker") return InteractionFormat::multi_turn_marker;
    if (name == "rejection_marker") return InteractionFormat::rejection_marker;
    throw std::invalid_argument("unknown interaction format: " + std::string(name));
}

std::string eval_prompt(const std::string& problem, InteractionFormat format) {
    switch (format) {
        case InteractionFormat::direct: return problem;
        case InteractionFormat::multi_turn_marker: return append_marker(problem, "multi");
        case InteractionFormat::rejection_marker: return append_marker(problem, "rejection");
    }
    return problem;
}

EvalSuite load_eval_suite(const std::string& name, const std::string& path, bool hard) {
    EvalSuite suite;
    suite.name = name;
    suite.hard = hard;
    auto lines = read_jsonl_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        json doc = json::parse(lines[i], nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": malformed suite row");
        }
        EvalItem item;
        try {
            item.id = doc.at("id").get<std::string>();
            item.problem = doc.at("problem").get<std::string>();
            item.ground_truth = doc.at("ground_truth").get<std::string>();
        } catch (const json::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": malformed suite row");
        }
        if (item.id.empty() || item.problem.empty() || item.ground_truth.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": empty field in suite row");
        }
        suite.items.push_back(std::move(item));
    }
    if (suite.items.empty()) {
        throw std::runtime_error(path + ": suite has no items");
    }
    return suite;
}

GenerationRequest make_eval_request(const EvalItem& item, InteractionFormat format, const EvalSettings& settings,
                                    int sample_index) {
    GenerationRequest request;
    request.request_id =
        item.id + "#" + std::string(interaction_format_name(format)) + "#s" + std::to_string(sample_index);
    request.model_id = settings.model_id;
    request.messages = {{Role::user, eval_prompt(item.problem, format)}};
    request.sampling = settings.sampling;
    request.sample_index = sample_index;
    return request;
}

double round_half_even(double value, int decimals) {
    double scale = std::pow(10.0, decimals);
    // nearbyint honors the current rounding mode; the default FE_TONEAREST is
    // ties-to-even, which is exactly the contract here.
    int saved = std::fegetround();
    std::fesetround(FE_TONEAREST);
    double rounded = std::nearbyint(value * scale) / scale;
    std::fesetround(saved);
    return rounded;
}

SuiteResult evaluate_suite(Backend& backend, const EvalSuite& suite, InteractionFormat format,
                           const EvalSettings& settings, std::size_t max_in_flight) {
    if (suite.items.empty()) {
        throw std::invalid_argument("suite has no items: " + suite.name);
    }
    const int samples = suite.hard ? settings.hard_suite_samples : settings.default_samples;
    if (samples < 1) {
        throw std::invalid_argument("samples per item must be >= 1");
    }

    std::vector<GenerationRequest> requests;
    requests.reserve(suite.items.size() * static_cast<std::size_t>(samples));
    for (const auto& item : suite.items) {
        for (int s = 0; s < samples; ++s) {
            requests.push_back(make_eval_request(item, format, settings, s));
        }
    }
    auto results = generate_batch(backend, requests, static_cast<int>(max_in_flight));

    SuiteResult out;
    out.suite = suite.name;
    out.format = format;
    out.samples_per_item = samples;

    double accuracy_sum = 0.0;
    long long token_sum = 0;
    std::size_t token_count = 0;
    for (std::size_t i = 0; i < suite.items.size(); ++i) {
        ItemResult item_result;
        item_result.item_id = suite.items[i].id;
        item_result.samples = samples;
        for (int s = 0; s < samples; ++s) {
            const GenerationResult& r = results[i * static_cast<std::size_t>(samples) + s];
            bool correct = r.finish_reason != FinishReason::error &&
                           response_correct(r.text, suite.items[i].ground_truth);
            item_result.correct += correct ? 1 : 0;
            item_result.sample_tokens.push_back(static_cast<int>(r.completion_tokens));
            token_sum += r.completion_tokens;
            ++token_count;
        }
        item_result.item_accuracy = static_cast<double>(item_result.correct) / samples;
        accuracy_sum += item_result.item_accuracy;
        out.items.push_back(std::move(item_result));
    }

    out.accuracy = round_half_even(accuracy_sum / static_cast<double>(suite.items.size()) * 100.0, 1);
    out.avg_tokens = round_half_even(static_cast<double>(token_sum) / static_cast<double>(token_count), 2);
    return out;
}

namespace {

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

}  // namespace

std::string report_tables(const std::vector<SuiteResult>& results) {
    static const InteractionFormat kFormats[] = {InteractionFormat::direct, InteractionFormat::multi_turn_marker,
                                                 InteractionFormat::rejection_marker};
    std::vector<std::string> suites;
    for (const auto& r : results) {
        bool known = false;
        for (const auto& s : suites) {
            known = known || s == r.suite;
        }
        if (!known) {
            suites.push_back(r.suite);
        }
    }

    auto find = [&](const std::string& suite, InteractionFormat format) -> const SuiteResult* {
        for (const auto& r : results) {
            if (r.suite == suite && r.format == format) {
                return &r;
            }
        }
        return nullptr;
    };

    auto table = [&](const std::string& heading, auto cell) {
        std::string out = "## " + heading + "\n\n| Suite |";
        for (auto format : kFormats) {
            out += " " + std::string(interaction_format_name(format)) + " |";
        }
        out += "\n|---|---|---|---|\n";
        for (const auto& suite : suites) {
            out += "| " + suite + " |";
            for (auto format : kFormats) {
                const SuiteResult* r = find(suite, format);
                // an absent combination is unknown, not zero
                out += " " + (r ? cell(*r) : std::string("—")) + " |";
            }
            out += "\n";
        }
        return out;
    };

    std::string report = "# Evaluation report\n\n";
    report += table("Accuracy (%)", [](const SuiteResult& r) { return format_fixed(r.accuracy, 1); });
    report += "\n";
    report += table("Average completion tokens", [](const SuiteResult& r) { return format_fixed(r.avg_tokens, 2); });
    return report;
}

std::string suite_result_to_json(const SuiteResult& result) {
    json items = json::array();
    for (const auto& item : result.items) {
        items.push_back({{"item_id", item.item_id},
                         {"samples", item.samples},
                         {"correct", item.correct},
                         {"item_accuracy", item.item_accuracy},
                         {"sample_tokens", item.sample_tokens}});
    }
    json doc = {{"suite", result.suite},
                {"format", interaction_format_name(result.format)},
                {"samples_per_item", result.samples_per_item},
                {"accuracy", result.accuracy},
                {"avg_tokens", result.avg_tokens},
                {"items", std::move(items)}};
    return doc.dump(2) + "\n";
}

SuiteResult suite_result_from_json(const std::string& text) {
    json doc = json::parse(text);
    SuiteResult result;
    result.suite = doc.at("suite").get<std::string>();
    result.format = interaction_format_from_name(doc.at("format").get<std::string>());
    result.samples_per_item = doc.at("samples_per_item").get<int>();
    result.accuracy = doc.at("accuracy").get<double>();
    result.avg_tokens = doc.at("avg_tokens").get<double>();
    for (const auto& item : doc.at("items")) {
        ItemResult ir;
        ir.item_id = item.at("item_id").get<std::string>();
        ir.samples = item.at("samples").get<int>();
        ir.correct = item.at("correct").get<int>();
        ir.item_accuracy = item.at("item_accuracy").get<double>();
        for (const auto& t : item.at("sample_tokens")) {
            ir.sample_tokens.push_back(t.get<int>());
        }
        result.items.push_back(std::move(ir));
    }
    return result;
}

}  // namespace longcot
