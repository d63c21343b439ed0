#include "longcot/assembler.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace longcot {

using json = nlohmann::json;

namespace {

bool ends_with(std::string_view text, std::string_view suffix) {
    return text.size() >= suffix.size() && text.substr(text.size() - suffix.size()) == suffix;
}

void check_partition(const TrainingRecord& record) {
    std::size_t cursor = 0;
    for (const auto& span : record.spans) {
        if (span.begin != cursor || span.end < span.begin) {
            throw std::logic_error("spans do not partition the completion (record " + record.id + ")");
        }
        cursor = span.end;
    }
    if (cursor != record.completion.size()) {
        throw std::logic_error("spans do not cover the completion (record " + record.id + ")");
    }
}

}  // namespace

std::string append_marker(const std::string& prompt, const std::string& source) {
    if (ends_with(prompt, kMultiTurnMarker) || ends_with(prompt, kRejectionMarker)) {
        throw std::invalid_argument("prompt already carries a source marker");
    }
    if (source == "multi") {
        return prompt + std::string(kMultiTurnMarker);
    }
    if (source == "rejection") {
        return prompt + std::string(kRejectionMarker);
    }
    throw std::invalid_argument("unknown source: " + source);
}

std::size_t TrainingRecord::masked_bytes() const {
    std::size_t total = 0;
    for (const auto& span : spans) {
        if (!span.train) {
            total += span.end - span.begin;
        }
    }
    return total;
}

std::size_t TrainingRecord::trained_bytes() const {
    std::size_t total = 0;
    for (const auto& span : spans) {
        if (span.train) {
            total += span.end - span.begin;
        }
    }
    return total;
}

TrainingRecord to_training_record(const CuratedRecord& record) {
    static const std::vector<std::string> expected_names = {"x", "A1", "Y1", "A2", "Y2final"};
    if (record.segments.size() != expected_names.size()) {
        throw std::logic_error("curated record must have exactly five segments");
    }
    for (std::size_t i = 0; i < expected_names.size(); ++i) {
        if (record.segments[i].name != expected_names[i]) {
            throw std::logic_error("unexpected segment layout: " + record.segments[i].name);
        }
    }

    TrainingRecord out;
    out.id = record.problem_id;
    out.source = "multi";
    out.prompt = append_marker(record.segments[0].text, "multi");

    // Completion holds the four post-prompt segments; every separator rides
    // on the span of the segment it introduces, so the A1 span is exactly A1.
    for (std::size_t i = 1; i < record.segments.size(); ++i) {
        const Segment& segment = record.segments[i];
        SpanRange span;
        span.begin = out.completion.size();
        if (i > 1) {
            out.completion += std::string(kSegmentSeparator);
        }
        out.completion += segment.text;
        span.end = out.completion.size();
        span.train = segment.train;
        out.spans.push_back(span);
    }
    check_partition(out);
    if (out.spans[0].train || !out.spans[1].train || !out.spans[2].train || !out.spans[3].train) {
        throw std::logic_error("multi-turn record must mask exactly the first attempt");
    }
    return out;
}

TrainingRecord to_training_record(const RetainedResponse& response, const std::string& problem_text) {
    TrainingRecord out;
    out.id = response.problem_id;
    out.source = "rejection";
    out.prompt = append_marker(problem_text, "rejection");
    out.completion = response.text;
    out.spans = {{0, out.completion.size(), true}};
    check_partition(out);
    return out;
}

MergeResult merge_datasets(const std::vector<TrainingRecord>& multi, const std::vector<TrainingRecord>& rejection,
                           std::uint64_t seed) {
    MergeResult result;
    result.records.reserve(multi.size() + rejection.size());
    std::unordered_set<std::string> seen;
    for (const auto* source : {&multi, &rejection}) {
        for (const auto& record : *source) {
            TrainingRecord copy = record;
            if (!seen.insert(copy.id).second) {
                copy.id += "#" + copy.source;
                if (!seen.insert(copy.id).second) {
                    throw std::invalid_argument("unresolvable id collision: " + record.id);
                }
                ++result.renamed_ids;
            }
            result.records.push_back(std::move(copy));
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(result.records.begin(), result.records.end(), rng);
    return result;
}

std::string training_record_to_json(const TrainingRecord& record) {
    json spans = json::array();
    for (const auto& span : record.spans) {
        spans.push_back({{"begin", span.begin}, {"end", span.end}, {"train", span.train}});
    }
    json doc = {{"id", record.id},
                {"prompt", record.prompt},
                {"completion", record.completion},
                {"spans", std::move(spans)},
                {"source", record.source}};
    return doc.dump();
}

TrainingRecord training_record_from_json(const std::string& line) {
    json doc = json::parse(line);
    TrainingRecord record;
    record.id = doc.at("id").get<std::string>();
    record.prompt = doc.at("prompt").get<std::string>();
    record.completion = doc.at("completion").get<std::string>();
    record.source = doc.at("source").get<std::string>();
    for (const auto& span : doc.at("spans")) {
        record.spans.push_back(
            {span.at("begin").get<std::size_t>(), span.at("end").get<std::size_t>(), span.at("train").get<bool>()});
    }
    check_partition(record);
    return record;
}

std::string training_record_to_messages_json(const TrainingRecord& record) {
    json loss_spans = json::array();
    for (const auto& span : record.spans) {
        if (span.train) {
            loss_spans.push_back({{"begin", span.begin}, {"end", span.end}});
        }
    }
    json doc = {{"id", record.id},
                {"source", record.source},
                {"messages",
                 json::array({{{"role", "user"}, {"content", record.prompt}},
                              {{"role", "assistant"},
                               {"content", record.completion},
                               {"loss_spans", std::move(loss_spans)}}})}};
    return doc.dump();
}

std::vector<std::vector<TrainingRecord>> scale_subsets(const std::vector<TrainingRecord>& merged,
                                                       const std::vector<std::size_t>& sizes) {
    std::vector<std::vector<TrainingRecord>> subsets;
    subsets.reserve(sizes.size());
    for (std::size_t size : sizes) {
        std::size_t take = std::min(size, merged.size());
        subsets.emplace_back(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return subsets;
}

}  // namespace longcot
