#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longcot/curator.hpp"
#include "longcot/rejection.hpp"

namespace longcot {

// Byte-exact source markers appended to prompts; see marker tests for the
// expected lengths (49 and 47 bytes).
inline constexpr std::string_view kMultiTurnMarker = "\n\nUsing the solution style from multi-turns data.";
inline constexpr std::string_view kRejectionMarker = "\n\nUsing the solution style from rejection data.";

// Appends the marker for `source` ("multi" | "rejection"). Throws
// std::invalid_argument on an unknown source or when the prompt already ends
// with either marker (double-append guard).
std::string append_marker(const std::string& prompt, const std::string& source);

struct SpanRange {
    std::size_t begin{0};  // byte offset into completion
    std::size_t end{0};    // exclusive
    bool train{false};
};

struct TrainingRecord {
    std::string id;
    std::string prompt;      // problem text + source marker
    std::string completion;  // segment texts joined by "\n\n"
    std::vector<SpanRange> spans;
    std::string source;  // "multi" | "rejection"

    std::size_t masked_bytes() const;
    std::size_t trained_bytes() const;
};

// Multi-turn record: completion = A1 ++ sep+Y1 ++ sep+A2 ++ sep+Y2final with
// each separator attached to the span of the segment it precedes. Train
// flags [false, true, true, true]: the masked set is {x, A1} (x lives in the
// prompt), the trained set {Y1, A2, Y2final}. Spans partition the completion
// exactly; violations throw std::logic_error.
TrainingRecord to_training_record(const CuratedRecord& record);

// Rejection record: whole completion is one trained span.
TrainingRecord to_training_record(const RetainedResponse& response, const std::string& problem_text);

struct MergeResult {
    std::vector<TrainingRecord> records;
    std::size_t renamed_ids{0};  // collisions resolved with a source suffix
};

// Concatenates both sources, resolves id collisions by suffixing the later
// record with "#<source>", and shuffles deterministically under seed.
MergeResult merge_datasets(const std::vector<TrainingRecord>& multi, const std::vector<TrainingRecord>& rejection,
                           std::uint64_t seed);

// JSON object per record: {id, prompt, completion, spans, source}.
std::string training_record_to_json(const TrainingRecord& record);
TrainingRecord training_record_from_json(const std::string& line);

// Chat-style export: system-free messages [{role:user, content:prompt},
// {role:assistant, content:completion, loss_spans:[...]}].
std::string training_record_to_messages_json(const TrainingRecord& record);

// Nested prefix subsets of an already-shuffled merged dataset. Sizes are
// clamped to the dataset length; each returned vector is a strict prefix of
// every longer one.
std::vector<std::vector<TrainingRecord>> scale_subsets(const std::vector<TrainingRecord>& merged,
                                                       const std::vector<std::size_t>& sizes);

}  // namespace longcot
