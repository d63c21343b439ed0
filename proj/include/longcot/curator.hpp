#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "longcot/synthesizer.hpp"

namespace longcot {

enum class ChainCategory { true_to_true, true_to_false, false_to_true, false_to_false };

std::string_view category_name(ChainCategory category);
ChainCategory category_from_name(std::string_view name);

// Exact truth table over (a1_correct, a2_correct).
ChainCategory classify(const CandidateChain& chain);

struct FilterRules {
    std::size_t min_section_chars{20};   // Y1 and Y2 length floor
    std::size_t repetition_window{40};   // substring length for the repetition check
    int repetition_limit{5};             // occurrences at which a chain is degenerate
};

// All failing reasons, not just the first; empty means pass.
// Reasons: transition-too-short, summary-too-short, answer1-missing-box,
// answer2-missing-box, degenerate-repetition.
std::vector<std::string> filter_chain(const CandidateChain& chain, const FilterRules& rules);

struct BalanceReport {
    std::size_t sum1{0};          // False-to-True count (all selected)
    std::size_t sum2{0};          // True-to-False count before subsampling
    std::size_t tt_needed{0};     // max(sum1 - sum2, 0)
    std::size_t tt_selected{0};
    std::size_t tt_shortfall{0};  // tt_needed - tt_selected when supply ran out
    std::size_t tf_selected{0};
    std::map<std::string, std::vector<std::string>> selected_ids;   // by category name
    std::map<std::string, std::size_t> discarded_counts;            // by category name
};

struct BalanceResult {
    BalanceReport report;
    std::vector<CandidateChain> selected;
};

// 1:1 ratio of a1-correct to a1-incorrect samples: all False-to-True (sum1),
// all True-to-False (sum2) supplemented with sum1 - sum2 True-to-True chosen
// uniformly under seed. sum2 > sum1 subsamples True-to-False down to sum1
// with zero True-to-True; short True-to-True supply is taken whole and the
// deficit reported. False-to-False is discarded entirely. The False-to-True
// selection never depends on the seed.
BalanceResult balance(const std::vector<CandidateChain>& chains, std::uint64_t seed);

inline constexpr std::string_view kSegmentSeparator = "\n\n";

struct Segment {
    std::string name;   // x | A1 | Y1 | A2 | Y2final
    std::string text;
    bool train{false};
};

struct CuratedRecord {
    std::string problem_id;
    ChainCategory category{ChainCategory::false_to_true};
    std::vector<Segment> segments;  // exactly x, A1, Y1, A2, Y2final
    std::string source{"multi"};

    // Segment texts joined by kSegmentSeparator; reversible given the
    // recorded segment lengths.
    std::string concatenated() const;
};

struct CurateOutcome {
    std::optional<CuratedRecord> record;
    std::string drop_reason;  // "summary-contradicts-category" when dropped
};

// Builds the five-segment record for a balanced chain. The problem text fills
// segment x. Train flags: x and A1 false, Y1/A2/Y2final true. The summary's
// final boxed answer must commit to the category's required answer (A1's
// value for True-to-False, A2's otherwise); contradicting records are
// dropped.
CurateOutcome concatenate(const CandidateChain& chain, ChainCategory category, const std::string& problem_text);

struct CurationStats {
    std::size_t input_chains{0};
    std::size_t filtered_out{0};
    std::size_t concat_dropped{0};
    std::size_t tf_excluded{0};
    std::map<std::string, std::size_t> filter_reasons;
    BalanceReport balance;
};

struct CurationResult {
    std::vector<CuratedRecord> records;
    CurationStats stats;
};

// Full phase-2 pass: filter, classify, balance, concatenate. problems maps
// problem_id -> problem text for segment x. include_true_to_false=false keeps
// True-to-False in the balancing arithmetic but omits its records.
CurationResult curate_chains(const std::vector<CandidateChain>& chains,
                             const std::map<std::string, std::string>& problems, const FilterRules& rules,
                             std::uint64_t seed, bool include_true_to_false = true);

}  // namespace longcot
