#include "longcot/curator.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "longcot/common.hpp"
#include "longcot/verifier.hpp"

namespace longcot {

std::string_view category_name(ChainCategory category) {
    switch (category) {
        case ChainCategory::true_to_true: return "true_to_true";
        case ChainCategory::true_to_false: return "true_to_false";
        case ChainCategory::false_to_true: return "false_to_true";
        case ChainCategory::false_to_false: return "false_to_false";
    }
    return "false_to_false";
}

ChainCategory category_from_name(std::string_view name) {
    if (name == "true_to_true") return ChainCategory::true_to_true;
    if (name == "true_to_false") return ChainCategory::true_to_false;
    if (name == "false_to_true") return ChainCategory::false_to_true;
    if (name == "false_to_false") return ChainCategory::false_to_false;
    throw std::invalid_argument("unknown chain category: " + std::string(name));
}

ChainCategory classify(const CandidateChain& chain) {
    if (chain.a1_correct) {
        return chain.a2_correct ? ChainCategory::true_to_true : ChainCategory::true_to_false;
    }
    return chain.a2_correct ? ChainCategory::false_to_true : ChainCategory::false_to_false;
}

namespace {

// Any window-sized substring occurring at least `limit` times (overlapping
// occurrences count) marks collapsed, looping output.
bool has_degenerate_repetition(const std::string& text, std::size_t window, int limit) {
    if (limit <= 1) {
        return !text.empty();
    }
    if (window == 0 || text.size() < window) {
        return false;
    }
    std::unordered_map<std::string_view, int> counts;
    counts.reserve(text.size());
    std::string_view view(text);
    for (std::size_t i = 0; i + window <= view.size(); ++i) {
        if (++counts[view.substr(i, window)] >= limit) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> filter_chain(const CandidateChain& chain, const FilterRules& rules) {
    std::vector<std::string> reasons;
    if (trim(chain.y1).size() < rules.min_section_chars) {
        reasons.push_back("transition-too-short");
    }
    if (trim(chain.y2_final).size() < rules.min_section_chars) {
        reasons.push_back("summary-too-short");
    }
    if (!extract_boxed(chain.a1)) {
        reasons.push_back("answer1-missing-box");
    }
    if (!extract_boxed(chain.a2)) {
        reasons.push_back("answer2-missing-box");
    }
    std::string combined = chain.a1;
    for (const auto* part : {&chain.y1, &chain.a2, &chain.y2_final}) {
        combined += kSegmentSeparator;
        combined += *part;
    }
    if (has_degenerate_repetition(combined, rules.repetition_window, rules.repetition_limit)) {
        reasons.push_back("degenerate-repetition");
    }
    return reasons;
}

BalanceResult balance(const std::vector<CandidateChain>& chains, std::uint64_t seed) {
    std::vector<std::size_t> ft, tf, tt, ff;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        switch (classify(chains[i])) {
            case ChainCategory::false_to_true: ft.push_back(i); break;
            case ChainCategory::true_to_false: tf.push_back(i); break;
            case ChainCategory::true_to_true: tt.push_back(i); break;
            case ChainCategory::false_to_false: ff.push_back(i); break;
        }
    }

    BalanceResult result;
    BalanceReport& report = result.report;
    report.sum1 = ft.size();
    report.sum2 = tf.size();

    std::mt19937_64 rng(seed);
    std::unordered_set<std::size_t> chosen(ft.begin(), ft.end());

    if (report.sum2 > report.sum1) {
        // Too many corrupted-first-answer chains: subsample them down to the
        // fixed-first-answer count and use no supplements.
        std::vector<std::size_t> pool = tf;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(report.sum1);
        chosen.insert(pool.begin(), pool.end());
        report.tf_selected = report.sum1;
        report.tt_needed = 0;
    } else {
        chosen.insert(tf.begin(), tf.end());
        report.tf_selected = tf.size();
        report.tt_needed = report.sum1 - report.sum2;
        std::vector<std::size_t> pool = tt;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::size_t take = std::min(report.tt_needed, pool.size());
        pool.resize(take);
        chosen.insert(pool.begin(), pool.end());
        report.tt_selected = take;
        report.tt_shortfall = report.tt_needed - take;
    }

    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (!chosen.count(i)) {
            continue;
        }
        result.selected.push_back(chains[i]);
        report.selected_ids[std::string(category_name(classify(chains[i])))].push_back(chains[i].problem_id);
    }
    auto discarded = [&](const std::vector<std::size_t>& pool, ChainCategory category) {
        std::size_t kept = 0;
        for (std::size_t i : pool) {
            kept += chosen.count(i);
        }
        if (pool.size() > kept) {
            report.discarded_counts[std::string(category_name(category))] = pool.size() - kept;
        }
    };
    discarded(ff, ChainCategory::false_to_false);
    discarded(tt, ChainCategory::true_to_true);
    discarded(tf, ChainCategory::true_to_false);
    return result;
}

std::string CuratedRecord::concatenated() const {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i != 0) {
            out += kSegmentSeparator;
        }
        out += segments[i].text;
    }
    return out;
}

CurateOutcome concatenate(const CandidateChain& chain, ChainCategory category, const std::string& problem_text) {
    CurateOutcome outcome;

    // The summary must commit to the answer the category promises: the first
    // attempt's for true_to_false, the second attempt's otherwise.
    const std::string& committed_source =
        (category == ChainCategory::true_to_false) ? chain.a1 : chain.a2;
    auto required = extract_boxed(committed_source);
    auto actual = extract_boxed(chain.y2_final);
    if (!required || !actual || !equivalent(actual->raw, required->raw)) {
        outcome.drop_reason = "summary-contradicts-category";
        return outcome;
    }

    CuratedRecord record;
    record.problem_id = chain.problem_id;
    record.category = category;
    record.segments = {{"x", problem_text, false},
                       {"A1", chain.a1, false},
                       {"Y1", chain.y1, true},
                       {"A2", chain.a2, true},
                       {"Y2final", chain.y2_final, true}};
    outcome.record = std::move(record);
    return outcome;
}

CurationResult curate_chains(const std::vector<CandidateChain>& chains,
                             const std::map<std::string, std::string>& problems, const FilterRules& rules,
                             std::uint64_t seed, bool include_true_to_false) {
    CurationResult result;
    result.stats.input_chains = chains.size();

    std::vector<CandidateChain> kept;
    for (const auto& chain : chains) {
        auto reasons = filter_chain(chain, rules);
        if (reasons.empty()) {
            kept.push_back(chain);
        } else {
            ++result.stats.filtered_out;
            for (const auto& reason : reasons) {
                ++result.stats.filter_reasons[reason];
            }
        }
    }

    BalanceResult balanced = balance(kept, seed);
    result.stats.balance = balanced.report;

    for (const auto& chain : balanced.selected) {
        ChainCategory category = classify(chain);
        if (!include_true_to_false && category == ChainCategory::true_to_false) {
            ++result.stats.tf_excluded;
            continue;
        }
        auto at = problems.find(chain.problem_id);
        if (at == problems.end()) {
            throw std::invalid_argument("no problem text for id: " + chain.problem_id);
        }
        CurateOutcome outcome = concatenate(chain, category, at->second);
        if (outcome.record) {
            result.records.push_back(std::move(*outcome.record));
        } else {
            ++result.stats.concat_dropped;
        }
    }
    return result;
}

}  // namespace longcot
