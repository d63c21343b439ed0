#pragma once

// Shared builders for unit and acceptance tests: disposable directories,
// miniature corpora, and hand-assembled chains whose texts satisfy the
// curation filters.

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "longcot/curator.hpp"
#include "longcot/synthesizer.hpp"

namespace testsupport {

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("longcot-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str(const std::string& name = "") const {
        return name.empty() ? path.string() : (path / name).string();
    }
};

inline longcot::ProblemRecord make_problem(int i) {
    longcot::ProblemRecord p;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "q%03d", i);
    p.id = buf;
    p.problem = "If a crate holds " + std::to_string(i + 2) + " boxes and each box holds " + std::to_string(i + 3) +
                " parts, how many parts fit in the crate?";
    p.ground_truth = std::to_string((i + 2) * (i + 3));
    return p;
}

inline std::vector<longcot::ProblemRecord> make_corpus(int n) {
    std::vector<longcot::ProblemRecord> corpus;
    for (int i = 0; i < n; ++i) {
        corpus.push_back(make_problem(i));
    }
    return corpus;
}

// A chain whose sections pass every default filter and whose summary commits
// to the answer its category requires.
inline longcot::CandidateChain make_chain(const std::string& id, bool a1_correct, bool a2_correct,
                                          const std::string& ground_truth = "7") {
    const std::string wrong = ground_truth == "3" ? "5" : "3";
    longcot::CandidateChain chain;
    chain.problem_id = id;
    chain.a1 = "Setting up the quantities and simplifying carefully gives \\boxed{" +
               (a1_correct ? ground_truth : wrong) + "}.";
    chain.y1 = "Let me pause and question that computation before trusting it; I will redo it from scratch.";
    chain.a2 = "Working through the problem once more from first principles yields \\boxed{" +
               (a2_correct ? ground_truth : wrong) + "}.";
    const std::string committed = (a1_correct && !a2_correct) ? (a1_correct ? ground_truth : wrong)
                                                              : (a2_correct ? ground_truth : wrong);
    chain.y2_final =
        "Comparing both attempts and rechecking each step, the answer that survives is \\boxed{" + committed + "}.";
    chain.a1_correct = a1_correct;
    chain.a2_correct = a2_correct;
    return chain;
}

}  // namespace testsupport
