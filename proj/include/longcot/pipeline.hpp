#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "longcot/curator.hpp"
#include "longcot/eval.hpp"
#include "longcot/gateway.hpp"
#include "longcot/rejection.hpp"
#include "longcot/synthesizer.hpp"

namespace longcot {

struct BackendSettings {
    std::string kind{"mock"};  // mock | http
    std::string base_url;
    std::string api_path{"/v1/chat/completions"};
    std::string mock_script;  // required for kind=mock
    std::string model_id;
    RetryPolicy retry{};
    std::size_t max_in_flight{8};
};

// Every stage that consumes randomness names its seed explicitly; a missing
// seed is a config error, not a silent default.
struct SeedSettings {
    std::uint64_t synthesize{0};
    std::uint64_t curate{0};
    std::uint64_t reject_sample{0};
    std::uint64_t assemble{0};
    std::uint64_t evaluate{0};
};

struct StageToggles {
    bool synthesize{true};
    bool curate{true};
    bool reject_sample{true};
    bool assemble{true};
    bool evaluate{true};
};

struct EvalSuiteConfig {
    std::string name;
    std::string path;  // JSONL of {id, problem, ground_truth}
    bool hard{false};
};

struct PipelineConfig {
    BackendSettings backend;
    std::string corpus_path;
    std::size_t min_corpus_records{1};
    std::string templates_path;  // empty -> built-in defaults
    FilterRules filters{};
    bool include_true_to_false{true};
    std::vector<int> schedule{2, 10, 100};
    SeedSettings seeds;
    StageToggles stages;
    std::string out_dir;
    std::vector<std::size_t> scale_sizes;  // optional nested subset sizes
    std::vector<EvalSuiteConfig> eval_suites;
    std::vector<InteractionFormat> eval_formats{InteractionFormat::direct};
    int hard_suite_samples{8};
    int default_samples{1};
    Sampling sampling{};  // shared by synthesis, rejection, evaluation

    static PipelineConfig load(const std::string& path);
    // Throws std::runtime_error naming every violated key.
    void validate() const;
    std::string to_json() const;
};

struct IngestResult {
    std::vector<ProblemRecord> records;
    std::size_t skipped_malformed{0};
};

// Reads the corpus, dropping records that are not JSON objects with
// non-empty string id/problem/ground_truth. Fewer than min_records valid
// rows throws: "insufficient records: need N, have M".
IngestResult ingest_corpus(const std::string& path, std::size_t min_records);

struct ManifestStage {
    std::string name;
    std::uint64_t seed{0};
    std::map<std::string, std::string> output_digests;  // relative path -> fnv1a64 hex
    std::string completed_at;                           // informational only, never compared
};

struct RunManifest {
    std::string config_digest;
    std::vector<ManifestStage> stages;

    static RunManifest load(const std::string& path);
    void save(const std::string& path) const;
    const ManifestStage* find(const std::string& name) const;
    void upsert(ManifestStage stage);
};

inline constexpr std::string_view kManifestFile = "run_manifest.json";
inline constexpr std::string_view kLockFile = ".pipeline.lock";

// Guards an output directory against concurrent runs. Acquiring writes the
// current PID; a live owner throws, a stale lock (dead PID) is replaced.
class RunLock {
  public:
    explicit RunLock(const std::string& out_dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

  private:
    std::string path_;
    bool held_{false};
};

struct RunOptions {
    bool resume{false};  // skip stages whose manifest digests still match
    std::optional<std::uint64_t> seed_override;  // replaces every stage seed
};

struct RunSummary {
    std::vector<std::string> stages_run;
    std::vector<std::string> stages_skipped;  // resume hits
    std::map<std::string, std::string> outputs;  // logical name -> path
};

// Output names within out_dir.
inline constexpr std::string_view kCorpusFile = "corpus.clean.jsonl";
inline constexpr std::string_view kChainsFile = "chains.jsonl";
inline constexpr std::string_view kChainRejectionsFile = "chains.rejected.jsonl";
inline constexpr std::string_view kCuratedFile = "curated.jsonl";
inline constexpr std::string_view kCurationStatsFile = "curation_stats.json";
inline constexpr std::string_view kRetainedFile = "retained.jsonl";
inline constexpr std::string_view kRejectionLedgerFile = "rejection_ledger.jsonl";
inline constexpr std::string_view kRejectionSummaryFile = "rejection_summary.json";
inline constexpr std::string_view kDatasetMultiFile = "dataset.multi.jsonl";
inline constexpr std::string_view kDatasetRejFile = "dataset.rej.jsonl";
inline constexpr std::string_view kDatasetMergedFile = "dataset.merged.jsonl";
inline constexpr std::string_view kReportFile = "report.md";

std::unique_ptr<Backend> make_pipeline_backend(const BackendSettings& settings);

// Runs every enabled stage in order, recording seeds and output digests in
// the manifest after each stage completes. With options.resume, a stage whose
// recorded digests match the files on disk is skipped and later stages read
// those outputs as-is.
RunSummary run_pipeline(const PipelineConfig& config, const RunOptions& options);

// Rebuilds report.md from the eval result JSONs present in out_dir.
std::string regenerate_report(const std::string& out_dir);

}  // namespace longcot
