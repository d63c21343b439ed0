#include "longcot/pipeline.hpp"

#include <sys/types.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <unistd.h>

#include "json.hpp"
#include "longcot/assembler.hpp"
#include "longcot/common.hpp"
#include "longcot/jsonl.hpp"

namespace longcot {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

json chain_to_json(const CandidateChain& chain) {
    return {{"problem_id", chain.problem_id}, {"a1", chain.a1},
            {"y1", chain.y1},                 {"a2", chain.a2},
            {"y2_final", chain.y2_final},     {"a1_correct", chain.a1_correct},
            {"a2_correct", chain.a2_correct}, {"turn_count", chain.turn_count}};
}

CandidateChain chain_from_json(const json& doc) {
    CandidateChain chain;
    chain.problem_id = doc.at("problem_id").get<std::string>();
    chain.a1 = doc.at("a1").get<std::string>();
    chain.y1 = doc.at("y1").get<std::string>();
    chain.a2 = doc.at("a2").get<std::string>();
    chain.y2_final = doc.at("y2_final").get<std::string>();
    chain.a1_correct = doc.at("a1_correct").get<bool>();
    chain.a2_correct = doc.at("a2_correct").get<bool>();
    chain.turn_count = doc.value("turn_count", 2);
    return chain;
}

json problem_to_json(const ProblemRecord& record) {
    return {{"id", record.id}, {"problem", record.problem}, {"ground_truth", record.ground_truth}};
}

ProblemRecord problem_from_json(const json& doc) {
    return {doc.at("id").get<std::string>(), doc.at("problem").get<std::string>(),
            doc.at("ground_truth").get<std::string>()};
}

json curated_to_json(const CuratedRecord& record) {
    json segments = json::array();
    for (const auto& segment : record.segments) {
        segments.push_back({{"name", segment.name}, {"text", segment.text}, {"train", segment.train}});
    }
    return {{"problem_id", record.problem_id},
            {"category", category_name(record.category)},
            {"segments", std::move(segments)},
            {"source", record.source}};
}

CuratedRecord curated_from_json(const json& doc) {
    CuratedRecord record;
    record.problem_id = doc.at("problem_id").get<std::string>();
    record.category = category_from_name(doc.at("category").get<std::string>());
    record.source = doc.value("source", "multi");
    for (const auto& segment : doc.at("segments")) {
        record.segments.push_back({segment.at("name").get<std::string>(), segment.at("text").get<std::string>(),
                                   segment.at("train").get<bool>()});
    }
    return record;
}

json retained_to_json(const RetainedResponse& response) {
    return {{"problem_id", response.problem_id},
            {"round_index", response.round_index},
            {"sample_index", response.sample_index},
            {"text", response.text},
            {"completion_tokens", response.completion_tokens}};
}

RetainedResponse retained_from_json(const json& doc) {
    return {doc.at("problem_id").get<std::string>(), doc.at("round_index").get<int>(),
            doc.at("sample_index").get<int>(), doc.at("text").get<std::string>(),
            doc.value("completion_tokens", 0)};
}

std::vector<ProblemRecord> load_clean_corpus(const fs::path& path) {
    std::vector<ProblemRecord> records;
    for (const auto& line : read_jsonl_lines(path.string())) {
        if (!line.empty()) {
            records.push_back(problem_from_json(json::parse(line)));
        }
    }
    return records;
}

std::map<std::string, std::string> problem_text_map(const std::vector<ProblemRecord>& corpus) {
    std::map<std::string, std::string> out;
    for (const auto& record : corpus) {
        out[record.id] = record.problem;
    }
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    json doc = json::parse(read_file(path));
    PipelineConfig config;
    std::vector<std::string> missing;

    if (!doc.contains("backend") || !doc["backend"].is_object()) {
        missing.push_back("backend");
    } else {
        const json& b = doc["backend"];
        config.backend.kind = b.value("kind", "mock");
        config.backend.base_url = b.value("base_url", "");
        config.backend.api_path = b.value("api_path", config.backend.api_path);
        config.backend.mock_script = b.value("mock_script", "");
        if (b.contains("model_id")) {
            config.backend.model_id = b["model_id"].get<std::string>();
        } else {
            missing.push_back("backend.model_id");
        }
        if (b.contains("retry")) {
            config.backend.retry.max_retries = b["retry"].value("max_retries", config.backend.retry.max_retries);
            config.backend.retry.initial_backoff_ms =
                b["retry"].value("initial_backoff_ms", config.backend.retry.initial_backoff_ms);
            config.backend.retry.multiplier = b["retry"].value("multiplier", config.backend.retry.multiplier);
        }
        config.backend.max_in_flight = b.value("max_in_flight", config.backend.max_in_flight);
    }

    if (!doc.contains("corpus") || !doc["corpus"].is_object() || !doc["corpus"].contains("path")) {
        missing.push_back("corpus.path");
    } else {
        config.corpus_path = doc["corpus"]["path"].get<std::string>();
        config.min_corpus_records = doc["corpus"].value("min_records", config.min_corpus_records);
    }

    config.templates_path = doc.value("templates_path", "");

    if (doc.contains("filters")) {
        const json& f = doc["filters"];
        config.filters.min_section_chars = f.value("min_section_chars", config.filters.min_section_chars);
        config.filters.repetition_window = f.value("repetition_window", config.filters.repetition_window);
        config.filters.repetition_limit = f.value("repetition_limit", config.filters.repetition_limit);
    }
    config.include_true_to_false = doc.value("include_true_to_false", true);

    if (doc.contains("schedule")) {
        config.schedule.clear();
        for (const auto& budget : doc["schedule"]) {
            config.schedule.push_back(budget.get<int>());
        }
    }

    if (!doc.contains("seeds") || !doc["seeds"].is_object()) {
        missing.push_back("seeds");
    } else {
        const json& s = doc["seeds"];
        auto require_seed = [&](const char* key, std::uint64_t& slot) {
            if (s.contains(key)) {
                slot = s[key].get<std::uint64_t>();
            } else {
                missing.push_back(std::string("seeds.") + key);
            }
        };
        require_seed("synthesize", config.seeds.synthesize);
        require_seed("curate", config.seeds.curate);
        require_seed("reject_sample", config.seeds.reject_sample);
        require_seed("assemble", config.seeds.assemble);
        require_seed("evaluate", config.seeds.evaluate);
    }

    if (doc.contains("stages")) {
        const json& s = doc["stages"];
        config.stages.synthesize = s.value("synthesize", true);
        config.stages.curate = s.value("curate", true);
        config.stages.reject_sample = s.value("reject_sample", true);
        config.stages.assemble = s.value("assemble", true);
        config.stages.evaluate = s.value("evaluate", true);
    }

    if (doc.contains("out_dir")) {
        config.out_dir = doc["out_dir"].get<std::string>();
    } else {
        missing.push_back("out_dir");
    }

    if (doc.contains("scale_sizes")) {
        for (const auto& size : doc["scale_sizes"]) {
            config.scale_sizes.push_back(size.get<std::size_t>());
        }
    }

    if (doc.contains("eval")) {
        const json& e = doc["eval"];
        for (const auto& suite : e.value("suites", json::array())) {
            config.eval_suites.push_back({suite.at("name").get<std::string>(), suite.at("path").get<std::string>(),
                                          suite.value("hard", false)});
        }
        if (e.contains("formats")) {
            config.eval_formats.clear();
            for (const auto& format : e["formats"]) {
                config.eval_formats.push_back(interaction_format_from_name(format.get<std::string>()));
            }
        }
        config.hard_suite_samples = e.value("hard_suite_samples", config.hard_suite_samples);
        config.default_samples = e.value("default_samples", config.default_samples);
    }

    if (doc.contains("sampling")) {
        const json& s = doc["sampling"];
        config.sampling.temperature = s.value("temperature", config.sampling.temperature);
        config.sampling.top_p = s.value("top_p", config.sampling.top_p);
        config.sampling.max_tokens = s.value("max_tokens", config.sampling.max_tokens);
    }

    if (!missing.empty()) {
        std::string joined;
        for (const auto& key : missing) {
            joined += joined.empty() ? key : ", " + key;
        }
        throw std::runtime_error("config " + path + " is missing required keys: " + joined);
    }
    return config;
}

void PipelineConfig::validate() const {
    std::vector<std::string> problems;
    if (backend.kind != "mock" && backend.kind != "http") {
        problems.push_back("backend.kind must be 'mock' or 'http'");
    }
    if (backend.kind == "mock" && backend.mock_script.empty()) {
        problems.push_back("backend.mock_script is required for the mock backend");
    }
    if (backend.kind == "http" && backend.base_url.empty()) {
        problems.push_back("backend.base_url is required for the http backend");
    }
    if (backend.model_id.empty()) {
        problems.push_back("backend.model_id is empty");
    }
    if (backend.max_in_flight < 1) {
        problems.push_back("backend.max_in_flight must be >= 1");
    }
    if (corpus_path.empty()) {
        problems.push_back("corpus.path is empty");
    }
    if (out_dir.empty()) {
        problems.push_back("out_dir is empty");
    }
    if (schedule.empty()) {
        problems.push_back("schedule is empty");
    }
    for (int budget : schedule) {
        if (budget < 1) {
            problems.push_back("schedule budgets must be >= 1");
            break;
        }
    }
    if (filters.repetition_limit < 2) {
        problems.push_back("filters.repetition_limit must be >= 2");
    }
    if (filters.repetition_window < 1) {
        problems.push_back("filters.repetition_window must be >= 1");
    }
    for (std::size_t i = 1; i < scale_sizes.size(); ++i) {
        if (scale_sizes[i] <= scale_sizes[i - 1]) {
            problems.push_back("scale_sizes must be strictly increasing");
            break;
        }
    }
    if (hard_suite_samples < 1 || default_samples < 1) {
        problems.push_back("eval sample counts must be >= 1");
    }
    {
        std::set<std::string> names;
        for (const auto& suite : eval_suites) {
            if (suite.name.empty() || suite.path.empty()) {
                problems.push_back("eval suite with empty name or path");
                break;
            }
            if (!names.insert(suite.name).second) {
                problems.push_back("duplicate eval suite name: " + suite.name);
                break;
            }
        }
    }
    if (stages.evaluate && !eval_suites.empty() && eval_formats.empty()) {
        problems.push_back("eval.formats is empty");
    }
    if (sampling.temperature < 0.0 || sampling.top_p <= 0.0 || sampling.top_p > 1.0 || sampling.max_tokens < 1) {
        problems.push_back("sampling parameters out of range");
    }
    if (!problems.empty()) {
        std::string joined;
        for (const auto& p : problems) {
            joined += joined.empty() ? p : "; " + p;
        }
        throw std::runtime_error("invalid config: " + joined);
    }
}

std::string PipelineConfig::to_json() const {
    json formats = json::array();
    for (auto format : eval_formats) {
        formats.push_back(interaction_format_name(format));
    }
    json suites = json::array();
    for (const auto& suite : eval_suites) {
        suites.push_back({{"name", suite.name}, {"path", suite.path}, {"hard", suite.hard}});
    }
    json doc = {
        {"backend",
         {{"kind", backend.kind},
          {"base_url", backend.base_url},
          {"api_path", backend.api_path},
          {"mock_script", backend.mock_script},
          {"model_id", backend.model_id},
          {"retry",
           {{"max_retries", backend.retry.max_retries},
            {"initial_backoff_ms", backend.retry.initial_backoff_ms},
            {"multiplier", backend.retry.multiplier}}},
          {"max_in_flight", backend.max_in_flight}}},
        {"corpus", {{"path", corpus_path}, {"min_records", min_corpus_records}}},
        {"templates_path", templates_path},
        {"filters",
         {{"min_section_chars", filters.min_section_chars},
          {"repetition_window", filters.repetition_window},
          {"repetition_limit", filters.repetition_limit}}},
        {"include_true_to_false", include_true_to_false},
        {"schedule", schedule},
        {"seeds",
         {{"synthesize", seeds.synthesize},
          {"curate", seeds.curate},
          {"reject_sample", seeds.reject_sample},
          {"assemble", seeds.assemble},
          {"evaluate", seeds.evaluate}}},
        {"stages",
         {{"synthesize", stages.synthesize},
          {"curate", stages.curate},
          {"reject_sample", stages.reject_sample},
          {"assemble", stages.assemble},
          {"evaluate", stages.evaluate}}},
        {"out_dir", out_dir},
        {"scale_sizes", scale_sizes},
        {"eval",
         {{"suites", std::move(suites)},
          {"formats", std::move(formats)},
          {"hard_suite_samples", hard_suite_samples},
          {"default_samples", default_samples}}},
        {"sampling",
         {{"temperature", sampling.temperature}, {"top_p", sampling.top_p}, {"max_tokens", sampling.max_tokens}}}};
    return doc.dump(2) + "\n";
}

IngestResult ingest_corpus(const std::string& path, std::size_t min_records) {
    IngestResult result;
    std::set<std::string> ids;
    for (const auto& line : read_jsonl_lines(path)) {
        if (trim(line).empty()) {
            continue;
        }
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            ++result.skipped_malformed;
            continue;
        }
        if (!doc.contains("id") || !doc["id"].is_string() || !doc.contains("problem") ||
            !doc["problem"].is_string() || !doc.contains("ground_truth") || !doc["ground_truth"].is_string()) {
            ++result.skipped_malformed;
            continue;
        }
        ProblemRecord record = problem_from_json(doc);
        if (record.id.empty() || record.problem.empty() || record.ground_truth.empty() ||
            !ids.insert(record.id).second) {
            ++result.skipped_malformed;
            continue;
        }
        result.records.push_back(std::move(record));
    }
    if (result.records.size() < min_records) {
        throw std::runtime_error("insufficient records: need " + std::to_string(min_records) + ", have " +
                                 std::to_string(result.records.size()));
    }
    return result;
}

RunManifest RunManifest::load(const std::string& path) {
    json doc = json::parse(read_file(path));
    RunManifest manifest;
    manifest.config_digest = doc.value("config_digest", "");
    for (const auto& stage : doc.value("stages", json::array())) {
        ManifestStage s;
        s.name = stage.at("name").get<std::string>();
        s.seed = stage.value("seed", 0ULL);
        s.completed_at = stage.value("completed_at", "");
        for (auto it = stage.at("outputs").begin(); it != stage.at("outputs").end(); ++it) {
            s.output_digests[it.key()] = it.value().get<std::string>();
        }
        manifest.stages.push_back(std::move(s));
    }
    return manifest;
}

void RunManifest::save(const std::string& path) const {
    json stages_doc = json::array();
    for (const auto& stage : stages) {
        json outputs = json::object();
        for (const auto& [file, digest] : stage.output_digests) {
            outputs[file] = digest;
        }
        stages_doc.push_back({{"name", stage.name},
                              {"seed", stage.seed},
                              {"outputs", std::move(outputs)},
                              {"completed_at", stage.completed_at}});
    }
    json doc = {{"config_digest", config_digest}, {"stages", std::move(stages_doc)}};
    write_file(path, doc.dump(2) + "\n");
}

const ManifestStage* RunManifest::find(const std::string& name) const {
    for (const auto& stage : stages) {
        if (stage.name == name) {
            return &stage;
        }
    }
    return nullptr;
}

void RunManifest::upsert(ManifestStage stage) {
    for (auto& existing : stages) {
        if (existing.name == stage.name) {
            existing = std::move(stage);
            return;
        }
    }
    stages.push_back(std::move(stage));
}

RunLock::RunLock(const std::string& out_dir) {
    fs::create_directories(out_dir);
    path_ = (fs::path(out_dir) / kLockFile).string();
    if (fs::exists(path_)) {
        std::string contents = trim(read_file(path_));
        pid_t pid = 0;
        try {
            pid = static_cast<pid_t>(std::stol(contents));
        } catch (...) {
            pid = 0;
        }
        if (pid > 0 && ::kill(pid, 0) == 0 && pid != ::getpid()) {
            throw std::runtime_error("output directory is locked by running process " + contents);
        }
        // stale lock from a dead process: take it over
    }
    write_file(path_, std::to_string(::getpid()) + "\n");
    held_ = true;
}

RunLock::~RunLock() {
    if (held_) {
        std::error_code ec;
        fs::remove(path_, ec);
    }
}

std::unique_ptr<Backend> make_pipeline_backend(const BackendSettings& settings) {
    return make_backend(settings.kind, settings.base_url, settings.api_path, settings.mock_script, settings.retry);
}

namespace {

struct StageRunner {
    const PipelineConfig& config;
    fs::path out;
    RunManifest& manifest;
    RunSummary& summary;
    bool resume{false};

    bool up_to_date(const std::string& name) const {
        if (!resume) {
            return false;
        }
        const ManifestStage* stage = manifest.find(name);
        if (!stage || stage->output_digests.empty()) {
            return false;
        }
        for (const auto& [file, digest] : stage->output_digests) {
            fs::path path = out / file;
            if (!fs::exists(path) || file_digest(path) != digest) {
                return false;
            }
        }
        return true;
    }

    // Runs body() unless the stage's recorded outputs are still intact, then
    // records fresh digests for `outputs` and persists the manifest.
    template <typename Body>
    void stage(const std::string& name, std::uint64_t seed, const std::vector<std::string>& outputs, Body body) {
        if (up_to_date(name)) {
            summary.stages_skipped.push_back(name);
        } else {
            body();
            ManifestStage record;
            record.name = name;
            record.seed = seed;
            for (const auto& file : outputs) {
                record.output_digests[file] = file_digest(out / file);
            }
            record.completed_at = iso_timestamp();
            manifest.upsert(std::move(record));
            manifest.save((out / kManifestFile).string());
            summary.stages_run.push_back(name);
        }
        for (const auto& file : outputs) {
            summary.outputs[file] = (out / file).string();
        }
    }
};

}  // namespace

RunSummary run_pipeline(const PipelineConfig& config, const RunOptions& options) {
    PipelineConfig effective = config;
    if (options.seed_override) {
        effective.seeds.synthesize = *options.seed_override;
        effective.seeds.curate = *options.seed_override;
        effective.seeds.reject_sample = *options.seed_override;
        effective.seeds.assemble = *options.seed_override;
        effective.seeds.evaluate = *options.seed_override;
    }
    effective.validate();

    fs::path out(effective.out_dir);
    fs::create_directories(out);
    RunLock lock(effective.out_dir);

    // Stage toggles select which stages THIS invocation runs and out_dir is
    // where; neither changes what a stage computes. Leaving them out lets a
    // partial run (single-stage subcommand, interrupted run) resume under the
    // full config without invalidating the manifest.
    json digest_doc = json::parse(effective.to_json());
    digest_doc.erase("stages");
    digest_doc.erase("out_dir");
    const std::string config_digest = hex64(fnv1a64(digest_doc.dump()));
    RunManifest manifest;
    manifest.config_digest = config_digest;
    fs::path manifest_path = out / kManifestFile;
    if (options.resume && fs::exists(manifest_path)) {
        RunManifest previous = RunManifest::load(manifest_path.string());
        if (previous.config_digest == config_digest) {
            manifest = std::move(previous);
        }
        // a config change invalidates every recorded stage
    }

    RunSummary summary;
    StageRunner runner{effective, out, manifest, summary, options.resume};

    PromptTemplateSet templates =
        effective.templates_path.empty() ? PromptTemplateSet::defaults() : PromptTemplateSet::load(effective.templates_path);
    templates.validate();

    std::unique_ptr<Backend> backend;
    auto ensure_backend = [&]() -> Backend& {
        if (!backend) {
            backend = make_pipeline_backend(effective.backend);
        }
        return *backend;
    };

    runner.stage("ingest", 0, {std::string(kCorpusFile)}, [&] {
        IngestResult ingest = ingest_corpus(effective.corpus_path, effective.min_corpus_records);
        std::vector<std::string> lines;
        lines.reserve(ingest.records.size());
        for (const auto& record : ingest.records) {
            lines.push_back(problem_to_json(record).dump());
        }
        write_jsonl_lines((out / kCorpusFile).string(), lines);
    });

    if (effective.stages.synthesize) {
        runner.stage("synthesize", effective.seeds.synthesize,
                     {std::string(kChainsFile), std::string(kChainRejectionsFile)}, [&] {
                         auto corpus = load_clean_corpus(out / kCorpusFile);
                         SynthesisSettings settings{effective.backend.model_id, effective.sampling};
                         fs::path partial = out / (std::string(kChainsFile) + ".partial");
                         std::error_code ec;
                         fs::remove(partial, ec);
                         Stage1Result stage1 = run_stage1(
                             corpus, templates, ensure_backend(), settings,
                             static_cast<int>(effective.backend.max_in_flight), [&](const SynthesisOutcome& o) {
                                 if (o.chain) {
                                     append_jsonl_line(partial.string(), chain_to_json(*o.chain).dump());
                                 }
                             });
                         std::vector<std::string> chain_lines;
                         for (const auto& chain : stage1.chains) {
                             chain_lines.push_back(chain_to_json(chain).dump());
                         }
                         std::vector<std::string> rejection_lines;
                         for (const auto& rejection : stage1.rejections) {
                             rejection_lines.push_back(
                                 json({{"problem_id", rejection.problem_id}, {"reason", rejection.reason}}).dump());
                         }
                         write_jsonl_lines((out / kChainsFile).string(), chain_lines);
                         write_jsonl_lines((out / kChainRejectionsFile).string(), rejection_lines);
                         fs::remove(partial, ec);
                     });
    }

    if (effective.stages.curate) {
        runner.stage("curate", effective.seeds.curate,
                     {std::string(kCuratedFile), std::string(kCurationStatsFile)}, [&] {
                         auto corpus = load_clean_corpus(out / kCorpusFile);
                         std::vector<CandidateChain> chains;
                         for (const auto& line : read_jsonl_lines((out / kChainsFile).string())) {
                             if (!line.empty()) {
                                 chains.push_back(chain_from_json(json::parse(line)));
                             }
                         }
                         CurationResult curated =
                             curate_chains(chains, problem_text_map(corpus), effective.filters,
                                           effective.seeds.curate, effective.include_true_to_false);
                         std::vector<std::string> lines;
                         for (const auto& record : curated.records) {
                             lines.push_back(curated_to_json(record).dump());
                         }
                         write_jsonl_lines((out / kCuratedFile).string(), lines);

                         json reasons = json::object();
                         for (const auto& [reason, count] : curated.stats.filter_reasons) {
                             reasons[reason] = count;
                         }
                         json selected = json::object();
                         for (const auto& [category, ids] : curated.stats.balance.selected_ids) {
                             selected[category] = ids;
                         }
                         json discarded = json::object();
                         for (const auto& [category, count] : curated.stats.balance.discarded_counts) {
                             discarded[category] = count;
                         }
                         json stats = {{"input_chains", curated.stats.input_chains},
                                       {"filtered_out", curated.stats.filtered_out},
                                       {"concat_dropped", curated.stats.concat_dropped},
                                       {"tf_excluded", curated.stats.tf_excluded},
                                       {"filter_reasons", std::move(reasons)},
                                       {"balance",
                                        {{"sum1", curated.stats.balance.sum1},
                                         {"sum2", curated.stats.balance.sum2},
                                         {"tt_needed", curated.stats.balance.tt_needed},
                                         {"tt_selected", curated.stats.balance.tt_selected},
                                         {"tt_shortfall", curated.stats.balance.tt_shortfall},
                                         {"tf_selected", curated.stats.balance.tf_selected},
                                         {"selected_ids", std::move(selected)},
                                         {"discarded_counts", std::move(discarded)}}}};
                         write_file(out / kCurationStatsFile, stats.dump(2) + "\n");
                     });
    }

    if (effective.stages.reject_sample) {
        runner.stage(
            "reject-sample", effective.seeds.reject_sample,
            {std::string(kRetainedFile), std::string(kRejectionLedgerFile), std::string(kRejectionSummaryFile)},
            [&] {
                auto corpus = load_clean_corpus(out / kCorpusFile);
                RejectionSettings settings;
                settings.model_id = effective.backend.model_id;
                settings.sampling = effective.sampling;
                settings.schedule = effective.schedule;
                settings.prompt_template = templates.rejection_template;
                CampaignResult campaign =
                    run_campaign(ensure_backend(), corpus, settings, effective.backend.max_in_flight);

                std::vector<std::string> retained_lines;
                for (const auto& response : campaign.retained) {
                    retained_lines.push_back(retained_to_json(response).dump());
                }
                write_jsonl_lines((out / kRetainedFile).string(), retained_lines);

                std::vector<std::string> ledger_lines;
                for (const auto& entry : campaign.ledger) {
                    ledger_lines.push_back(json({{"problem_id", entry.problem_id},
                                                 {"round_index", entry.round_index},
                                                 {"samples_drawn", entry.samples_drawn},
                                                 {"correct_count", entry.correct_count},
                                                 {"solved", entry.solved}})
                                               .dump());
                }
                write_jsonl_lines((out / kRejectionLedgerFile).string(), ledger_lines);

                json pools = json::object();
                for (const auto& [round, size] : campaign.round_pool_sizes) {
                    pools[round] = size;
                }
                json summary_doc = {{"round_pool_sizes", std::move(pools)},
                                    {"unsolved_ids", campaign.unsolved_ids},
                                    {"retained_count", campaign.retained.size()}};
                write_file(out / kRejectionSummaryFile, summary_doc.dump(2) + "\n");
            });
    }

    if (effective.stages.assemble) {
        std::vector<std::string> outputs = {std::string(kDatasetMultiFile), std::string(kDatasetRejFile),
                                            std::string(kDatasetMergedFile), "dataset.merged.messages.jsonl"};
        for (std::size_t size : effective.scale_sizes) {
            outputs.push_back("dataset.scale." + std::to_string(size) + ".jsonl");
        }
        runner.stage("assemble", effective.seeds.assemble, outputs, [&] {
            auto corpus = load_clean_corpus(out / kCorpusFile);
            auto problems = problem_text_map(corpus);

            std::vector<TrainingRecord> multi;
            for (const auto& line : read_jsonl_lines((out / kCuratedFile).string())) {
                if (!line.empty()) {
                    multi.push_back(to_training_record(curated_from_json(json::parse(line))));
                }
            }
            std::vector<TrainingRecord> rejection;
            for (const auto& line : read_jsonl_lines((out / kRetainedFile).string())) {
                if (!line.empty()) {
                    RetainedResponse response = retained_from_json(json::parse(line));
                    auto at = problems.find(response.problem_id);
                    if (at == problems.end()) {
                        throw std::runtime_error("retained response for unknown problem: " + response.problem_id);
                    }
                    rejection.push_back(to_training_record(response, at->second));
                }
            }

            auto dump_records = [&](const fs::path& path, const std::vector<TrainingRecord>& records) {
                std::vector<std::string> lines;
                lines.reserve(records.size());
                for (const auto& record : records) {
                    lines.push_back(training_record_to_json(record));
                }
                write_jsonl_lines(path.string(), lines);
            };

            dump_records(out / kDatasetMultiFile, multi);
            dump_records(out / kDatasetRejFile, rejection);

            MergeResult merged = merge_datasets(multi, rejection, effective.seeds.assemble);
            dump_records(out / kDatasetMergedFile, merged.records);

            std::vector<std::string> message_lines;
            for (const auto& record : merged.records) {
                message_lines.push_back(training_record_to_messages_json(record));
            }
            write_jsonl_lines((out / "dataset.merged.messages.jsonl").string(), message_lines);

            auto subsets = scale_subsets(merged.records, effective.scale_sizes);
            for (std::size_t i = 0; i < subsets.size(); ++i) {
                dump_records(out / ("dataset.scale." + std::to_string(effective.scale_sizes[i]) + ".jsonl"),
                             subsets[i]);
            }
        });
    }

    if (effective.stages.evaluate && !effective.eval_suites.empty()) {
        std::vector<std::string> outputs;
        for (const auto& suite : effective.eval_suites) {
            for (auto format : effective.eval_formats) {
                outputs.push_back("eval." + suite.name + "." + std::string(interaction_format_name(format)) +
                                  ".json");
            }
        }
        outputs.push_back(std::string(kReportFile));
        runner.stage("evaluate", effective.seeds.evaluate, outputs, [&] {
            EvalSettings settings;
            settings.model_id = effective.backend.model_id;
            settings.sampling = effective.sampling;
            settings.hard_suite_samples = effective.hard_suite_samples;
            settings.default_samples = effective.default_samples;

            std::vector<SuiteResult> results;
            for (const auto& suite_config : effective.eval_suites) {
                EvalSuite suite = load_eval_suite(suite_config.name, suite_config.path, suite_config.hard);
                for (auto format : effective.eval_formats) {
                    SuiteResult result = evaluate_suite(ensure_backend(), suite, format, settings,
                                                        effective.backend.max_in_flight);
                    write_file(out / ("eval." + suite.name + "." +
                                      std::string(interaction_format_name(format)) + ".json"),
                               suite_result_to_json(result));
                    results.push_back(std::move(result));
                }
            }
            write_file(out / kReportFile, report_tables(results));
        });
    }

    return summary;
}

std::string regenerate_report(const std::string& out_dir) {
    std::vector<SuiteResult> results;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("eval.", 0) == 0 && name.size() > 10 &&
            name.compare(name.size() - 5, 5, ".json") == 0) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        results.push_back(suite_result_from_json(read_file(file)));
    }
    std::string report = report_tables(results);
    write_file(fs::path(out_dir) / kReportFile, report);
    return report;
}

}  // namespace longcot
