#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "presscheck/consistency.hpp"
#include "presscheck/dataset.hpp"
#include "presscheck/gateway.hpp"
#include "presscheck/metrics.hpp"
#include "presscheck/prompts.hpp"

namespace presscheck {

struct TrialCounts {
    int suggest = 1;
    int feedback = 1;
    int modify = 5;
};

struct RunConfig {
    std::filesystem::path dialogs_path;
    std::filesystem::path scrapes_path;
    std::filesystem::path human_feedback_path;
    Power focus_power = Power::France;
    std::string game_id = "4";

    ModelSpec suggest_model;
    ModelSpec feedback_model;
    ModelSpec modify_model;
    ModelSpec judge_model;
    TrialCounts trials;

    std::size_t token_budget = 3400;
    std::uint64_t seed = 0;
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path out_dir = "out";
    std::filesystem::path mock_dir;  // empty -> live HTTP backend

    std::string api_base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";

    TemplateConfig templates = TemplateConfig::defaults();
    int suggestion_trial = 1;  // which trial feeds the later stages
    std::size_t max_in_flight = 4;
    SchemaMap schema;
    std::vector<std::string> human_sources = {"Human1", "Human2", "Human3"};
    bool identity_permutation = false;  // ablation control knob
};

/// Reads the JSON config; relative paths resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);

enum class AblationKind { NoFeedback, Permuted };

struct StageResult {
    std::string label;                  // "suggest", "modify-<source>", ...
    std::filesystem::path records_path;
    std::vector<StageRecord> records;
    EvalReport report;
};

struct FeedbackResult {
    std::string source;
    std::filesystem::path path;
    std::vector<Feedback> rows;
    std::vector<std::string> missing_ids;  // conversations without a row
};

struct ConsistencyResult {
    std::vector<ConsistencyMatrix> matrices;
    std::map<int, int> histogram;  // human configurations; empty if <3 humans
    double all_inconsistent_fraction = 0.0;
    std::map<std::string, LengthStats> lengths;          // per source
    std::map<std::pair<std::string, std::string>, double> pair_means;
};

/// Stage sequencing over one run directory. Stages read their inputs from the
/// manifest written by earlier stages and refuse to run out of order.
class Pipeline {
public:
    explicit Pipeline(RunConfig config);

    const RunConfig& config() const { return config_; }
    const Corpus& corpus();  // lazy ingestion

    /// Builds the corpus and records the dataset anchor in the manifest.
    const Corpus& cmd_ingest();

    StageResult cmd_suggest();

    FeedbackResult cmd_feedback_model();
    std::vector<FeedbackResult> cmd_feedback_human();  // one per annotator

    StageResult cmd_modify(const std::string& feedback_source);
    StageResult cmd_ablate(AblationKind kind, const std::string& feedback_source = "");

    struct Round2Result {
        FeedbackResult feedback2;
        StageResult modify2;
    };
    Round2Result cmd_round2(const std::string& feedback_source);

    ConsistencyResult cmd_consistency(const std::vector<std::string>& sources = {});

    /// Aggregates every available artifact into the report bundle
    /// (delimited tables + report.json) and returns the bundle directory.
    std::filesystem::path cmd_report();

    /// Receiver-label human baseline over the corpus.
    EvalReport receiver_baseline_report();

    /// Per-conversation mean lying-F1 for a recorded stage.
    std::map<std::string, double> per_conversation_lying_f1(const std::string& label);

    std::vector<StageRecord> load_records(const std::string& label) const;
    std::vector<Feedback> load_feedback(const std::string& source) const;

private:
    RunConfig config_;
    std::optional<Corpus> corpus_;
    std::shared_ptr<Gateway> gateway_;

    Gateway& gateway();
    std::int64_t now() const;  // fixed logical clock on mock runs

    StageResult run_modification_stage(const std::string& label,
                                       const std::map<std::string, std::string>& feedback_texts,
                                       StageKind stage);
    EvalReport report_from_records(const std::vector<StageRecord>& records);
    void write_records(const std::string& label, const std::vector<StageRecord>& records);
    void write_stage_report(const std::string& label, const EvalReport& report);

    // manifest helpers
    void manifest_update(const std::string& stage_key, const std::string& entry_key,
                         const std::string& json_value);
    std::optional<std::string> manifest_entry(const std::string& stage_key,
                                              const std::string& entry_key) const;
};

/// Seeded uniform permutation of [0, n); fixed points allowed.
std::vector<std::size_t> permutation_for(std::size_t n, std::uint64_t seed);

}  // namespace presscheck
