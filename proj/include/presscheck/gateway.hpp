#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "presscheck/prompts.hpp"

namespace presscheck {

enum class EndpointKind { Completion, Chat };

struct Pricing {
    double input_per_1k = 0.0;
    double output_per_1k = 0.0;
};

struct ModelSpec {
    std::string name;
    EndpointKind endpoint = EndpointKind::Chat;
    double temperature = 0.7;
    int max_output = 512;
    Pricing pricing;
};

struct Usage {
    long input_tokens = 0;
    long output_tokens = 0;

    Usage& operator+=(const Usage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
};

/// Full transcript of one model call for one pipeline stage.
struct StageRecord {
    std::string conversation_id;
    StageKind stage = StageKind::Suggestion;
    int trial = 1;
    std::string prompt_hash;
    std::string raw_output;
    std::vector<int> extracted;  // filled by the lie extractor
    std::vector<int> dropped;
    Usage usage;
    std::string model;
    std::string template_version;
    bool from_cache = false;  // not persisted; true when served without a model call
};

std::string stage_record_to_json(const StageRecord& record);
StageRecord stage_record_from_json(const std::string& text);

/// Token/cost accounting per (model, stage).
class UsageLedger {
public:
    void add(const std::string& model, StageKind stage, const Usage& usage);
    void add_record(const StageRecord& record);

    struct Entry {
        std::string model;
        StageKind stage = StageKind::Suggestion;
        Usage usage;
    };
    std::vector<Entry> entries() const;  // deterministic order

private:
    std::map<std::pair<std::string, std::string>, Usage> totals_;
};

struct CostLine {
    std::string model;
    std::string stage;
    Usage usage;
    double cost = 0.0;
};

struct CostBreakdown {
    std::vector<CostLine> lines;
    double total = 0.0;
};

/// cost = input_tokens * input_rate / 1000 + output_tokens * output_rate / 1000
double usage_cost(const Usage& usage, const Pricing& pricing);

CostBreakdown estimate_cost(const UsageLedger& ledger,
                            const std::map<std::string, Pricing>& pricing_by_model);

// -- backends -----------------------------------------------------------------

struct BackendResponse {
    std::string text;
    Usage usage;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendResponse complete(const PromptBundle& bundle, const ModelSpec& model,
                                     int trial) = 0;
};

/// Deterministic scripted backend. Scripts live in a directory, one file per
/// prompt hash: "<hash>.txt", with an optional per-trial variant
/// "<hash>-t<trial>.txt" taking precedence. Token usage is estimated as
/// ceil(chars/4). Unscripted prompts raise MockMiss.
class MockBackend : public Backend {
public:
    explicit MockBackend(std::filesystem::path script_dir);
    BackendResponse complete(const PromptBundle& bundle, const ModelSpec& model,
                             int trial) override;

    static std::string script_name(const PromptBundle& bundle);
    static std::string script_name(const PromptBundle& bundle, int trial);

private:
    std::filesystem::path dir_;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{1000};
    double jitter = 0.1;  // +/- fraction of the delay
};

/// Delay before retry number `attempt` (0-based): base * 2^attempt, jittered.
std::chrono::milliseconds retry_delay(const RetryPolicy& policy, int attempt,
                                      std::uint64_t jitter_seed);

/// Chat-completions-style HTTP backend. The API key is read from the
/// environment variable named in the config; requests retry on transport
/// errors and 429/5xx with exponential backoff (Retry-After honored).
class HttpBackend : public Backend {
public:
    HttpBackend(std::string base_url, std::string api_key, RetryPolicy retry = {});
    BackendResponse complete(const PromptBundle& bundle, const ModelSpec& model,
                             int trial) override;

    /// Request body for a bundle; exposed for tests.
    static std::string request_body(const PromptBundle& bundle, const ModelSpec& model);

private:
    std::string base_url_;     // origin only after construction
    std::string path_prefix_;  // e.g. "/v1"
    std::string api_key_;
    RetryPolicy retry_;
};

// -- cache + gateway ------------------------------------------------------------

/// Content-addressed record store: one JSON file per (bundle, model, trial).
class RecordCache {
public:
    explicit RecordCache(std::filesystem::path dir);

    static std::string key(const PromptBundle& bundle, const std::string& model, int trial);

    std::optional<StageRecord> load(const std::string& key) const;
    void store(const std::string& key, const StageRecord& record);

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

struct RequestMeta {
    std::string conversation_id;
    StageKind stage = StageKind::Suggestion;
    /// Applied to freshly produced records before they are cached (e.g. the
    /// lie extractor). Cached records are returned as stored.
    std::function<void(StageRecord&)> finalize;
};

/// Uniform access to models: caching, retries (backend-level), trials and
/// bounded-concurrency execution. Safe to call concurrently.
class Gateway {
public:
    Gateway(std::shared_ptr<Backend> backend, std::filesystem::path cache_dir,
            std::size_t max_in_flight = 4);

    StageRecord invoke(const PromptBundle& bundle, const ModelSpec& model,
                       const RequestMeta& meta, int trial);

    std::vector<StageRecord> run_trials(const PromptBundle& bundle, const ModelSpec& model,
                                        const RequestMeta& meta, int n_trials);

    std::size_t max_in_flight() const { return max_in_flight_; }
    long backend_calls() const { return backend_calls_; }

private:
    std::shared_ptr<Backend> backend_;
    RecordCache cache_;
    std::size_t max_in_flight_;
    std::counting_semaphore<256> in_flight_;  // global bound, even under nested fan-out
    std::atomic<long> backend_calls_{0};
};

}  // namespace presscheck
