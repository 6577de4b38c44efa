#include "presscheck/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "presscheck/dataset.hpp"
#include "presscheck/errors.hpp"
#include "presscheck/util.hpp"

#include <httplib.h>

namespace presscheck {

using ordered_json = nlohmann::ordered_json;

std::string stage_record_to_json(const StageRecord& record) {
    ordered_json j;
    j["conversation_id"] = record.conversation_id;
    j["stage"] = std::string(stage_name(record.stage));
    j["trial"] = record.trial;
    j["prompt_hash"] = record.prompt_hash;
    j["model"] = record.model;
    j["template_version"] = record.template_version;
    j["usage"] = {{"input_tokens", record.usage.input_tokens},
                  {"output_tokens", record.usage.output_tokens}};
    j["extracted"] = record.extracted;
    j["dropped"] = record.dropped;
    j["raw_output"] = record.raw_output;
    return j.dump();
}

StageRecord stage_record_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    StageRecord r;
    r.conversation_id = j.at("conversation_id").get<std::string>();
    r.stage = parse_stage(j.at("stage").get<std::string>());
    r.trial = j.at("trial").get<int>();
    r.prompt_hash = j.at("prompt_hash").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.template_version = j.at("template_version").get<std::string>();
    r.usage.input_tokens = j.at("usage").at("input_tokens").get<long>();
    r.usage.output_tokens = j.at("usage").at("output_tokens").get<long>();
    r.extracted = j.at("extracted").get<std::vector<int>>();
    r.dropped = j.at("dropped").get<std::vector<int>>();
    r.raw_output = j.at("raw_output").get<std::string>();
    return r;
}

void UsageLedger::add(const std::string& model, StageKind stage, const Usage& usage) {
    totals_[{model, std::string(stage_name(stage))}] += usage;
}

void UsageLedger::add_record(const StageRecord& record) {
    add(record.model, record.stage, record.usage);
}

std::vector<UsageLedger::Entry> UsageLedger::entries() const {
    std::vector<Entry> out;
    for (const auto& [key, usage] : totals_) {
        out.push_back({key.first, parse_stage(key.second), usage});
    }
    return out;
}

double usage_cost(const Usage& usage, const Pricing& pricing) {
    return static_cast<double>(usage.input_tokens) * pricing.input_per_1k / 1000.0 +
           static_cast<double>(usage.output_tokens) * pricing.output_per_1k / 1000.0;
}

CostBreakdown estimate_cost(const UsageLedger& ledger,
                            const std::map<std::string, Pricing>& pricing_by_model) {
    CostBreakdown breakdown;
    for (const auto& entry : ledger.entries()) {
        Pricing pricing;
        if (auto it = pricing_by_model.find(entry.model); it != pricing_by_model.end())
            pricing = it->second;
        CostLine line;
        line.model = entry.model;
        line.stage = std::string(stage_name(entry.stage));
        line.usage = entry.usage;
        line.cost = usage_cost(entry.usage, pricing);
        breakdown.total += line.cost;
        breakdown.lines.push_back(std::move(line));
    }
    return breakdown;
}

// -- mock backend ---------------------------------------------------------------

MockBackend::MockBackend(std::filesystem::path script_dir) : dir_(std::move(script_dir)) {}

std::string MockBackend::script_name(const PromptBundle& bundle) {
    return util::sha256_hex(bundle.canonical()) + ".txt";
}

std::string MockBackend::script_name(const PromptBundle& bundle, int trial) {
    return util::sha256_hex(bundle.canonical()) + "-t" + std::to_string(trial) + ".txt";
}

BackendResponse MockBackend::complete(const PromptBundle& bundle, const ModelSpec&, int trial) {
    std::filesystem::path per_trial = dir_ / script_name(bundle, trial);
    std::filesystem::path base = dir_ / script_name(bundle);
    std::filesystem::path chosen;
    if (std::filesystem::exists(per_trial)) chosen = per_trial;
    else if (std::filesystem::exists(base)) chosen = base;
    else throw MockMiss(util::sha256_hex(bundle.canonical()));

    BackendResponse response;
    response.text = util::read_file(chosen);

    std::size_t prompt_chars = bundle.is_completion() ? bundle.completion_text.size() : 0;
    for (const auto& turn : bundle.chat) prompt_chars += turn.content.size();
    response.usage.input_tokens = static_cast<long>((prompt_chars + 3) / 4);
    response.usage.output_tokens = static_cast<long>((response.text.size() + 3) / 4);
    return response;
}

// -- retry policy ----------------------------------------------------------------

std::chrono::milliseconds retry_delay(const RetryPolicy& policy, int attempt,
                                      std::uint64_t jitter_seed) {
    double base = static_cast<double>(policy.base_delay.count()) * std::pow(2.0, attempt);
    // xorshift-derived jitter in [-jitter, +jitter]
    std::uint64_t x = jitter_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    double unit = static_cast<double>(x % 10000) / 10000.0;  // [0, 1)
    double factor = 1.0 + policy.jitter * (2.0 * unit - 1.0);
    return std::chrono::milliseconds(static_cast<long>(base * factor));
}

// -- http backend ----------------------------------------------------------------

HttpBackend::HttpBackend(std::string base_url, std::string api_key, RetryPolicy retry)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), retry_(retry) {
    // Split "scheme://host[:port]/prefix" so the path prefix survives; the
    // http client only understands the origin part.
    std::size_t scheme = base_url_.find("://");
    std::size_t slash = scheme == std::string::npos ? base_url_.find('/')
                                                    : base_url_.find('/', scheme + 3);
    if (slash != std::string::npos) {
        path_prefix_ = base_url_.substr(slash);
        base_url_ = base_url_.substr(0, slash);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

std::string HttpBackend::request_body(const PromptBundle& bundle, const ModelSpec& model) {
    ordered_json body;
    body["model"] = model.name;
    if (model.endpoint == EndpointKind::Completion) {
        body["prompt"] = bundle.completion_text;
    } else {
        ordered_json messages = ordered_json::array();
        for (const auto& turn : bundle.chat) {
            messages.push_back({{"role", std::string(role_name(turn.role))},
                                {"content", turn.content}});
        }
        body["messages"] = std::move(messages);
    }
    body["temperature"] = model.temperature;
    body["max_tokens"] = model.max_output;
    return body.dump();
}

BackendResponse HttpBackend::complete(const PromptBundle& bundle, const ModelSpec& model,
                                      int trial) {
    const std::string path =
        path_prefix_ +
        (model.endpoint == EndpointKind::Completion ? "/completions" : "/chat/completions");
    const std::string body = request_body(bundle, model);

    std::string last_error;
    for (int attempt = 0; attempt < retry_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                retry_delay(retry_, attempt - 1,
                            static_cast<std::uint64_t>(std::hash<std::string>{}(body)) +
                                static_cast<std::uint64_t>(trial)));
        }

        httplib::Client client(base_url_);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "connection failure (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status == 429) {
            last_error = "HTTP 429";
            if (auto it = res->headers.find("Retry-After"); it != res->headers.end()) {
                try {
                    std::this_thread::sleep_for(std::chrono::seconds(std::stol(it->second)));
                } catch (const std::exception&) {
                }
            }
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
        }

        try {
            ordered_json j = ordered_json::parse(res->body);
            BackendResponse response;
            const auto& choice = j.at("choices").at(0);
            if (model.endpoint == EndpointKind::Completion) {
                response.text = choice.at("text").get<std::string>();
            } else {
                response.text = choice.at("message").at("content").get<std::string>();
            }
            if (j.contains("usage")) {
                response.usage.input_tokens = j["usage"].value("prompt_tokens", 0L);
                response.usage.output_tokens = j["usage"].value("completion_tokens", 0L);
            }
            return response;
        } catch (const nlohmann::json::exception& ex) {
            throw TransportError(std::string("unparseable response: ") + ex.what());
        }
    }
    if (last_error == "HTTP 429") throw RateLimited("gave up after retries");
    throw TransportError(last_error + " after " + std::to_string(retry_.max_attempts) +
                         " attempts");
}

// -- cache -----------------------------------------------------------------------

RecordCache::RecordCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string RecordCache::key(const PromptBundle& bundle, const std::string& model, int trial) {
    return util::sha256_hex(bundle.canonical() + '\x1d' + model + '\x1d' +
                            std::to_string(trial));
}

std::optional<StageRecord> RecordCache::load(const std::string& key) const {
    std::filesystem::path path = dir_ / (key + ".json");
    std::lock_guard<std::mutex> lock(mutex_);
    if (!std::filesystem::exists(path)) return std::nullopt;
    StageRecord record = stage_record_from_json(util::read_file(path));
    record.from_cache = true;
    return record;
}

void RecordCache::store(const std::string& key, const StageRecord& record) {
    std::filesystem::path path = dir_ / (key + ".json");
    std::lock_guard<std::mutex> lock(mutex_);
    util::write_file(path, stage_record_to_json(record));
}

// -- gateway ---------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Backend> backend, std::filesystem::path cache_dir,
                 std::size_t max_in_flight)
    : backend_(std::move(backend)), cache_(std::move(cache_dir)),
      max_in_flight_(std::clamp<std::size_t>(max_in_flight, 1, 256)),
      in_flight_(static_cast<std::ptrdiff_t>(max_in_flight_)) {}

StageRecord Gateway::invoke(const PromptBundle& bundle, const ModelSpec& model,
                            const RequestMeta& meta, int trial) {
    std::string key = RecordCache::key(bundle, model.name, trial);
    if (auto cached = cache_.load(key)) return *cached;

    in_flight_.acquire();
    BackendResponse response;
    try {
        response = backend_->complete(bundle, model, trial);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();
    ++backend_calls_;

    StageRecord record;
    record.conversation_id = meta.conversation_id;
    record.stage = meta.stage;
    record.trial = trial;
    record.prompt_hash = util::sha256_hex(bundle.canonical());
    record.raw_output = std::move(response.text);
    record.usage = response.usage;
    record.model = model.name;
    record.template_version = bundle.template_version;
    if (meta.finalize) meta.finalize(record);
    cache_.store(key, record);
    return record;
}

std::vector<StageRecord> Gateway::run_trials(const PromptBundle& bundle, const ModelSpec& model,
                                             const RequestMeta& meta, int n_trials) {
    if (n_trials < 1) throw Error("run_trials needs n >= 1");
    std::vector<StageRecord> records(static_cast<std::size_t>(n_trials));
    util::parallel_for(static_cast<std::size_t>(n_trials), max_in_flight_,
                       [&](std::size_t i) {
                           records[i] = invoke(bundle, model, meta, static_cast<int>(i) + 1);
                       });
    return records;
}

}  // namespace presscheck
