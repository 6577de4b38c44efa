#include "presscheck/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <numeric>
#include <random>

#include <json.hpp>

#include "presscheck/errors.hpp"
#include "presscheck/extractor.hpp"
#include "presscheck/util.hpp"

namespace presscheck {

using ordered_json = nlohmann::ordered_json;

namespace {

EndpointKind endpoint_from_string(const std::string& s) {
    if (s == "completion") return EndpointKind::Completion;
    if (s == "chat") return EndpointKind::Chat;
    throw ConfigError("unknown endpoint kind '" + s + "'");
}

ModelSpec model_from_json(const ordered_json& j, const std::string& key) {
    if (!j.is_object()) throw ConfigError("models." + key + " must be an object");
    ModelSpec m;
    m.name = j.value("name", "unnamed-" + key);
    m.endpoint = endpoint_from_string(j.value("endpoint", std::string("chat")));
    m.temperature = j.value("temperature", 0.7);
    m.max_output = j.value("max_output", 512);
    if (j.contains("pricing")) {
        m.pricing.input_per_1k = j["pricing"].value("input_per_1k", 0.0);
        m.pricing.output_per_1k = j["pricing"].value("output_per_1k", 0.0);
    }
    if (m.temperature < 0 || m.pricing.input_per_1k < 0 || m.pricing.output_per_1k < 0)
        throw ConfigError("models." + key + ": temperature and rates must be >= 0");
    return m;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(util::read_file(path));
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
    std::filesystem::path base = path.has_parent_path() ? path.parent_path()
                                                        : std::filesystem::path(".");

    RunConfig cfg;
    cfg.dialogs_path = resolve(base, j.value("dialogs", std::string("dialogs.jsonl")));
    cfg.scrapes_path = resolve(base, j.value("scrapes", std::string("scrapes.jsonl")));
    if (j.contains("human_feedback"))
        cfg.human_feedback_path = resolve(base, j["human_feedback"].get<std::string>());
    cfg.focus_power = parse_power(j.value("focus_power", std::string("France")));
    cfg.game_id = j.value("game", std::string("4"));
    cfg.token_budget = j.value("token_budget", std::size_t{3400});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.cache_dir = resolve(base, j.value("cache_dir", std::string("cache")));
    cfg.out_dir = resolve(base, j.value("out_dir", std::string("out")));
    if (j.contains("mock_dir")) cfg.mock_dir = resolve(base, j["mock_dir"].get<std::string>());
    cfg.suggestion_trial = j.value("suggestion_trial", 1);
    cfg.max_in_flight = j.value("max_in_flight", std::size_t{4});
    cfg.identity_permutation = j.value("identity_permutation", false);

    if (j.contains("trials")) {
        cfg.trials.suggest = j["trials"].value("suggest", 1);
        cfg.trials.feedback = j["trials"].value("feedback", 1);
        cfg.trials.modify = j["trials"].value("modify", 5);
    }
    if (cfg.trials.suggest < 1 || cfg.trials.feedback < 1 || cfg.trials.modify < 1)
        throw ConfigError("trial counts must be >= 1");

    if (j.contains("models")) {
        const auto& models = j["models"];
        if (models.contains("suggest")) cfg.suggest_model = model_from_json(models["suggest"], "suggest");
        if (models.contains("feedback")) cfg.feedback_model = model_from_json(models["feedback"], "feedback");
        if (models.contains("modify")) cfg.modify_model = model_from_json(models["modify"], "modify");
        if (models.contains("judge")) cfg.judge_model = model_from_json(models["judge"], "judge");
    }
    if (cfg.suggest_model.temperature < 0 || cfg.modify_model.temperature < 0)
        throw ConfigError("temperature must be >= 0");

    if (j.contains("api")) {
        cfg.api_base_url = j["api"].value("base_url", cfg.api_base_url);
        cfg.api_key_env = j["api"].value("api_key_env", cfg.api_key_env);
    }
    if (j.contains("human_sources"))
        cfg.human_sources = j["human_sources"].get<std::vector<std::string>>();

    if (j.contains("schema")) {
        const auto& s = j["schema"];
        cfg.schema.messages = s.value("messages", cfg.schema.messages);
        cfg.schema.speakers = s.value("speakers", cfg.schema.speakers);
        cfg.schema.sender_labels = s.value("sender_labels", cfg.schema.sender_labels);
        cfg.schema.receiver_labels = s.value("receiver_labels", cfg.schema.receiver_labels);
        cfg.schema.seasons = s.value("seasons", cfg.schema.seasons);
        cfg.schema.years = s.value("years", cfg.schema.years);
        cfg.schema.game_id = s.value("game_id", cfg.schema.game_id);
        cfg.schema.players = s.value("players", cfg.schema.players);
    }

    if (j.contains("templates")) {
        const auto& t = j["templates"];
        TemplateConfig& tpl = cfg.templates;
        tpl.version = t.value("version", tpl.version);
        tpl.suggestion_instruction = t.value("suggestion_instruction", tpl.suggestion_instruction);
        tpl.feedback_instruction = t.value("feedback_instruction", tpl.feedback_instruction);
        tpl.modification_instruction =
            t.value("modification_instruction", tpl.modification_instruction);
        tpl.feedback_system = t.value("feedback_system", tpl.feedback_system);
        tpl.judge_system = t.value("judge_system", tpl.judge_system);
        tpl.judge_user_prefix = t.value("judge_user_prefix", tpl.judge_user_prefix);
        tpl.feedback2_instruction = t.value("feedback2_instruction", tpl.feedback2_instruction);
        tpl.modification2_instruction =
            t.value("modification2_instruction", tpl.modification2_instruction);
    }
    return cfg;
}

std::vector<std::size_t> permutation_for(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ 0x5bd1e995u);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {}

std::int64_t Pipeline::now() const {
    if (!config_.mock_dir.empty()) return static_cast<std::int64_t>(config_.seed);
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Gateway& Pipeline::gateway() {
    if (!gateway_) {
        std::shared_ptr<Backend> backend;
        if (!config_.mock_dir.empty()) {
            backend = std::make_shared<MockBackend>(config_.mock_dir);
        } else {
            const char* key = std::getenv(config_.api_key_env.c_str());
            if (!key || !*key)
                throw ConfigError("environment variable " + config_.api_key_env +
                                  " is not set and no mock_dir is configured");
            backend = std::make_shared<HttpBackend>(config_.api_base_url, key);
        }
        gateway_ = std::make_shared<Gateway>(backend, config_.cache_dir, config_.max_in_flight);
    }
    return *gateway_;
}

const Corpus& Pipeline::corpus() {
    if (!corpus_) {
        auto records = load_dialogs(config_.dialogs_path, config_.schema);
        auto scrapes = load_scrapes(config_.scrapes_path);
        const TemplateConfig tpl = config_.templates;
        ConversationCost cost = [tpl](const Conversation& c) {
            return estimate_tokens(render_suggestion(c, tpl).completion_text);
        };
        corpus_ = build_corpus(records, scrapes, config_.focus_power, config_.token_budget, cost);
    }
    return *corpus_;
}

const Corpus& Pipeline::cmd_ingest() {
    const Corpus& c = corpus();
    ordered_json entry;
    entry["conversations"] = c.conversations.size();
    entry["messages"] = c.total_messages;
    entry["focus_power"] = std::string(power_name(config_.focus_power));
    entry["completed_at"] = now();
    manifest_update("ingest", "corpus", entry.dump());
    return c;
}

// -- records and feedback persistence -----------------------------------------

void Pipeline::write_records(const std::string& label,
                             const std::vector<StageRecord>& records) {
    std::string body;
    for (const auto& r : records) body += stage_record_to_json(r) + "\n";
    util::write_file(config_.out_dir / "records" / (label + ".jsonl"), body);
}

std::vector<StageRecord> Pipeline::load_records(const std::string& label) const {
    std::filesystem::path path = config_.out_dir / "records" / (label + ".jsonl");
    if (!std::filesystem::exists(path))
        throw Error("no records for stage '" + label + "' at " + path.string());
    std::vector<StageRecord> records;
    for (const auto& line : util::split_lines(util::read_file(path))) {
        if (!line.empty()) records.push_back(stage_record_from_json(line));
    }
    return records;
}

std::vector<Feedback> Pipeline::load_feedback(const std::string& source) const {
    std::filesystem::path path = config_.out_dir / "feedback" / (source + ".jsonl");
    if (!std::filesystem::exists(path))
        throw Error("no feedback for source '" + source + "' at " + path.string());
    std::vector<Feedback> rows;
    for (const auto& line : util::split_lines(util::read_file(path))) {
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line);
        rows.push_back({j.at("conversation_id").get<std::string>(),
                        j.at("source").get<std::string>(), j.at("text").get<std::string>()});
    }
    return rows;
}

namespace {

void write_feedback_file(const std::filesystem::path& path, const std::vector<Feedback>& rows) {
    std::string body;
    for (const auto& f : rows) {
        ordered_json j;
        j["conversation_id"] = f.conversation_id;
        j["source"] = f.source;
        j["text"] = f.text;
        body += j.dump() + "\n";
    }
    util::write_file(path, body);
}

}  // namespace

// -- evaluation plumbing --------------------------------------------------------

EvalReport Pipeline::report_from_records(const std::vector<StageRecord>& records) {
    int max_trial = 1;
    for (const auto& r : records) max_trial = std::max(max_trial, r.trial);

    std::vector<Scores> trials;
    for (int t = 1; t <= max_trial; ++t) {
        Predictions predictions;
        for (const auto& r : records) {
            if (r.trial != t) continue;
            predictions[r.conversation_id] =
                std::set<int>(r.extracted.begin(), r.extracted.end());
        }
        trials.push_back(f1_scores(score(predictions, corpus())));
    }
    return aggregate_trials(trials);
}

void Pipeline::write_stage_report(const std::string& label, const EvalReport& report) {
    std::vector<util::CsvRow> rows;
    rows.push_back({"run", "metric", "mean", "ci95_half_width", "n_trials"});
    for (const auto& name : metric_names()) {
        const MetricSummary& m = report.metrics.at(name);
        rows.push_back({label, name, util::fmt_double(m.mean, 6),
                        util::fmt_double(m.ci_half_width, 6), std::to_string(report.n_trials)});
    }
    util::write_file(config_.out_dir / "reports" / ("stage-" + label + ".csv"),
                     util::csv_encode(rows));
}

EvalReport Pipeline::receiver_baseline_report() {
    Predictions predictions;
    for (const auto& convo : corpus().conversations)
        predictions[convo.id] = receiver_baseline(convo);
    return aggregate_trials({f1_scores(score(predictions, corpus()))});
}

std::map<std::string, double> Pipeline::per_conversation_lying_f1(const std::string& label) {
    auto records = load_records(label);
    std::map<std::string, std::vector<const StageRecord*>> by_conversation;
    for (const auto& r : records) by_conversation[r.conversation_id].push_back(&r);

    std::map<std::string, double> out;
    for (const auto& convo : corpus().conversations) {
        auto it = by_conversation.find(convo.id);
        if (it == by_conversation.end()) continue;
        std::set<int> truth = ground_truth(convo);
        double sum = 0.0;
        for (const StageRecord* r : it->second) {
            Confusion c;
            std::set<int> predicted(r->extracted.begin(), r->extracted.end());
            for (const auto& m : convo.messages) {
                bool is_lie = truth.count(m.index) > 0;
                bool said = predicted.count(m.index) > 0;
                if (is_lie && said) ++c.tp;
                else if (!is_lie && said) ++c.fp;
                else if (is_lie && !said) ++c.fn;
                else ++c.tn;
            }
            sum += f1_scores(c).lying_f1;
        }
        out[convo.id] = sum / static_cast<double>(it->second.size());
    }
    return out;
}

// -- manifest --------------------------------------------------------------------

void Pipeline::manifest_update(const std::string& stage_key, const std::string& entry_key,
                               const std::string& json_value) {
    std::filesystem::path path = config_.out_dir / "manifest.json";
    ordered_json manifest;
    if (std::filesystem::exists(path)) {
        manifest = ordered_json::parse(util::read_file(path));
    } else {
        manifest["template_version"] = config_.templates.version;
        manifest["seed"] = config_.seed;
        manifest["focus_power"] = std::string(power_name(config_.focus_power));
        manifest["suggestion_trial"] = config_.suggestion_trial;
        manifest["mock"] = !config_.mock_dir.empty();
        manifest["created_at"] = now();
        manifest["stages"] = ordered_json::object();
    }
    manifest["updated_at"] = now();
    manifest["stages"][stage_key][entry_key] = ordered_json::parse(json_value);
    util::write_file(path, manifest.dump(2));
}

std::optional<std::string> Pipeline::manifest_entry(const std::string& stage_key,
                                                    const std::string& entry_key) const {
    std::filesystem::path path = config_.out_dir / "manifest.json";
    if (!std::filesystem::exists(path)) return std::nullopt;
    ordered_json manifest = ordered_json::parse(util::read_file(path));
    if (!manifest.contains("stages")) return std::nullopt;
    const auto& stages = manifest["stages"];
    if (!stages.contains(stage_key) || !stages[stage_key].contains(entry_key))
        return std::nullopt;
    return stages[stage_key][entry_key].dump();
}

// -- stages ------------------------------------------------------------------------

StageResult Pipeline::cmd_suggest() {
    const Corpus& c = corpus();
    const int n_trials = config_.trials.suggest;

    std::vector<std::vector<StageRecord>> per_conversation(c.conversations.size());
    Gateway& gw = gateway();
    util::parallel_for(c.conversations.size(), config_.max_in_flight, [&](std::size_t i) {
        const Conversation& convo = c.conversations[i];
        PromptBundle bundle = render_suggestion(convo, config_.templates);
        RequestMeta meta;
        meta.conversation_id = convo.id;
        meta.stage = StageKind::Suggestion;
        int n_messages = static_cast<int>(convo.messages.size());
        meta.finalize = [n_messages](StageRecord& r) {
            Extraction e = extract(r.raw_output, n_messages);
            r.extracted.assign(e.indices.begin(), e.indices.end());
            for (const auto& d : e.dropped) r.dropped.push_back(d.index);
        };
        per_conversation[i] = gw.run_trials(bundle, config_.suggest_model, meta, n_trials);
    });

    StageResult result;
    result.label = "suggest";
    for (auto& records : per_conversation)
        for (auto& r : records) result.records.push_back(std::move(r));
    write_records(result.label, result.records);
    result.records_path = config_.out_dir / "records" / "suggest.jsonl";
    result.report = report_from_records(result.records);
    write_stage_report(result.label, result.report);

    ordered_json entry;
    entry["records"] = "records/suggest.jsonl";
    entry["model"] = config_.suggest_model.name;
    entry["trials"] = n_trials;
    entry["conversations"] = c.conversations.size();
    entry["carry_trial"] = config_.suggestion_trial;
    entry["completed_at"] = now();
    manifest_update("suggest", "suggest", entry.dump());
    return result;
}

namespace {

/// suggestion output per conversation for the carried trial
std::map<std::string, std::string> carried_outputs(const std::vector<StageRecord>& records,
                                                   int trial) {
    std::map<std::string, std::string> out;
    for (const auto& r : records) {
        if (r.trial == trial) out[r.conversation_id] = r.raw_output;
    }
    return out;
}

}  // namespace

FeedbackResult Pipeline::cmd_feedback_model() {
    if (!manifest_entry("suggest", "suggest"))
        throw MissingSuggestion("run the suggest stage before collecting feedback");
    const Corpus& c = corpus();
    auto suggestions = carried_outputs(load_records("suggest"), config_.suggestion_trial);

    std::vector<Feedback> rows(c.conversations.size());
    std::vector<StageRecord> records(c.conversations.size());
    Gateway& gw = gateway();
    util::parallel_for(c.conversations.size(), config_.max_in_flight, [&](std::size_t i) {
        const Conversation& convo = c.conversations[i];
        auto it = suggestions.find(convo.id);
        if (it == suggestions.end()) throw MissingSuggestion(convo.id);
        PromptBundle bundle = render_feedback_request(convo, it->second, config_.templates);
        RequestMeta meta;
        meta.conversation_id = convo.id;
        meta.stage = StageKind::Feedback;
        records[i] = gw.invoke(bundle, config_.feedback_model, meta, 1);
        rows[i] = {convo.id, config_.feedback_model.name, records[i].raw_output};
    });

    FeedbackResult result;
    result.source = config_.feedback_model.name;
    result.rows = std::move(rows);
    result.path = config_.out_dir / "feedback" / (result.source + ".jsonl");
    write_feedback_file(result.path, result.rows);
    write_records("feedback-" + result.source, records);

    ordered_json entry;
    entry["origin"] = "model";
    entry["path"] = "feedback/" + result.source + ".jsonl";
    entry["count"] = result.rows.size();
    entry["completed_at"] = now();
    manifest_update("feedback", result.source, entry.dump());
    return result;
}

std::vector<FeedbackResult> Pipeline::cmd_feedback_human() {
    if (config_.human_feedback_path.empty())
        throw ConfigError("no human_feedback file configured");
    const Corpus& c = corpus();

    auto rows = util::csv_decode(util::read_file(config_.human_feedback_path));
    std::map<std::string, std::vector<Feedback>> by_source;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (i == 0 && row.size() >= 1 && row[0] == "conversation_id") continue;  // header
        if (row.size() < 3)
            throw SchemaError("human feedback row " + std::to_string(i + 1) + " needs 3 fields");
        if (!c.find(row[0])) throw UnmatchedConversationId(row[0]);
        by_source[row[1]].push_back({row[0], row[1], row[2]});
    }

    std::vector<FeedbackResult> results;
    for (auto& [source, feedback] : by_source) {
        FeedbackResult result;
        result.source = source;
        result.rows = std::move(feedback);
        result.path = config_.out_dir / "feedback" / (source + ".jsonl");
        write_feedback_file(result.path, result.rows);

        std::set<std::string> covered;
        for (const auto& f : result.rows) covered.insert(f.conversation_id);
        for (const auto& convo : c.conversations) {
            if (!covered.count(convo.id)) result.missing_ids.push_back(convo.id);
        }

        ordered_json entry;
        entry["origin"] = "human";
        entry["path"] = "feedback/" + source + ".jsonl";
        entry["count"] = result.rows.size();
        entry["missing"] = result.missing_ids;
        entry["completed_at"] = now();
        manifest_update("feedback", source, entry.dump());
        results.push_back(std::move(result));
    }
    return results;
}

StageResult Pipeline::run_modification_stage(
    const std::string& label, const std::map<std::string, std::string>& feedback_texts,
    StageKind stage) {
    if (!manifest_entry("suggest", "suggest"))
        throw MissingSuggestion("run the suggest stage before modification");
    const Corpus& c = corpus();
    auto suggestions = carried_outputs(load_records("suggest"), config_.suggestion_trial);

    std::vector<std::vector<StageRecord>> per_conversation(c.conversations.size());
    Gateway& gw = gateway();
    util::parallel_for(c.conversations.size(), config_.max_in_flight, [&](std::size_t i) {
        const Conversation& convo = c.conversations[i];
        auto suggestion = suggestions.find(convo.id);
        if (suggestion == suggestions.end()) throw MissingSuggestion(convo.id);
        auto feedback = feedback_texts.find(convo.id);
        if (feedback == feedback_texts.end())
            throw Error("no feedback text for conversation " + convo.id);

        PromptBundle bundle = render_modification(convo, suggestion->second, feedback->second,
                                                  config_.templates);
        RequestMeta meta;
        meta.conversation_id = convo.id;
        meta.stage = stage;
        int n_messages = static_cast<int>(convo.messages.size());
        meta.finalize = [n_messages](StageRecord& r) {
            Extraction e = extract(r.raw_output, n_messages);
            r.extracted.assign(e.indices.begin(), e.indices.end());
            for (const auto& d : e.dropped) r.dropped.push_back(d.index);
        };
        per_conversation[i] =
            gw.run_trials(bundle, config_.modify_model, meta, config_.trials.modify);
    });

    StageResult result;
    result.label = label;
    for (auto& records : per_conversation)
        for (auto& r : records) result.records.push_back(std::move(r));
    write_records(label, result.records);
    result.records_path = config_.out_dir / "records" / (label + ".jsonl");
    result.report = report_from_records(result.records);
    write_stage_report(label, result.report);
    return result;
}

StageResult Pipeline::cmd_modify(const std::string& feedback_source) {
    if (!manifest_entry("feedback", feedback_source))
        throw Error("feedback source '" + feedback_source + "' has not been collected");
    std::map<std::string, std::string> texts;
    for (const auto& f : load_feedback(feedback_source)) texts[f.conversation_id] = f.text;

    StageResult result = run_modification_stage("modify-" + feedback_source, texts,
                                                StageKind::Modification);
    ordered_json entry;
    entry["records"] = "records/" + result.label + ".jsonl";
    entry["feedback_source"] = feedback_source;
    entry["model"] = config_.modify_model.name;
    entry["trials"] = config_.trials.modify;
    entry["completed_at"] = now();
    manifest_update("modify", feedback_source, entry.dump());
    return result;
}

StageResult Pipeline::cmd_ablate(AblationKind kind, const std::string& feedback_source) {
    const Corpus& c = corpus();

    if (kind == AblationKind::NoFeedback) {
        std::map<std::string, std::string> texts;
        for (const auto& convo : c.conversations) texts[convo.id] = "No feedback.";
        StageResult result =
            run_modification_stage("modify-no_feedback", texts, StageKind::Modification);
        ordered_json entry;
        entry["records"] = "records/modify-no_feedback.jsonl";
        entry["completed_at"] = now();
        manifest_update("ablate", "no_feedback", entry.dump());
        return result;
    }

    // Permuted feedback: a seeded bijection over conversation ids.
    if (feedback_source.empty())
        throw Error("the permuted ablation needs a feedback source");
    auto rows = load_feedback(feedback_source);
    std::map<std::string, std::string> original;
    for (const auto& f : rows) original[f.conversation_id] = f.text;

    std::vector<std::string> ids;
    for (const auto& convo : c.conversations) ids.push_back(convo.id);
    std::vector<std::size_t> perm(ids.size());
    if (config_.identity_permutation) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
    } else {
        perm = permutation_for(ids.size(), config_.seed);
    }

    std::map<std::string, std::string> texts;
    std::vector<util::CsvRow> log_rows;
    log_rows.push_back({"conversation_id", "feedback_taken_from"});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto donor = original.find(ids[perm[i]]);
        if (donor == original.end())
            throw Error("no feedback text for conversation " + ids[perm[i]]);
        texts[ids[i]] = donor->second;
        log_rows.push_back({ids[i], ids[perm[i]]});
    }
    std::string label = "modify-permuted-" + feedback_source;
    util::write_file(config_.out_dir / "reports" / ("permutation-" + feedback_source + ".csv"),
                     util::csv_encode(log_rows));

    StageResult result = run_modification_stage(label, texts, StageKind::Modification);
    ordered_json entry;
    entry["records"] = "records/" + label + ".jsonl";
    entry["feedback_source"] = feedback_source;
    entry["identity"] = config_.identity_permutation;
    entry["permutation_log"] = "reports/permutation-" + feedback_source + ".csv";
    entry["completed_at"] = now();
    manifest_update("ablate", "permuted-" + feedback_source, entry.dump());
    return result;
}

Pipeline::Round2Result Pipeline::cmd_round2(const std::string& feedback_source) {
    if (!manifest_entry("modify", feedback_source))
        throw Error("round 2 needs a completed round-1 modification for source '" +
                    feedback_source + "'");
    const Corpus& c = corpus();
    auto suggestions = carried_outputs(load_records("suggest"), config_.suggestion_trial);
    auto modifications = carried_outputs(load_records("modify-" + feedback_source),
                                         config_.suggestion_trial);
    std::map<std::string, std::string> feedback1;
    for (const auto& f : load_feedback(feedback_source)) feedback1[f.conversation_id] = f.text;

    auto round1_for = [&](const Conversation& convo) {
        Round1Transcript round1;
        auto s = suggestions.find(convo.id);
        auto f = feedback1.find(convo.id);
        auto m = modifications.find(convo.id);
        if (s == suggestions.end() || f == feedback1.end() || m == modifications.end())
            throw Error("incomplete round-1 artifacts for " + convo.id);
        round1.suggestion_output = s->second;
        round1.feedback_text = f->second;
        round1.modification_output = m->second;
        return round1;
    };

    // Feedback collection II: one inference per conversation.
    Round2Result result;
    std::vector<Feedback> feedback2_rows(c.conversations.size());
    std::vector<StageRecord> feedback2_records(c.conversations.size());
    Gateway& gw = gateway();
    util::parallel_for(c.conversations.size(), config_.max_in_flight, [&](std::size_t i) {
        const Conversation& convo = c.conversations[i];
        PromptBundle bundle = render_feedback2(convo, round1_for(convo), config_.templates);
        RequestMeta meta;
        meta.conversation_id = convo.id;
        meta.stage = StageKind::Feedback2;
        feedback2_records[i] = gw.invoke(bundle, config_.feedback_model, meta, 1);
        feedback2_rows[i] = {convo.id, feedback_source + "-round2",
                             feedback2_records[i].raw_output};
    });

    result.feedback2.source = feedback_source + "-round2";
    result.feedback2.rows = std::move(feedback2_rows);
    result.feedback2.path =
        config_.out_dir / "feedback" / (result.feedback2.source + ".jsonl");
    write_feedback_file(result.feedback2.path, result.feedback2.rows);
    write_records("feedback2-" + feedback_source, feedback2_records);

    std::map<std::string, std::string> feedback2_texts;
    for (const auto& f : result.feedback2.rows) feedback2_texts[f.conversation_id] = f.text;

    // Modification II: five trials against the extended transcript.
    std::vector<std::vector<StageRecord>> per_conversation(c.conversations.size());
    util::parallel_for(c.conversations.size(), config_.max_in_flight, [&](std::size_t i) {
        const Conversation& convo = c.conversations[i];
        PromptBundle bundle = render_modification2(
            convo, round1_for(convo), feedback2_texts.at(convo.id), config_.templates);
        RequestMeta meta;
        meta.conversation_id = convo.id;
        meta.stage = StageKind::Modification2;
        int n_messages = static_cast<int>(convo.messages.size());
        meta.finalize = [n_messages](StageRecord& r) {
            Extraction e = extract(r.raw_output, n_messages);
            r.extracted.assign(e.indices.begin(), e.indices.end());
            for (const auto& d : e.dropped) r.dropped.push_back(d.index);
        };
        per_conversation[i] =
            gw.run_trials(bundle, config_.modify_model, meta, config_.trials.modify);
    });

    result.modify2.label = "modify2-" + feedback_source;
    for (auto& records : per_conversation)
        for (auto& r : records) result.modify2.records.push_back(std::move(r));
    write_records(result.modify2.label, result.modify2.records);
    result.modify2.records_path =
        config_.out_dir / "records" / (result.modify2.label + ".jsonl");
    result.modify2.report = report_from_records(result.modify2.records);
    write_stage_report(result.modify2.label, result.modify2.report);

    ordered_json entry;
    entry["records"] = "records/" + result.modify2.label + ".jsonl";
    entry["feedback2"] = "feedback/" + result.feedback2.source + ".jsonl";
    entry["completed_at"] = now();
    manifest_update("round2", feedback_source, entry.dump());
    return result;
}

ConsistencyResult Pipeline::cmd_consistency(const std::vector<std::string>& requested) {
    const Corpus& c = corpus();

    std::vector<std::string> sources = requested;
    if (sources.empty()) {
        // every collected feedback source, lexicographic
        std::filesystem::path dir = config_.out_dir / "feedback";
        if (std::filesystem::exists(dir)) {
            for (const auto& entry : std::filesystem::directory_iterator(dir)) {
                if (entry.path().extension() == ".jsonl")
                    sources.push_back(entry.path().stem().string());
            }
        }
        std::sort(sources.begin(), sources.end());
    }
    if (sources.size() < 2) throw Error("consistency analysis needs at least two sources");

    std::map<std::string, std::map<std::string, std::string>> texts;  // source -> conv -> text
    for (const auto& source : sources) {
        for (const auto& f : load_feedback(source)) texts[source][f.conversation_id] = f.text;
    }

    ConsistencyResult result;
    result.matrices.resize(c.conversations.size());

    struct PairTask {
        std::size_t conversation;
        std::string a, b;
    };
    std::vector<PairTask> tasks;
    for (std::size_t i = 0; i < c.conversations.size(); ++i) {
        const std::string& id = c.conversations[i].id;
        result.matrices[i].conversation_id = id;
        for (std::size_t x = 0; x < sources.size(); ++x) {
            for (std::size_t y = x + 1; y < sources.size(); ++y) {
                if (texts[sources[x]].count(id) && texts[sources[y]].count(id))
                    tasks.push_back({i, sources[x], sources[y]});
            }
        }
    }

    Gateway& gw = gateway();
    std::vector<int> verdicts(tasks.size());
    const auto& texts_view = texts;  // read-only from here; workers share it
    util::parallel_for(tasks.size(), config_.max_in_flight, [&](std::size_t t) {
        const PairTask& task = tasks[t];
        const std::string& id = c.conversations[task.conversation].id;
        Feedback fa{id, task.a, texts_view.at(task.a).at(id)};
        Feedback fb{id, task.b, texts_view.at(task.b).at(id)};
        verdicts[t] = judge_pair(fa, fb, config_.judge_model, gw, config_.templates);
    });
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        result.matrices[tasks[t].conversation].set(tasks[t].a, tasks[t].b, verdicts[t]);
    }

    // Per-pair mean consistency (the average-score table).
    std::map<std::pair<std::string, std::string>, std::pair<double, int>> sums;
    for (const auto& m : result.matrices) {
        for (const auto& [key, v] : m.pairs) {
            sums[key].first += v;
            sums[key].second += 1;
        }
    }
    for (const auto& [key, sum] : sums) {
        result.pair_means[key] = sum.second == 0 ? 0.0 : sum.first / sum.second;
    }

    // Human configuration histogram, when all three humans are present.
    bool humans_present = true;
    for (const auto& h : config_.human_sources) {
        if (std::find(sources.begin(), sources.end(), h) == sources.end())
            humans_present = false;
    }
    if (humans_present && config_.human_sources.size() == 3) {
        result.histogram = configuration_histogram(result.matrices, config_.human_sources);
        result.all_inconsistent_fraction =
            all_inconsistent_fraction(result.matrices, config_.human_sources);
    }

    for (const auto& source : sources) {
        std::vector<Feedback> rows;
        for (const auto& convo : c.conversations) {
            auto it = texts[source].find(convo.id);
            if (it != texts[source].end()) rows.push_back({convo.id, source, it->second});
        }
        result.lengths[source] = length_stats(rows);
    }

    // matrix.csv
    std::vector<util::CsvRow> matrix_rows;
    matrix_rows.push_back({"conversation_id", "source_a", "source_b", "consistent"});
    for (const auto& m : result.matrices) {
        for (const auto& [key, v] : m.pairs) {
            matrix_rows.push_back({m.conversation_id, key.first, key.second, std::to_string(v)});
        }
    }
    util::write_file(config_.out_dir / "consistency" / "matrix.csv",
                     util::csv_encode(matrix_rows));

    // histogram.csv
    std::vector<util::CsvRow> histogram_rows;
    histogram_rows.push_back({"consistent_pairs", "conversations"});
    for (const auto& [k, v] : result.histogram) {
        histogram_rows.push_back({std::to_string(k), std::to_string(v)});
    }
    util::write_file(config_.out_dir / "consistency" / "histogram.csv",
                     util::csv_encode(histogram_rows));

    ordered_json entry;
    entry["sources"] = sources;
    entry["pairs_judged"] = tasks.size();
    entry["completed_at"] = now();
    manifest_update("consistency", "matrix", entry.dump());
    return result;
}

std::filesystem::path Pipeline::cmd_report() {
    std::filesystem::path reports = config_.out_dir / "reports";
    std::filesystem::create_directories(reports);

    // ---- metrics table ---------------------------------------------------------
    std::vector<util::CsvRow> metric_rows;
    metric_rows.push_back({"run", "origin", "metric", "mean", "ci95_half_width", "n_trials"});

    auto add_report = [&](const std::string& run, const std::string& origin,
                          const EvalReport& report) {
        for (const auto& name : metric_names()) {
            const MetricSummary& m = report.metrics.at(name);
            metric_rows.push_back({run, origin, name, util::fmt_double(m.mean, 6),
                                   util::fmt_double(m.ci_half_width, 6),
                                   std::to_string(report.n_trials)});
        }
    };
    auto add_reference = [&](const std::string& run, double macro, double lying) {
        metric_rows.push_back({run, "reference", "macro_f1", util::fmt_double(macro, 6), "0", "1"});
        metric_rows.push_back({run, "reference", "lying_f1", util::fmt_double(lying, 6), "0", "1"});
    };

    // Fixed reference rows for this test split: the supervised LSTM+Context
    // model, the receiver-label human baseline and the random baseline.
    add_reference("SL", 0.607, 0.318);
    add_reference("human_receiver", 0.556, 0.247);
    add_reference("random", 0.206, 0.093);

    ordered_json bundle;
    bundle["generated_at"] = now();

    bool have_corpus = true;
    try {
        corpus();
    } catch (const std::exception&) {
        have_corpus = false;  // empty-but-valid bundle with headers
    }

    if (have_corpus) {
        add_report("human_receiver", "computed", receiver_baseline_report());
        add_report("random", "computed", random_baseline(corpus(), 0.5, config_.seed, 1000));

        std::vector<std::string> labels;
        std::filesystem::path records_dir = config_.out_dir / "records";
        if (std::filesystem::exists(records_dir)) {
            for (const auto& entry : std::filesystem::directory_iterator(records_dir)) {
                if (entry.path().extension() == ".jsonl")
                    labels.push_back(entry.path().stem().string());
            }
        }
        std::sort(labels.begin(), labels.end());
        for (const auto& label : labels) {
            if (label.rfind("feedback", 0) == 0) continue;  // no lie sets to score
            add_report(label, "computed", report_from_records(load_records(label)));
        }
        bundle["runs"] = labels;
    }
    util::write_file(reports / "metrics.csv", util::csv_encode(metric_rows));

    // ---- cost ledger ------------------------------------------------------------
    UsageLedger ledger;
    std::filesystem::path records_dir = config_.out_dir / "records";
    if (std::filesystem::exists(records_dir)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(records_dir))
            files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            for (const auto& line : util::split_lines(util::read_file(file))) {
                if (!line.empty()) ledger.add_record(stage_record_from_json(line));
            }
        }
    }
    std::map<std::string, Pricing> pricing = {
        {config_.suggest_model.name, config_.suggest_model.pricing},
        {config_.feedback_model.name, config_.feedback_model.pricing},
        {config_.modify_model.name, config_.modify_model.pricing},
        {config_.judge_model.name, config_.judge_model.pricing},
    };
    CostBreakdown costs = estimate_cost(ledger, pricing);
    std::vector<util::CsvRow> cost_rows;
    cost_rows.push_back({"model", "stage", "input_tokens", "output_tokens", "cost_usd"});
    for (const auto& line : costs.lines) {
        cost_rows.push_back({line.model, line.stage, std::to_string(line.usage.input_tokens),
                             std::to_string(line.usage.output_tokens),
                             util::fmt_double(line.cost, 4)});
    }
    cost_rows.push_back({"total", "", "", "", util::fmt_double(costs.total, 4)});
    util::write_file(reports / "cost.csv", util::csv_encode(cost_rows));
    bundle["cost_total_usd"] = costs.total;

    // ---- feedback lengths and length/F1 correlation -------------------------------
    std::vector<util::CsvRow> length_rows;
    length_rows.push_back({"source", "count", "mean_words", "median", "q1", "q3", "outliers"});
    std::vector<util::CsvRow> correlation_rows;
    correlation_rows.push_back({"source", "pearson_r_length_vs_lying_f1", "conversations"});

    std::filesystem::path feedback_dir = config_.out_dir / "feedback";
    std::vector<std::string> sources;
    if (std::filesystem::exists(feedback_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(feedback_dir)) {
            if (entry.path().extension() == ".jsonl")
                sources.push_back(entry.path().stem().string());
        }
        std::sort(sources.begin(), sources.end());
    }
    for (const auto& source : sources) {
        auto rows = load_feedback(source);
        LengthStats stats = length_stats(rows);
        length_rows.push_back({source, std::to_string(stats.count),
                               util::fmt_double(stats.mean, 2), util::fmt_double(stats.median, 1),
                               util::fmt_double(stats.q1, 1), util::fmt_double(stats.q3, 1),
                               std::to_string(stats.outliers.size())});

        if (have_corpus &&
            std::filesystem::exists(records_dir / ("modify-" + source + ".jsonl"))) {
            auto per_conv = per_conversation_lying_f1("modify-" + source);
            std::vector<double> lengths, values;
            for (const auto& f : rows) {
                auto it = per_conv.find(f.conversation_id);
                if (it == per_conv.end()) continue;
                lengths.push_back(static_cast<double>(util::word_count(f.text)));
                values.push_back(it->second);
            }
            if (lengths.size() >= 2) {
                try {
                    double r = pearson(lengths, values);
                    correlation_rows.push_back({source, util::fmt_double(r, 4),
                                                std::to_string(lengths.size())});
                } catch (const DegenerateInput&) {
                    correlation_rows.push_back({source, "degenerate",
                                                std::to_string(lengths.size())});
                }
            }
        }
    }
    util::write_file(reports / "lengths.csv", util::csv_encode(length_rows));
    util::write_file(reports / "correlations.csv", util::csv_encode(correlation_rows));

    // ---- consistency buckets -------------------------------------------------------
    std::filesystem::path matrix_path = config_.out_dir / "consistency" / "matrix.csv";
    if (have_corpus && std::filesystem::exists(matrix_path)) {
        std::map<std::string, ConsistencyMatrix> matrices;
        auto matrix_rows = util::csv_decode(util::read_file(matrix_path));
        for (std::size_t i = 1; i < matrix_rows.size(); ++i) {
            const auto& row = matrix_rows[i];
            if (row.size() < 4) continue;
            ConsistencyMatrix& m = matrices[row[0]];
            m.conversation_id = row[0];
            m.set(row[1], row[2], std::stoi(row[3]));
        }
        std::vector<ConsistencyMatrix> matrix_list;
        for (auto& [id, m] : matrices) matrix_list.push_back(std::move(m));

        std::vector<util::CsvRow> bucket_rows;
        bucket_rows.push_back(
            {"records", "consistent_pairs", "conversations", "median_lying_f1", "mean_lying_f1"});
        for (const auto& source : sources) {
            if (!std::filesystem::exists(records_dir / ("modify-" + source + ".jsonl")))
                continue;
            auto per_conv = per_conversation_lying_f1("modify-" + source);
            try {
                auto buckets =
                    bucket_by_consistency(matrix_list, config_.human_sources, per_conv);
                for (const auto& b : buckets) {
                    bucket_rows.push_back({"modify-" + source, std::to_string(b.key),
                                           std::to_string(b.conversation_ids.size()),
                                           util::fmt_double(b.median, 4),
                                           util::fmt_double(b.mean, 4)});
                }
            } catch (const Error&) {
                // human pairs absent from the matrices; bucket table stays empty
            }
        }
        util::write_file(reports / "buckets.csv", util::csv_encode(bucket_rows));
    }

    util::write_file(reports / "report.json", bundle.dump(2));
    return reports;
}

}  // namespace presscheck
