#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "presscheck/errors.hpp"
#include "presscheck/pipeline.hpp"
#include "presscheck/util.hpp"
#include "support/helpers.hpp"

using namespace presscheck;

namespace {

/// Three-conversation offline bundle, scripted inline by each test.
struct MiniBundle {
    testsupport::TempDir dir{"pipeline"};
    RunConfig cfg;

    MiniBundle() {
        std::string dialogs;
        const char* seasons[3] = {"Spring", "Fall", "Winter"};
        for (int i = 0; i < 3; ++i) {
            nlohmann::ordered_json j;
            j["messages"] = {"I will keep the border clear.", "Good, same on my side.",
                             "My orders are already in."};
            j["sender_labels"] = {i != 1, true, true};  // conversation 1 opens with a lie
            j["receiver_labels"] = {true, true, "NOANNOTATION"};
            j["speakers"] = {"france", "germany", "france"};
            j["seasons"] = {seasons[i], seasons[i], seasons[i]};
            j["years"] = {"1901", "1901", "1901"};
            j["game_id"] = "4";
            j["players"] = {"france", "germany"};
            dialogs += j.dump() + "\n";
        }
        util::write_file(dir.path() / "dialogs.jsonl", dialogs);

        std::string scrapes;
        for (int i = 0; i < 3; ++i) {
            nlohmann::ordered_json j;
            j["season"] = seasons[i];
            j["year"] = 1901;
            j["holdings"] = {{"France", {"Par"}}, {"Germany", {"Ber"}}};
            if (i == 2) {
                j["orders"] = {{"France", {{{"kind", "build"},
                                            {"actor", "Bre"},
                                            {"outcome", "succeeds"}}}}};
            } else {
                j["orders"] = {{"France", {{{"kind", "move"},
                                            {"actor", "Par"},
                                            {"target", "Bur"},
                                            {"outcome", "succeeds"}}}}};
            }
            j["adjacency"] = {{"France", {"Bur"}}, {"Germany", {"Sil"}}};
            scrapes += j.dump() + "\n";
        }
        util::write_file(dir.path() / "scrapes.jsonl", scrapes);

        nlohmann::ordered_json config;
        config["dialogs"] = "dialogs.jsonl";
        config["scrapes"] = "scrapes.jsonl";
        config["human_feedback"] = "human_feedback.csv";
        config["focus_power"] = "France";
        config["seed"] = 11;
        config["mock_dir"] = "mock";
        config["trials"] = {{"suggest", 1}, {"feedback", 1}, {"modify", 2}};
        config["models"] = {
            {"suggest",
             {{"name", "m-suggest"}, {"endpoint", "completion"}, {"temperature", 0.7}}},
            {"feedback", {{"name", "m-feedback"}, {"endpoint", "chat"}}},
            {"modify", {{"name", "m-modify"}, {"endpoint", "chat"}}},
            {"judge", {{"name", "m-judge"}, {"endpoint", "chat"}, {"temperature", 0.0}}},
        };
        util::write_file(dir.path() / "config.json", config.dump(2));
        util::write_file(dir.path() / "human_feedback.csv", "");
        std::filesystem::create_directories(dir.path() / "mock");
        cfg = load_config(dir.path() / "config.json");
    }

    void script(const PromptBundle& bundle, const std::string& text) const {
        util::write_file(cfg.mock_dir / MockBackend::script_name(bundle), text);
    }
};

const TemplateConfig kTpl = TemplateConfig::defaults();

}  // namespace

TEST_CASE("load_config resolves paths and model specs") {
    MiniBundle bundle;
    CHECK(bundle.cfg.focus_power == Power::France);
    CHECK(bundle.cfg.trials.modify == 2);
    CHECK(bundle.cfg.suggest_model.endpoint == EndpointKind::Completion);
    CHECK(bundle.cfg.modify_model.name == "m-modify");
    CHECK(std::filesystem::exists(bundle.cfg.dialogs_path));
    CHECK(bundle.cfg.mock_dir.string().find(bundle.dir.path().string()) == 0);
}

TEST_CASE("ingest builds the corpus and the manifest entry") {
    MiniBundle bundle;
    Pipeline pipeline(bundle.cfg);
    const Corpus& corpus = pipeline.cmd_ingest();
    CHECK(corpus.conversations.size() == 3);
    CHECK(corpus.total_messages == 9);
    CHECK(std::filesystem::exists(bundle.cfg.out_dir / "manifest.json"));
}

TEST_CASE("missing scrape surfaces before any model call") {
    MiniBundle bundle;
    // drop the Fall scrape
    auto lines = util::split_lines(util::read_file(bundle.cfg.scrapes_path));
    util::write_file(bundle.cfg.scrapes_path, lines[0] + "\n" + lines[2] + "\n");
    Pipeline pipeline(bundle.cfg);
    CHECK_THROWS_AS(pipeline.cmd_ingest(), MissingBoardState);
}

TEST_CASE("suggest produces one record per conversation and a report") {
    MiniBundle bundle;
    Pipeline pipeline(bundle.cfg);
    const Corpus& corpus = pipeline.cmd_ingest();
    for (const auto& convo : corpus.conversations) {
        bundle.script(render_suggestion(convo, kTpl),
                      ground_truth(convo).empty()
                          ? "There are no lies in this conversation."
                          : "Message 0 is a lie. The orders contradict the promise.");
    }

    StageResult result = pipeline.cmd_suggest();
    CHECK(result.records.size() == 3);
    CHECK(std::filesystem::exists(result.records_path));
    CHECK(result.report.n_trials == 1);
    // conversation 1 holds the only lie and the script nails it
    CHECK(result.report.metrics.at("lying_f1").mean == doctest::Approx(1.0));

    SUBCASE("modification refuses to run without collected feedback") {
        CHECK_THROWS(static_cast<void>(pipeline.cmd_modify("m-feedback")));
    }
}

TEST_CASE("modification without a suggestion stage is refused") {
    MiniBundle bundle;
    Pipeline pipeline(bundle.cfg);
    pipeline.cmd_ingest();
    CHECK_THROWS_AS(static_cast<void>(pipeline.cmd_feedback_model()), MissingSuggestion);
}

TEST_CASE("round 2 without completed round-1 artifacts is refused") {
    MiniBundle bundle;
    Pipeline pipeline(bundle.cfg);
    pipeline.cmd_ingest();
    CHECK_THROWS_WITH_AS(static_cast<void>(pipeline.cmd_round2("m-feedback")),
                         doctest::Contains("round 2"), Error);
}

TEST_CASE("echoing mock pipeline is a fixed point; ablations and round 2 follow") {
    MiniBundle bundle;
    Pipeline pipeline(bundle.cfg);
    const Corpus& corpus = pipeline.cmd_ingest();

    std::map<std::string, std::string> suggestion_texts;
    for (const auto& convo : corpus.conversations) {
        std::string out = ground_truth(convo).empty()
                              ? "There are no lies in this conversation."
                              : "Message 0 is a lie. The orders contradict the promise.";
        suggestion_texts[convo.id] = out;
        bundle.script(render_suggestion(convo, kTpl), out);
    }
    pipeline.cmd_suggest();

    // Feedback and every modification flavor echo the suggestion.
    const std::string feedback_text = "The initial prediction and reasoning look right.";
    for (const auto& convo : corpus.conversations) {
        const std::string& out = suggestion_texts[convo.id];
        bundle.script(render_feedback_request(convo, out, kTpl), feedback_text);
        bundle.script(render_modification(convo, out, feedback_text, kTpl), out);
        bundle.script(render_modification(convo, out, "No feedback.", kTpl), out);
    }
    FeedbackResult feedback = pipeline.cmd_feedback_model();
    CHECK(feedback.rows.size() == 3);
    CHECK(feedback.source == "m-feedback");

    StageResult modify = pipeline.cmd_modify("m-feedback");
    CHECK(modify.records.size() == 6);  // 3 conversations x 2 trials
    StageResult suggest_again = pipeline.cmd_suggest();  // warm cache, same numbers
    CHECK(modify.report.metrics.at("lying_f1").mean ==
          suggest_again.report.metrics.at("lying_f1").mean);
    CHECK(modify.report.metrics.at("macro_f1").mean ==
          suggest_again.report.metrics.at("macro_f1").mean);

    SUBCASE("no-feedback ablation equals the echo run") {
        StageResult ablate = pipeline.cmd_ablate(AblationKind::NoFeedback);
        CHECK(ablate.report.metrics.at("lying_f1").mean ==
              modify.report.metrics.at("lying_f1").mean);
    }

    SUBCASE("identity permutation reproduces cmd_modify exactly") {
        RunConfig cfg = bundle.cfg;
        cfg.identity_permutation = true;
        Pipeline control(cfg);
        StageResult permuted = control.cmd_ablate(AblationKind::Permuted, "m-feedback");
        CHECK(permuted.report.metrics.at("lying_f1").mean ==
              modify.report.metrics.at("lying_f1").mean);

        auto log = util::csv_decode(
            util::read_file(cfg.out_dir / "reports" / "permutation-m-feedback.csv"));
        REQUIRE(log.size() == 4);  // header + 3 rows
        for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i][0] == log[i][1]);
    }

    SUBCASE("seeded permutation logs a bijection") {
        auto perm = permutation_for(102, 11);
        std::set<std::size_t> seen(perm.begin(), perm.end());
        CHECK(seen.size() == 102);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == 101);
        CHECK(permutation_for(102, 11) == perm);   // seed-stable
        CHECK(permutation_for(102, 12) != perm);   // seed-sensitive
    }

    SUBCASE("round 2 with echo scripts stays at round-1 metrics") {
        const std::string feedback2_text =
            "The revised prediction remains consistent with the evidence.";
        for (const auto& convo : corpus.conversations) {
            Round1Transcript round1{suggestion_texts[convo.id], feedback_text,
                                    suggestion_texts[convo.id]};
            bundle.script(render_feedback2(convo, round1, kTpl), feedback2_text);
            bundle.script(render_modification2(convo, round1, feedback2_text, kTpl),
                          suggestion_texts[convo.id]);
        }
        auto round2 = pipeline.cmd_round2("m-feedback");
        CHECK(round2.feedback2.rows.size() == 3);
        CHECK(round2.modify2.report.metrics.at("lying_f1").mean ==
              modify.report.metrics.at("lying_f1").mean);
    }

    SUBCASE("report bundle lands with every table") {
        auto reports = pipeline.cmd_report();
        for (const char* name :
             {"metrics.csv", "cost.csv", "lengths.csv", "correlations.csv", "report.json"}) {
            CHECK(std::filesystem::exists(reports / name));
        }
        auto metrics = util::read_file(reports / "metrics.csv");
        CHECK(metrics.find("SL,reference,macro_f1,0.607000") != std::string::npos);
        CHECK(metrics.find("SL,reference,lying_f1,0.318000") != std::string::npos);
        CHECK(metrics.find("human_receiver,reference") != std::string::npos);
        CHECK(metrics.find("random,reference") != std::string::npos);
    }
}

TEST_CASE("human feedback ingestion joins on conversation id") {
    MiniBundle bundle;
    Pipeline pipeline(bundle.cfg);
    const Corpus& corpus = pipeline.cmd_ingest();
    REQUIRE(corpus.conversations.size() == 3);

    SUBCASE("gaps are reported per annotator") {
        std::vector<util::CsvRow> rows;
        rows.push_back({"conversation_id", "annotator", "feedback_text"});
        rows.push_back({corpus.conversations[0].id, "Human1", "Looks right."});
        rows.push_back({corpus.conversations[1].id, "Human1", "Weak reasoning, right answer."});
        util::write_file(bundle.cfg.human_feedback_path, util::csv_encode(rows));

        auto results = pipeline.cmd_feedback_human();
        REQUIRE(results.size() == 1);
        CHECK(results[0].rows.size() == 2);
        REQUIRE(results[0].missing_ids.size() == 1);
        CHECK(results[0].missing_ids[0] == corpus.conversations[2].id);
    }

    SUBCASE("unknown ids are rejected") {
        std::vector<util::CsvRow> rows;
        rows.push_back({"conversation_id", "annotator", "feedback_text"});
        rows.push_back({"4-1999Spring-France-Italy-p1", "Human1", "???"});
        util::write_file(bundle.cfg.human_feedback_path, util::csv_encode(rows));
        CHECK_THROWS_AS(static_cast<void>(pipeline.cmd_feedback_human()),
                        UnmatchedConversationId);
    }
}

TEST_CASE("empty run directory still yields a valid report bundle") {
    MiniBundle bundle;
    Pipeline pipeline(bundle.cfg);
    auto reports = pipeline.cmd_report();
    auto metrics = util::read_file(reports / "metrics.csv");
    CHECK(metrics.find("run,origin,metric,mean") == 0);    // header intact
    CHECK(util::read_file(reports / "cost.csv").find("model,stage") == 0);
}
