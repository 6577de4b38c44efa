#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "presscheck/dataset.hpp"
#include "presscheck/errors.hpp"
#include "presscheck/util.hpp"
#include "support/helpers.hpp"

using namespace presscheck;

namespace {

std::size_t plain_cost(const Conversation& convo) {
    std::size_t chars = 0;
    for (const auto& m : convo.messages) chars += m.text.size() + 1;
    return estimate_tokens(std::string(chars, 'x'));
}

std::filesystem::path write_jsonl(const testsupport::TempDir& dir, const std::string& name,
                                  const std::vector<std::string>& lines) {
    std::string body;
    for (const auto& l : lines) body += l + "\n";
    auto path = dir.path() / name;
    util::write_file(path, body);
    return path;
}

const char* kScrapeSpring1901 =
    R"({"season":"Spring","year":1901,)"
    R"("holdings":{"France":["Par"],"Germany":["Ber"]},)"
    R"("orders":{"France":[{"kind":"move","actor":"Par","target":"Bur","outcome":"succeeds"}]},)"
    R"("adjacency":{"France":["Bur"],"Germany":["Sil"]}})";

const char* kScrapeFall1901 =
    R"({"season":"Fall","year":1901,)"
    R"("holdings":{"France":["Par"],"Germany":["Ber"]},)"
    R"("orders":{"Germany":[{"kind":"hold","actor":"Ber","outcome":"succeeds"}]},)"
    R"("adjacency":{"France":["Bur"],"Germany":["Sil"]}})";

const char* kScrapeWinter1901 =
    R"({"season":"Winter","year":1901,)"
    R"("holdings":{"France":["Par"],"Germany":["Ber"]},)"
    R"("orders":{"France":[{"kind":"build","actor":"Bre","outcome":"succeeds"}]},)"
    R"("adjacency":{"France":["Bur"],"Germany":["Sil"]}})";

}  // namespace

TEST_CASE("load_dialogs reads well-formed records") {
    testsupport::TempDir dir("dialogs");
    auto path = write_jsonl(
        dir, "dialogs.jsonl",
        {R"({"messages":["hi","hello"],"speakers":["france","germany"],)"
         R"("sender_labels":[true,false],"receiver_labels":[true,"NOANNOTATION"],)"
         R"("seasons":["Spring","Spring"],"years":["1901","1901"],)"
         R"("game_id":4,"players":["france","germany"]})"});

    auto records = load_dialogs(path);
    REQUIRE(records.size() == 1);
    CHECK(records[0].texts.size() == 2);
    CHECK(records[0].game_id == "4");
    CHECK(records[0].speakers[1] == Power::Germany);
    CHECK(records[0].sender_labels[0] == SenderLabel::Truthful);
    CHECK(records[0].sender_labels[1] == SenderLabel::Lie);
    CHECK(records[0].receiver_labels[1] == ReceiverLabel::Unannotated);
    CHECK(records[0].phases[0].year == 1901);
}

TEST_CASE("load_dialogs rejects parallel-array length mismatches") {
    testsupport::TempDir dir("dialogs");
    auto path = write_jsonl(
        dir, "bad.jsonl",
        {R"({"messages":["a","b","c"],"speakers":["france","germany","france"],)"
         R"("sender_labels":[true,false],"receiver_labels":[true,true,true],)"
         R"("seasons":["Spring","Spring","Spring"],"years":["1901","1901","1901"],)"
         R"("game_id":4,"players":["france","germany"]})"});
    CHECK_THROWS_WITH_AS(static_cast<void>(load_dialogs(path)),
                         doctest::Contains("sender_labels"), SchemaError);
}

TEST_CASE("build_conversations groups by turn and binds boards") {
    testsupport::TempDir dir("convos");
    auto dialogs = write_jsonl(
        dir, "dialogs.jsonl",
        {R"({"messages":["a","b","c","d","e"],)"
         R"("speakers":["france","germany","france","germany","france"],)"
         R"("sender_labels":[true,true,false,true,true],)"
         R"("receiver_labels":[true,true,true,"NOANNOTATION",false],)"
         R"("seasons":["Spring","Spring","Fall","Fall","Winter"],)"
         R"("years":["1901","1901","1901","1901","1901"],)"
         R"("game_id":4,"players":["france","germany"]})",
         // distractor pair without the focus power
         R"({"messages":["x"],"speakers":["italy"],)"
         R"("sender_labels":[true],"receiver_labels":[true],)"
         R"("seasons":["Spring"],"years":["1901"],)"
         R"("game_id":4,"players":["italy","austria"]})"});
    auto scrapes_path =
        write_jsonl(dir, "scrapes.jsonl", {kScrapeSpring1901, kScrapeFall1901, kScrapeWinter1901});

    auto records = load_dialogs(dialogs);
    auto scrapes = load_scrapes(scrapes_path);
    auto conversations = build_conversations(records, scrapes, Power::France);

    REQUIRE(conversations.size() == 3);
    CHECK(conversations[0].id == "4-1901Spring-France-Germany-p1");
    CHECK(conversations[1].id == "4-1901Fall-France-Germany-p1");
    CHECK(conversations[2].id == "4-1901Winter-France-Germany-p1");
    CHECK(conversations[0].messages.size() == 2);
    CHECK(conversations[1].messages.size() == 2);
    CHECK(conversations[2].messages.size() == 1);
    CHECK(conversations[1].messages[0].index == 0);  // re-indexed per conversation
    CHECK(conversations[1].board.phase.season == Season::Fall);

    SUBCASE("missing scrape turns into MissingBoardState") {
        scrapes.erase(Phase{Season::Fall, 1901});
        CHECK_THROWS_AS(static_cast<void>(build_conversations(records, scrapes, Power::France)),
                        MissingBoardState);
    }

    SUBCASE("ground truth and receiver baseline project label sets") {
        CHECK(ground_truth(conversations[0]).empty());
        CHECK(ground_truth(conversations[1]) == std::set<int>{0});
        CHECK(receiver_baseline(conversations[1]).empty());  // unannotated counts truthful
        CHECK(receiver_baseline(conversations[2]) == std::set<int>{0});
    }
}

TEST_CASE("split_by_budget keeps short conversations intact") {
    Conversation convo = testsupport::tiny_conversation("4-1902Spring-France-Germany-p1", 4);
    auto parts = split_by_budget(convo, 1'000'000, plain_cost);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].id == convo.id);
    CHECK(parts[0].messages.size() == 4);
}

TEST_CASE("split_by_budget splits at the derived boundary and re-indexes") {
    Conversation convo = testsupport::tiny_conversation("4-1902Spring-France-Germany-p1", 10);
    for (auto& m : convo.messages) m.text = std::string(100, 'a' + m.index);

    // Derived independently: each message costs ceil(101/4) = 26 tokens under
    // the character estimator, so a 160-token budget fits 6 messages per part.
    std::size_t budget = 160;
    REQUIRE(plain_cost(convo) > budget);

    auto parts = split_by_budget(convo, budget, plain_cost);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].messages.size() == 6);
    CHECK(parts[1].messages.size() == 4);
    CHECK(parts[0].id == "4-1902Spring-France-Germany-p1");
    CHECK(parts[1].id == "4-1902Spring-France-Germany-p2");
    CHECK(parts[1].part == 2);
    CHECK(parts[1].messages[0].index == 0);
    CHECK(parts[1].messages[0].text == convo.messages[6].text);

    SUBCASE("message count is preserved and order reproduced") {
        std::vector<std::string> joined;
        for (const auto& part : parts) {
            for (const auto& m : part.messages) joined.push_back(m.text);
        }
        REQUIRE(joined.size() == convo.messages.size());
        for (std::size_t i = 0; i < joined.size(); ++i) {
            CHECK(joined[i] == convo.messages[i].text);
        }
    }
}

TEST_CASE("split_by_budget rejects a message that cannot fit alone") {
    Conversation convo = testsupport::tiny_conversation("4-1902Spring-France-Germany-p1", 1);
    convo.messages[0].text = std::string(100'000, 'x');
    CHECK_THROWS_AS(static_cast<void>(split_by_budget(convo, 3400, plain_cost)),
                    UnsplittableMessage);
}

TEST_CASE("token estimator rounds up") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abc") == 1);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
}
