#include "presscheck/fixture.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include <json.hpp>

#include "presscheck/dataset.hpp"
#include "presscheck/errors.hpp"
#include "presscheck/extractor.hpp"
#include "presscheck/gateway.hpp"
#include "presscheck/pipeline.hpp"
#include "presscheck/prompts.hpp"
#include "presscheck/util.hpp"

namespace presscheck::fixture {

using ordered_json = nlohmann::ordered_json;

namespace {

// Engineered corpus shape. 100 single-turn conversations plus one long
// exchange that the token budget splits in two: 102 conversations, 915
// messages, 47 sender-labeled lies. Receiver labels flag 34 of the lies and
// 194 truthful messages, which lands the receiver baseline on the published
// macro/lying-F1 anchors.
constexpr int kNormalConversations = 100;
constexpr int kSplitMessages = 24;
constexpr int kTotalLies = 47;
constexpr int kTruthfulMessages = 868;
constexpr const char* kGameId = "4";

const char* kCounterparts[6] = {"germany", "turkey", "russia", "italy", "austria", "england"};

const std::vector<std::string> kTerritoryPool = {
    "Par", "Mar", "Por", "Spa", "Bre", "Smy", "Rum", "Bul", "Con", "Sev", "Ank", "Hol", "Mun",
    "Bel", "Ber", "Kie", "Swe", "War", "Mos", "Stp", "Nwy", "Nap", "Ven", "Tun", "Rom", "Gre",
    "Bud", "Tri", "Vie", "Ser", "Lvp", "Lon", "Den", "Edi", "Bur", "Pic", "Gas", "Ruh", "Sil",
    "Boh", "Tyr", "Gal", "Ukr", "Arm", "Bla", "Aeg", "Ion", "Adr", "Apu", "Pie", "Tus", "Yor",
    "Wal", "Cly", "Fin", "Lvn", "Alb", "Naf", "Tys", "Eas", "Syr", "Bar", "Bot", "Ska", "Hel",
    "Nth", "Eng", "Iri", "Mao", "Nao", "Wes", "Lyo", "Pru", "Bal", "Nwg",
};

const std::vector<std::string> kShortLines = {
    "Are you still planning the northern opening we discussed?",
    "I kept my fleet out of the channel as promised.",
    "Austria has been asking me about your intentions, just so you know.",
    "Let's keep the border demilitarized for another year.",
    "I can support you into the contested center this fall if you cover my flank.",
    "No builds aimed at you this winter, you have my word.",
    "Turkey offered me an alliance but I turned it down.",
    "I'd rather we coordinate against the leader before it's too late.",
    "My orders are already written and they match what we agreed.",
    "If you bounce me there I will take it as a declaration of war.",
    "The convoy you saw was aimed at the neutral center, nothing more.",
    "I will waive my build to show good faith.",
    "Russia told me they are moving south, away from both of us.",
    "Can we agree on a demilitarized zone around the straits?",
    "I am pulling my army back this season as a gesture.",
    "Nothing I ordered this turn threatens your home centers.",
    "We should talk about dividing the neutral centers before fall.",
    "England is lying to at least one of us, I am sure of it.",
};

const std::vector<std::string> kLongClauses = {
    "I want to walk through the whole board with you because the position is more delicate "
    "than it looks and I would rather over-communicate than have either of us guess",
    "the fleet I placed last winter is strictly defensive and will stay in port unless someone "
    "forces my hand, which I do not expect",
    "if Austria commits to the Balkan line the way they promised me last year, the two of us "
    "can take the remaining neutrals without firing a shot at each other",
    "my support order this season is yours as long as you keep the border provinces empty the "
    "way we wrote it down",
    "I have heard from two different players that a western coalition is forming, and while I "
    "do not fully believe it, we should plan as if it were true",
    "the score delta between us is small enough that neither of us profits from an early war, "
    "so I propose we revisit the division of centers after the fall adjudication",
    "please do not read the bounce in the neutral center as hostility, it was cover against a "
    "third party and I can prove it by my builds this winter",
};

const std::vector<std::string> kLieReasons = {
    "The submitted orders contradict this promise outright.",
    "The order sheet shows units massing on the border that was supposed to stay empty.",
    "The claimed support never appears among the submitted orders.",
    "The build that follows is aimed exactly where the message promises peace.",
    "The scraped moves show the opposite commitment being executed.",
    "The promised withdrawal never happened according to the turn's orders.",
    "The convoy described here was ordered toward an allied coast instead.",
};

const std::vector<std::string> kHuman1Pool = {
    "The DMZ reasoning is sound but the wrong power is blamed.",
    "Good catch on the support order, though the conclusion overreaches.",
    "Experienced players promise the same center to two neighbors at once.",
    "Weigh the build pattern more; it is the classic tell here.",
    "The tone shift after adjudication marks where the deception starts.",
    "A failed tactical move is not the same as a lie.",
    "The promise about the straits is credible from actual play experience.",
    "Check who benefits from the bounce before calling it deception.",
};

const std::vector<std::string> kHuman2Pool = {
    "Reasonable prediction, weak justification.",
    "The cited order does not support this.",
    "Agree with the overall call.",
    "This misreads the board position.",
    "The flagged message looks truthful.",
    "Missed the stab setup entirely.",
    "Correct logic about the failed support.",
};

const std::vector<std::string> kHuman3Pool = {
    "The adjacency reading is off, which undermines the stated reason.",
    "I agree with the prediction but for the build pattern instead.",
    "This reads as routine coordination, with no strong tell of deception.",
    "The convoy claim checks out against the submitted orders.",
    "Consider who gains from the bounce before judging the promise.",
};

const std::vector<std::string> kModelFeedbackFiller = {
    "GPT-3's overall framing of the conversation is reasonable, and its attention to the "
    "relationship between promises and submitted orders is the right instinct for this task.",
    "However, the reasoning would be stronger if it cross-checked each claim in the "
    "conversation against the specific orders listed for that season rather than arguing from "
    "general suspicion about the players' motives.",
    "It is also worth remembering that a failed move does not by itself indicate deception; "
    "players frequently attempt moves they discussed openly and simply get bounced.",
    "When evaluating promises about demilitarized zones, the decisive evidence is whether any "
    "unit entered the named provinces, which the board information makes easy to verify.",
    "The prediction would also benefit from considering the incentives of the two powers: a "
    "player ahead on centers has less reason to take the risks that usually accompany lying.",
    "Finally, the reasoning should distinguish between messages that state intentions and "
    "messages that report facts about third parties, because only the former can be checked "
    "directly against the orders.",
};

struct MessagePlan {
    std::string text;
    bool from_focus = true;
    bool lie = false;
    std::string receiver;  // "true", "false" or "NOANNOTATION"
    bool in_suggest = false;
    bool in_modify = false;
    bool in_permuted = false;
};

struct ConversationPlan {
    std::string counterpart;  // lowercase
    Season season = Season::Spring;
    int year = 1901;
    std::vector<MessagePlan> messages;
};

class Builder {
public:
    explicit Builder(std::uint64_t seed) : rng_(seed) {}

    std::vector<ConversationPlan> build_plans() {
        std::vector<ConversationPlan> plans;

        // Message-count pattern: 891 messages over the 100 normal
        // conversations, plus the 24-message exchange that gets split.
        const int pattern[10] = {5, 7, 9, 11, 13, 6, 8, 10, 12, 4};
        std::vector<int> sizes;
        for (int i = 0; i < kNormalConversations; ++i) sizes.push_back(pattern[i % 10]);
        for (int i = 0; i < 41; ++i) sizes[i] += 1;

        int lie_conversations_seen = 0;
        for (int i = 0; i < kNormalConversations; ++i) {
            ConversationPlan plan;
            int phase_idx = i % 51;
            plan.counterpart = kCounterparts[i % 6];
            plan.year = 1901 + phase_idx / 3;
            plan.season = static_cast<Season>(phase_idx % 3);

            std::set<int> lie_positions;
            if (i % 3 == 1) {
                int n = sizes[i];
                if (lie_conversations_seen < 14) {
                    lie_positions.insert(n / 3);
                    lie_positions.insert(2 * n / 3);
                } else {
                    lie_positions.insert(n / 2);
                }
                ++lie_conversations_seen;
            }

            for (int m = 0; m < sizes[i]; ++m) {
                plan.messages.push_back(
                    make_message(m % 3 != 1, lie_positions.count(m) > 0, false));
            }
            plans.push_back(std::move(plan));
        }

        // The long exchange: phase index 50 (Winter 1917), England.
        ConversationPlan big;
        big.counterpart = kCounterparts[101 % 6];
        big.year = 1901 + 50 / 3;
        big.season = static_cast<Season>(50 % 3);
        for (int m = 0; m < kSplitMessages; ++m) {
            big.messages.push_back(make_message(m % 2 == 0, false, true));
        }
        plans.push_back(std::move(big));

        if (lie_counter_ != kTotalLies)
            throw Error("fixture drift: " + std::to_string(lie_counter_) + " lies generated");
        if (truthful_counter_ != kTruthfulMessages)
            throw Error("fixture drift: " + std::to_string(truthful_counter_) +
                        " truthful messages generated");
        return plans;
    }

    std::string pick(const std::vector<std::string>& pool) {
        return pool[rng_() % pool.size()];
    }

    std::mt19937_64& rng() { return rng_; }

private:
    MessagePlan make_message(bool from_focus, bool lie, bool long_text) {
        MessagePlan m;
        m.from_focus = from_focus;
        m.lie = lie;
        if (long_text) {
            std::string text;
            for (int s = 0; s < 5; ++s) {
                std::string clause = pick(kLongClauses);
                clause[0] = static_cast<char>(std::toupper(clause[0]));
                text += clause + ". ";
            }
            m.text = util::trim(text);
        } else {
            m.text = pick(kShortLines);
        }

        if (lie) {
            int k = lie_counter_++;
            bool flagged = (k * 13) % kTotalLies >= 13;  // 34 of 47 flagged
            m.receiver = flagged ? "false" : "true";
            m.in_suggest = (k * 22) % kTotalLies >= 22;  // 25 true positives
            if (m.in_suggest) {
                m.in_modify = true;
                int t = suggest_tp_counter_++;
                m.in_permuted = t % 5 < 3;  // 15 of 25 survive the shuffle
            } else {
                int d = dropped_lie_counter_++;
                m.in_modify = (d * 5) % 22 < 5;  // 5 of 22 recovered via feedback
                m.in_permuted = false;
            }
        } else {
            int j = truthful_counter_++;
            bool flagged = (j * 194) % kTruthfulMessages < 194;  // exactly 194
            m.receiver = flagged ? "false" : ((j % 13 == 5) ? "NOANNOTATION" : "true");
            m.in_suggest = (j * 120) % kTruthfulMessages < 120;  // 120 false positives
            if (m.in_suggest) {
                int f = suggest_fp_counter_++;
                m.in_modify = (f * 30) % 120 >= 30;  // 30 of 120 dropped
                m.in_permuted = true;
            } else {
                m.in_modify = false;
                m.in_permuted = extra_fp_counter_++ % 17 == 3;  // extra noise fps
            }
        }
        return m;
    }

    std::mt19937_64 rng_;
    int lie_counter_ = 0;
    int truthful_counter_ = 0;
    int suggest_tp_counter_ = 0;
    int dropped_lie_counter_ = 0;
    int suggest_fp_counter_ = 0;
    int extra_fp_counter_ = 0;
};

// -- file emission ---------------------------------------------------------------

ordered_json dialog_record(const ConversationPlan& plan) {
    ordered_json j;
    ordered_json messages = ordered_json::array();
    ordered_json senders = ordered_json::array();
    ordered_json receivers = ordered_json::array();
    ordered_json speakers = ordered_json::array();
    ordered_json seasons = ordered_json::array();
    ordered_json years = ordered_json::array();
    for (const auto& m : plan.messages) {
        messages.push_back(m.text);
        senders.push_back(!m.lie);  // the false-like value marks a lie
        if (m.receiver == "true") receivers.push_back(true);
        else if (m.receiver == "false") receivers.push_back(false);
        else receivers.push_back("NOANNOTATION");
        speakers.push_back(m.from_focus ? "france" : plan.counterpart);
        seasons.push_back(std::string(season_name(plan.season)));
        years.push_back(std::to_string(plan.year));
    }
    j["messages"] = std::move(messages);
    j["sender_labels"] = std::move(senders);
    j["receiver_labels"] = std::move(receivers);
    j["speakers"] = std::move(speakers);
    j["seasons"] = std::move(seasons);
    j["years"] = std::move(years);
    j["game_id"] = kGameId;
    j["players"] = ordered_json::array({"france", plan.counterpart});
    return j;
}

ordered_json distractor_record(int idx) {
    ordered_json j;
    j["messages"] = ordered_json::array({"We should coordinate against the west.",
                                         "Agreed, send details next season."});
    j["sender_labels"] = ordered_json::array({true, true});
    j["receiver_labels"] = ordered_json::array({true, "NOANNOTATION"});
    const char* pairs[][2] = {{"italy", "austria"}, {"turkey", "russia"}, {"england", "germany"}};
    const char* a = pairs[idx % 3][0];
    const char* b = pairs[idx % 3][1];
    j["speakers"] = ordered_json::array({a, b});
    j["seasons"] = ordered_json::array({"Spring", "Spring"});
    j["years"] = ordered_json::array({"1905", "1905"});
    j["game_id"] = kGameId;
    j["players"] = ordered_json::array({a, b});
    return j;
}

/// The published Winter 1902 board, used verbatim for that turn's scrape.
ordered_json winter_1902_scrape() {
    ordered_json j;
    j["season"] = "Winter";
    j["year"] = 1902;
    j["holdings"] = {
        {"France", {"Par", "Mar", "Por", "Spa", "Bre"}},
        {"Turkey", {"Smy", "Rum", "Bul", "Con", "Sev", "Ank"}},
        {"Germany", {"Hol", "Mun", "Bel", "Ber", "Kie"}},
        {"Russia", {"Swe", "War", "Mos", "Stp", "Nwy"}},
        {"Italy", {"Nap", "Ven", "Tun", "Rom"}},
        {"Austria", {"Gre", "Bud", "Tri", "Vie", "Ser"}},
        {"England", {"Lvp", "Lon", "Den", "Edi"}},
    };
    auto build = [](const char* at) {
        return ordered_json{{"kind", "build"}, {"actor", at}, {"outcome", "succeeds"}};
    };
    j["orders"] = {
        {"Turkey", ordered_json::array({build("Smy")})},
        {"Austria", ordered_json::array({build("Bud")})},
        {"Russia", ordered_json::array({build("Mos")})},
    };
    j["adjacency"] = {
        {"France", {"Spa", "Par", "Lyo", "Mar", "Spa/Sc", "Pic", "Gas", "Bur", "Por", "Mao",
                    "Pie", "Bre", "Spa/Nc", "Eng"}},
        {"Turkey", {"Bul/Sc", "Bud", "Ukr", "Mos", "Ank", "Rum", "Eas", "Bul/Ec", "Syr", "Bla",
                    "Arm", "Con", "Ser", "Sev", "Bul", "Smy", "Gre", "Gal", "Aeg"}},
        {"Germany", {"Sil", "Pru", "Bal", "Hol", "Mun", "Boh", "Tyr", "Kie", "Pic", "Den", "Hel",
                     "Bur", "Bel", "Ruh", "Ber", "Nth", "Eng"}},
        {"Russia", {"War", "Sil", "Ukr", "Stp/Sc", "Mos", "Bal", "Fin", "Stp/Nc", "Nwg", "Den",
                    "Bar", "Bot", "Swe", "Pru", "Sev", "Nwy", "Stp", "Ska", "Lvn", "Gal", "Nth"}},
        {"Italy", {"Adr", "Tys", "Naf", "Rom", "Tyr", "Ven", "Nap", "Tri", "Ion", "Apu", "Pie",
                   "Wes", "Tus"}},
        {"Austria", {"Rum", "Bul/Sc", "Alb", "Vie", "Adr", "Bud", "Boh", "Tyr", "Bul", "Ven",
                     "Tri", "Ion", "Gre", "Gal", "Ser", "Aeg"}},
        {"England", {"Nao", "Eng", "Swe", "Cly", "Bal", "Nwg", "Yor", "Kie", "Hel", "Lvp", "Ska",
                     "Wal", "Edi", "Nth", "Iri"}},
    };
    return j;
}

ordered_json synthetic_scrape(Season season, int year, std::mt19937_64& rng) {
    auto pick_territories = [&](int lo, int hi) {
        int count = lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
        ordered_json list = ordered_json::array();
        std::set<std::size_t> used;
        while (static_cast<int>(list.size()) < count) {
            std::size_t t = rng() % kTerritoryPool.size();
            if (used.insert(t).second) list.push_back(kTerritoryPool[t]);
        }
        return list;
    };

    ordered_json j;
    j["season"] = std::string(season_name(season));
    j["year"] = year;

    ordered_json holdings, adjacency, orders;
    for (Power p : all_powers) {
        std::string name(power_name(p));
        holdings[name] = pick_territories(3, 6);
        adjacency[name] = pick_territories(5, 9);
    }
    for (Power p : all_powers) {
        if (rng() % 7 < 3) continue;  // some powers sit a turn out
        std::string name(power_name(p));
        ordered_json power_orders = ordered_json::array();
        int count = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < count; ++i) {
            std::string actor = holdings[name][i % holdings[name].size()];
            std::string outcome = rng() % 4 == 0 ? "fails" : "succeeds";
            if (season == Season::Winter) {
                power_orders.push_back(
                    {{"kind", "build"}, {"actor", actor}, {"outcome", "succeeds"}});
                break;  // one build per winter
            }
            switch (rng() % 5) {
                case 0:
                    power_orders.push_back({{"kind", "hold"}, {"actor", actor},
                                            {"outcome", outcome}});
                    break;
                case 1:
                    power_orders.push_back({{"kind", "support_hold"},
                                            {"actor", actor},
                                            {"beneficiary", pick_territories(1, 1)[0]},
                                            {"outcome", outcome}});
                    break;
                case 2:
                    power_orders.push_back({{"kind", "support_move"},
                                            {"actor", actor},
                                            {"beneficiary", pick_territories(1, 1)[0]},
                                            {"target", pick_territories(1, 1)[0]},
                                            {"outcome", outcome}});
                    break;
                case 3:
                    power_orders.push_back({{"kind", "convoy"},
                                            {"actor", actor},
                                            {"beneficiary", pick_territories(1, 1)[0]},
                                            {"target", pick_territories(1, 1)[0]},
                                            {"outcome", outcome}});
                    break;
                default:
                    power_orders.push_back({{"kind", "move"},
                                            {"actor", actor},
                                            {"target", pick_territories(1, 1)[0]},
                                            {"outcome", outcome}});
                    break;
            }
        }
        if (!power_orders.empty()) orders[name] = std::move(power_orders);
    }
    j["holdings"] = std::move(holdings);
    j["orders"] = orders.is_null() ? ordered_json::object() : orders;
    j["adjacency"] = std::move(adjacency);
    return j;
}

std::string prediction_text(const std::set<int>& indices, Builder& builder) {
    if (indices.empty()) {
        return "There are no lies in this conversation. Both powers describe orders that match "
               "the adjudication.";
    }
    std::string out;
    for (int idx : indices) {
        out += "Message " + std::to_string(idx) + " is a lie. " + builder.pick(kLieReasons) +
               "\n";
    }
    return util::trim(out);
}

std::string sentences(const std::vector<std::string>& pool, int count, Builder& builder) {
    std::string out;
    for (int i = 0; i < count; ++i) out += builder.pick(pool) + " ";
    return util::trim(out);
}

}  // namespace

FixturePaths generate_reference_fixture(const std::filesystem::path& root, std::uint64_t seed) {
    FixturePaths paths;
    paths.root = root;
    paths.config = root / "config.json";
    paths.dialogs = root / "dialogs.jsonl";
    paths.scrapes = root / "scrapes.jsonl";
    paths.human_feedback = root / "human_feedback.csv";
    paths.mock_dir = root / "mock";
    std::filesystem::create_directories(paths.mock_dir);

    Builder builder(seed);
    std::vector<ConversationPlan> plans = builder.build_plans();

    // ---- dialogs.jsonl (with interleaved distractor pairs) ----------------------
    {
        std::string body;
        int distractor = 0;
        for (std::size_t i = 0; i < plans.size(); ++i) {
            if (i > 0 && i % 25 == 0) body += distractor_record(distractor++).dump() + "\n";
            body += dialog_record(plans[i]).dump() + "\n";
        }
        util::write_file(paths.dialogs, body);
    }

    // ---- scrapes.jsonl -----------------------------------------------------------
    {
        std::set<std::pair<int, int>> phases;  // (year, season)
        for (const auto& plan : plans)
            phases.insert({plan.year, static_cast<int>(plan.season)});
        std::string body;
        for (const auto& [year, season] : phases) {
            if (year == 1902 && static_cast<Season>(season) == Season::Winter) {
                body += winter_1902_scrape().dump() + "\n";
            } else {
                body += synthetic_scrape(static_cast<Season>(season), year, builder.rng()).dump() +
                        "\n";
            }
        }
        util::write_file(paths.scrapes, body);
    }

    // ---- config.json ---------------------------------------------------------------
    {
        ordered_json cfg;
        cfg["dialogs"] = "dialogs.jsonl";
        cfg["scrapes"] = "scrapes.jsonl";
        cfg["human_feedback"] = "human_feedback.csv";
        cfg["focus_power"] = "France";
        cfg["game"] = kGameId;
        cfg["seed"] = seed;
        cfg["token_budget"] = 3400;
        cfg["cache_dir"] = "cache";
        cfg["out_dir"] = "out";
        cfg["mock_dir"] = "mock";
        cfg["suggestion_trial"] = 1;
        cfg["max_in_flight"] = 4;
        cfg["trials"] = {{"suggest", 1}, {"feedback", 1}, {"modify", 5}};
        auto model = [](const char* name, const char* endpoint, double temp, double in_rate,
                        double out_rate) {
            return ordered_json{{"name", name},
                                {"endpoint", endpoint},
                                {"temperature", temp},
                                {"max_output", 512},
                                {"pricing",
                                 {{"input_per_1k", in_rate}, {"output_per_1k", out_rate}}}};
        };
        cfg["models"] = {
            {"suggest", model("mock-davinci", "completion", 0.7, 0.02, 0.02)},
            {"feedback", model("mock-feedback", "chat", 0.7, 0.03, 0.06)},
            {"modify", model("mock-modify", "chat", 0.7, 0.03, 0.06)},
            {"judge", model("mock-judge", "chat", 0.0, 0.03, 0.06)},
        };
        cfg["human_sources"] = {"Human1", "Human2", "Human3"};
        util::write_file(paths.config, cfg.dump(2));
    }

    // ---- ingest the bundle through the real loaders --------------------------------
    RunConfig cfg = load_config(paths.config);
    const TemplateConfig tpl = cfg.templates;
    ConversationCost cost = [&tpl](const Conversation& c) {
        return estimate_tokens(render_suggestion(c, tpl).completion_text);
    };
    Corpus corpus = build_corpus(load_dialogs(cfg.dialogs_path), load_scrapes(cfg.scrapes_path),
                                 cfg.focus_power, cfg.token_budget, cost);
    if (corpus.conversations.size() != 102 || corpus.total_messages != 915) {
        throw Error("fixture drift: corpus came out as " +
                    std::to_string(corpus.conversations.size()) + " conversations / " +
                    std::to_string(corpus.total_messages) + " messages");
    }

    // Flatten the plan in generation order and replay it over the corpus.
    std::vector<const MessagePlan*> flat;
    for (const auto& plan : plans)
        for (const auto& m : plan.messages) flat.push_back(&m);
    if (flat.size() != corpus.total_messages) throw Error("fixture drift: message count");

    struct ConversationSets {
        std::set<int> suggest, modify, permuted;
        std::string id;
    };
    std::vector<ConversationSets> sets(corpus.conversations.size());
    {
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
            const Conversation& convo = corpus.conversations[i];
            sets[i].id = convo.id;
            for (const auto& m : convo.messages) {
                const MessagePlan* plan = flat[cursor++];
                if (plan->text != m.text) throw Error("fixture drift: replay misaligned");
                if (plan->in_suggest) sets[i].suggest.insert(m.index);
                if (plan->in_modify) sets[i].modify.insert(m.index);
                if (plan->in_permuted) sets[i].permuted.insert(m.index);
            }
        }
    }

    auto script = [&](const PromptBundle& bundle, const std::string& text) {
        util::write_file(paths.mock_dir / MockBackend::script_name(bundle), text);
    };

    // ---- per-conversation mock scripts and feedback texts --------------------------
    std::vector<std::string> suggestion_outputs(corpus.conversations.size());
    std::vector<std::string> model_feedback(corpus.conversations.size());
    std::vector<std::string> modify_outputs(corpus.conversations.size());

    for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
        const Conversation& convo = corpus.conversations[i];

        suggestion_outputs[i] = prediction_text(sets[i].suggest, builder);
        script(render_suggestion(convo, tpl), suggestion_outputs[i]);

        // Model feedback names the lies the suggestion missed.
        std::set<int> missed;
        for (int idx : ground_truth(convo)) {
            if (!sets[i].suggest.count(idx)) missed.insert(idx);
        }
        std::string feedback = sentences(kModelFeedbackFiller, 7, builder);
        if (!missed.empty()) {
            feedback += " Beyond the reasoning itself, the prediction overlooked";
            for (int idx : missed) feedback += " message " + std::to_string(idx) + ",";
            feedback.back() = '.';
            feedback += " Those messages promise positions that the submitted orders abandon, "
                        "so they should be treated as likely lies.";
        } else {
            feedback += " The selected message numbers look complete; the main improvement "
                        "would be grounding each reason in a specific order line.";
        }
        model_feedback[i] = feedback;
        script(render_feedback_request(convo, suggestion_outputs[i], tpl), feedback);

        modify_outputs[i] = prediction_text(sets[i].modify, builder);
        script(render_modification(convo, suggestion_outputs[i], feedback, tpl),
               modify_outputs[i]);

        // Ablation: the literal "No feedback." text, output echoes the suggestion.
        script(render_modification(convo, suggestion_outputs[i], "No feedback.", tpl),
               suggestion_outputs[i]);
    }

    // Permuted-feedback ablation: replicate the pipeline's seeded bijection.
    // A fixed point reproduces the unpermuted request byte for byte, so it
    // must keep the modification script's output (one script per prompt hash).
    {
        auto perm = permutation_for(corpus.conversations.size(), seed);
        for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
            const Conversation& convo = corpus.conversations[i];
            const std::string& donor_feedback = model_feedback[perm[i]];
            std::string output = perm[i] == i ? modify_outputs[i]
                                              : prediction_text(sets[i].permuted, builder);
            script(render_modification(convo, suggestion_outputs[i], donor_feedback, tpl),
                   std::move(output));
        }
    }

    // Round 2: feedback on the revision, then a second revision that keeps it.
    for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
        const Conversation& convo = corpus.conversations[i];
        Round1Transcript round1{suggestion_outputs[i], model_feedback[i], modify_outputs[i]};
        std::string feedback2 =
            "The revised prediction is consistent with the board information and the submitted "
            "orders. " +
            sentences(kModelFeedbackFiller, 2, builder) +
            " No further changes to the selected message numbers are suggested.";
        script(render_feedback2(convo, round1, tpl), feedback2);
        script(render_modification2(convo, round1, feedback2, tpl), modify_outputs[i]);
    }

    // ---- human feedback and judge scripts -------------------------------------------
    {
        std::vector<util::CsvRow> rows;
        rows.push_back({"conversation_id", "annotator", "feedback_text"});
        std::map<std::string, std::map<std::string, std::string>> human_texts;
        for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
            const std::string& id = corpus.conversations[i].id;
            std::string h1 = sentences(kHuman1Pool, 5, builder);
            std::string h2 = sentences(kHuman2Pool, 2, builder);
            std::string h3 = (i == 50) ? sentences(kHuman3Pool, 26, builder)
                                       : sentences(kHuman3Pool, 3, builder);
            human_texts["Human1"][id] = h1;
            human_texts["Human2"][id] = h2;
            human_texts["Human3"][id] = h3;
            rows.push_back({id, "Human1", h1});
            rows.push_back({id, "Human2", h2});
            rows.push_back({id, "Human3", h3});
        }
        util::write_file(paths.human_feedback, util::csv_encode(rows));

        // Target configurations in corpus order: 2 / 36 / 16 / 48 conversations
        // with 0 / 1 / 2 / 3 consistent human pairs.
        auto config_of = [](std::size_t i) {
            if (i < 2) return 0;
            if (i < 38) return 1;
            if (i < 54) return 2;
            return 3;
        };
        std::vector<std::string> sources = {"Human1", "Human2", "Human3", "mock-feedback"};
        for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
            const std::string& id = corpus.conversations[i].id;
            int config = config_of(i);
            auto text_of = [&](const std::string& source) -> const std::string& {
                if (source == "mock-feedback") return model_feedback[i];
                return human_texts[source][id];
            };
            for (std::size_t x = 0; x < sources.size(); ++x) {
                for (std::size_t y = x + 1; y < sources.size(); ++y) {
                    bool human_pair = sources[y] != "mock-feedback";
                    bool consistent;
                    if (human_pair) {
                        // pair order: (H1,H2), (H1,H3), (H2,H3)
                        int pair_idx = (x == 0) ? (y == 1 ? 0 : 1) : 2;
                        consistent = pair_idx < config;
                    } else {
                        consistent = (i + x) % 3 != 0;
                    }
                    PromptBundle bundle =
                        render_judge(text_of(sources[x]), text_of(sources[y]), tpl);
                    script(bundle, consistent
                                       ? "No. Both messages reach the same overall assessment."
                                       : "Yes. The two messages contradict each other about "
                                         "which statements are deceptive.");
                }
            }
        }
    }

    return paths;
}

}  // namespace presscheck::fixture
