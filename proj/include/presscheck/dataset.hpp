#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "presscheck/diplomacy.hpp"

namespace presscheck {

enum class SenderLabel { Truthful, Lie };
enum class ReceiverLabel { Truthful, Lie, Unannotated };

struct Message {
    int index = 0;  // 0-based within its conversation
    Power speaker = Power::France;
    std::string text;
    SenderLabel sender_label = SenderLabel::Truthful;
    ReceiverLabel receiver_label = ReceiverLabel::Unannotated;
};

/// Messages exchanged between one pair of powers in one game turn
/// (possibly one part of a budget-split exchange).
struct Conversation {
    std::string id;  // "{game}-{year}{season}-{A}-{B}-p{part}"
    std::pair<Power, Power> pair{Power::France, Power::Germany};
    Phase phase;
    std::vector<Message> messages;
    BoardState board;
    int part = 1;
};

struct Corpus {
    std::vector<Conversation> conversations;
    std::size_t total_messages = 0;

    const Conversation* find(const std::string& id) const;
};

/// One line of the dialog file, still in parallel-array form.
struct DialogRecord {
    std::string game_id;
    std::pair<Power, Power> players{Power::France, Power::Germany};
    std::vector<std::string> texts;
    std::vector<Power> speakers;
    std::vector<SenderLabel> sender_labels;
    std::vector<ReceiverLabel> receiver_labels;
    std::vector<Phase> phases;  // per message
};

/// Field names in the dialog file; defaults match the public release.
struct SchemaMap {
    std::string messages = "messages";
    std::string speakers = "speakers";
    std::string sender_labels = "sender_labels";
    std::string receiver_labels = "receiver_labels";
    std::string seasons = "seasons";
    std::string years = "years";
    std::string game_id = "game_id";
    std::string players = "players";
};

/// Line-delimited dialog records. Parallel arrays must agree in length;
/// a mismatch raises SchemaError naming the line and field.
std::vector<DialogRecord> load_dialogs(const std::filesystem::path& path,
                                       const SchemaMap& schema = {});

/// Per-turn board snapshots, keyed by phase.
std::map<Phase, BoardState> load_scrapes(const std::filesystem::path& path);

/// Groups each focus-power dialog by turn and binds the turn's board.
/// Conversations keep file order, then phase first-appearance order.
/// Split parts are NOT yet applied; ids carry "-p1".
std::vector<Conversation> build_conversations(const std::vector<DialogRecord>& records,
                                              const std::map<Phase, BoardState>& scrapes,
                                              Power focus_power);

/// ceil(characters / 4) — the default token estimator.
std::size_t estimate_tokens(std::string_view text);

/// Cost of a conversation in estimated tokens; the orchestrator passes the
/// rendered-suggestion length so splitting matches what the model sees.
using ConversationCost = std::function<std::size_t(const Conversation&)>;

/// Splits so every part's cost fits the budget. Part message indices restart
/// at 0; ids get "-p1", "-p2", ... Throws UnsplittableMessage when a single
/// message cannot fit on its own.
std::vector<Conversation> split_by_budget(const Conversation& convo, std::size_t budget,
                                          const ConversationCost& cost);

/// Full ingestion: group, bind boards, split, count.
Corpus build_corpus(const std::vector<DialogRecord>& records,
                    const std::map<Phase, BoardState>& scrapes, Power focus_power,
                    std::size_t budget, const ConversationCost& cost);

/// Indices the sender marked as lies — the ground truth.
std::set<int> ground_truth(const Conversation& convo);

/// Indices the receiver marked as lies; unannotated counts as truthful.
std::set<int> receiver_baseline(const Conversation& convo);

}  // namespace presscheck
