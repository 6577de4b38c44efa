#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "presscheck/dataset.hpp"
#include "presscheck/util.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() {
    return std::filesystem::path(PRESSCHECK_TEST_DIR);
}

inline std::filesystem::path golden_path(const std::string& name) {
    return source_dir() / "golden" / name;
}

/// Golden files end with a single newline added by the editor; the rendered
/// strings do not. Strip exactly one trailing '\n' before comparing.
inline std::string read_golden(const std::string& name) {
    std::string text = presscheck::util::read_file(golden_path(name));
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

/// Unique scratch directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() /
                ("presscheck-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Minimal single-power-pair board for synthetic conversations.
inline presscheck::BoardState tiny_board(presscheck::Phase phase) {
    using namespace presscheck;
    BoardState board;
    board.phase = phase;
    board.holdings = {{Power::France, {Territory{"Par"}, Territory{"Bre"}}},
                      {Power::Germany, {Territory{"Ber"}, Territory{"Kie"}}}};
    if (phase.season == Season::Winter) {
        board.orders = {{Power::France,
                         {Order{OrderKind::Build, Territory{"Par"}, {}, {}, Outcome::Succeeds}}}};
    } else {
        board.orders = {{Power::France,
                         {Order{OrderKind::Move, Territory{"Par"}, Territory{"Bur"}, {},
                                Outcome::Succeeds}}},
                        {Power::Germany,
                         {Order{OrderKind::Hold, Territory{"Ber"}, {}, {}, Outcome::Succeeds}}}};
    }
    board.adjacency = {{Power::France, {Territory{"Bur"}, Territory{"Pic"}}},
                       {Power::Germany, {Territory{"Sil"}, Territory{"Ruh"}}}};
    return board;
}

/// Conversation with the given sender labels; texts are generated.
inline presscheck::Conversation tiny_conversation(const std::string& id, int n_messages,
                                                  const std::set<int>& lies = {}) {
    using namespace presscheck;
    Conversation convo;
    convo.id = id;
    convo.pair = {Power::France, Power::Germany};
    convo.phase = {Season::Spring, 1902};
    convo.board = tiny_board(convo.phase);
    for (int i = 0; i < n_messages; ++i) {
        Message m;
        m.index = i;
        m.speaker = i % 2 == 0 ? Power::France : Power::Germany;
        m.text = "synthetic message " + std::to_string(i);
        m.sender_label = lies.count(i) ? SenderLabel::Lie : SenderLabel::Truthful;
        convo.messages.push_back(std::move(m));
    }
    return convo;
}

}  // namespace testsupport
