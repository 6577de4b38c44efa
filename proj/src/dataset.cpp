#include "presscheck/dataset.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "presscheck/errors.hpp"
#include "presscheck/util.hpp"

namespace presscheck {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string field_context(std::size_t line_no, const std::string& field) {
    return "line " + std::to_string(line_no) + ", field '" + field + "'";
}

const ordered_json& require_field(const ordered_json& record, const std::string& field,
                                  std::size_t line_no) {
    auto it = record.find(field);
    if (it == record.end()) throw SchemaError("missing " + field_context(line_no, field));
    return *it;
}

SenderLabel parse_sender_label(const ordered_json& value, std::size_t line_no,
                               const std::string& field) {
    // The release encodes labels as booleans where the false-like value is a lie.
    if (value.is_boolean()) return value.get<bool>() ? SenderLabel::Truthful : SenderLabel::Lie;
    if (value.is_string()) {
        std::string s = util::to_lower(value.get<std::string>());
        if (s == "true" || s == "truthful") return SenderLabel::Truthful;
        if (s == "false" || s == "lie") return SenderLabel::Lie;
    }
    throw SchemaError("unreadable sender label at " + field_context(line_no, field));
}

ReceiverLabel parse_receiver_label(const ordered_json& value, std::size_t line_no,
                                   const std::string& field) {
    if (value.is_boolean())
        return value.get<bool>() ? ReceiverLabel::Truthful : ReceiverLabel::Lie;
    if (value.is_string()) {
        std::string s = util::to_lower(value.get<std::string>());
        if (s == "true" || s == "truthful") return ReceiverLabel::Truthful;
        if (s == "false" || s == "lie") return ReceiverLabel::Lie;
        return ReceiverLabel::Unannotated;  // "NOANNOTATION" and friends
    }
    throw SchemaError("unreadable receiver label at " + field_context(line_no, field));
}

int parse_year(const ordered_json& value, std::size_t line_no, const std::string& field) {
    if (value.is_number_integer()) return value.get<int>();
    if (value.is_string()) {
        try {
            return std::stoi(value.get<std::string>());
        } catch (const std::exception&) {
        }
    }
    throw SchemaError("unreadable year at " + field_context(line_no, field));
}

std::string id_string(const ordered_json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    return value.dump();
}

Territory territory_from_json(const ordered_json& value) {
    return parse_territory(value.get<std::string>());
}

OrderKind order_kind_from_string(const std::string& s) {
    if (s == "move") return OrderKind::Move;
    if (s == "hold") return OrderKind::Hold;
    if (s == "support_move") return OrderKind::SupportMove;
    if (s == "support_hold") return OrderKind::SupportHold;
    if (s == "convoy") return OrderKind::Convoy;
    if (s == "build") return OrderKind::Build;
    throw SchemaError("unknown order kind '" + s + "'");
}

Order order_from_json(const ordered_json& o) {
    Order order;
    order.kind = order_kind_from_string(o.at("kind").get<std::string>());
    order.actor = territory_from_json(o.at("actor"));
    if (o.contains("target")) order.target = territory_from_json(o.at("target"));
    if (o.contains("beneficiary")) order.beneficiary = territory_from_json(o.at("beneficiary"));
    std::string outcome = o.at("outcome").get<std::string>();
    if (outcome == "succeeds") order.outcome = Outcome::Succeeds;
    else if (outcome == "fails") order.outcome = Outcome::Fails;
    else throw SchemaError("unknown outcome '" + outcome + "'");
    return order;
}

std::string strip_part_suffix(const std::string& id) {
    auto pos = id.rfind("-p");
    return pos == std::string::npos ? id : id.substr(0, pos);
}

}  // namespace

const Conversation* Corpus::find(const std::string& id) const {
    for (const auto& c : conversations) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

std::vector<DialogRecord> load_dialogs(const std::filesystem::path& path,
                                       const SchemaMap& schema) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open dialog file " + path.string());

    std::vector<DialogRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw SchemaError("line " + std::to_string(line_no) + ": " + ex.what());
        }

        const auto& messages = require_field(j, schema.messages, line_no);
        std::size_t n = messages.size();
        auto check_len = [&](const ordered_json& arr, const std::string& field) {
            if (arr.size() != n) {
                throw SchemaError(field_context(line_no, field) + " has length " +
                                  std::to_string(arr.size()) + ", expected " +
                                  std::to_string(n));
            }
        };

        const auto& speakers = require_field(j, schema.speakers, line_no);
        const auto& senders = require_field(j, schema.sender_labels, line_no);
        const auto& receivers = require_field(j, schema.receiver_labels, line_no);
        const auto& seasons = require_field(j, schema.seasons, line_no);
        const auto& years = require_field(j, schema.years, line_no);
        check_len(speakers, schema.speakers);
        check_len(senders, schema.sender_labels);
        check_len(receivers, schema.receiver_labels);
        check_len(seasons, schema.seasons);
        check_len(years, schema.years);

        DialogRecord record;
        record.game_id = id_string(require_field(j, schema.game_id, line_no));
        const auto& players = require_field(j, schema.players, line_no);
        if (players.size() != 2)
            throw SchemaError(field_context(line_no, schema.players) + " must list 2 powers");
        record.players = {parse_power(players[0].get<std::string>()),
                          parse_power(players[1].get<std::string>())};

        for (std::size_t i = 0; i < n; ++i) {
            record.texts.push_back(messages[i].get<std::string>());
            record.speakers.push_back(parse_power(speakers[i].get<std::string>()));
            record.sender_labels.push_back(
                parse_sender_label(senders[i], line_no, schema.sender_labels));
            record.receiver_labels.push_back(
                parse_receiver_label(receivers[i], line_no, schema.receiver_labels));
            Phase phase;
            phase.season = parse_season(seasons[i].get<std::string>());
            phase.year = parse_year(years[i], line_no, schema.years);
            record.phases.push_back(phase);
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::map<Phase, BoardState> load_scrapes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scrape file " + path.string());

    std::map<Phase, BoardState> scrapes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw SchemaError("scrape line " + std::to_string(line_no) + ": " + ex.what());
        }

        BoardState board;
        board.phase.season = parse_season(j.at("season").get<std::string>());
        board.phase.year = parse_year(j.at("year"), line_no, "year");

        auto read_territory_lists = [](const ordered_json& obj) {
            std::vector<PowerTerritories> out;
            for (const auto& [power, list] : obj.items()) {
                PowerTerritories entry;
                entry.power = parse_power(power);
                for (const auto& t : list) entry.territories.push_back(territory_from_json(t));
                out.push_back(std::move(entry));
            }
            return out;
        };

        board.holdings = read_territory_lists(j.at("holdings"));
        board.adjacency = read_territory_lists(j.at("adjacency"));
        for (const auto& [power, list] : j.at("orders").items()) {
            PowerOrders entry;
            entry.power = parse_power(power);
            for (const auto& o : list) entry.orders.push_back(order_from_json(o));
            board.orders.push_back(std::move(entry));
        }
        scrapes[board.phase] = std::move(board);
    }
    return scrapes;
}

std::vector<Conversation> build_conversations(const std::vector<DialogRecord>& records,
                                              const std::map<Phase, BoardState>& scrapes,
                                              Power focus_power) {
    std::vector<Conversation> out;
    for (const auto& record : records) {
        if (record.players.first != focus_power && record.players.second != focus_power)
            continue;
        Power counterpart = record.players.first == focus_power ? record.players.second
                                                                : record.players.first;

        // Bucket messages per turn, keeping first-appearance order of turns.
        std::vector<Phase> turn_order;
        std::map<Phase, std::vector<std::size_t>> by_phase;
        for (std::size_t i = 0; i < record.texts.size(); ++i) {
            const Phase& phase = record.phases[i];
            auto [it, inserted] = by_phase.try_emplace(phase);
            if (inserted) turn_order.push_back(phase);
            it->second.push_back(i);
        }

        for (const Phase& phase : turn_order) {
            auto scrape = scrapes.find(phase);
            if (scrape == scrapes.end()) throw MissingBoardState(phase.label());

            Conversation convo;
            convo.pair = {focus_power, counterpart};
            convo.phase = phase;
            convo.board = scrape->second;
            convo.part = 1;
            convo.id = record.game_id + "-" + std::to_string(phase.year) +
                       std::string(season_name(phase.season)) + "-" +
                       std::string(power_name(convo.pair.first)) + "-" +
                       std::string(power_name(convo.pair.second)) + "-p1";
            for (std::size_t i : by_phase[phase]) {
                Message m;
                m.index = static_cast<int>(convo.messages.size());
                m.speaker = record.speakers[i];
                m.text = record.texts[i];
                m.sender_label = record.sender_labels[i];
                m.receiver_label = record.receiver_labels[i];
                convo.messages.push_back(std::move(m));
            }
            out.push_back(std::move(convo));
        }
    }
    return out;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::vector<Conversation> split_by_budget(const Conversation& convo, std::size_t budget,
                                          const ConversationCost& cost) {
    auto make_part = [&](int part_no) {
        Conversation part = convo;
        part.messages.clear();
        part.part = part_no;
        part.id = strip_part_suffix(convo.id) + "-p" + std::to_string(part_no);
        return part;
    };

    std::vector<Conversation> parts;
    Conversation current = make_part(1);
    for (const auto& message : convo.messages) {
        Conversation candidate = current;
        Message next = message;
        next.index = static_cast<int>(candidate.messages.size());
        candidate.messages.push_back(next);
        if (cost(candidate) <= budget) {
            current = std::move(candidate);
            continue;
        }
        if (current.messages.empty())
            throw UnsplittableMessage(convo.id + " message " + std::to_string(message.index));

        parts.push_back(std::move(current));
        current = make_part(static_cast<int>(parts.size()) + 1);
        next.index = 0;
        current.messages.push_back(next);
        if (cost(current) > budget)
            throw UnsplittableMessage(convo.id + " message " + std::to_string(message.index));
    }
    if (!current.messages.empty()) parts.push_back(std::move(current));
    return parts;
}

Corpus build_corpus(const std::vector<DialogRecord>& records,
                    const std::map<Phase, BoardState>& scrapes, Power focus_power,
                    std::size_t budget, const ConversationCost& cost) {
    Corpus corpus;
    for (const auto& convo : build_conversations(records, scrapes, focus_power)) {
        for (auto& part : split_by_budget(convo, budget, cost)) {
            corpus.total_messages += part.messages.size();
            corpus.conversations.push_back(std::move(part));
        }
    }
    return corpus;
}

std::set<int> ground_truth(const Conversation& convo) {
    std::set<int> lies;
    for (const auto& m : convo.messages) {
        if (m.sender_label == SenderLabel::Lie) lies.insert(m.index);
    }
    return lies;
}

std::set<int> receiver_baseline(const Conversation& convo) {
    std::set<int> lies;
    for (const auto& m : convo.messages) {
        if (m.receiver_label == ReceiverLabel::Lie) lies.insert(m.index);
    }
    return lies;
}

}  // namespace presscheck
