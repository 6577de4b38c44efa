#include "presscheck/diplomacy.hpp"

#include <cctype>
#include <sstream>

#include "presscheck/errors.hpp"
#include "presscheck/util.hpp"

namespace presscheck {

namespace {

constexpr std::array<std::string_view, 7> kPowerNames = {
    "France", "Turkey", "Germany", "Russia", "Italy", "Austria", "England",
};

constexpr std::array<std::string_view, 3> kSeasonNames = {"Spring", "Fall", "Winter"};

std::string_view coast_suffix(Coast c) {
    switch (c) {
        case Coast::South: return "/Sc";
        case Coast::North: return "/Nc";
        case Coast::East:  return "/Ec";
        case Coast::None:  break;
    }
    return "";
}

std::string_view outcome_word(Outcome o) {
    return o == Outcome::Succeeds ? "succeeds" : "fails";
}

std::string_view outcome_adverb(Outcome o) {
    return o == Outcome::Succeeds ? "successfully" : "unsuccessfully";
}

}  // namespace

std::string_view power_name(Power p) { return kPowerNames[static_cast<std::size_t>(p)]; }

Power parse_power(std::string_view name) {
    std::string lowered = util::to_lower(util::trim(name));
    for (std::size_t i = 0; i < kPowerNames.size(); ++i) {
        if (lowered == util::to_lower(kPowerNames[i])) return static_cast<Power>(i);
    }
    throw UnknownPower(std::string(name));
}

std::string_view season_name(Season s) { return kSeasonNames[static_cast<std::size_t>(s)]; }

Season parse_season(std::string_view name) {
    std::string lowered = util::to_lower(util::trim(name));
    for (std::size_t i = 0; i < kSeasonNames.size(); ++i) {
        if (lowered == util::to_lower(kSeasonNames[i])) return static_cast<Season>(i);
    }
    throw SchemaError("unknown season '" + std::string(name) + "'");
}

std::string Phase::label() const {
    return std::string(season_name(season)) + " " + std::to_string(year);
}

std::string Territory::render() const { return code + std::string(coast_suffix(coast)); }

Territory parse_territory(std::string_view token) {
    std::string_view code = token;
    Coast coast = Coast::None;
    if (auto slash = token.find('/'); slash != std::string_view::npos) {
        code = token.substr(0, slash);
        std::string_view suffix = token.substr(slash);
        if (suffix == "/Sc") coast = Coast::South;
        else if (suffix == "/Nc") coast = Coast::North;
        else if (suffix == "/Ec") coast = Coast::East;
        else throw MalformedTerritory(std::string(token));
    }
    if (code.size() != 3 ||
        !std::isupper(static_cast<unsigned char>(code[0])) ||
        !std::islower(static_cast<unsigned char>(code[1])) ||
        !std::islower(static_cast<unsigned char>(code[2]))) {
        throw MalformedTerritory(std::string(token));
    }
    return Territory{std::string(code), coast};
}

std::string render_order(const Order& order, Season season) {
    if (order.kind == OrderKind::Build) {
        if (season != Season::Winter)
            throw IllegalOrder("build outside Winter (" + order.actor.render() + ")");
    } else if (season == Season::Winter) {
        throw IllegalOrder("non-build order in Winter (" + order.actor.render() + ")");
    }

    auto require = [&](const std::optional<Territory>& t, const char* field) -> const Territory& {
        if (!t) throw IllegalOrder(std::string("missing ") + field);
        return *t;
    };

    switch (order.kind) {
        case OrderKind::Move:
            return "move from " + order.actor.render() + " to " +
                   require(order.target, "target").render() + " " +
                   std::string(outcome_word(order.outcome));
        case OrderKind::Hold:
            return "hold at " + order.actor.render() + " " +
                   std::string(outcome_word(order.outcome));
        case OrderKind::SupportMove:
            return order.actor.render() + " supports " +
                   require(order.beneficiary, "beneficiary").render() + " moving into " +
                   require(order.target, "target").render() + " " +
                   std::string(outcome_adverb(order.outcome));
        case OrderKind::SupportHold:
            return order.actor.render() + " supports " +
                   require(order.beneficiary, "beneficiary").render() + " " +
                   std::string(outcome_adverb(order.outcome));
        case OrderKind::Convoy:
            return "The unit in " + order.actor.render() + " convoys the unit in " +
                   require(order.beneficiary, "beneficiary").render() + " to " +
                   require(order.target, "target").render() + " " +
                   std::string(outcome_adverb(order.outcome));
        case OrderKind::Build:
            return "build at " + order.actor.render() + " " +
                   std::string(outcome_word(order.outcome));
    }
    throw IllegalOrder("unknown order kind");
}

namespace {

std::vector<std::string> words_of(std::string_view sentence) {
    std::vector<std::string> words;
    std::istringstream in{std::string(sentence)};
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

Outcome parse_outcome_word(const std::string& word) {
    if (word == "succeeds" || word == "successfully") return Outcome::Succeeds;
    if (word == "fails" || word == "unsuccessfully") return Outcome::Fails;
    throw IllegalOrder("unknown outcome word '" + word + "'");
}

}  // namespace

Order parse_order(std::string_view sentence) {
    auto w = words_of(util::trim(sentence));
    if (w.empty()) throw IllegalOrder("empty order sentence");
    // Strip a terminal period off the last word.
    if (!w.back().empty() && w.back().back() == '.') w.back().pop_back();

    Order o;
    if (w.size() == 6 && w[0] == "move" && w[1] == "from" && w[3] == "to") {
        o.kind = OrderKind::Move;
        o.actor = parse_territory(w[2]);
        o.target = parse_territory(w[4]);
        o.outcome = parse_outcome_word(w[5]);
        return o;
    }
    if (w.size() == 4 && w[0] == "hold" && w[1] == "at") {
        o.kind = OrderKind::Hold;
        o.actor = parse_territory(w[2]);
        o.outcome = parse_outcome_word(w[3]);
        return o;
    }
    if (w.size() == 4 && w[0] == "build" && w[1] == "at") {
        o.kind = OrderKind::Build;
        o.actor = parse_territory(w[2]);
        o.outcome = parse_outcome_word(w[3]);
        return o;
    }
    if (w.size() == 7 && w[1] == "supports" && w[3] == "moving" && w[4] == "into") {
        o.kind = OrderKind::SupportMove;
        o.actor = parse_territory(w[0]);
        o.beneficiary = parse_territory(w[2]);
        o.target = parse_territory(w[5]);
        o.outcome = parse_outcome_word(w[6]);
        return o;
    }
    if (w.size() == 4 && w[1] == "supports") {
        o.kind = OrderKind::SupportHold;
        o.actor = parse_territory(w[0]);
        o.beneficiary = parse_territory(w[2]);
        o.outcome = parse_outcome_word(w[3]);
        return o;
    }
    if (w.size() == 12 && w[0] == "The" && w[1] == "unit" && w[2] == "in" && w[4] == "convoys" &&
        w[5] == "the" && w[6] == "unit" && w[7] == "in" && w[9] == "to") {
        o.kind = OrderKind::Convoy;
        o.actor = parse_territory(w[3]);
        o.beneficiary = parse_territory(w[8]);
        o.target = parse_territory(w[10]);
        o.outcome = parse_outcome_word(w[11]);
        return o;
    }
    throw IllegalOrder("unrecognized sentence: '" + std::string(sentence) + "'");
}

std::string render_board(const BoardState& board) {
    std::string out;

    out += "Territories under control of each country:\n";
    for (std::size_t i = 0; i < board.holdings.size(); ++i) {
        const auto& h = board.holdings[i];
        out += std::string(power_name(h.power)) + ": ";
        for (std::size_t t = 0; t < h.territories.size(); ++t) {
            if (t) out += ", ";
            out += h.territories[t].render();
        }
        out += "\n";
    }

    out += "\nOrders submitted by each country in " + board.phase.label() + ":\n";
    for (const auto& po : board.orders) {
        if (po.orders.empty()) continue;  // powers without orders are omitted
        out += std::string(power_name(po.power)) + ": ";
        for (std::size_t i = 0; i < po.orders.size(); ++i) {
            if (i) out += ", ";
            out += render_order(po.orders[i], board.phase.season);
        }
        out += ".\n";
    }

    out += "\nTerritories adjacent to each country:\n";
    for (std::size_t i = 0; i < board.adjacency.size(); ++i) {
        const auto& a = board.adjacency[i];
        out += std::string(power_name(a.power)) + ": ";
        for (std::size_t t = 0; t < a.territories.size(); ++t) {
            if (t) out += ", ";
            out += a.territories[t].render();
        }
        out += (i + 1 < board.adjacency.size()) ? "\n" : "";
    }
    return out;
}

}  // namespace presscheck
