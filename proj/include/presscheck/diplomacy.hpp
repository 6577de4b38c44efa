#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace presscheck {

/// The seven great powers. Values index into power_names().
enum class Power { France, Turkey, Germany, Russia, Italy, Austria, England };

constexpr std::array<Power, 7> all_powers = {
    Power::France, Power::Turkey, Power::Germany, Power::Russia,
    Power::Italy,  Power::Austria, Power::England,
};

std::string_view power_name(Power p);
Power parse_power(std::string_view name);  // case-insensitive; throws UnknownPower

enum class Season { Spring, Fall, Winter };

std::string_view season_name(Season s);
Season parse_season(std::string_view name);  // case-insensitive; throws SchemaError

struct Phase {
    Season season = Season::Spring;
    int year = 1901;

    std::string label() const;  // "Winter 1902"
    auto operator<=>(const Phase&) const = default;
};

enum class Coast { None, South, North, East };

/// A province code like "Par", optionally with a coast suffix ("Bul/Sc").
struct Territory {
    std::string code;           // three letters, capitalized: "Par"
    Coast coast = Coast::None;  // only on split coastal provinces

    std::string render() const;
    auto operator<=>(const Territory&) const = default;
};

/// Parses "Par" or "Bul/Sc"; throws MalformedTerritory otherwise.
Territory parse_territory(std::string_view token);

enum class OrderKind { Move, Hold, SupportMove, SupportHold, Convoy, Build };
enum class Outcome { Succeeds, Fails };

struct Order {
    OrderKind kind = OrderKind::Hold;
    Territory actor;                      // unit placing the order
    std::optional<Territory> target;      // Move/Convoy destination; SupportMove destination
    std::optional<Territory> beneficiary; // supported/convoyed unit's territory
    Outcome outcome = Outcome::Succeeds;

    auto operator<=>(const Order&) const = default;
};

/// One sentence per order, in the dataset's reporting style, e.g.
/// "move from Ank to Bla succeeds" or "Ser supports Bul moving into Rum successfully".
/// Throws IllegalOrder when the kind is not legal in `season`
/// (builds are Winter-only, everything else Spring/Fall-only).
std::string render_order(const Order& order, Season season);

/// Inverse of render_order; throws IllegalOrder on unrecognized sentences.
Order parse_order(std::string_view sentence);

struct PowerTerritories {
    Power power;
    std::vector<Territory> territories;
};

struct PowerOrders {
    Power power;
    std::vector<Order> orders;
};

/// Outcome-annotated snapshot of one game turn. Lists keep ingestion order;
/// rendering never sorts.
struct BoardState {
    Phase phase;
    std::vector<PowerTerritories> holdings;
    std::vector<PowerOrders> orders;
    std::vector<PowerTerritories> adjacency;
};

/// Three sections: holdings, orders submitted this turn, adjacency.
/// Powers with no orders are omitted from the orders section.
std::string render_board(const BoardState& board);

}  // namespace presscheck
