#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "presscheck/diplomacy.hpp"
#include "presscheck/errors.hpp"
#include "support/helpers.hpp"

using namespace presscheck;

TEST_CASE("parse_territory accepts plain codes") {
    Territory t = parse_territory("Par");
    CHECK(t.code == "Par");
    CHECK(t.coast == Coast::None);
    CHECK(t.render() == "Par");
}

TEST_CASE("parse_territory accepts coast suffixes") {
    Territory t = parse_territory("Bul/Sc");
    CHECK(t.code == "Bul");
    CHECK(t.coast == Coast::South);
    CHECK(t.render() == "Bul/Sc");
    CHECK(parse_territory("Stp/Nc").coast == Coast::North);
    CHECK(parse_territory("Bul/Ec").coast == Coast::East);
}

TEST_CASE("parse_territory rejects malformed tokens") {
    CHECK_THROWS_AS(parse_territory("PARIS"), MalformedTerritory);
    CHECK_THROWS_AS(parse_territory("pa"), MalformedTerritory);
    CHECK_THROWS_AS(parse_territory("Bul/Xx"), MalformedTerritory);
    CHECK_THROWS_AS(parse_territory(""), MalformedTerritory);
    CHECK_THROWS_AS(parse_territory("PaR"), MalformedTerritory);
}

TEST_CASE("every territory token in the board fixture parses") {
    std::string board = testsupport::read_golden("board_winter1902.txt");
    for (const auto& line : presscheck::util::split_lines(board)) {
        auto colon = line.find(": ");
        if (colon == std::string::npos || line.find("Orders") == 0) continue;
        if (line.find("Territories") == 0) continue;
        std::string rest = line.substr(colon + 2);
        if (rest.find("build") != std::string::npos) continue;  // orders line
        std::size_t start = 0;
        while (start < rest.size()) {
            auto comma = rest.find(", ", start);
            std::string token =
                comma == std::string::npos ? rest.substr(start) : rest.substr(start, comma - start);
            CHECK_NOTHROW(parse_territory(token));
            if (comma == std::string::npos) break;
            start = comma + 2;
        }
    }
}

TEST_CASE("render_order covers the six sentence forms") {
    Territory ank{"Ank"}, bla{"Bla"}, gas{"Gas"}, bur{"Bur"}, ion{"Ion"}, apu{"Apu"}, gre{"Gre"},
        smy{"Smy"}, ser{"Ser"}, bul{"Bul"}, rum{"Rum"}, ven{"Ven"};

    CHECK(render_order({OrderKind::Move, ank, bla, {}, Outcome::Succeeds}, Season::Fall) ==
          "move from Ank to Bla succeeds");
    CHECK(render_order({OrderKind::Move, ank, bla, {}, Outcome::Fails}, Season::Spring) ==
          "move from Ank to Bla fails");
    CHECK(render_order({OrderKind::Hold, ven, {}, {}, Outcome::Succeeds}, Season::Fall) ==
          "hold at Ven succeeds");
    CHECK(render_order({OrderKind::SupportHold, gas, {}, bur, Outcome::Succeeds}, Season::Spring) ==
          "Gas supports Bur successfully");
    CHECK(render_order({OrderKind::SupportMove, ser, rum, bul, Outcome::Succeeds}, Season::Fall) ==
          "Ser supports Bul moving into Rum successfully");
    CHECK(render_order({OrderKind::SupportMove, ser, rum, bul, Outcome::Fails}, Season::Fall) ==
          "Ser supports Bul moving into Rum unsuccessfully");
    CHECK(render_order({OrderKind::Convoy, ion, gre, apu, Outcome::Succeeds}, Season::Fall) ==
          "The unit in Ion convoys the unit in Apu to Gre successfully");
    CHECK(render_order({OrderKind::Build, smy, {}, {}, Outcome::Succeeds}, Season::Winter) ==
          "build at Smy succeeds");
}

TEST_CASE("render_order enforces the season rules") {
    Territory smy{"Smy"}, ank{"Ank"}, bla{"Bla"};
    CHECK_THROWS_AS(render_order({OrderKind::Build, smy, {}, {}, Outcome::Succeeds}, Season::Fall),
                    IllegalOrder);
    CHECK_THROWS_AS(
        render_order({OrderKind::Move, ank, bla, {}, Outcome::Succeeds}, Season::Winter),
        IllegalOrder);
}

TEST_CASE("order render/parse round-trips over generated orders") {
    std::mt19937 rng(20230615);
    const std::vector<std::string> codes = {"Par", "Mar", "Ber", "Kie", "Ank", "Smy",
                                            "Ven", "Rom", "Lon", "Edi", "Mos", "War"};
    const std::vector<Coast> coasts = {Coast::None, Coast::South, Coast::North, Coast::East};

    auto random_territory = [&] {
        Territory t;
        t.code = codes[rng() % codes.size()];
        t.coast = rng() % 5 == 0 ? coasts[rng() % coasts.size()] : Coast::None;
        return t;
    };

    for (int i = 0; i < 500; ++i) {
        Order order;
        order.kind = static_cast<OrderKind>(rng() % 6);
        order.actor = random_territory();
        order.outcome = rng() % 2 == 0 ? Outcome::Succeeds : Outcome::Fails;
        switch (order.kind) {
            case OrderKind::Move:
                order.target = random_territory();
                break;
            case OrderKind::SupportMove:
                order.target = random_territory();
                order.beneficiary = random_territory();
                break;
            case OrderKind::SupportHold:
                order.beneficiary = random_territory();
                break;
            case OrderKind::Convoy:
                order.target = random_territory();
                order.beneficiary = random_territory();
                break;
            case OrderKind::Hold:
            case OrderKind::Build:
                break;
        }
        Season season = order.kind == OrderKind::Build ? Season::Winter : Season::Fall;
        std::string sentence = render_order(order, season);
        Order back = parse_order(sentence);
        CHECK(back == order);
    }
}

TEST_CASE("render_board matches the Winter 1902 fixture byte for byte") {
    BoardState board;
    board.phase = {Season::Winter, 1902};

    auto territories = [](std::initializer_list<const char*> tokens) {
        std::vector<Territory> list;
        for (const char* t : tokens) list.push_back(parse_territory(t));
        return list;
    };

    board.holdings = {
        {Power::France, territories({"Par", "Mar", "Por", "Spa", "Bre"})},
        {Power::Turkey, territories({"Smy", "Rum", "Bul", "Con", "Sev", "Ank"})},
        {Power::Germany, territories({"Hol", "Mun", "Bel", "Ber", "Kie"})},
        {Power::Russia, territories({"Swe", "War", "Mos", "Stp", "Nwy"})},
        {Power::Italy, territories({"Nap", "Ven", "Tun", "Rom"})},
        {Power::Austria, territories({"Gre", "Bud", "Tri", "Vie", "Ser"})},
        {Power::England, territories({"Lvp", "Lon", "Den", "Edi"})},
    };
    auto build = [](const char* at) {
        return Order{OrderKind::Build, parse_territory(at), {}, {}, Outcome::Succeeds};
    };
    board.orders = {
        {Power::Turkey, {build("Smy")}},
        {Power::Austria, {build("Bud")}},
        {Power::Russia, {build("Mos")}},
    };
    board.adjacency = {
        {Power::France, territories({"Spa", "Par", "Lyo", "Mar", "Spa/Sc", "Pic", "Gas", "Bur",
                                     "Por", "Mao", "Pie", "Bre", "Spa/Nc", "Eng"})},
        {Power::Turkey, territories({"Bul/Sc", "Bud", "Ukr", "Mos", "Ank", "Rum", "Eas", "Bul/Ec",
                                     "Syr", "Bla", "Arm", "Con", "Ser", "Sev", "Bul", "Smy", "Gre",
                                     "Gal", "Aeg"})},
        {Power::Germany, territories({"Sil", "Pru", "Bal", "Hol", "Mun", "Boh", "Tyr", "Kie",
                                      "Pic", "Den", "Hel", "Bur", "Bel", "Ruh", "Ber", "Nth",
                                      "Eng"})},
        {Power::Russia, territories({"War", "Sil", "Ukr", "Stp/Sc", "Mos", "Bal", "Fin", "Stp/Nc",
                                     "Nwg", "Den", "Bar", "Bot", "Swe", "Pru", "Sev", "Nwy", "Stp",
                                     "Ska", "Lvn", "Gal", "Nth"})},
        {Power::Italy, territories({"Adr", "Tys", "Naf", "Rom", "Tyr", "Ven", "Nap", "Tri", "Ion",
                                    "Apu", "Pie", "Wes", "Tus"})},
        {Power::Austria, territories({"Rum", "Bul/Sc", "Alb", "Vie", "Adr", "Bud", "Boh", "Tyr",
                                      "Bul", "Ven", "Tri", "Ion", "Gre", "Gal", "Ser", "Aeg"})},
        {Power::England, territories({"Nao", "Eng", "Swe", "Cly", "Bal", "Nwg", "Yor", "Kie",
                                      "Hel", "Lvp", "Ska", "Wal", "Edi", "Nth", "Iri"})},
    };

    std::string rendered = render_board(board);
    CHECK(rendered == testsupport::read_golden("board_winter1902.txt"));

    SUBCASE("rendering is pure") { CHECK(render_board(board) == rendered); }
}

TEST_CASE("render_board matches the Fall 1901 orders paragraph") {
    BoardState board = testsupport::tiny_board({Season::Fall, 1901});
    board.orders.clear();

    auto add = [&](Power p, std::initializer_list<const char*> sentences) {
        PowerOrders po;
        po.power = p;
        for (const char* s : sentences) po.orders.push_back(parse_order(s));
        board.orders.push_back(std::move(po));
    };
    add(Power::Turkey, {"move from Ank to Bla succeeds", "move from Bul to Rum succeeds",
                        "move from Con to Bul succeeds"});
    add(Power::England, {"move from Nth to Eng succeeds", "move from Nwg to Nwy succeeds",
                         "move from Lvp to Yor succeeds"});
    add(Power::France, {"move from Bur to Mun succeeds", "move from Mar to Spa succeeds",
                        "move from Mao to Por succeeds"});
    add(Power::Austria, {"move from Tri to Adr succeeds",
                         "Ser supports Bul moving into Rum successfully",
                         "move from Vie to Bud succeeds"});
    add(Power::Germany, {"Hol supports Ruh moving into Bel successfully",
                         "move from Ruh to Bel succeeds", "move from Kie to Den succeeds"});
    add(Power::Italy, {"hold at Ven succeeds",
                       "The unit in Ion convoys the unit in Apu to Gre successfully",
                       "move from Apu to Gre succeeds"});
    add(Power::Russia, {"move from Mos to Ukr succeeds", "move from Sev to Rum fails",
                        "move from Bot to Swe succeeds", "move from Ukr to Gal succeeds"});

    std::string rendered = render_board(board);
    std::string expected = testsupport::read_golden("orders_fall1901.txt");
    CHECK(rendered.find(expected) != std::string::npos);
}

TEST_CASE("degenerate board renders three sections, orderless power omitted") {
    BoardState board;
    board.phase = {Season::Spring, 1901};
    board.holdings = {{Power::Italy, {parse_territory("Rom")}}};
    board.adjacency = {{Power::Italy, {parse_territory("Ven")}}};

    CHECK(render_board(board) ==
          "Territories under control of each country:\n"
          "Italy: Rom\n"
          "\n"
          "Orders submitted by each country in Spring 1901:\n"
          "\n"
          "Territories adjacent to each country:\n"
          "Italy: Ven");
}

TEST_CASE("power names render in full") {
    CHECK(power_name(Power::England) == "England");
    CHECK(parse_power("france") == Power::France);
    CHECK(parse_power("AUSTRIA") == Power::Austria);
    CHECK_THROWS_AS(parse_power("Sparta"), UnknownPower);
}
