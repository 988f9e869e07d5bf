#include <catch_amalgamated.hpp>

#include <sstream>
#include <vector>

#include "projcx/generators.hpp"
#include "projcx/json_io.hpp"
#include "projcx/system.hpp"

using namespace projcx;

namespace {

AbstractDistanceSystem tiny_table() {
    std::vector<std::int64_t> ids{0, 1, 2};
    std::vector<AbstractEntry> entries;
    auto put = [&](std::int64_t at, std::int64_t a, std::int64_t b, ExtDist v) {
        entries.push_back({at, a, b, v});
    };
    put(0, 1, 1, ExtDist(0));
    put(0, 1, 2, ExtDist::infinity());
    put(0, 2, 2, ExtDist(0));
    put(1, 0, 0, ExtDist(0));
    put(1, 0, 2, ExtDist(5));
    put(1, 2, 2, ExtDist(0));
    put(2, 0, 0, ExtDist(0));
    put(2, 0, 1, ExtDist(2));
    put(2, 1, 1, ExtDist(0));
    return AbstractDistanceSystem(std::move(ids), entries, 0);
}

}  // namespace

TEST_CASE("graph systems survive the round trip") {
    ProjectionSystem fence = gen_fence(5, 10);
    nlohmann::json j = system_to_json(fence);
    CHECK(j.at("schema") == "projcx-system-v1");
    ProjectionSystem back = system_from_json(j);
    CHECK(system_to_json(back) == j);
    CHECK(back.theta() == fence.theta());
    CHECK(back.space_ids() == fence.space_ids());
    CHECK(back.proj(2, 0) == fence.proj(2, 0));
    CHECK(back.distances().d(2, 0, 4) == fence.distances().d(2, 0, 4));

    TreeAxes ta = random_tree_axes(11, 6, 18);
    auto [sys, theta] = gen_tree_axes(ta);
    (void)theta;
    nlohmann::json jt = system_to_json(sys);
    CHECK(system_to_json(system_from_json(jt)) == jt);

    SECTION("text round trip") {
        std::string text = j.dump(2);
        nlohmann::json parsed = parse_json_text(text, "buffer");
        CHECK(parsed == j);
        std::istringstream in(text);
        CHECK(parse_json_text(read_all(in), "stream") == j);
        CHECK_THROWS_AS(parse_json_text("{not json", "buffer"), JsonLoadError);
    }
}

TEST_CASE("distance tables survive the round trip, infinities included") {
    AbstractDistanceSystem table = tiny_table();
    nlohmann::json j = abstract_to_json(table);
    CHECK(j.at("schema") == "projcx-abstract-v1");
    AbstractDistanceSystem back = abstract_from_json(j);
    CHECK(abstract_to_json(back) == j);
    CHECK(back.distances().d(0, 1, 2).is_infinite());
    CHECK(back.distances().d(1, 0, 2) == ExtDist(5));
    CHECK(back.distances().d(2, 1, 0) == ExtDist(2));
}

TEST_CASE("either document kind loads through the common entry point") {
    ProjectionSystem fence = gen_fence(4, 6);
    AnySystem a = any_system_from_json(system_to_json(fence));
    CHECK(a.graph_backed());
    CHECK(a.theta() == 0);
    CHECK(a.distances().d(1, 0, 3) == ExtDist(6));

    AnySystem b = any_system_from_json(abstract_to_json(tiny_table()));
    CHECK(!b.graph_backed());
    CHECK(b.distances().d(1, 0, 2) == ExtDist(5));

    nlohmann::json bad;
    bad["schema"] = "projcx-unknown-v1";
    CHECK_THROWS_AS(any_system_from_json(bad), JsonLoadError);
    CHECK_THROWS_AS(any_system_from_json(nlohmann::json::object()), JsonLoadError);
    CHECK_THROWS_AS(any_system_from_json(nlohmann::json::array()), JsonLoadError);
}

TEST_CASE("malformed system documents are rejected with context") {
    ProjectionSystem fence = gen_fence(3, 4);
    nlohmann::json good = system_to_json(fence);

    nlohmann::json j = good;
    j.erase("theta");
    CHECK_THROWS_WITH(system_from_json(j), Catch::Matchers::ContainsSubstring("theta"));

    j = good;
    j["theta"] = "zero";
    CHECK_THROWS_AS(system_from_json(j), JsonLoadError);

    j = good;
    j["spaces"][0]["edges"][0] = {1, 2, 3};
    CHECK_THROWS_AS(system_from_json(j), JsonLoadError);

    j = good;
    j["spaces"][0]["vertices"][0] = "v";
    CHECK_THROWS_AS(system_from_json(j), JsonLoadError);

    j = good;
    j["projections"][0]["target"] = 99;  // builder refuses unknown ids
    CHECK_THROWS_AS(system_from_json(j), JsonLoadError);

    j = good;
    j["schema"] = "projcx-system-v0";
    CHECK_THROWS_AS(system_from_json(j), JsonLoadError);
}

TEST_CASE("malformed distance tables are rejected with context") {
    nlohmann::json good = abstract_to_json(tiny_table());

    nlohmann::json j = good;
    j["distances"][0].erase("value");
    j["distances"][0].erase("inf");
    CHECK_THROWS_AS(abstract_from_json(j), JsonLoadError);

    j = good;
    j["distances"][0]["value"] = 3;
    j["distances"][0]["inf"] = true;
    CHECK_THROWS_AS(abstract_from_json(j), JsonLoadError);

    j = good;
    for (auto& row : j["distances"])
        if (row.contains("value")) {
            row["value"] = -1;
            break;
        }
    CHECK_THROWS_AS(abstract_from_json(j), JsonLoadError);

    j = good;
    j["distances"].erase(0);  // core table must stay complete
    CHECK_THROWS_AS(abstract_from_json(j), JsonLoadError);
}

TEST_CASE("reports serialize with their witnesses") {
    AxiomReport rep;
    rep.check = "demo";
    rep.bump("things_checked", 7);
    rep.note("sampled run");
    rep.add_violation({"SP3", {0, 1, 2}, {ExtDist(4), ExtDist::infinity()}, "example witness"});
    nlohmann::json j = rep.to_json();
    CHECK(j.at("schema") == "projcx-report-v1");
    CHECK(j.at("check") == "demo");
    CHECK(j.at("passed") == false);
    CHECK(j.at("counts").at("things_checked") == 7);
    CHECK(j.at("counts").at("violations") == 1);
    CHECK(j.at("violations")[0].at("axiom") == "SP3");
    CHECK(j.at("violations")[0].at("values")[0] == 4);
    CHECK(j.at("violations")[0].at("values")[1] == "inf");
    CHECK(j.at("notes")[0] == "sampled run");
    CHECK(j.at("mode") == "exhaustive");
    CHECK(rep.summary().find("FAIL") != std::string::npos);
}
