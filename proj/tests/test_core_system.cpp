#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "projcx/axioms.hpp"
#include "projcx/generators.hpp"
#include "projcx/rng.hpp"
#include "projcx/system.hpp"

using namespace projcx;

namespace {

// quadratic reference: Floyd-Warshall over an explicit vertex list, written
// independently of the BFS in MetricSpaceGraph
std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> apsp_reference(
    const std::vector<std::int64_t>& vertices, const std::vector<std::pair<std::int64_t, std::int64_t>>& edges) {
    const std::size_t n = vertices.size();
    std::map<std::int64_t, std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) idx[vertices[i]] = i;
    const std::int64_t inf = 1'000'000'000;
    std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, inf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (auto [a, b] : edges) d[idx.at(a)][idx.at(b)] = d[idx.at(b)][idx.at(a)] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[{vertices[i], vertices[j]}] = d[i][j] >= inf ? -1 : d[i][j];
    return out;
}

// random connected graph on ids 0..n-1: a random spanning tree plus extras
std::pair<std::vector<std::int64_t>, std::vector<std::pair<std::int64_t, std::int64_t>>> random_graph(Rng& rng,
                                                                                                      int n) {
    std::vector<std::int64_t> vertices(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vertices[static_cast<std::size_t>(i)] = i;
    std::set<std::pair<std::int64_t, std::int64_t>> edges;
    for (int i = 1; i < n; ++i) {
        std::int64_t j = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(i)));
        edges.insert({std::min<std::int64_t>(i, j), std::max<std::int64_t>(i, j)});
    }
    std::uint64_t extras = rng.below(static_cast<std::uint64_t>(n));
    for (std::uint64_t e = 0; e < extras; ++e) {
        std::int64_t a = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
        std::int64_t b = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
        if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
    }
    return {vertices, {edges.begin(), edges.end()}};
}

// the SP3 sharpening is the only axiom this table breaks at theta = 1
AbstractDistanceSystem sp3_breaker() {
    std::vector<SpaceId> ids{0, 1, 2};
    std::vector<AbstractEntry> entries;
    for (SpaceId y : ids)
        for (SpaceId x : ids)
            for (SpaceId z : ids) {
                if (x == y || z == y || x > z) continue;
                ExtDist v(0);
                if (y == 0 && x == 1 && z == 2) v = ExtDist(5);
                if (y == 2 && x == 0 && z == 1) v = ExtDist(3);
                if (y == 2 && x == 1 && z == 1) v = ExtDist(1);
                entries.push_back({y, x, z, v});
            }
    return AbstractDistanceSystem(ids, entries, 1);
}

}  // namespace

TEST_CASE("extended distances order and print") {
    ExtDist a(3), b(7), inf = ExtDist::infinity();
    CHECK(a < b);
    CHECK(b < inf);
    CHECK(!(inf < inf));
    CHECK(inf == ExtDist::infinity());
    CHECK(max(a, inf).is_infinite());
    CHECK(min(b, inf) == b);
    CHECK(max(a, b).value() == 7);
    CHECK(a.str() == "3");
    CHECK(inf.str() == "inf");
}

TEST_CASE("rng is deterministic and in range") {
    Rng r1(42), r2(42);
    for (int i = 0; i < 100; ++i) CHECK(r1.next() == r2.next());
    Rng r3(7);
    for (int i = 0; i < 200; ++i) {
        CHECK(r3.below(13) < 13);
        std::int64_t v = r3.range(-5, 5);
        CHECK(v >= -5);
        CHECK(v <= 5);
    }
    std::vector<int> base{1, 2, 3, 4, 5, 6, 7};
    std::vector<int> s1 = base, s2 = base;
    Rng r4(9), r5(9);
    r4.shuffle(s1);
    r5.shuffle(s2);
    CHECK(s1 == s2);
    CHECK(std::is_permutation(s1.begin(), s1.end(), base.begin()));
}

TEST_CASE("graph distances match a reference implementation") {
    Rng rng(2024);
    for (int round = 0; round < 25; ++round) {
        int n = 2 + static_cast<int>(rng.below(12));
        auto [vertices, edges] = random_graph(rng, n);
        MetricSpaceGraph g(vertices, edges);
        auto ref = apsp_reference(vertices, edges);
        for (std::int64_t a : vertices)
            for (std::int64_t b : vertices) CHECK(g.distance(a, b) == ref.at({a, b}));
    }
}

TEST_CASE("graph helpers") {
    MetricSpaceGraph path({0, 1, 2, 3, 4}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    CHECK(path.distance(0, 4) == 4);
    CHECK(path.set_diameter({0, 4}) == 4);
    CHECK(path.set_diameter({2}) == 0);
    CHECK(path.nearest_in(0, {3, 4}) == std::vector<std::int64_t>{3});
    auto sp = path.shortest_path(0, 3);
    CHECK(sp == std::vector<std::int64_t>{0, 1, 2, 3});

    SECTION("deterministic tie-breaking on a cycle") {
        MetricSpaceGraph cyc({0, 1, 2, 3}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
        auto p1 = cyc.shortest_path(0, 2);
        auto p2 = cyc.shortest_path(0, 2);
        CHECK(p1 == p2);
        CHECK(p1.size() == 3);
    }

    SECTION("disconnected input is refused at construction") {
        CHECK_THROWS_AS(MetricSpaceGraph({0, 1, 2, 3}, {{0, 1}, {2, 3}}), std::invalid_argument);
    }
}

TEST_CASE("weighted graph shortest paths against edge relaxation") {
    // Bellman-Ford as an independent reference
    WeightedGraph g(6);
    g.add_edge(0, 1, 3);
    g.add_edge(1, 2, 4);
    g.add_edge(0, 2, 10);
    g.add_edge(2, 3, 1);
    g.add_edge(4, 5, 2);
    std::vector<std::int64_t> ref(6, 1'000'000'000);
    ref[0] = 0;
    for (int pass = 0; pass < 6; ++pass)
        for (auto [a, b, w] : g.edge_list()) {
            ref[b] = std::min(ref[b], ref[a] + w);
            ref[a] = std::min(ref[a], ref[b] + w);
        }
    for (std::size_t t = 0; t < 6; ++t) {
        ExtDist d = g.distance(0, t);
        if (ref[t] >= 1'000'000'000)
            CHECK(d.is_infinite());
        else
            CHECK(d == ExtDist(ref[t]));
    }
}

TEST_CASE("distance view domain rules") {
    DistanceView v({0, 1, 2}, 0);
    v.set_entry(0, 1, 2, ExtDist(5));
    CHECK(v.d(0, 1, 2) == ExtDist(5));
    CHECK(v.d(0, 2, 1) == ExtDist(5));
    CHECK_THROWS_AS(v.d(0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(v.set_entry(0, 0, 0, ExtDist(1)), std::invalid_argument);
    CHECK(!v.core_complete());
    v.set_entry(0, 1, 1, ExtDist(0));
    v.set_entry(0, 2, 2, ExtDist(0));
    v.set_entry(1, 0, 2, ExtDist(1));
    v.set_entry(1, 0, 0, ExtDist(0));
    v.set_entry(1, 2, 2, ExtDist(0));
    v.set_entry(2, 0, 1, ExtDist(2));
    v.set_entry(2, 0, 0, ExtDist(0));
    v.set_entry(2, 1, 1, ExtDist(0));
    CHECK(v.core_complete());
}

TEST_CASE("projection system tabulates the diameter form") {
    // two paths and a 3-cycle with hand-picked projections
    ProjectionSystemBuilder b;
    b.set_theta(2);
    b.add_space(10, {0, 1, 2, 3}, {{0, 1}, {1, 2}, {2, 3}});
    b.add_space(20, {5, 6, 7}, {{5, 6}, {6, 7}});
    b.add_space(30, {8, 9}, {{8, 9}});
    b.set_projection(10, 20, {0, 3});
    b.set_projection(10, 30, {1});
    b.set_projection(20, 10, {5});
    b.set_projection(20, 30, {6, 7});
    b.set_projection(30, 10, {8});
    b.set_projection(30, 20, {8});
    ProjectionSystem sys = b.finalize();

    // d_Y(X, Z) = diameter of the union of the two projection sets
    CHECK(sys.d(10, 20, 30) == ExtDist(3));  // {0,3} u {1} spans 0..3
    CHECK(sys.d(10, 20, 20) == ExtDist(3));  // diameter of {0,3}
    CHECK(sys.d(10, 30, 30) == ExtDist(0));
    CHECK(sys.d(20, 10, 30) == ExtDist(2));  // {5} u {6,7}
    CHECK(sys.d(30, 10, 20) == ExtDist(0));  // same singleton
    CHECK(sys.proj(10, 20) == std::vector<std::int64_t>{0, 3});

    SECTION("missing pieces are rejected") {
        ProjectionSystemBuilder bad;
        bad.add_space(1, {0}, {});
        bad.add_space(2, {0}, {});
        bad.set_projection(1, 2, {0});
        CHECK_THROWS_AS(bad.finalize(), std::invalid_argument);  // no projection 2 <- 1

        ProjectionSystemBuilder bad2;
        bad2.add_space(1, {0}, {});
        bad2.add_space(2, {0}, {});
        bad2.set_projection(1, 2, {7});  // not a vertex of space 1
        bad2.set_projection(2, 1, {0});
        CHECK_THROWS_AS(bad2.finalize(), std::invalid_argument);

        ProjectionSystemBuilder bad3;
        bad3.add_space(1, {0}, {});
        CHECK_THROWS_AS(bad3.add_space(1, {0}, {}), std::invalid_argument);
    }
}

TEST_CASE("abstract systems enforce a complete core") {
    std::vector<SpaceId> ids{0, 1};
    CHECK_THROWS_AS(AbstractDistanceSystem(ids, {}, 0), std::invalid_argument);

    std::vector<AbstractEntry> entries{{0, 1, 1, ExtDist(2)}, {1, 0, 0, ExtDist::infinity()}};
    AbstractDistanceSystem sys(ids, entries, 3);
    CHECK(sys.d(0, 1, 1) == ExtDist(2));
    CHECK(sys.d(1, 0, 0).is_infinite());

    std::vector<AbstractEntry> clash{{0, 1, 1, ExtDist(2)}, {0, 1, 1, ExtDist(3)}, {1, 0, 0, ExtDist(0)}};
    CHECK_THROWS_AS(AbstractDistanceSystem(ids, clash, 3), std::invalid_argument);
}

TEST_CASE("strong axioms hold on fences at theta zero") {
    ProjectionSystem sys = gen_fence(6, 12);
    AxiomReport strong = verify_strong_axioms(sys.distances(), 0);
    CHECK(strong.passed);
    CHECK(strong.violations.empty());
    CHECK(strong.counts.at("sp3_hypotheses") > 0);
    AxiomReport weak = verify_weak_axioms(sys.distances(), 0);
    CHECK(weak.passed);
}

TEST_CASE("a planted asymmetry trips only the equality axiom") {
    AbstractDistanceSystem sys = sp3_breaker();
    AxiomReport strong = verify_strong_axioms(sys.distances(), 1);
    CHECK(!strong.passed);
    REQUIRE(!strong.violations.empty());
    bool from_zero = false;
    for (const auto& viol : strong.violations) {
        CHECK(viol.axiom == "SP3");
        REQUIRE(viol.spaces.size() == 4);
        // the hypothesis witness is one of the two planted wide entries
        CHECK((viol.spaces[0] == 0 || viol.spaces[0] == 2));
        if (viol.spaces[0] == 0) from_zero = true;
    }
    CHECK(from_zero);
}

TEST_CASE("inferred theta matches a direct scan") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        TreeAxes ta = random_tree_axes(seed, 4, 12);
        auto [sys, theta] = gen_tree_axes(ta);
        const DistanceView& v = sys.distances();

        // reference: smallest t at which the weak verifier passes, found by
        // testing every candidate from zero upward
        std::optional<std::int64_t> scan;
        for (std::int64_t t = 0; t <= 4 * theta + 4; ++t)
            if (verify_weak_axioms(v, t).passed) {
                scan = t;
                break;
            }
        CHECK(infer_theta(v) == scan);
        REQUIRE(scan.has_value());
        CHECK(*scan <= theta);

        std::optional<std::int64_t> scan_strong;
        for (std::int64_t t = 0; t <= 4 * theta + 4; ++t)
            if (verify_strong_axioms(v, t).passed) {
                scan_strong = t;
                break;
            }
        CHECK(infer_theta_strong(v) == scan_strong);
    }
}

TEST_CASE("worker count does not change reports") {
    ProjectionSystem sys = gen_fence(8, 10);
    for (int workers : {1, 4, 8}) {
        VerifyOptions opts;
        opts.workers = workers;
        AxiomReport strong = verify_strong_axioms(sys.distances(), 0, opts);
        AxiomReport one = verify_strong_axioms(sys.distances(), 0);
        CHECK(strong.to_json() == one.to_json());
    }
}

TEST_CASE("triples check sees order violations") {
    ProjectionSystem sys = gen_fence(5, 10);
    AxiomReport r = triples_check(sys.distances(), 0);
    CHECK(r.passed);
    CHECK(r.counts.at("triples_checked") > 0);
}
