#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "projcx/generators.hpp"
#include "projcx/perturb.hpp"
#include "projcx/quasi_tree.hpp"

using namespace projcx;

TEST_CASE("wide views force equal projections") {
    ProjectionSystem fence = gen_fence(6, 12);
    AxiomReport r = projection_equality_check(fence, 0);
    CHECK(r.passed);
    CHECK(r.counts.at("hypotheses") > 0);

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TreeAxes ta = random_tree_axes(seed, 6, 16);
        auto [sys, theta] = gen_tree_axes(ta);
        PerturbResult pr = perturb_system(sys, theta);
        AxiomReport rr = projection_equality_check(pr.system, pr.new_theta);
        CAPTURE(seed, theta, pr.new_theta);
        CHECK(rr.passed);
    }
}

TEST_CASE("glued complex indexes vertices consistently") {
    ProjectionSystem fence = gen_fence(5, 10);
    CkGraph ck = build_ck(fence, 3);
    REQUIRE(ck.vertex_count() == 55);
    for (std::size_t i = 0; i < ck.vertex_count(); ++i) {
        CkVertex v = ck.vertex_at(i);
        CHECK(ck.index_of(v) == i);
    }
    CHECK_THROWS_AS(ck.index_of(CkVertex{0, 999}), std::invalid_argument);
    CHECK_THROWS_AS(build_ck(fence, -1), std::invalid_argument);

    SECTION("narrow gluing parameters are refused") {
        TreeAxes ta = random_tree_axes(3, 5, 14);
        auto [sys, theta] = gen_tree_axes(ta);
        REQUIRE(theta > 0);
        CHECK_THROWS_AS(build_ck(sys, theta), std::invalid_argument);
    }
}

TEST_CASE("the frozen fence numbers") {
    ProjectionSystem fence = gen_fence(5, 10);
    CkGraph ck = build_ck(fence, 3);

    CkVertex start{0, 0}, end{4, 10};
    std::int64_t sigma = 0;
    for (SpaceId y : fence.space_ids()) {
        ExtDist dy = ck.ext_d(y, start, end);
        if (dy > ExtDist(3)) sigma += dy.value();
    }
    CHECK(sigma == 50);
    ExtDist dc = ck.distance(start, end);
    REQUIRE(!dc.is_infinite());
    CHECK(dc.value() == 62);

    CkPath path = ck_standard_path(ck, start, end);
    CHECK(path.weight == 62);
    CHECK(path.vertices.front() == start);
    CHECK(path.vertices.back() == end);

    AxiomReport formula = distance_formula_check(ck);
    CHECK(formula.passed);
    CHECK(formula.counts.at("pairs_checked") == 55 * 54 / 2 + 55);
}

TEST_CASE("extended projections and distances") {
    ProjectionSystem fence = gen_fence(5, 10);
    CkGraph ck = build_ck(fence, 3);
    CkVertex inside{2, 4}, outside{0, 7};
    CHECK(ck.ext_proj(2, inside) == std::vector<std::int64_t>{4});
    CHECK(ck.ext_proj(2, outside) == fence.proj(2, 0));
    CHECK(ck.ext_d(2, inside, outside) == ExtDist(4));  // vertex 4 to the entry point 0
    CHECK(ck.ext_d(1, CkVertex{0, 3}, CkVertex{2, 9}) == ExtDist(10));
    CHECK(ck.ext_d(2, inside, inside) == ExtDist(0));
    CHECK(ck.y_l(CkVertex{0, 0}, CkVertex{4, 10}, 3) == fence.space_ids());
}

TEST_CASE("distance formula holds on seeded instances") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        TreeAxes ta = random_tree_axes(seed, 5, 14);
        auto [sys, theta] = gen_tree_axes(ta);
        CkGraph ck = build_ck(sys, 4 * theta);
        AxiomReport formula = distance_formula_check(ck, 400, 800, seed);
        CAPTURE(seed, theta);
        CHECK(formula.passed);
        CkPackOptions opts;
        opts.pair_cutoff = 400;
        opts.sample_pairs = 800;
        opts.divide_samples = 400;
        opts.far_path_samples = 24;
        opts.seed = seed;
        AxiomReport pack = ck_property_pack(ck, opts);
        CHECK(pack.passed);
    }
}

TEST_CASE("standard paths carry a certified weight") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        TreeAxes ta = random_tree_axes(seed, 5, 14);
        auto [sys, theta] = gen_tree_axes(ta);
        CkGraph ck = build_ck(sys, 4 * theta);
        Rng rng(seed);
        for (int round = 0; round < 25; ++round) {
            CkVertex a = ck.vertex_at(rng.below(ck.vertex_count()));
            CkVertex b = ck.vertex_at(rng.below(ck.vertex_count()));
            CkPath p = ck_standard_path(ck, a, b);
            CAPTURE(seed, round);
            REQUIRE(!p.vertices.empty());
            CHECK(p.vertices.front() == a);
            CHECK(p.vertices.back() == b);
            ExtDist direct = ck.distance(a, b);
            REQUIRE(!direct.is_infinite());
            CHECK(direct.value() <= p.weight);
        }
    }
}

TEST_CASE("chains split at the index where the target view changes") {
    ProjectionSystem fence = gen_fence(6, 10);
    CkGraph ck = build_ck(fence, 3);
    CkVertex x{0, 0}, z{5, 10};
    Rng rng(5);
    for (int round = 0; round < 60; ++round) {
        CkVertex y = ck.vertex_at(rng.below(ck.vertex_count()));
        ChainSplit cs = chain_split(ck, x, z, y);
        CAPTURE(round, y.space, y.vertex);
        CHECK(cs.valid);
        REQUIRE(cs.chain.size() == 6);
        CHECK(cs.chain.front() == x.space);
        CHECK(cs.chain.back() == z.space);
        CHECK(cs.k < cs.chain.size());
        if (y.space > 0 && y.space < 5 && y.vertex > 0) CHECK(cs.k <= static_cast<std::size_t>(y.space));
    }
}

TEST_CASE("bottleneck radii stay under the cap") {
    ProjectionSystem fence = gen_fence(5, 10);
    CkGraph ck = build_ck(fence, 3);
    CkBottleneckOptions opts;
    opts.pair_samples = 25;
    opts.paths_per_pair = 4;
    AxiomReport r = ck_bottleneck_check(ck, opts);
    CHECK(r.passed);
    CHECK(r.counts.at("largest_radius") == 0);  // the glued fence is one long path

    for (std::uint64_t seed = 2; seed <= 4; ++seed) {
        TreeAxes ta = random_tree_axes(seed, 5, 12);
        auto [sys, theta] = gen_tree_axes(ta);
        CkGraph ckt = build_ck(sys, 4 * theta);
        CkBottleneckOptions o2;
        o2.pair_samples = 15;
        o2.paths_per_pair = 3;
        o2.seed = seed;
        for (SpaceId id : ckt.space_ids())
            o2.space_bottleneck =
                std::max(o2.space_bottleneck, measure_space_bottleneck(ckt.space(id), 32, 3, seed));
        AxiomReport rr = ck_bottleneck_check(ckt, o2);
        CAPTURE(seed, o2.space_bottleneck);
        CHECK(rr.passed);
    }
}

TEST_CASE("collapse and inclusion respect the scales") {
    ProjectionSystem fence = gen_fence(5, 10);
    CkGraph ck = build_ck(fence, 3);
    Rng rng(7);
    for (int round = 0; round < 200; ++round) {
        CkVertex a = ck.vertex_at(rng.below(ck.vertex_count()));
        CkVertex b = ck.vertex_at(rng.below(ck.vertex_count()));
        ExtDist dc = ck.distance(a, b);
        ExtDist dp = ck.pc_distance(a.space, b.space);
        REQUIRE(!dc.is_infinite());
        REQUIRE(!dp.is_infinite());
        CHECK(3 * dp.value() <= dc.value());
        if (a.space == b.space) {
            std::int64_t rho = ck.space(a.space).distance(a.vertex, b.vertex);
            CHECK(dc.value() <= rho);
        }
    }
}

TEST_CASE("weighted export lists every vertex and edge") {
    ProjectionSystem fence = gen_fence(4, 6);
    CkGraph ck = build_ck(fence, 2);
    auto j = ck_to_json(ck);
    CHECK(j.at("schema") == "projcx-ck-v1");
    CHECK(j.at("vertices").size() == ck.vertex_count());
    CHECK(j.at("K") == 2);
    std::size_t intra = 0;
    for (SpaceId y : fence.space_ids()) intra += fence.space(y).edge_list().size();
    CHECK(j.at("edges").size() >= intra);
}
