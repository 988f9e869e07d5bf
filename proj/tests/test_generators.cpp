#include <catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "projcx/axioms.hpp"
#include "projcx/free_product.hpp"
#include "projcx/generators.hpp"
#include "projcx/json_io.hpp"

using namespace projcx;

TEST_CASE("fence systems have endpoint projections and a frozen table") {
    ProjectionSystem sys = gen_fence(5, 10);
    REQUIRE(sys.space_count() == 5);
    for (SpaceId y : sys.space_ids()) {
        const MetricSpaceGraph& g = sys.space(y);
        CHECK(g.vertex_count() == 11);
        CHECK(g.distance(0, 10) == 10);
    }
    // spaces before the target project to its start, later ones to its end
    CHECK(sys.proj(2, 0) == std::vector<std::int64_t>{0});
    CHECK(sys.proj(2, 4) == std::vector<std::int64_t>{10});
    CHECK(sys.d(2, 0, 4) == ExtDist(10));
    CHECK(sys.d(2, 0, 1) == ExtDist(0));
    CHECK(sys.d(2, 3, 4) == ExtDist(0));
    CHECK(sys.d(2, 0, 0) == ExtDist(0));
    CHECK(sys.theta() == 0);

    SECTION("mixed lengths") {
        ProjectionSystem mixed = make_fence_system({4, 7, 9});
        CHECK(mixed.space(0).vertex_count() == 5);
        CHECK(mixed.space(2).vertex_count() == 10);
        CHECK(verify_strong_axioms(mixed.distances(), 0).passed);
    }
}

TEST_CASE("tree axes instances satisfy the weak axioms at the returned scale") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        TreeAxes ta = random_tree_axes(seed, 3 + static_cast<int>(seed % 5), 10 + static_cast<int>(seed % 10));
        auto [sys, theta] = gen_tree_axes(ta);
        CAPTURE(seed, theta);
        // the backing tree really is a tree and every axis is a path in it
        CHECK(ta.tree.edge_list().size() + 1 == ta.tree.vertex_count());
        AxiomReport weak = verify_weak_axioms(sys.distances(), theta);
        CHECK(weak.passed);
    }
}

TEST_CASE("tree axes generation is reproducible") {
    auto [s1, t1] = gen_tree_axes(random_tree_axes(99, 7, 24));
    auto [s2, t2] = gen_tree_axes(random_tree_axes(99, 7, 24));
    CHECK(t1 == t2);
    CHECK(system_to_json(s1) == system_to_json(s2));
    auto [s3, t3] = gen_tree_axes(random_tree_axes(100, 7, 24));
    CHECK(system_to_json(s1) != system_to_json(s3));
}

TEST_CASE("abstract instances feed the verifier rough input") {
    bool some_failed = false, some_side_entry = false, some_infinite = false;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        AbstractDistanceSystem sys = gen_abstract(seed, 6, 3);
        CAPTURE(seed);
        const DistanceView& v = sys.distances();
        REQUIRE(sys.space_ids().size() == 6);
        CHECK(sys.theta() == 3);
        CHECK(v.core_complete());

        // unconstrained tables mostly break some axiom; what matters here is
        // that the verifier digests them into a well-formed report
        AxiomReport weak = verify_weak_axioms(v, 3);
        if (!weak.passed) {
            some_failed = true;
            CHECK(weak.counts.at("violations") >= static_cast<std::int64_t>(weak.violations.size()));
            CHECK(!weak.violations.empty());
        }
        CHECK_NOTHROW(weak.to_json());

        for (SpaceId y : sys.space_ids())
            for (SpaceId x : sys.space_ids()) {
                if (x == y) continue;
                if (v.try_d(y, x, y)) some_side_entry = true;
                for (SpaceId z : sys.space_ids())
                    if (z != y && v.d(y, x, z).is_infinite()) some_infinite = true;
            }
    }
    CHECK(some_failed);
    CHECK(some_side_entry);
    CHECK(some_infinite);

    CHECK(abstract_to_json(gen_abstract(7, 5, 2)) == abstract_to_json(gen_abstract(7, 5, 2)));
    CHECK(abstract_to_json(gen_abstract(7, 5, 2)) != abstract_to_json(gen_abstract(8, 5, 2)));
    CHECK_THROWS_AS(gen_abstract(1, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(gen_abstract(1, 6, -1), std::invalid_argument);
}

TEST_CASE("free product ball model measures a stable constant") {
    FreeProductSpec spec;
    FreeProductModel model(spec);

    CHECK(model.ball_size() == 150);
    CHECK(model.coset_count() == 66);
    CHECK(model.interior_count() == 12);
    CHECK(model.C() == 3);
    CHECK(model.theta() == 10);

    const AxiomReport& build = model.build_report();
    CHECK(build.counts.at("cosets_complete") == 38);
    CHECK(build.counts.at("excluded_incomplete") == 28);
    CHECK(build.counts.at("excluded_margin") == 26);
    CHECK(build.counts.at("excluded_disconnected") == 0);
    CHECK(!build.notes.empty());  // exclusions are reported

    SECTION("axioms hold at the measured scale") {
        CHECK(verify_strong_axioms(model.system().distances(), model.theta()).passed);
        CHECK(verify_weak_axioms(model.system().distances(), model.theta()).passed);
    }

    SECTION("penetration and diameter statements") {
        AxiomReport pen = model.penetrate_check();
        CHECK(pen.passed);
        CHECK(pen.counts.at("hypothesis_matched") > 0);
        AxiomReport diam = model.diameter_check();
        CHECK(diam.passed);
        CHECK(diam.counts.at("diameter_max") == model.C());
    }

    SECTION("conjugate intersections are trivial") {
        auto bound = model.conjugate_intersection_bound();
        CHECK(bound.max_size == 1);
        CHECK(bound.pairs_checked > 0);
    }

    SECTION("the constant does not depend on the ball radius") {
        FreeProductSpec down = spec, up = spec;
        down.radius -= 1;
        up.radius += 1;
        CHECK(FreeProductModel(down).C() == model.C());
        CHECK(FreeProductModel(up).C() == model.C());
    }

    SECTION("degenerate parameters are rejected") {
        FreeProductSpec tiny;
        tiny.radius = 2;
        CHECK_THROWS_AS(FreeProductModel(tiny), std::invalid_argument);
        FreeProductSpec bad;
        bad.conjugates = 9;
        CHECK_THROWS_AS(FreeProductModel(bad), std::invalid_argument);
    }
}

TEST_CASE("own-relative coset distances are realized exactly") {
    FreeProductModel model{FreeProductSpec{}};
    const ProjectionSystem& sys = model.system();
    for (SpaceId id : model.space_ids()) {
        const MetricSpaceGraph& g = sys.space(id);
        std::vector<std::int64_t> members;
        for (std::int64_t v : g.vertex_ids())
            if (v >= 0) members.push_back(v);  // negative ids subdivide edges
        REQUIRE(members.size() == 3);
        for (std::int64_t x : members)
            for (std::int64_t z : members) {
                ExtDist direct = model.hat_distance(id, x, z);
                REQUIRE(!direct.is_infinite());
                CHECK(g.distance(x, z) == direct.value());
            }
    }
}

TEST_CASE("reduced word arithmetic") {
    fp::FreeProduct w(2, 3);
    fp::Word a = w.letter(0, 1), b = w.letter(1, 1);
    CHECK(w.mul(a, a).empty());
    CHECK(w.mul(b, w.mul(b, b)).empty());
    CHECK(w.str(w.mul(a, b)) == "ab");
    CHECK(w.str(w.mul(b, w.letter(1, 2))) == "1");
    CHECK(w.mul(w.inv(w.mul(a, b)), w.mul(a, b)).empty());
    fp::Word conj = w.mul(w.mul(b, a), w.inv(b));
    CHECK(w.str(conj) == "bab2");

    fp::FreeProduct z(2, 0);
    fp::Word bn = z.letter(1, -3);
    CHECK(z.str(bn) == "b-3");
    CHECK(z.mul(bn, z.letter(1, 3)).empty());
}

TEST_CASE("symbolic instance certifies the free group") {
    SymbolicFreeGroup sym;

    SECTION("entries of the three axes are distinct") {
        fp::Word base;
        CHECK(sym.entry(base, sym.apply_word({{0, +1}})) == 0);
        CHECK(sym.entry(base, sym.apply_word({{1, +1}})) == 1);
        CHECK(sym.entry(base, sym.apply_word({{2, +1}})) == -1);
    }

    SECTION("complex distance counts the letters that change coset") {
        fp::Word base;
        CHECK(sym.complex_distance(base, sym.apply_word({{0, +1}})) == 1);
        CHECK(sym.complex_distance(base, sym.apply_word({{1, +1}, {0, -1}})) == 2);
        CHECK(sym.complex_distance(base, sym.apply_word({{1, +1}, {0, -1}, {1, +1}, {0, -1}})) == 4);
    }

    SECTION("certificates pass to radius four") {
        AxiomReport rep;
        CHECK(sym.certify(1, 4, &rep));
        CHECK(rep.counts.at("orbit_bound_checked") == 45);
        CHECK(rep.counts.at("adjacent_checked") == 45);
        CHECK(sym.certify(1000, 3));  // theta is 0, any K works
    }

    SECTION("materialized table agrees with the generic certificate") {
        auto mat = sym.materialize(2);
        CHECK(mat.ids.size() == 10);
        CHECK(verify_strong_axioms(mat.system.distances(), 0).passed);
        AxiomReport rep;
        bool ok = free_group_certify_words(
            mat.system.distances(), 1, mat.base,
            [&](const AltWord& w) { return mat.ids.at(sym.apply_word(w)); }, 2, &rep);
        CHECK(ok);
        CHECK(rep.passed);
    }
}
