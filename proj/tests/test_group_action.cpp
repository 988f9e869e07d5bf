#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "projcx/generators.hpp"
#include "projcx/group_action.hpp"

using namespace projcx;

namespace {

// the end-to-end swap with the vertex flip left out: still a valid
// permutation and a graph isomorphism on every space, but projections are
// carried to the wrong endpoints
SystemAutomorphism lazy_reflection(const ProjectionSystem& sys) {
    SystemAutomorphism g;
    g.name = "lazy";
    const auto& ids = sys.space_ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        SpaceId from = ids[i];
        g.sigma[from] = ids[ids.size() - 1 - i];
        auto& m = g.maps[from];
        for (std::int64_t v : sys.space(from).vertex_ids()) m[v] = v;
    }
    return g;
}

}  // namespace

TEST_CASE("automorphism algebra") {
    ProjectionSystem fence = gen_fence(6, 8);
    FiniteGroup group = fence_reflection_group(fence);
    REQUIRE(group.size() == 2);
    const SystemAutomorphism& id = group.element(0);
    const SystemAutomorphism& r = group.element(1);

    CHECK(compose(r, r).same_action(id));
    CHECK(inverse(r).same_action(r));
    CHECK(compose(r, id).same_action(r));
    CHECK(compose(id, r).same_action(r));
    CHECK(identity_automorphism(fence).same_action(id));

    CHECK(act_space(r, 0) == 5);
    CHECK(act_vertex(r, 0, 3) == 5);
    CHECK(act_set(r, 0, {0, 8}) == std::vector<std::int64_t>({0, 8}));
    CkVertex v{1, 2};
    CHECK(act_ck(compose(r, r), v) == act_ck(r, act_ck(r, v)));
    CHECK(act_ck(r, v) == CkVertex{4, 6});

    CHECK_THROWS_AS(act_space(r, 99), std::invalid_argument);
    CHECK_THROWS_AS(act_vertex(r, 0, 99), std::invalid_argument);

    CHECK(group.compose_idx(1, 1) == FiniteGroup::identity_idx());
    CHECK(group.inverse_idx(1) == 1);
}

TEST_CASE("reflection respects every layer of the structure") {
    ProjectionSystem fence = gen_fence(20, 10);
    FiniteGroup group = fence_reflection_group(fence);
    AxiomReport rep = verify_action(group, fence);
    CHECK(rep.passed);
    CHECK(rep.counts.at("elements_checked") == 2);
    CHECK(rep.counts.at("isometries_checked") == 40);
    CHECK(rep.counts.at("projections_checked") == 760);
    CHECK(rep.counts.at("distances_checked") == 7600);
    CHECK(rep.counts.at("table_checked") == 2);

    SECTION("mixed palindromic lengths work, others are refused") {
        ProjectionSystem mixed = make_fence_system({4, 7, 7, 4});
        FiniteGroup g2 = fence_reflection_group(mixed);
        CHECK(verify_action(g2, mixed).passed);
        ProjectionSystem skew = make_fence_system({4, 7, 5});
        CHECK_THROWS_AS(fence_reflection_group(skew), std::invalid_argument);
    }
}

TEST_CASE("forgetting the vertex flip breaks equivariance") {
    ProjectionSystem fence = gen_fence(5, 10);
    FiniteGroup group(fence, {lazy_reflection(fence)});
    REQUIRE(group.size() == 2);
    AxiomReport rep = verify_action(group, fence);
    CHECK(!rep.passed);
    CHECK(rep.counts.at("violations") == 20);  // every ordered space pair of the bad element
    for (const auto& v : rep.violations) CHECK(v.axiom == "action_equivariance");
}

TEST_CASE("family stabilizers in the fence are trivial") {
    ProjectionSystem fence = gen_fence(20, 10);
    FiniteGroup group = fence_reflection_group(fence);
    StabilizerBound sb = stabilizer_bound(group, fence, 3, 2);
    CHECK(sb.B == 1);
    CHECK(sb.subsets_checked == 4845);
    CHECK_THROWS_AS(stabilizer_bound(group, fence, 3, 0), std::invalid_argument);
}

TEST_CASE("coarse fixing in the complex stays within the claimed bound") {
    ProjectionSystem fence = gen_fence(20, 10);
    FiniteGroup group = fence_reflection_group(fence);

    AxiomReport d1 = acylindricity_audit_pc(group, fence, 3, 1, 2, 1);
    CHECK(d1.passed);
    CHECK(d1.counts.at("pairs_checked") == 36);
    CHECK(d1.counts.at("stabilizer_measured") == 1);

    AxiomReport d2 = acylindricity_audit_pc(group, fence, 3, 2, 2, 1);
    CHECK(d2.passed);
    CHECK(d2.counts.at("pairs_checked") == 10);

    AxiomReport d3 = acylindricity_audit_pc(group, fence, 3, 3, 2, 1);
    CHECK(d3.passed);
    CHECK(d3.counts.at("pairs_checked") == 0);
    REQUIRE(!d3.notes.empty());
    CHECK(d3.notes.back().find("vacuous") != std::string::npos);

    CHECK_THROWS_AS(acylindricity_audit_pc(group, fence, 3, 0, 2, 1), std::invalid_argument);
}

TEST_CASE("quasi-tree fixing profile of the reflection") {
    ProjectionSystem fence = gen_fence(20, 10);
    FiniteGroup group = fence_reflection_group(fence);
    AxiomReport rep = acylindricity_audit_ck(group, fence, 3, 1);
    CHECK(rep.passed);
    for (std::int64_t L : {6, 12, 24, 48}) {
        CAPTURE(L);
        CHECK(rep.counts.at("pairs_at_L_" + std::to_string(L)) > 0);
        CHECK(rep.counts.at("max_count_at_L_" + std::to_string(L)) == 1);
    }
}

TEST_CASE("degenerate symmetries fail the separation hypotheses") {
    ProjectionSystem fence = gen_fence(8, 10);
    SystemAutomorphism id = identity_automorphism(fence);
    AxiomReport rep;
    bool ok = free_group_certify(fence, 3, 3, id, id, id, 2, &rep);
    CHECK(!ok);
    CHECK(rep.counts.at("violations") == 6);
    for (const auto& v : rep.violations) CHECK(v.axiom == "free_group_hypothesis");
}

TEST_CASE("orbit of a reflection oscillates instead of escaping") {
    ProjectionSystem fence = gen_fence(20, 10);
    FiniteGroup group = fence_reflection_group(fence);
    LoxodromicReport rep = loxodromic_check(group.element(1), fence, 3, CkVertex{0, 0}, 4);
    CHECK(rep.distances == std::vector<std::int64_t>({0, 257, 0, 257, 0}));
    CHECK(rep.linear_rate == 0);
    CHECK(rep.returned_to_start);
    CHECK(rep.min_step == -257);
    CHECK(rep.max_step == 257);
    CHECK_THROWS_AS(loxodromic_check(group.element(1), fence, 3, CkVertex{0, 0}, 0), std::invalid_argument);
}

TEST_CASE("symmetry serialization round trips") {
    ProjectionSystem fence = gen_fence(5, 10);
    FiniteGroup group = fence_reflection_group(fence);
    const SystemAutomorphism& r = group.element(1);

    SystemAutomorphism back = automorphism_from_json(automorphism_to_json(r));
    CHECK(back.same_action(r));
    CHECK(back.name == r.name);

    auto j = group_to_json(group);
    CHECK(j.at("schema") == "projcx-group-v1");
    FiniteGroup loaded = group_from_json(j, fence);
    REQUIRE(loaded.size() == group.size());
    for (std::size_t i = 0; i < group.size(); ++i) CHECK(loaded.element(i).same_action(group.element(i)));

    nlohmann::json bad = j;
    bad.erase("schema");
    CHECK_THROWS_AS(group_from_json(bad, fence), JsonLoadError);
    bad = j;
    bad["schema"] = "projcx-group-v9";
    CHECK_THROWS_AS(group_from_json(bad, fence), JsonLoadError);
}
