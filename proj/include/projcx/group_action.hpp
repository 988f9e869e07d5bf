#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ext_dist.hpp"
#include "graph.hpp"
#include "json_io.hpp"
#include "projection_complex.hpp"
#include "quasi_tree.hpp"
#include "report.hpp"
#include "system.hpp"

namespace projcx {

/// A symmetry of a projection system: a permutation of the spaces together
/// with a vertex bijection from each space onto its image.
struct SystemAutomorphism {
    std::map<SpaceId, SpaceId> sigma;
    std::map<SpaceId, std::map<std::int64_t, std::int64_t>> maps;
    std::string name;

    bool same_action(const SystemAutomorphism& o) const { return sigma == o.sigma && maps == o.maps; }
};

inline SpaceId act_space(const SystemAutomorphism& g, SpaceId Y) {
    auto it = g.sigma.find(Y);
    if (it == g.sigma.end()) throw std::invalid_argument("automorphism: unknown space " + std::to_string(Y));
    return it->second;
}

inline std::int64_t act_vertex(const SystemAutomorphism& g, SpaceId Y, std::int64_t v) {
    auto it = g.maps.find(Y);
    if (it == g.maps.end()) throw std::invalid_argument("automorphism: no vertex map for space " + std::to_string(Y));
    auto jt = it->second.find(v);
    if (jt == it->second.end())
        throw std::invalid_argument("automorphism: vertex " + std::to_string(v) + " not mapped in space " +
                                    std::to_string(Y));
    return jt->second;
}

inline std::vector<std::int64_t> act_set(const SystemAutomorphism& g, SpaceId Y,
                                         const std::vector<std::int64_t>& set) {
    std::vector<std::int64_t> out;
    out.reserve(set.size());
    for (std::int64_t v : set) out.push_back(act_vertex(g, Y, v));
    std::sort(out.begin(), out.end());
    return out;
}

inline CkVertex act_ck(const SystemAutomorphism& g, CkVertex v) {
    return {act_space(g, v.space), act_vertex(g, v.space, v.vertex)};
}

/// a after b: (a*b)(x) = a(b(x)).
inline SystemAutomorphism compose(const SystemAutomorphism& a, const SystemAutomorphism& b) {
    SystemAutomorphism out;
    for (const auto& [Y, bY] : b.sigma) out.sigma[Y] = act_space(a, bY);
    for (const auto& [Y, m] : b.maps) {
        SpaceId mid = act_space(b, Y);
        std::map<std::int64_t, std::int64_t> comp;
        for (const auto& [v, bv] : m) comp[v] = act_vertex(a, mid, bv);
        out.maps[Y] = std::move(comp);
    }
    out.name = a.name.empty() || b.name.empty() ? a.name + b.name : a.name + "*" + b.name;
    return out;
}

inline SystemAutomorphism inverse(const SystemAutomorphism& g) {
    SystemAutomorphism out;
    for (const auto& [Y, gY] : g.sigma) out.sigma[gY] = Y;
    for (const auto& [Y, m] : g.maps) {
        SpaceId gY = act_space(g, Y);
        std::map<std::int64_t, std::int64_t> inv;
        for (const auto& [v, gv] : m) inv[gv] = v;
        out.maps[gY] = std::move(inv);
    }
    out.name = g.name.empty() ? "" : g.name + "^-1";
    return out;
}

inline SystemAutomorphism identity_automorphism(const ProjectionSystem& sys) {
    SystemAutomorphism id;
    id.name = "id";
    for (SpaceId Y : sys.space_ids()) {
        id.sigma[Y] = Y;
        auto& m = id.maps[Y];
        for (std::int64_t v : sys.space(Y).vertex_ids()) m[v] = v;
    }
    return id;
}

/// A finite symmetry group, stored as the explicit element list closed
/// under composition.  Construction closes the generating set and caps the
/// size; audits iterate the list exhaustively.
class FiniteGroup {
public:
    FiniteGroup(const ProjectionSystem& sys, std::vector<SystemAutomorphism> generators, std::size_t cap = 5040) {
        elements_.push_back(identity_automorphism(sys));
        std::deque<std::size_t> frontier{0};
        auto find = [&](const SystemAutomorphism& g) -> std::optional<std::size_t> {
            for (std::size_t i = 0; i < elements_.size(); ++i)
                if (elements_[i].same_action(g)) return i;
            return std::nullopt;
        };
        for (auto& g : generators)
            if (!find(g)) {
                elements_.push_back(std::move(g));
                frontier.push_back(elements_.size() - 1);
            }
        std::size_t scan = 0;
        while (scan < elements_.size()) {
            for (std::size_t i = 0; i < elements_.size(); ++i) {
                SystemAutomorphism p = compose(elements_[scan], elements_[i]);
                if (!find(p)) {
                    if (elements_.size() >= cap)
                        throw std::invalid_argument("group closure exceeds the cap of " + std::to_string(cap));
                    elements_.push_back(std::move(p));
                }
            }
            ++scan;
        }
        table_.assign(elements_.size(), std::vector<std::size_t>(elements_.size()));
        inverse_.assign(elements_.size(), 0);
        for (std::size_t a = 0; a < elements_.size(); ++a)
            for (std::size_t b = 0; b < elements_.size(); ++b) {
                SystemAutomorphism p = compose(elements_[a], elements_[b]);
                auto idx = find(p);
                if (!idx) throw std::logic_error("group closure is incomplete");
                table_[a][b] = *idx;
                if (*idx == 0) inverse_[a] = b;
            }
    }

    std::size_t size() const { return elements_.size(); }
    const SystemAutomorphism& element(std::size_t i) const { return elements_.at(i); }
    const std::vector<SystemAutomorphism>& elements() const { return elements_; }
    std::size_t compose_idx(std::size_t a, std::size_t b) const { return table_.at(a).at(b); }
    std::size_t inverse_idx(std::size_t a) const { return inverse_.at(a); }
    static constexpr std::size_t identity_idx() { return 0; }

private:
    std::vector<SystemAutomorphism> elements_;
    std::vector<std::vector<std::size_t>> table_;
    std::vector<std::size_t> inverse_;
};

/// Checks the group axioms on the element list and full equivariance:
/// every element permutes the spaces, maps each space isomorphically onto
/// its image, carries projection sets onto projection sets and therefore
/// preserves all projection distances.
inline AxiomReport verify_action(const FiniteGroup& group, const ProjectionSystem& sys) {
    AxiomReport rep;
    rep.check = "group_action";
    const DistanceView& v = sys.distances();
    const auto& ids = sys.space_ids();

    for (std::size_t gi = 0; gi < group.size(); ++gi) {
        const SystemAutomorphism& g = group.element(gi);
        std::set<SpaceId> image;
        bool ok = g.sigma.size() == ids.size();
        for (SpaceId Y : ids) {
            auto it = g.sigma.find(Y);
            if (it == g.sigma.end() || !std::binary_search(ids.begin(), ids.end(), it->second)) {
                ok = false;
                break;
            }
            image.insert(it->second);
        }
        rep.bump("elements_checked");
        if (!ok || image.size() != ids.size()) {
            rep.add_violation({"action_permutation", {}, {}, "element " + g.name + " does not permute the spaces"});
            continue;
        }
        for (SpaceId Y : ids) {
            const auto& src = sys.space(Y);
            const auto& dst = sys.space(act_space(g, Y));
            if (src.vertex_count() != dst.vertex_count()) {
                rep.add_violation({"action_isometry", {Y}, {}, "element " + g.name + " maps between unequal spaces"});
                continue;
            }
            std::set<std::int64_t> seen;
            bool iso = true;
            for (std::int64_t u : src.vertex_ids()) seen.insert(act_vertex(g, Y, u));
            if (seen.size() != src.vertex_count()) iso = false;
            std::set<std::pair<std::int64_t, std::int64_t>> dst_edges;
            for (const auto& [u, w] : dst.edge_list()) dst_edges.insert({std::min(u, w), std::max(u, w)});
            std::size_t mapped = 0;
            for (const auto& [u, w] : src.edge_list()) {
                std::int64_t a = act_vertex(g, Y, u), b = act_vertex(g, Y, w);
                if (!dst_edges.count({std::min(a, b), std::max(a, b)})) iso = false;
                ++mapped;
            }
            if (mapped != dst_edges.size()) iso = false;
            rep.bump("isometries_checked");
            if (!iso)
                rep.add_violation(
                    {"action_isometry", {Y}, {}, "element " + g.name + " is not a graph isomorphism on " +
                                                     std::to_string(Y)});
        }
        for (SpaceId X : ids)
            for (SpaceId Y : ids) {
                if (X == Y) continue;
                rep.bump("projections_checked");
                if (act_set(g, X, sys.proj(X, Y)) != sys.proj(act_space(g, X), act_space(g, Y)))
                    rep.add_violation({"action_equivariance",
                                       {X, Y},
                                       {},
                                       "element " + g.name + " does not carry the projection of " +
                                           std::to_string(Y) + " onto " + std::to_string(X) + " equivariantly"});
            }
        const int n = v.n();
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                for (int z = x; z < n; ++z) {
                    if (x == y || z == y) continue;
                    SpaceId Y = v.id_at(y), X = v.id_at(x), Z = v.id_at(z);
                    rep.bump("distances_checked");
                    if (v.d(Y, X, Z) != v.d(act_space(g, Y), act_space(g, X), act_space(g, Z)))
                        rep.add_violation({"action_distance",
                                           {Y, X, Z},
                                           {v.d(Y, X, Z)},
                                           "element " + g.name + " changes a projection distance"});
                }
    }

    // group axioms on the list
    for (std::size_t a = 0; a < group.size(); ++a) {
        rep.bump("table_checked");
        std::size_t inv = group.inverse_idx(a);
        if (group.compose_idx(a, inv) != FiniteGroup::identity_idx() ||
            group.compose_idx(inv, a) != FiniteGroup::identity_idx())
            rep.add_violation({"group_inverse", {}, {}, "element " + group.element(a).name + " has a bad inverse"});
        if (group.compose_idx(a, FiniteGroup::identity_idx()) != a ||
            group.compose_idx(FiniteGroup::identity_idx(), a) != a)
            rep.add_violation({"group_identity", {}, {}, "identity does not act trivially against " +
                                                             group.element(a).name});
    }
    return rep;
}

struct StabilizerBound {
    std::int64_t B = 1;
    std::pair<SpaceId, SpaceId> witness_pair{0, 0};
    std::vector<SpaceId> witness_subset;  // the N-subset realizing B
    std::int64_t subsets_checked = 0;
};

/// Largest common stabilizer over all N-subsets of every far-seeing family
/// Y_K(X,Z).  "Stabilizer" is at the family level: the permutation fixes
/// each chosen SpaceId (what happens inside the space is invisible to the
/// projection complex).
inline StabilizerBound stabilizer_bound(const FiniteGroup& group, const ProjectionSystem& sys, std::int64_t K,
                                        std::size_t N) {
    if (N == 0) throw std::invalid_argument("stabilizer_bound: N must be positive");
    if (K < 3 * sys.distances().declared_theta())
        throw std::invalid_argument("stabilizer_bound: K must be at least 3*theta");
    const DistanceView& v = sys.distances();
    StabilizerBound out;
    std::vector<SpaceId> members;
    for (SpaceId X : sys.space_ids())
        for (SpaceId Z : sys.space_ids()) {
            if (X >= Z) continue;
            members = y_k_members(v, K, X, Z);
            if (members.size() < N) continue;
            // enumerate N-subsets of members
            std::vector<std::size_t> idx(N);
            for (std::size_t i = 0; i < N; ++i) idx[i] = i;
            while (true) {
                std::int64_t stab = 0;
                for (std::size_t gi = 0; gi < group.size(); ++gi) {
                    bool fixes = true;
                    for (std::size_t i = 0; i < N && fixes; ++i)
                        if (act_space(group.element(gi), members[idx[i]]) != members[idx[i]]) fixes = false;
                    if (fixes) ++stab;
                }
                ++out.subsets_checked;
                if (stab > out.B) {
                    out.B = stab;
                    out.witness_pair = {X, Z};
                    out.witness_subset.clear();
                    for (std::size_t i = 0; i < N; ++i) out.witness_subset.push_back(members[idx[i]]);
                }
                // next combination
                std::size_t i = N;
                while (i-- > 0) {
                    if (idx[i] + (N - i) < members.size()) {
                        ++idx[i];
                        for (std::size_t j = i + 1; j < N; ++j) idx[j] = idx[j - 1] + 1;
                        break;
                    }
                    if (i == 0) {
                        i = N + 1;
                        break;
                    }
                }
                if (i == N + 1) break;
            }
        }
    return out;
}

/// Counts, for every pair of spaces at complex distance at least N+4D+6,
/// the elements moving both endpoints by at most D, and asserts the count
/// stays within B(2D+1).  If the claimed stabilizer bound B itself fails,
/// overshoots are reported as hypothesis failures instead.
inline AxiomReport acylindricity_audit_pc(const FiniteGroup& group, const ProjectionSystem& sys, std::int64_t K,
                                          std::int64_t D, std::size_t N, std::int64_t B) {
    const std::int64_t theta = sys.distances().declared_theta();
    if (K < 3 * theta) throw std::invalid_argument("acylindricity_audit_pc: K must be at least 3*theta");
    if (D < 1) throw std::invalid_argument("acylindricity_audit_pc: D must be at least 1");
    AxiomReport rep;
    rep.check = "acylindricity_pc";

    StabilizerBound stab = stabilizer_bound(group, sys, K, N);
    bool hyp_ok = stab.B <= B;
    if (!hyp_ok)
        rep.note("stabilizer hypothesis fails: an N-subset has common stabilizer " + std::to_string(stab.B) +
                 " above the claimed " + std::to_string(B));
    rep.counts["stabilizer_measured"] = stab.B;

    ComplexGraph pc(sys.distances(), K);
    const auto& ids = sys.space_ids();
    const std::int64_t threshold = static_cast<std::int64_t>(N) + 4 * D + 6;
    for (SpaceId X : ids)
        for (SpaceId Z : ids) {
            if (X >= Z) continue;
            rep.bump("pairs_scanned");
            ExtDist d = pc.distance(X, Z);
            if (d.is_infinite() || d.value() < threshold) continue;
            rep.bump("pairs_checked");
            std::int64_t count = 0;
            for (std::size_t gi = 0; gi < group.size(); ++gi) {
                const SystemAutomorphism& g = group.element(gi);
                ExtDist dx = pc.distance(X, act_space(g, X));
                ExtDist dz = pc.distance(Z, act_space(g, Z));
                if (!(dx > ExtDist(D)) && !(dz > ExtDist(D))) ++count;
            }
            if (count > B * (2 * D + 1))
                rep.add_violation({hyp_ok ? "acylindricity_bound" : "acylindricity_hypothesis",
                                   {X, Z},
                                   {d, ExtDist(count)},
                                   std::to_string(count) + " elements coarsely fix a pair at distance " + d.str() +
                                       ", above the bound " + std::to_string(B * (2 * D + 1))});
        }
    if (rep.counts["pairs_checked"] == 0) rep.note("vacuous: no qualifying pairs at distance >= " +
                                                   std::to_string(threshold));
    return rep;
}

/// Empirical acylindricity profile on the quasi-tree: for a ladder of
/// distance thresholds L, the largest number of elements moving both ends
/// of an L-separated vertex pair by at most D.  The constants here are
/// existential in the source result, so the profile is reported, not
/// asserted.  The hypothesis that each space's own stabilizer acts
/// acylindrically on it is vacuous for finite graphs and noted as such.
inline AxiomReport acylindricity_audit_ck(const FiniteGroup& group, const ProjectionSystem& sys, std::int64_t K,
                                          std::int64_t D, std::size_t pair_cutoff = 400,
                                          std::size_t sample_pairs = 2000, std::uint64_t seed = 1) {
    const std::int64_t theta = sys.distances().declared_theta();
    if (D < theta) throw std::invalid_argument("acylindricity_audit_ck: D must be at least theta");
    AxiomReport rep;
    rep.check = "acylindricity_ck";
    if (K < 4 * theta) rep.note("K below 4*theta: outside theorem range, profile is informational");
    rep.note("per-space stabilizer acylindricity is vacuous on finite graphs; not falsifiable here");

    CkGraph ck(sys, K);
    const std::size_t n = ck.vertex_count();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n <= pair_cutoff) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    } else {
        rep.mode = "sampled";
        rep.seed = seed;
        Rng rng(seed);
        for (std::size_t i = 0; i < sample_pairs; ++i) {
            std::size_t a = static_cast<std::size_t>(rng.below(n));
            std::size_t b = static_cast<std::size_t>(rng.below(n));
            if (a != b) pairs.emplace_back(a, b);
        }
    }

    std::vector<std::int64_t> ladder{2 * K, 4 * K, 8 * K, 16 * K};
    for (std::int64_t L : ladder) {
        std::int64_t worst = 0;
        std::int64_t qualifying = 0;
        for (auto [a, b] : pairs) {
            CkVertex x = ck.vertex_at(a), z = ck.vertex_at(b);
            ExtDist d = ck.distance(x, z);
            if (d.is_infinite() || d.value() < L) continue;
            ++qualifying;
            std::int64_t count = 0;
            for (std::size_t gi = 0; gi < group.size(); ++gi) {
                const SystemAutomorphism& g = group.element(gi);
                ExtDist dx = ck.distance(x, act_ck(g, x));
                ExtDist dz = ck.distance(z, act_ck(g, z));
                if (!(dx > ExtDist(D)) && !(dz > ExtDist(D))) ++count;
            }
            worst = std::max(worst, count);
        }
        rep.counts["pairs_at_L_" + std::to_string(L)] = qualifying;
        rep.counts["max_count_at_L_" + std::to_string(L)] = worst;
        if (qualifying == 0) rep.note("vacuous at L = " + std::to_string(L) + ": no pairs that far apart");
    }
    rep.counts["pairs_scanned"] = static_cast<std::int64_t>(pairs.size());
    return rep;
}

/// A reduced alternating word in three generators: adjacent letters use
/// distinct generator indices, so no cancellation is possible.
using AltWord = std::vector<std::pair<int, int>>;  // (generator index, +1/-1)

/// Core of the rank-two free-group certificate, generic over how words act
/// on the space family: checks the six separation inequalities, then
/// materializes the ball of radius r of reduced alternating words, labels
/// each word w by w(Y), and certifies the labelled ball as a tree mapping
/// isometrically into the complex.  Also asserts the orbit-map lower
/// bound: a word of length k ends at complex distance at least
/// floor(k/2) + 1 from Y.
/// Hypothesis failures return false (witnesses in `report`); conclusion
/// failures throw CertificationError since they indicate an inconsistent
/// input system.
inline bool free_group_certify_words(const DistanceView& v, std::int64_t K, SpaceId Y,
                                     const std::function<SpaceId(const AltWord&)>& apply, int radius,
                                     AxiomReport* report = nullptr) {
    const std::int64_t theta = v.declared_theta();
    if (K < 3 * theta) throw std::invalid_argument("free_group_certify: K must be at least 3*theta");
    if (radius < 1) throw std::invalid_argument("free_group_certify: radius must be at least 1");
    AxiomReport local;
    AxiomReport& rep = report ? *report : local;
    rep.check = "free_group_certify";

    bool hyp_ok = true;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            SpaceId gi = apply({{i, +1}}), gj = apply({{j, +1}});
            SpaceId hi = apply({{i, -1}}), hj = apply({{j, -1}});
            rep.bump("hypothesis_checked", 2);
            if (gi == Y || gj == Y || gi == gj || !(v.d(Y, gi, gj) > ExtDist(K))) {
                rep.add_violation({"free_group_hypothesis",
                                   {Y, gi, gj},
                                   {gi != Y && gj != Y && gi != gj ? v.d(Y, gi, gj) : ExtDist(0)},
                                   "images of Y under generators " + std::to_string(i) + "," + std::to_string(j) +
                                       " are not separated above K"});
                hyp_ok = false;
            }
            if (hi == Y || hj == Y || hi == hj || !(v.d(Y, hi, hj) > ExtDist(K))) {
                rep.add_violation({"free_group_hypothesis",
                                   {Y, hi, hj},
                                   {hi != Y && hj != Y && hi != hj ? v.d(Y, hi, hj) : ExtDist(0)},
                                   "images of Y under inverse generators " + std::to_string(i) + "," +
                                       std::to_string(j) + " are not separated above K"});
                hyp_ok = false;
            }
        }
    if (!hyp_ok) return false;

    // the letter signs alternate with the layer: crossings away from the
    // base use the generators, crossings back their inverses, which is
    // exactly what the separation hypotheses control
    std::vector<AltWord> words;
    words.push_back({});
    std::vector<std::size_t> last_layer{0};
    for (int len = 1; len <= radius; ++len) {
        const int e = len % 2 == 1 ? +1 : -1;
        std::vector<std::size_t> layer;
        for (std::size_t wi : last_layer) {
            for (int i = 0; i < 3; ++i) {
                if (!words[wi].empty() && words[wi].back().first == i) continue;
                AltWord next = words[wi];
                next.emplace_back(i, e);
                words.push_back(std::move(next));
                layer.push_back(words.size() - 1);
            }
        }
        last_layer = std::move(layer);
    }

    // tree certification of the labelled ball
    std::vector<SpaceId> labels;
    labels.reserve(words.size());
    for (const auto& w : words) labels.push_back(apply(w));
    std::vector<std::pair<int, int>> edges;
    {
        std::map<AltWord, int> index;
        for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (words[i].empty()) continue;
            AltWord parent = words[i];
            parent.pop_back();
            edges.emplace_back(index.at(parent), static_cast<int>(i));
        }
    }
    AxiomReport tree_rep;
    bool tree_ok = certify_tree_map(v, K, words.size(), edges, labels, &tree_rep);
    rep.absorb(tree_rep);
    // the separation inequalities provably propagate to every immersed path
    // in the ball, so a gap failure here means the system itself is broken
    if (!tree_ok) {
        rep.note("derived tree hypothesis fails although the separation inequalities hold");
        throw CertificationError(rep);
    }

    // orbit-map lower bound through the complex
    ComplexGraph pc(v, K);
    for (std::size_t i = 0; i < words.size(); ++i) {
        const std::size_t k = words[i].size();
        if (k == 0) continue;
        rep.bump("orbit_bound_checked");
        ExtDist d = pc.distance(Y, labels[i]);
        std::int64_t need = static_cast<std::int64_t>(k / 2) + 1;
        if (d.is_infinite() || d.value() < need) {
            rep.add_violation({"orbit_lower_bound",
                               {Y, labels[i]},
                               {d, ExtDist(need)},
                               "word of length " + std::to_string(k) + " lands too close to its start"});
            throw CertificationError(rep);
        }
    }
    return true;
}

/// Certificate for three explicit symmetries of a finite system.
inline bool free_group_certify(const ProjectionSystem& sys, std::int64_t K, SpaceId Y, const SystemAutomorphism& g0,
                               const SystemAutomorphism& g1, const SystemAutomorphism& g2, int radius,
                               AxiomReport* report = nullptr) {
    const SystemAutomorphism* gens[3] = {&g0, &g1, &g2};
    SystemAutomorphism invs[3] = {inverse(g0), inverse(g1), inverse(g2)};
    auto apply = [&](const AltWord& w) -> SpaceId {
        SpaceId at = Y;
        for (auto it = w.rbegin(); it != w.rend(); ++it)
            at = act_space(it->second > 0 ? *gens[it->first] : invs[it->first], at);
        return at;
    };
    return free_group_certify_words(sys.distances(), K, Y, apply, radius, report);
}

struct LoxodromicReport {
    std::vector<std::int64_t> distances;  // d_C(x, g^n x) for n = 0..n_max
    std::int64_t linear_rate = 0;         // largest c with d_C(x, g^n x) >= c*n for all n
    std::int64_t min_step = 0;
    std::int64_t max_step = 0;
    bool returned_to_start = false;  // witnessed finite order within the horizon
};

/// Tracks the orbit of one vertex under powers of one symmetry and reports
/// the observed linear growth rate of quasi-tree distance.
inline LoxodromicReport loxodromic_check(const SystemAutomorphism& g, const ProjectionSystem& sys, std::int64_t K,
                                         CkVertex x, int n_max) {
    if (n_max < 1) throw std::invalid_argument("loxodromic_check: n_max must be at least 1");
    CkGraph ck(sys, K);
    LoxodromicReport out;
    out.distances.push_back(0);
    SystemAutomorphism power = g;
    std::optional<std::int64_t> rate;
    for (int n = 1; n <= n_max; ++n) {
        CkVertex moved = {act_space(power, x.space), act_vertex(power, x.space, x.vertex)};
        ExtDist d = ck.distance(x, moved);
        std::int64_t dn = d.is_infinite() ? -1 : d.value();
        if (dn < 0) throw std::runtime_error("loxodromic_check: orbit point unreachable");
        out.distances.push_back(dn);
        if (dn == 0 && n >= 1) out.returned_to_start = true;
        std::int64_t step = dn - out.distances[static_cast<std::size_t>(n) - 1];
        if (n == 1) {
            out.min_step = out.max_step = step;
        } else {
            out.min_step = std::min(out.min_step, step);
            out.max_step = std::max(out.max_step, step);
        }
        std::int64_t c = dn / n;
        rate = rate ? std::min(*rate, c) : c;
        power = compose(g, power);
    }
    out.linear_rate = rate.value_or(0);
    return out;
}

/// The end-to-end symmetry of a fence: space i swaps with space n-1-i and
/// every path flips.  Needs the length list to be palindromic.
inline FiniteGroup fence_reflection_group(const ProjectionSystem& sys) {
    const auto& ids = sys.space_ids();
    const std::size_t n = ids.size();
    SystemAutomorphism r;
    r.name = "r";
    for (std::size_t i = 0; i < n; ++i) {
        SpaceId from = ids[i], to = ids[n - 1 - i];
        const auto& src = sys.space(from).vertex_ids();
        const auto& dst = sys.space(to).vertex_ids();
        if (src.size() != dst.size())
            throw std::invalid_argument("fence_reflection_group: lengths are not palindromic");
        r.sigma[from] = to;
        auto& m = r.maps[from];
        std::int64_t L = dst.back();
        for (std::int64_t v : src) m[v] = L - v;
    }
    return FiniteGroup(sys, {std::move(r)});
}

inline nlohmann::json automorphism_to_json(const SystemAutomorphism& g) {
    nlohmann::json j;
    j["name"] = g.name;
    nlohmann::json sigma = nlohmann::json::array();
    for (const auto& [from, to] : g.sigma) sigma.push_back({from, to});
    j["sigma"] = std::move(sigma);
    nlohmann::json maps = nlohmann::json::object();
    for (const auto& [Y, m] : g.maps) {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& [v, gv] : m) pairs.push_back({v, gv});
        maps[std::to_string(Y)] = std::move(pairs);
    }
    j["maps"] = std::move(maps);
    return j;
}

inline nlohmann::json group_to_json(const FiniteGroup& group) {
    nlohmann::json j;
    j["schema"] = "projcx-group-v1";
    nlohmann::json elems = nlohmann::json::array();
    for (std::size_t i = 0; i < group.size(); ++i) elems.push_back(automorphism_to_json(group.element(i)));
    j["elements"] = std::move(elems);
    return j;
}

inline SystemAutomorphism automorphism_from_json(const nlohmann::json& j) {
    SystemAutomorphism g;
    if (j.contains("name")) g.name = j.at("name").get<std::string>();
    for (const auto& pair : j.at("sigma")) g.sigma[pair.at(0).get<SpaceId>()] = pair.at(1).get<SpaceId>();
    for (const auto& [key, pairs] : j.at("maps").items()) {
        auto& m = g.maps[std::stoll(key)];
        for (const auto& pair : pairs) m[pair.at(0).get<std::int64_t>()] = pair.at(1).get<std::int64_t>();
    }
    return g;
}

inline FiniteGroup group_from_json(const nlohmann::json& j, const ProjectionSystem& sys) {
    if (!j.contains("schema") || j.at("schema") != "projcx-group-v1")
        throw JsonLoadError("group JSON: missing or unknown format tag");
    std::vector<SystemAutomorphism> elems;
    for (const auto& e : j.at("elements")) elems.push_back(automorphism_from_json(e));
    return FiniteGroup(sys, std::move(elems));
}

}  // namespace projcx
