#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ext_dist.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "system.hpp"

namespace projcx {

/// Members of Y_K(X, Z): the spaces other than X, Z that see the pair at
/// distance above K.  Unsorted.
inline std::vector<SpaceId> y_k_members(const DistanceView& v, std::int64_t K, SpaceId X, SpaceId Z) {
    if (X == Z) throw std::invalid_argument("y_k: X = Z");
    int x = v.index_of(X), z = v.index_of(Z);
    std::vector<SpaceId> out;
    for (int y = 0; y < v.n(); ++y) {
        if (y == x || y == z) continue;
        if (v.d_idx(y, x, z) > ExtDist(K)) out.push_back(v.id_at(y));
    }
    return out;
}

/// Y_K(X, Z) sorted by betweenness.  Before sorting, totality, antisymmetry
/// and transitivity of the comparator are verified exhaustively; a failure
/// throws with a witness, since it means the input is not a strong system at
/// its declared theta.
inline std::vector<SpaceId> y_k(const DistanceView& v, std::int64_t K, SpaceId X, SpaceId Z) {
    std::vector<SpaceId> members = y_k_members(v, K, X, Z);
    const std::int64_t theta = v.declared_theta();
    auto less = [&](SpaceId a, SpaceId b) { return v.d(a, X, b) > ExtDist(theta); };
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            bool ab = less(members[i], members[j]);
            bool ba = less(members[j], members[i]);
            if (ab == ba)
                throw std::runtime_error("y_k order on (" + std::to_string(X) + "," + std::to_string(Z) +
                                         "): elements " + std::to_string(members[i]) + " and " +
                                         std::to_string(members[j]) +
                                         (ab ? " compare below each other" : " are incomparable"));
        }
    for (SpaceId a : members)
        for (SpaceId b : members)
            for (SpaceId c : members) {
                if (a == b || b == c || a == c) continue;
                if (less(a, b) && less(b, c) && !less(a, c))
                    throw std::runtime_error("y_k order on (" + std::to_string(X) + "," + std::to_string(Z) +
                                             "): transitivity fails through " + std::to_string(b));
            }
    std::sort(members.begin(), members.end(), less);
    return members;
}

/// The graph P_K: vertices are the spaces, an edge joins X and Z exactly
/// when Y_K(X, Z) is empty.  Distances are combinatorial (BFS).
class ComplexGraph {
public:
    ComplexGraph(const DistanceView& v, std::int64_t K) : K_(K), ids_(v.space_ids()) {
        const std::int64_t theta = v.declared_theta();
        if (K < 2 * theta) throw std::invalid_argument("projection complex: K below 2*theta");
        if (K < 3 * theta) notes_.push_back("K below 3*theta: distance and bottleneck guarantees need 3*theta");
        const int n = v.n();
        adj_.assign(static_cast<std::size_t>(n), {});
        for (int x = 0; x < n; ++x)
            for (int z = x + 1; z < n; ++z) {
                bool edge = true;
                for (int y = 0; y < n && edge; ++y) {
                    if (y == x || y == z) continue;
                    if (v.d_idx(y, x, z) > ExtDist(K)) edge = false;
                }
                if (edge) {
                    adj_[static_cast<std::size_t>(x)].push_back(z);
                    adj_[static_cast<std::size_t>(z)].push_back(x);
                    edges_.emplace_back(ids_[static_cast<std::size_t>(x)], ids_[static_cast<std::size_t>(z)]);
                }
            }
    }

    std::int64_t K() const { return K_; }
    const std::vector<SpaceId>& vertices() const { return ids_; }
    const std::vector<std::pair<SpaceId, SpaceId>>& edges() const { return edges_; }
    const std::vector<std::string>& notes() const { return notes_; }

    int index_of(SpaceId id) const {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id) throw std::invalid_argument("complex: unknown space " + std::to_string(id));
        return static_cast<int>(it - ids_.begin());
    }

    bool adjacent(SpaceId a, SpaceId b) const {
        int i = index_of(a), j = index_of(b);
        const auto& row = adj_[static_cast<std::size_t>(i)];
        return std::find(row.begin(), row.end(), j) != row.end();
    }

    const std::vector<int>& neighbors_idx(int i) const { return adj_[static_cast<std::size_t>(i)]; }

    /// BFS distance; infinite when disconnected (cannot happen for strong
    /// inputs with K >= 2*theta).
    ExtDist distance(SpaceId a, SpaceId b) const {
        int from = index_of(a), to = index_of(b);
        if (from == to) return ExtDist(0);
        std::vector<std::int64_t> dist(ids_.size(), -1);
        std::deque<int> queue{from};
        dist[static_cast<std::size_t>(from)] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : adj_[static_cast<std::size_t>(u)])
                if (dist[static_cast<std::size_t>(w)] < 0) {
                    dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                    if (w == to) return ExtDist(dist[static_cast<std::size_t>(w)]);
                    queue.push_back(w);
                }
        }
        return ExtDist::infinity();
    }

    bool connected() const {
        if (ids_.empty()) return true;
        std::vector<char> seen(ids_.size(), 0);
        std::deque<int> queue{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : adj_[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++reached;
                    queue.push_back(w);
                }
        }
        return reached == ids_.size();
    }

private:
    std::int64_t K_;
    std::vector<SpaceId> ids_;
    std::vector<std::vector<int>> adj_;
    std::vector<std::pair<SpaceId, SpaceId>> edges_;
    std::vector<std::string> notes_;
};

inline ComplexGraph build_pc(const DistanceView& v, std::int64_t K) { return ComplexGraph(v, K); }

struct StandardPath {
    std::vector<SpaceId> elements;  // X, the sorted Y_K(X,Z), Z
};

/// Y_K(X, Z) with the endpoints attached, in betweenness order.  Verifies
/// that consecutive elements are adjacent in the complex and throws when
/// they are not.
inline StandardPath standard_path(const ComplexGraph& pc, const DistanceView& v, SpaceId X, SpaceId Z) {
    StandardPath path;
    path.elements.push_back(X);
    for (SpaceId y : y_k(v, pc.K(), X, Z)) path.elements.push_back(y);
    path.elements.push_back(Z);
    for (std::size_t i = 0; i + 1 < path.elements.size(); ++i)
        if (!pc.adjacent(path.elements[i], path.elements[i + 1]))
            throw std::runtime_error("standard path (" + std::to_string(X) + "," + std::to_string(Z) +
                                     "): consecutive elements " + std::to_string(path.elements[i]) + "," +
                                     std::to_string(path.elements[i + 1]) + " are not adjacent");
    return path;
}

inline StandardPath standard_path(const DistanceView& v, std::int64_t K, SpaceId X, SpaceId Z) {
    ComplexGraph pc(v, K);
    return standard_path(pc, v, X, Z);
}

/// Evaluates the six equivalent betweenness conditions on every ordered
/// pair from Y_{2*theta}(X, Z) and reports any disagreement.
inline AxiomReport order_equivalence_check(const DistanceView& v, std::int64_t theta, SpaceId X, SpaceId Z) {
    AxiomReport rep;
    rep.check = "order_equivalence";
    std::vector<SpaceId> members = y_k_members(v, 2 * theta, X, Z);
    if (members.size() <= 1) {
        rep.note("vacuous: fewer than two members");
        rep.counts["pairs_checked"] = 0;
        return rep;
    }
    const ExtDist th(theta);
    for (SpaceId a : members)
        for (SpaceId b : members) {
            if (a == b) continue;
            bool c1 = v.d(a, X, b) > th;
            bool c3 = !(v.d(b, X, a) > th);
            bool c4 = v.d(b, a, Z) > th;
            bool c6 = !(v.d(a, b, Z) > th);
            bool c2 = true, c5 = true;
            for (SpaceId w : v.space_ids()) {
                if (w != b && v.d(b, a, w) != v.d(b, X, w)) c2 = false;
                if (w != a && v.d(a, w, b) != v.d(a, w, Z)) c5 = false;
            }
            rep.bump("pairs_checked");
            if (c1 != c2 || c1 != c3 || c1 != c4 || c1 != c5 || c1 != c6)
                rep.add_violation({"order_equivalence",
                                   {a, b, X, Z},
                                   {},
                                   "conditions disagree: " + std::to_string(c1) + std::to_string(c2) +
                                       std::to_string(c3) + std::to_string(c4) + std::to_string(c5) +
                                       std::to_string(c6)});
        }
    return rep;
}

/// Betweenness distance bound: with n = |Y_K(X,Z)| + 1, the complex
/// distance satisfies floor(n/2) + 1 <= d(X,Z) <= n on every pair.
inline AxiomReport distance_bound_check(const DistanceView& v, std::int64_t K) {
    if (K < 3 * v.declared_theta())
        throw std::invalid_argument("distance_bound_check: needs K >= 3*theta");
    AxiomReport rep;
    rep.check = "distance_bound";
    ComplexGraph pc(v, K);
    const int n = v.n();
    for (int x = 0; x < n; ++x)
        for (int z = x + 1; z < n; ++z) {
            SpaceId X = v.id_at(x), Z = v.id_at(z);
            std::int64_t members = static_cast<std::int64_t>(y_k_members(v, K, X, Z).size());
            std::int64_t bound = members + 1;
            ExtDist d = pc.distance(X, Z);
            rep.bump("pairs_checked");
            if (d.is_infinite() || d.value() < bound / 2 + 1 || d.value() > bound)
                rep.add_violation({"distance_bound",
                                   {X, Z},
                                   {d, ExtDist(bound)},
                                   "complex distance " + d.str() + " outside [" + std::to_string(bound / 2 + 1) +
                                       ", " + std::to_string(bound) + "]"});
        }
    return rep;
}

/// True iff every vertex of the standard path from X to Z lies within
/// complex distance 2 of some vertex of `alt_path`.  `alt_path` must be an
/// actual path from X to Z in the complex.
inline bool bottleneck_check(const ComplexGraph& pc, const DistanceView& v, SpaceId X, SpaceId Z,
                             const std::vector<SpaceId>& alt_path) {
    if (alt_path.size() < 2 || alt_path.front() != X || alt_path.back() != Z)
        throw std::invalid_argument("bottleneck_check: alternative path must run from X to Z");
    for (std::size_t i = 0; i + 1 < alt_path.size(); ++i) {
        if (alt_path[i] == alt_path[i + 1]) throw std::invalid_argument("bottleneck_check: repeated vertex");
        if (!pc.adjacent(alt_path[i], alt_path[i + 1]))
            throw std::invalid_argument("bottleneck_check: not a path in the complex");
    }
    StandardPath sp = standard_path(pc, v, X, Z);
    for (SpaceId w : sp.elements) {
        bool close = false;
        for (SpaceId a : alt_path) {
            ExtDist d = pc.distance(w, a);
            if (!d.is_infinite() && d.value() <= 2) {
                close = true;
                break;
            }
        }
        if (!close) return false;
    }
    return true;
}

inline bool bottleneck_check(const DistanceView& v, std::int64_t K, SpaceId X, SpaceId Z,
                             const std::vector<SpaceId>& alt_path) {
    ComplexGraph pc(v, K);
    return bottleneck_check(pc, v, X, Z, alt_path);
}

struct DivideDecomposition {
    std::vector<SpaceId> initial;   // initial segment of Y_K(X, Y)
    std::vector<SpaceId> middle;    // at most two consecutive elements
    std::vector<SpaceId> terminal;  // terminal segment of Y_K(Y, Z)
};

/// Splits Y_K(X, Z) into three consecutive order segments: an initial one
/// that is also initial in Y_K(X, Y), a middle of size at most two, and a
/// terminal one that is also terminal in Y_K(Y, Z).  Throws with a witness
/// if no such split exists.
inline DivideDecomposition divide_decomposition(const DistanceView& v, std::int64_t K, SpaceId X, SpaceId Y,
                                                SpaceId Z) {
    if (X == Y || Y == Z || X == Z) throw std::invalid_argument("divide_decomposition: spaces must be distinct");
    if (K <= 2 * v.declared_theta())
        throw std::invalid_argument("divide_decomposition: needs K > 2*theta");
    std::vector<SpaceId> s = y_k(v, K, X, Z);
    std::vector<SpaceId> xy = y_k(v, K, X, Y);
    std::vector<SpaceId> yz = y_k(v, K, Y, Z);
    const std::size_t m = s.size();
    std::size_t max_prefix = 0;
    while (max_prefix < m && max_prefix < xy.size() && s[max_prefix] == xy[max_prefix]) ++max_prefix;
    for (std::size_t a = max_prefix + 1; a-- > 0;) {
        for (std::size_t b = a; b <= m && b - a <= 2; ++b) {
            std::size_t tail = m - b;
            if (tail > yz.size()) continue;
            if (!std::equal(s.begin() + static_cast<std::ptrdiff_t>(b), s.end(),
                            yz.end() - static_cast<std::ptrdiff_t>(tail)))
                continue;
            DivideDecomposition out;
            out.initial.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(a));
            out.middle.assign(s.begin() + static_cast<std::ptrdiff_t>(a), s.begin() + static_cast<std::ptrdiff_t>(b));
            out.terminal.assign(s.begin() + static_cast<std::ptrdiff_t>(b), s.end());
            return out;
        }
    }
    throw std::runtime_error("divide_decomposition: no admissible split of (" + std::to_string(X) + "," +
                             std::to_string(Y) + "," + std::to_string(Z) + "); the input is not a strong system");
}

/// Instantiates the projection-variation facts: projections to Z move by at
/// most theta along edges at complex distance >= 2 from Z; along anything
/// connected at distance >= 3 from Z the far elements and projections
/// stabilize.  Paths are covered exactly via connected components of the
/// induced subgraph, so the scan is exhaustive.
inline AxiomReport projection_variation_checks(const DistanceView& v, std::int64_t K) {
    const std::int64_t theta = v.declared_theta();
    if (K < 3 * theta) throw std::invalid_argument("projection_variation_checks: needs K >= 3*theta");
    AxiomReport rep;
    rep.check = "projection_variation";
    ComplexGraph pc(v, K);
    const int n = v.n();
    const ExtDist th(theta);

    // pairwise complex distances
    std::vector<std::vector<std::int64_t>> dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<std::int64_t> row(static_cast<std::size_t>(n), -1);
        std::deque<int> queue{i};
        row[static_cast<std::size_t>(i)] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : pc.neighbors_idx(u))
                if (row[static_cast<std::size_t>(w)] < 0) {
                    row[static_cast<std::size_t>(w)] = row[static_cast<std::size_t>(u)] + 1;
                    queue.push_back(w);
                }
        }
        dist[static_cast<std::size_t>(i)] = std::move(row);
    }

    // edges far from Z: projection to Z moves by at most theta
    auto at_least = [&](int i, int z, std::int64_t bound) {
        std::int64_t d = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(z)];
        return d < 0 || d >= bound;
    };
    for (int z = 0; z < n; ++z)
        for (const auto& [A, B] : pc.edges()) {
            int a = v.index_of(A), b = v.index_of(B);
            if (a == z || b == z) continue;
            if (!at_least(a, z, 2) && !at_least(b, z, 2)) continue;
            rep.bump("edge_checked");
            if (v.d_idx(z, a, b) > th)
                rep.add_violation({"edge_variation",
                                   {v.id_at(z), A, B},
                                   {v.d_idx(z, a, b)},
                                   "projection to a far vertex moves beyond theta along an edge"});
        }

    // components at distance >= 3 from Z: greatest far elements agree and
    // projections to Z stay within theta of each other
    for (int z = 0; z < n; ++z) {
        std::vector<char> in_h(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) in_h[static_cast<std::size_t>(i)] = at_least(i, z, 3) ? 1 : 0;
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (int start = 0; start < n; ++start) {
            if (!in_h[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
            std::vector<int> comp;
            std::deque<int> queue{start};
            seen[static_cast<std::size_t>(start)] = 1;
            while (!queue.empty()) {
                int u = queue.front();
                queue.pop_front();
                comp.push_back(u);
                for (int w : pc.neighbors_idx(u))
                    if (in_h[static_cast<std::size_t>(w)] && !seen[static_cast<std::size_t>(w)]) {
                        seen[static_cast<std::size_t>(w)] = 1;
                        queue.push_back(w);
                    }
            }
            if (comp.size() < 2) continue;
            std::sort(comp.begin(), comp.end());
            rep.bump("components_checked");
            SpaceId Zid = v.id_at(z);
            std::optional<SpaceId> greatest;
            bool greatest_agree = true;
            for (int u : comp) {
                auto far = y_k(v, 3 * theta, v.id_at(u), Zid);
                if (far.empty()) {
                    rep.add_violation({"greatest_far_element",
                                       {v.id_at(u), Zid},
                                       {},
                                       "no far element despite complex distance >= 3"});
                    greatest_agree = false;
                    continue;
                }
                if (!greatest)
                    greatest = far.back();
                else if (*greatest != far.back())
                    greatest_agree = false;
            }
            rep.bump("greatest_checked");
            if (!greatest_agree)
                rep.add_violation({"greatest_far_element",
                                   {Zid, v.id_at(comp.front())},
                                   {},
                                   "greatest far elements differ across a connected far component"});
            for (std::size_t i = 0; i < comp.size(); ++i)
                for (std::size_t j = i + 1; j < comp.size(); ++j) {
                    rep.bump("component_pairs_checked");
                    if (v.d_idx(z, comp[i], comp[j]) > th)
                        rep.add_violation({"component_variation",
                                           {Zid, v.id_at(comp[i]), v.id_at(comp[j])},
                                           {v.d_idx(z, comp[i], comp[j])},
                                           "projection to a far vertex varies beyond theta across a component"});
                }
        }
    }

    for (const char* key : {"edge_checked", "components_checked", "component_pairs_checked"}) {
        if (!rep.counts.count(key)) rep.counts[key] = 0;
        if (rep.counts[key] == 0) rep.note(std::string(key) + ": vacuous, no qualifying configuration");
    }
    return rep;
}

/// Certifies the local-to-global tree criterion for a labeled graph: if Q
/// is connected, adjacent vertices carry distinct labels, and every 2-path
/// has its middle label seeing the outer two at distance above K, then the
/// labeling is injective, Q is a tree, and label sequences along immersed
/// paths are ordered chains between their endpoints.  Returns false (with
/// the failures in `report`) when the hypothesis does not hold; throws
/// CertificationError if the hypothesis holds but a conclusion fails.
inline bool certify_tree_map(const DistanceView& v, std::int64_t K, std::size_t q_vertices,
                             const std::vector<std::pair<int, int>>& q_edges, const std::vector<SpaceId>& phi,
                             AxiomReport* report = nullptr, std::size_t path_sample_cap = 4096) {
    if (phi.size() != q_vertices) throw std::invalid_argument("certify_tree_map: one label per vertex required");
    if (q_vertices == 0) throw std::invalid_argument("certify_tree_map: empty graph");
    std::vector<std::vector<int>> adj(q_vertices);
    std::set<std::pair<int, int>> edge_set;
    for (auto [a, b] : q_edges) {
        if (a < 0 || b < 0 || a >= static_cast<int>(q_vertices) || b >= static_cast<int>(q_vertices) || a == b)
            throw std::invalid_argument("certify_tree_map: bad edge");
        auto key = std::minmax(a, b);
        if (!edge_set.insert({key.first, key.second}).second) continue;
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());

    {
        std::vector<char> seen(q_vertices, 0);
        std::deque<int> queue{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : adj[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++reached;
                    queue.push_back(w);
                }
        }
        if (reached != q_vertices) throw std::invalid_argument("certify_tree_map: graph is not connected");
    }
    for (SpaceId label : phi) v.index_of(label);  // reject unknown labels

    AxiomReport local;
    AxiomReport& rep = report ? *report : local;
    rep.check = "tree_map";

    bool hypothesis_ok = true;
    for (auto [a, b] : edge_set) {
        rep.bump("adjacent_checked");
        if (phi[static_cast<std::size_t>(a)] == phi[static_cast<std::size_t>(b)]) {
            hypothesis_ok = false;
            rep.add_violation({"tree_map_hypothesis",
                               {phi[static_cast<std::size_t>(a)]},
                               {},
                               "adjacent vertices " + std::to_string(a) + "," + std::to_string(b) +
                                   " carry the same label"});
        }
    }
    if (hypothesis_ok)
        for (std::size_t y = 0; y < q_vertices; ++y)
            for (std::size_t i = 0; i < adj[y].size(); ++i)
                for (std::size_t j = i + 1; j < adj[y].size(); ++j) {
                    int xq = adj[y][i], zq = adj[y][j];
                    rep.bump("two_paths_checked");
                    if (!(v.d(phi[y], phi[static_cast<std::size_t>(xq)], phi[static_cast<std::size_t>(zq)]) >
                          ExtDist(K))) {
                        hypothesis_ok = false;
                        rep.add_violation({"tree_map_hypothesis",
                                           {phi[y], phi[static_cast<std::size_t>(xq)],
                                            phi[static_cast<std::size_t>(zq)]},
                                           {v.d(phi[y], phi[static_cast<std::size_t>(xq)],
                                                phi[static_cast<std::size_t>(zq)])},
                                           "gap at the middle of a 2-path is not above K"});
                    }
                }
    if (!hypothesis_ok) return false;

    AxiomReport conclusion;
    conclusion.check = "tree_map_conclusion";
    {
        std::map<SpaceId, int> where;
        for (std::size_t i = 0; i < q_vertices; ++i) {
            auto [it, fresh] = where.emplace(phi[i], static_cast<int>(i));
            if (!fresh)
                conclusion.add_violation({"tree_map_injective",
                                          {phi[i]},
                                          {},
                                          "label repeats at vertices " + std::to_string(it->second) + "," +
                                              std::to_string(i)});
        }
    }
    if (edge_set.size() != q_vertices - 1)
        conclusion.add_violation({"tree_map_acyclic",
                                  {},
                                  {ExtDist(static_cast<std::int64_t>(edge_set.size()))},
                                  "connected graph with " + std::to_string(edge_set.size()) + " edges on " +
                                      std::to_string(q_vertices) + " vertices has a cycle"});
    if (!conclusion.passed) throw CertificationError(conclusion);

    // ordered containment along immersed paths; in a tree these are exactly
    // the vertex-pair geodesics, enumerated exhaustively below the cap
    std::vector<std::pair<int, int>> endpoint_pairs;
    for (int a = 0; a < static_cast<int>(q_vertices); ++a)
        for (int b = a + 1; b < static_cast<int>(q_vertices); ++b) endpoint_pairs.emplace_back(a, b);
    if (endpoint_pairs.size() > path_sample_cap) {
        Rng rng(path_sample_cap);
        rng.shuffle(endpoint_pairs);
        endpoint_pairs.resize(path_sample_cap);
        std::sort(endpoint_pairs.begin(), endpoint_pairs.end());
        rep.note("immersed paths sampled: " + std::to_string(path_sample_cap));
    }
    const std::int64_t theta = v.declared_theta();
    for (auto [a, b] : endpoint_pairs) {
        // unique path in the tree via BFS parents
        std::vector<int> parent(q_vertices, -1);
        std::deque<int> queue{a};
        parent[static_cast<std::size_t>(a)] = a;
        while (!queue.empty() && parent[static_cast<std::size_t>(b)] < 0) {
            int u = queue.front();
            queue.pop_front();
            for (int w : adj[static_cast<std::size_t>(u)])
                if (parent[static_cast<std::size_t>(w)] < 0) {
                    parent[static_cast<std::size_t>(w)] = u;
                    queue.push_back(w);
                }
        }
        std::vector<int> path;
        for (int u = b; u != a; u = parent[static_cast<std::size_t>(u)]) path.push_back(u);
        path.push_back(a);
        std::reverse(path.begin(), path.end());
        if (path.size() < 3) continue;
        rep.bump("immersed_paths_checked");
        SpaceId first = phi[static_cast<std::size_t>(path.front())];
        SpaceId last = phi[static_cast<std::size_t>(path.back())];
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
            SpaceId mid = phi[static_cast<std::size_t>(path[i])];
            if (!(v.d(mid, first, last) > ExtDist(K)))
                conclusion.add_violation({"tree_map_containment",
                                          {mid, first, last},
                                          {v.d(mid, first, last)},
                                          "interior label of an immersed path is not far from the endpoints"});
        }
        for (std::size_t i = 1; i + 1 < path.size(); ++i)
            for (std::size_t j = i + 1; j + 1 < path.size(); ++j) {
                SpaceId yi = phi[static_cast<std::size_t>(path[i])];
                SpaceId yj = phi[static_cast<std::size_t>(path[j])];
                if (!(v.d(yi, first, yj) > ExtDist(theta)))
                    conclusion.add_violation({"tree_map_order",
                                              {yi, yj, first, last},
                                              {v.d(yi, first, yj)},
                                              "labels along an immersed path are out of order"});
            }
    }
    if (!conclusion.passed) throw CertificationError(conclusion);
    return true;
}

}  // namespace projcx
