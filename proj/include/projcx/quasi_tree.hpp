#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "ext_dist.hpp"
#include "graph.hpp"
#include "projection_complex.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "system.hpp"

namespace projcx {

/// Asserts the sharpened projection-equality axiom: whenever Y sees X and Z
/// at distance above theta, the projections of X and Z onto each other's
/// witness space coincide as vertex sets.
inline AxiomReport projection_equality_check(const ProjectionSystem& sys, std::int64_t theta) {
    AxiomReport rep;
    rep.check = "projection_equality";
    const DistanceView& v = sys.distances();
    const int n = v.n();
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            for (int z = 0; z < n; ++z) {
                if (z == y || z == x) continue;
                rep.bump("triples_checked");
                if (!(v.d_idx(y, x, z) > ExtDist(theta))) continue;
                rep.bump("hypotheses");
                SpaceId X = v.id_at(x), Z = v.id_at(z), Y = v.id_at(y);
                if (sys.proj(X, Y) != sys.proj(X, Z))
                    rep.add_violation({"projection_equality",
                                       {Y, X, Z},
                                       {v.d_idx(y, x, z)},
                                       "projections onto the near space differ despite a far witness"});
            }
        }
    if (rep.counts["hypotheses"] == 0) rep.note("vacuous: hypothesis never fired");
    return rep;
}

struct CkVertex {
    SpaceId space;
    std::int64_t vertex;
    bool operator==(const CkVertex&) const = default;
    bool operator<(const CkVertex& o) const { return std::tie(space, vertex) < std::tie(o.space, o.vertex); }
};

/// The quasi-tree of metric spaces: the disjoint union of the family's
/// graphs, glued by weight-K edges between the projection sets of every
/// pair of spaces adjacent in the projection complex.  Self-contained: owns
/// copies of the graphs (with full distance rows), the projection sets and
/// the distance table.
class CkGraph {
public:
    CkGraph(const ProjectionSystem& sys, std::int64_t K) : K_(K), view_(sys.distances()) {
        const std::int64_t theta = view_.declared_theta();
        if (K < theta + 1) throw std::invalid_argument("quasi-tree: K must be at least theta + 1");
        if (K < 4 * theta) notes_.push_back("K below 4*theta: distance formula and path guarantees need 4*theta");
        spaces_ = sys.space_ids();
        const int n = view_.n();

        for (SpaceId id : spaces_) {
            MetricSpaceGraph copy = sys.space(id);
            copy.precompute_all_rows();
            space_.emplace(id, std::move(copy));
            for (SpaceId other : spaces_)
                if (other != id) proj_[{id, other}] = sys.proj(id, other);
        }

        offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
        for (int i = 0; i < n; ++i)
            offsets_[static_cast<std::size_t>(i) + 1] =
                offsets_[static_cast<std::size_t>(i)] + space_.at(spaces_[static_cast<std::size_t>(i)]).vertex_count();

        // projection-complex adjacency
        adj_.assign(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
        for (int x = 0; x < n; ++x)
            for (int z = x + 1; z < n; ++z) {
                bool edge = true;
                for (int y = 0; y < n && edge; ++y) {
                    if (y == x || y == z) continue;
                    if (view_.d_idx(y, x, z) > ExtDist(K)) edge = false;
                }
                adj_[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)] = edge ? 1 : 0;
                adj_[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)] = edge ? 1 : 0;
            }

        WeightedGraph g(offsets_.back());
        for (int i = 0; i < n; ++i) {
            const auto& graph = space_.at(spaces_[static_cast<std::size_t>(i)]);
            for (const auto& [u, w] : graph.edge_list())
                g.add_edge(local_index(i, u), local_index(i, w), 1);
        }
        for (int x = 0; x < n; ++x)
            for (int z = x + 1; z < n; ++z) {
                if (!adj_[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)]) continue;
                SpaceId X = spaces_[static_cast<std::size_t>(x)], Z = spaces_[static_cast<std::size_t>(z)];
                for (std::int64_t p : proj_.at({Z, X}))
                    for (std::int64_t q : proj_.at({X, Z}))
                        g.add_edge(local_index(z, p), local_index(x, q), K);
            }
        g_ = std::move(g);
        g_->precompute_all_rows();
    }

    std::int64_t K() const { return K_; }
    std::int64_t theta() const { return view_.declared_theta(); }
    const std::vector<SpaceId>& space_ids() const { return spaces_; }
    const DistanceView& view() const { return view_; }
    const MetricSpaceGraph& space(SpaceId id) const { return space_.at(id); }
    const std::vector<std::int64_t>& proj(SpaceId target, SpaceId source) const { return proj_.at({target, source}); }
    const WeightedGraph& graph() const { return *g_; }
    const std::vector<std::string>& notes() const { return notes_; }

    std::size_t vertex_count() const { return offsets_.back(); }

    std::size_t index_of(CkVertex v) const {
        int s = view_.index_of(v.space);
        return local_index(s, v.vertex);
    }

    CkVertex vertex_at(std::size_t idx) const {
        if (idx >= offsets_.back()) throw std::invalid_argument("quasi-tree: vertex index out of range");
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), idx);
        int s = static_cast<int>(it - offsets_.begin()) - 1;
        SpaceId id = spaces_[static_cast<std::size_t>(s)];
        const auto& ids = space_.at(id).vertex_ids();
        return {id, ids[idx - offsets_[static_cast<std::size_t>(s)]]};
    }

    bool pc_adjacent(SpaceId a, SpaceId b) const {
        return adj_[static_cast<std::size_t>(view_.index_of(a))][static_cast<std::size_t>(view_.index_of(b))] != 0;
    }

    /// BFS distance in the projection complex.
    ExtDist pc_distance(SpaceId a, SpaceId b) const {
        int from = view_.index_of(a), to = view_.index_of(b);
        if (from == to) return ExtDist(0);
        const int n = view_.n();
        std::vector<std::int64_t> dist(static_cast<std::size_t>(n), -1);
        std::deque<int> queue{from};
        dist[static_cast<std::size_t>(from)] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w = 0; w < n; ++w)
                if (adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)] &&
                    dist[static_cast<std::size_t>(w)] < 0) {
                    if (w == to) return ExtDist(dist[static_cast<std::size_t>(u)] + 1);
                    dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                    queue.push_back(w);
                }
        }
        return ExtDist::infinity();
    }

    ExtDist distance(CkVertex a, CkVertex b) const { return g_->distance(index_of(a), index_of(b)); }

    /// Projection of a vertex: the vertex itself within its own space, the
    /// space's projection set elsewhere.
    std::vector<std::int64_t> ext_proj(SpaceId Y, CkVertex x) const {
        if (x.space == Y) return {x.vertex};
        return proj_.at({Y, x.space});
    }

    /// Distance seen from Y: diameter of the union of the two projections.
    ExtDist ext_d(SpaceId Y, CkVertex x, CkVertex z) const {
        const bool xin = x.space == Y, zin = z.space == Y;
        if (!xin && !zin) return view_.d(Y, x.space, z.space);
        const auto& graph = space_.at(Y);
        if (xin && zin) return ExtDist(graph.distance(x.vertex, z.vertex));
        const CkVertex inside = xin ? x : z;
        const CkVertex outside = xin ? z : x;
        std::int64_t best = 0;
        for (std::int64_t p : proj_.at({Y, outside.space}))
            best = std::max(best, graph.distance(p, inside.vertex));
        ExtDist spread = view_.d(Y, outside.space, outside.space);
        return max(ExtDist(best), spread);
    }

    /// Spaces seeing the pair at distance above L.  Unlike the core table,
    /// the spaces of x and z themselves may qualify.
    std::vector<SpaceId> y_l(CkVertex x, CkVertex z, std::int64_t L) const {
        std::vector<SpaceId> out;
        for (SpaceId Y : spaces_)
            if (ext_d(Y, x, z) > ExtDist(L)) out.push_back(Y);
        return out;
    }

private:
    std::size_t local_index(int space_idx, std::int64_t vertex_id) const {
        const auto& ids = space_.at(spaces_[static_cast<std::size_t>(space_idx)]).vertex_ids();
        auto it = std::lower_bound(ids.begin(), ids.end(), vertex_id);
        if (it == ids.end() || *it != vertex_id)
            throw std::invalid_argument("quasi-tree: vertex " + std::to_string(vertex_id) + " not in space " +
                                        std::to_string(spaces_[static_cast<std::size_t>(space_idx)]));
        return offsets_[static_cast<std::size_t>(space_idx)] + static_cast<std::size_t>(it - ids.begin());
    }

    std::int64_t K_;
    DistanceView view_;
    std::vector<SpaceId> spaces_;
    std::map<SpaceId, MetricSpaceGraph> space_;
    std::map<std::pair<SpaceId, SpaceId>, std::vector<std::int64_t>> proj_;
    std::vector<std::size_t> offsets_;
    std::vector<std::vector<char>> adj_;
    std::optional<WeightedGraph> g_;
    std::vector<std::string> notes_;
};

inline CkGraph build_ck(const ProjectionSystem& sys, std::int64_t K) { return CkGraph(sys, K); }

/// Checks the two-sided distance formula sum/4 <= d_C <= 2*sum + 3K on
/// vertex pairs, exhaustively up to `pair_cutoff` vertices and by seeded
/// sampling above it.
inline AxiomReport distance_formula_check(const CkGraph& ck, std::size_t pair_cutoff = 2000,
                                          std::size_t sample_pairs = 20000, std::uint64_t seed = 1) {
    AxiomReport rep;
    rep.check = "distance_formula";
    const std::int64_t K = ck.K();
    const std::size_t n = ck.vertex_count();

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n <= pair_cutoff) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) pairs.emplace_back(a, b);
    } else {
        rep.mode = "sampled";
        rep.seed = seed;
        Rng rng(seed);
        for (std::size_t i = 0; i < sample_pairs; ++i) {
            std::size_t a = static_cast<std::size_t>(rng.below(n));
            std::size_t b = static_cast<std::size_t>(rng.below(n));
            pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    }

    for (auto [a, b] : pairs) {
        CkVertex x = ck.vertex_at(a), z = ck.vertex_at(b);
        ExtDist dc = ck.distance(x, z);
        std::int64_t sum = 0;
        for (SpaceId Y : ck.space_ids()) {
            ExtDist dy = ck.ext_d(Y, x, z);
            if (dy > ExtDist(K)) sum += dy.value();
        }
        rep.bump("pairs_checked");
        if (dc.is_infinite()) {
            rep.add_violation({"distance_formula", {x.space, z.space}, {dc}, "quasi-tree is disconnected"});
            continue;
        }
        if (4 * dc.value() < sum || dc.value() > 2 * sum + 3 * K)
            rep.add_violation({"distance_formula",
                               {x.space, z.space},
                               {dc, ExtDist(sum)},
                               "distance " + dc.str() + " violates bounds for sum " + std::to_string(sum) +
                                   " at vertices " + std::to_string(x.vertex) + "," + std::to_string(z.vertex)});
    }
    return rep;
}

struct CkPath {
    std::vector<CkVertex> vertices;
    std::int64_t weight;
};

/// The standard path between two vertices: geodesics inside the spaces of
/// the betweenness chain, K-edges between consecutive projection points.
/// Projection points are chosen lexicographically smallest.  Throws if a
/// required gluing edge is missing or the weight exceeds its certificate
/// bound (both indicate the projection-equality axiom fails).
inline CkPath ck_standard_path(const CkGraph& ck, CkVertex x, CkVertex z) {
    const DistanceView& v = ck.view();
    std::vector<SpaceId> chain;
    if (x.space == z.space)
        chain = {x.space};
    else {
        chain.push_back(x.space);
        for (SpaceId y : y_k(v, ck.K(), x.space, z.space)) chain.push_back(y);
        chain.push_back(z.space);
    }

    CkPath path;
    path.weight = 0;
    std::int64_t certificate = 0;
    CkVertex cursor = x;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        SpaceId here = chain[i];
        certificate += ck.ext_d(here, x, z).value();
        // entry point within this space
        CkVertex enter = cursor;
        CkVertex leave{};
        if (i + 1 < chain.size()) {
            auto next_proj = ck.ext_proj(here, z);
            leave = {here, *std::min_element(next_proj.begin(), next_proj.end())};
        } else {
            leave = z;
        }
        const auto& graph = ck.space(here);
        auto geo = graph.shortest_path(enter.vertex, leave.vertex);
        for (std::size_t j = (path.vertices.empty() ? 0u : 1u); j < geo.size(); ++j)
            path.vertices.push_back({here, geo[j]});
        if (path.vertices.empty()) path.vertices.push_back({here, geo.front()});
        path.weight += static_cast<std::int64_t>(geo.size()) - 1;

        if (i + 1 < chain.size()) {
            SpaceId next = chain[i + 1];
            certificate += ck.K();
            auto enter_proj = ck.ext_proj(next, x);
            CkVertex arrive{next, *std::min_element(enter_proj.begin(), enter_proj.end())};
            // the gluing edge must be present: leave must project-match next
            const auto& out_set = ck.proj(here, next);
            const auto& in_set = ck.proj(next, here);
            bool leave_ok = std::binary_search(out_set.begin(), out_set.end(), leave.vertex);
            bool arrive_ok = std::binary_search(in_set.begin(), in_set.end(), arrive.vertex);
            if (!ck.pc_adjacent(here, next) || !leave_ok || !arrive_ok)
                throw std::runtime_error("ck_standard_path: missing gluing edge between spaces " +
                                         std::to_string(here) + " and " + std::to_string(next));
            path.vertices.push_back(arrive);
            path.weight += ck.K();
            cursor = arrive;
        }
    }
    if (path.weight > certificate)
        throw std::runtime_error("ck_standard_path: weight " + std::to_string(path.weight) +
                                 " exceeds its certificate " + std::to_string(certificate));
    return path;
}

struct ChainSplit {
    std::vector<SpaceId> chain;  // standard chain of spaces from x.space to z.space
    std::size_t k = 0;           // first chain index whose projection separates y from z
    bool valid = true;
    std::optional<SpaceId> witness;  // space past k+1 where y's projection matches neither endpoint
};

/// Locates where a third point splits the standard chain of (x, z): before
/// index k it projects with z, past k+1 it must project with x.
inline ChainSplit chain_split(const CkGraph& ck, CkVertex x, CkVertex z, CkVertex y) {
    ChainSplit out;
    out.chain.push_back(x.space);
    if (x.space != z.space) {
        for (SpaceId w : y_k(ck.view(), ck.K(), x.space, z.space)) out.chain.push_back(w);
        out.chain.push_back(z.space);
    }
    const std::size_t m = out.chain.size();
    out.k = m - 1;
    for (std::size_t j = 0; j < m; ++j)
        if (ck.ext_proj(out.chain[j], y) != ck.ext_proj(out.chain[j], z)) {
            out.k = j;
            break;
        }
    for (std::size_t j = out.k + 2; j < m; ++j)
        if (ck.ext_proj(out.chain[j], y) != ck.ext_proj(out.chain[j], x)) {
            out.valid = false;
            out.witness = out.chain[j];
            break;
        }
    return out;
}

struct CkPackOptions {
    std::size_t pair_cutoff = 600;     // exhaustive pair scans below this many vertices
    std::size_t sample_pairs = 4000;   // pairs sampled above the cutoff
    std::size_t divide_samples = 2000; // (x, y, z) triples for the splitting check
    std::size_t far_path_samples = 96; // avoidance BFS runs for the far-projection check
    std::uint64_t seed = 1;
};

/// Structural facts about the quasi-tree: projections are coarsely
/// Lipschitz, projections split along standard chains, far projections are
/// blind to single edges, every connecting path enters the 3K-neighborhood
/// of a far projection, spaces embed isometrically, and collapsing spaces
/// is K-Lipschitz onto the projection complex.
inline AxiomReport ck_property_pack(const CkGraph& ck, const CkPackOptions& opts = {}) {
    AxiomReport rep;
    rep.check = "ck_property_pack";
    const std::int64_t K = ck.K();
    const std::int64_t theta = ck.theta();
    const std::size_t n = ck.vertex_count();
    Rng rng(opts.seed);
    if (K < 4 * theta) rep.note("K below 4*theta: far-projection conclusions are not guaranteed");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n <= opts.pair_cutoff) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    } else {
        rep.mode = "sampled";
        rep.seed = opts.seed;
        for (std::size_t i = 0; i < opts.sample_pairs; ++i) {
            std::size_t a = static_cast<std::size_t>(rng.below(n));
            std::size_t b = static_cast<std::size_t>(rng.below(n));
            if (a == b) continue;
            pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    }

    // coarse Lipschitz projections, intra-space embedding, collapse map
    std::map<SpaceId, std::int64_t> diameter;
    for (SpaceId id : ck.space_ids()) {
        const auto& g = ck.space(id);
        diameter[id] = g.set_diameter(g.vertex_ids());
    }
    for (auto [a, b] : pairs) {
        CkVertex x = ck.vertex_at(a), z = ck.vertex_at(b);
        ExtDist dc = ck.distance(x, z);
        for (SpaceId Y : ck.space_ids()) {
            ExtDist dy = ck.ext_d(Y, x, z);
            rep.bump("lipschitz_checked");
            bool ok = dc >= ExtDist(theta) ? !(dy > dc) : !(dy > ExtDist(theta));
            if (!ok)
                rep.add_violation({"coarse_lipschitz",
                                   {Y, x.space, z.space},
                                   {dy, dc},
                                   "projection distance exceeds its coarse Lipschitz bound"});
        }
        if (x.space == z.space) {
            std::int64_t rho = ck.space(x.space).distance(x.vertex, z.vertex);
            rep.bump("embedding_checked");
            if (dc > ExtDist(rho))
                rep.add_violation({"intra_embedding",
                                   {x.space},
                                   {dc, ExtDist(rho)},
                                   "quasi-tree distance exceeds the space's own distance"});
            if (2 * K > diameter[x.space] && dc != ExtDist(rho))
                rep.add_violation({"intra_embedding",
                                   {x.space},
                                   {dc, ExtDist(rho)},
                                   "detour beats the intra-space geodesic despite 2K above the diameter"});
        }
        ExtDist dp = ck.pc_distance(x.space, z.space);
        rep.bump("collapse_checked");
        if (!dp.is_infinite() && !dc.is_infinite() && K * dp.value() > dc.value())
            rep.add_violation({"collapse_lipschitz",
                               {x.space, z.space},
                               {dp, dc},
                               "complex distance times K exceeds the quasi-tree distance"});
    }

    // splitting along the standard chain
    for (std::size_t i = 0; i < opts.divide_samples; ++i) {
        CkVertex x = ck.vertex_at(static_cast<std::size_t>(rng.below(n)));
        CkVertex z = ck.vertex_at(static_cast<std::size_t>(rng.below(n)));
        CkVertex y = ck.vertex_at(static_cast<std::size_t>(rng.below(n)));
        if (x.space == z.space) continue;
        ChainSplit split = chain_split(ck, x, z, y);
        rep.bump("divide_checked");
        if (!split.valid)
            rep.add_violation({"chain_divide",
                               {*split.witness, x.space, z.space, y.space},
                               {ExtDist(static_cast<std::int64_t>(split.k))},
                               "projection of the third point matches neither endpoint beyond the split"});
    }

    // far projections ignore single edges
    for (const auto& [u, w, wt] : ck.graph().edge_list()) {
        CkVertex x = ck.vertex_at(u), z = ck.vertex_at(w);
        for (SpaceId Y : ck.space_ids()) {
            std::int64_t best = -1;
            for (std::int64_t p : ck.ext_proj(Y, x)) {
                ExtDist d = ck.distance(x, {Y, p});
                if (!d.is_infinite() && (best < 0 || d.value() < best)) best = d.value();
            }
            if (best <= 3 * K) continue;
            rep.bump("far_edge_checked");
            if (ck.ext_proj(Y, x) != ck.ext_proj(Y, z))
                rep.add_violation({"far_edge",
                                   {Y, x.space, z.space},
                                   {ExtDist(best)},
                                   "projection changed along an edge despite the base being far"});
        }
    }

    // every connecting path meets the 3K-neighborhood of a far projection
    {
        std::size_t done = 0;
        std::size_t attempts = 0;
        while (done < opts.far_path_samples && attempts < opts.far_path_samples * 20) {
            ++attempts;
            CkVertex x = ck.vertex_at(static_cast<std::size_t>(rng.below(n)));
            CkVertex z = ck.vertex_at(static_cast<std::size_t>(rng.below(n)));
            std::vector<SpaceId> far;
            for (SpaceId Y : ck.space_ids())
                if (ck.ext_d(Y, x, z) > ExtDist(theta)) far.push_back(Y);
            if (far.empty()) continue;
            SpaceId Y = far[static_cast<std::size_t>(rng.below(far.size()))];
            ++done;
            rep.bump("far_path_checked");
            // vertices within 3K of the projection set are forbidden; if z
            // stays reachable, some path avoids the neighborhood
            std::vector<std::int64_t> from_proj(ck.vertex_count(), -1);
            {
                using Item = std::pair<std::int64_t, std::size_t>;
                std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
                for (std::int64_t p : ck.ext_proj(Y, x)) {
                    std::size_t s = ck.index_of({Y, p});
                    from_proj[s] = 0;
                    pq.emplace(0, s);
                }
                while (!pq.empty()) {
                    auto [d, u2] = pq.top();
                    pq.pop();
                    if (d != from_proj[u2]) continue;
                    for (const auto& [v2, w2] : ck.graph().neighbors(u2)) {
                        std::int64_t nd = d + w2;
                        if (from_proj[v2] < 0 || nd < from_proj[v2]) {
                            from_proj[v2] = nd;
                            pq.emplace(nd, v2);
                        }
                    }
                }
            }
            std::size_t sx = ck.index_of(x), sz = ck.index_of(z);
            auto allowed = [&](std::size_t i) { return from_proj[i] < 0 || from_proj[i] > 3 * K; };
            if (!allowed(sx) || !allowed(sz)) continue;  // endpoints inside the neighborhood: trivially met
            std::vector<char> seen(ck.vertex_count(), 0);
            std::deque<std::size_t> queue{sx};
            seen[sx] = 1;
            bool escaped = false;
            while (!queue.empty() && !escaped) {
                std::size_t u2 = queue.front();
                queue.pop_front();
                for (const auto& [v2, w2] : ck.graph().neighbors(u2)) {
                    if (seen[v2] || !allowed(v2)) continue;
                    if (v2 == sz) {
                        escaped = true;
                        break;
                    }
                    seen[v2] = 1;
                    queue.push_back(v2);
                }
            }
            if (escaped)
                rep.add_violation({"far_avoidance",
                                   {Y, x.space, z.space},
                                   {ck.ext_d(Y, x, z)},
                                   "a path avoids the 3K-neighborhood of a far projection"});
        }
    }

    for (const char* key : {"lipschitz_checked", "embedding_checked", "collapse_checked", "divide_checked",
                            "far_edge_checked", "far_path_checked"}) {
        if (!rep.counts.count(key)) rep.counts[key] = 0;
        if (rep.counts[key] == 0) rep.note(std::string(key) + ": vacuous, no qualifying configuration");
    }
    return rep;
}

/// Measures a space's own bottleneck constant: how far a geodesic vertex
/// can be from an alternative path between the same endpoints.  Trees and
/// paths measure 0.
inline std::int64_t measure_space_bottleneck(const MetricSpaceGraph& g, std::size_t pair_samples = 64,
                                             std::size_t paths_per_pair = 4, std::uint64_t seed = 1) {
    const auto& ids = g.vertex_ids();
    if (ids.size() < 2) return 0;
    Rng rng(seed);
    std::int64_t worst = 0;
    for (std::size_t s = 0; s < pair_samples; ++s) {
        std::int64_t a = ids[static_cast<std::size_t>(rng.below(ids.size()))];
        std::int64_t b = ids[static_cast<std::size_t>(rng.below(ids.size()))];
        if (a == b) continue;
        auto geo = g.shortest_path(a, b);
        for (std::size_t t = 0; t < paths_per_pair; ++t) {
            std::int64_t mid = ids[static_cast<std::size_t>(rng.below(ids.size()))];
            auto alt = g.shortest_path(a, mid);
            auto tail = g.shortest_path(mid, b);
            alt.insert(alt.end(), tail.begin() + 1, tail.end());
            for (std::int64_t w : geo) {
                std::int64_t nearest = -1;
                for (std::int64_t v : alt) {
                    std::int64_t d = g.distance(w, v);
                    if (nearest < 0 || d < nearest) nearest = d;
                }
                worst = std::max(worst, nearest);
            }
        }
    }
    return worst;
}

struct CkBottleneckOptions {
    std::int64_t space_bottleneck = 0;  // uniform constant of the member spaces (0 for trees and paths)
    std::size_t pair_samples = 40;
    std::size_t paths_per_pair = 6;
    std::uint64_t seed = 1;
};

/// Samples vertex pairs and alternative paths and measures how far the
/// standard path strays from them; the observed radius must stay within
/// 8K + 4D.  Reports the largest radius needed.
inline AxiomReport ck_bottleneck_check(const CkGraph& ck, const CkBottleneckOptions& opts = {}) {
    AxiomReport rep;
    rep.check = "ck_bottleneck";
    rep.mode = "sampled";
    rep.seed = opts.seed;
    const std::int64_t cap = 8 * ck.K() + 4 * opts.space_bottleneck;
    const std::size_t n = ck.vertex_count();
    Rng rng(opts.seed);
    std::int64_t worst = 0;

    for (std::size_t s = 0; s < opts.pair_samples; ++s) {
        CkVertex x = ck.vertex_at(static_cast<std::size_t>(rng.below(n)));
        CkVertex z = ck.vertex_at(static_cast<std::size_t>(rng.below(n)));
        if (x == z) continue;
        CkPath sp = ck_standard_path(ck, x, z);
        for (std::size_t t = 0; t < opts.paths_per_pair; ++t) {
            // detour through a random waypoint, concatenating two shortest paths
            std::size_t mid = static_cast<std::size_t>(rng.below(n));
            std::vector<std::size_t> alt;
            auto extend = [&](std::size_t from, std::size_t to) {
                // walk a shortest path greedily using the distance rows
                std::size_t at = from;
                if (alt.empty()) alt.push_back(at);
                while (at != to) {
                    std::size_t next = at;
                    std::int64_t best = -1;
                    for (const auto& [v2, w2] : ck.graph().neighbors(at)) {
                        ExtDist rest = ck.graph().distance(v2, to);
                        if (rest.is_infinite()) continue;
                        std::int64_t through = w2 + rest.value();
                        if (best < 0 || through < best || (through == best && v2 < next)) {
                            best = through;
                            next = v2;
                        }
                    }
                    if (next == at) throw std::runtime_error("ck_bottleneck_check: stuck while tracing a path");
                    alt.push_back(next);
                    at = next;
                }
            };
            extend(ck.index_of(x), mid);
            extend(mid, ck.index_of(z));
            rep.bump("paths_checked");
            std::int64_t radius = 0;
            for (const CkVertex& w : sp.vertices) {
                std::int64_t nearest = -1;
                std::size_t wi = ck.index_of(w);
                for (std::size_t av : alt) {
                    ExtDist d = ck.graph().distance(wi, av);
                    if (!d.is_infinite() && (nearest < 0 || d.value() < nearest)) nearest = d.value();
                }
                if (nearest < 0) nearest = cap + 1;
                radius = std::max(radius, nearest);
            }
            worst = std::max(worst, radius);
            if (radius > cap)
                rep.add_violation({"bottleneck_radius",
                                   {x.space, z.space},
                                   {ExtDist(radius), ExtDist(cap)},
                                   "standard path strays beyond the radius cap from an alternative path"});
        }
    }
    rep.counts["largest_radius"] = worst;
    if (!rep.counts.count("paths_checked")) {
        rep.counts["paths_checked"] = 0;
        rep.note("paths_checked: vacuous, no qualifying configuration");
    }
    return rep;
}

inline nlohmann::json ck_to_json(const CkGraph& ck) {
    nlohmann::json j;
    j["schema"] = "projcx-ck-v1";
    j["K"] = ck.K();
    nlohmann::json verts = nlohmann::json::array();
    for (std::size_t i = 0; i < ck.vertex_count(); ++i) {
        CkVertex v = ck.vertex_at(i);
        verts.push_back({{"space", v.space}, {"vertex", v.vertex}});
    }
    j["vertices"] = std::move(verts);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [u, w, wt] : ck.graph().edge_list()) edges.push_back({u, w, wt});
    j["edges"] = std::move(edges);
    return j;
}

}  // namespace projcx
