#pragma once

// Coset systems inside free products.  A finite model takes the ball of
// radius R in the auxiliary graph of G = Z_p * Z_q generated by S u H
// (H the second free factor as a complete subgraph, S a symmetric set of
// conjugated first-factor letters), treats the H-cosets that sit safely
// inside the ball as spaces with their own-relative metric, and measures
// projections through distance-minimizing geodesics.  A symbolic model
// handles G = Z_2 * Z, where cosets are infinite, by computing every
// distance from reduced words instead of materializing anything.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ext_dist.hpp"
#include "group_action.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "system.hpp"

namespace projcx {

namespace fp {

/// One block of a reduced word in Z_p * Z_q: `fac` 0 is the order-p letter
/// a, `fac` 1 is the letter b of order q (q = 0 meaning infinite order).
struct Block {
    int fac = 0;
    std::int64_t exp = 0;

    friend bool operator==(const Block& l, const Block& r) { return l.fac == r.fac && l.exp == r.exp; }
    friend bool operator<(const Block& l, const Block& r) {
        return std::tie(l.fac, l.exp) < std::tie(r.fac, r.exp);
    }
};

using Word = std::vector<Block>;

/// Reduced-word arithmetic in Z_p * Z_q.
class FreeProduct {
public:
    FreeProduct(std::int64_t p, std::int64_t q) : p_(p), q_(q) {
        if (p < 2 || q < 0 || q == 1) throw std::invalid_argument("free product: factor orders must be >= 2 (or 0)");
    }

    std::int64_t p() const { return p_; }
    std::int64_t q() const { return q_; }

    /// Exponent normal form for a factor; 0 means the letter vanishes.
    std::int64_t norm(int fac, std::int64_t e) const {
        std::int64_t ord = fac == 0 ? p_ : q_;
        if (ord == 0) return e;
        e %= ord;
        return e < 0 ? e + ord : e;
    }

    Word mul(Word a, const Word& b) const {
        for (const Block& blk : b) push(a, blk);
        return a;
    }

    Word inv(const Word& a) const {
        Word r;
        for (auto it = a.rbegin(); it != a.rend(); ++it) push(r, {it->fac, -it->exp});
        return r;
    }

    Word letter(int fac, std::int64_t exp) const {
        Word r;
        push(r, {fac, exp});
        return r;
    }

    std::string str(const Word& w) const {
        if (w.empty()) return "1";
        std::string s;
        for (const Block& blk : w) {
            s += blk.fac == 0 ? 'a' : 'b';
            if (blk.exp != 1) s += std::to_string(blk.exp);
        }
        return s;
    }

private:
    void push(Word& a, Block blk) const {
        blk.exp = norm(blk.fac, blk.exp);
        if (blk.exp == 0) return;
        if (!a.empty() && a.back().fac == blk.fac) {
            std::int64_t e = norm(blk.fac, a.back().exp + blk.exp);
            a.pop_back();
            if (e != 0) a.push_back({blk.fac, e});
        } else {
            a.push_back(blk);
        }
    }

    std::int64_t p_, q_;
};

}  // namespace fp

struct FreeProductSpec {
    std::int64_t p = 2;      // order of the first free factor
    std::int64_t q = 3;      // order of the second (the coset factor)
    int radius = 6;          // ball radius in the auxiliary graph
    int margin = 2;          // interior cosets stay this far from the boundary
    int conjugates = 2;      // how many b-conjugate families of a-letters generate
};

/// Ball model of the auxiliary graph of Z_p * Z_q with cosets of H = <b>
/// as spaces.  Distances inside a coset avoid that coset's own H-edges;
/// projections collect the endpoints of distance-minimizing geodesics.
/// The constant C is measured as the largest own-relative diameter of any
/// projection, and the system is finalized at theta = 3C + 1.
class FreeProductModel {
public:
    explicit FreeProductModel(const FreeProductSpec& spec) : spec_(spec), fp_(spec.p, spec.q) {
        if (spec.q < 2) throw std::invalid_argument("free product model: coset factor must be finite of order >= 2");
        if (spec.radius < 2) throw std::invalid_argument("free product model: radius must be at least 2");
        if (spec.margin < 1) throw std::invalid_argument("free product model: margin must be at least 1");
        if (spec.conjugates < 1 || spec.conjugates > spec.q)
            throw std::invalid_argument("free product model: conjugate count must lie in [1, q]");
        build();
    }

    const ProjectionSystem& system() const { return *system_; }
    std::int64_t C() const { return c_; }
    std::int64_t theta() const { return 3 * c_ + 1; }
    const AxiomReport& build_report() const { return build_report_; }

    std::size_t ball_size() const { return words_.size(); }
    std::size_t coset_count() const { return coset_reps_.size(); }
    std::size_t interior_count() const { return interior_.size(); }
    const std::vector<SpaceId>& space_ids() const { return space_ids_; }
    std::string space_label(SpaceId id) const { return fp_.str(coset_reps_[coset_of_space(id)]); }

    /// Own-relative distance between two vertices of an interior coset.
    ExtDist hat_distance(SpaceId id, std::int64_t x, std::int64_t z) const {
        const auto& members = coset_members_[coset_of_space(id)];
        const auto& table = hat_[static_cast<std::size_t>(space_index(id))];
        auto ix = member_index(members, x), iz = member_index(members, z);
        std::int64_t v = table[ix][iz];
        return v < 0 ? ExtDist::infinity() : ExtDist(v);
    }

    /// Every distance-minimizing geodesic between two interior cosets
    /// penetrates a third one only if the two project to identical sets on
    /// the far side.  The hypothesis is decided exactly: removing the
    /// middle coset's own edges must strictly increase (or disconnect)
    /// the distance between the other two.
    AxiomReport penetrate_check() const {
        AxiomReport rep;
        rep.check = "coset_penetration";
        const std::size_t m = interior_.size();
        for (std::size_t s = 0; s < m; ++s)
            for (std::size_t b = 0; b < m; ++b) {
                if (b == s) continue;
                std::vector<std::int64_t> avoid = multi_source(interior_[s], static_cast<int>(interior_[b]));
                for (std::size_t t = 0; t < m; ++t) {
                    if (t == s || t == b) continue;
                    rep.bump("triples_checked");
                    std::int64_t base = coset_dist_[s][t];
                    std::int64_t detour = min_over(avoid, interior_[t]);
                    if (detour >= 0 && detour <= base) continue;  // some geodesic misses coset b
                    rep.bump("hypothesis_matched");
                    if (proj_sets_[t][s] != proj_sets_[t][b])
                        rep.add_violation({"penetration_projection",
                                           {space_ids_[s], space_ids_[b], space_ids_[t]},
                                           {ExtDist(base), detour < 0 ? ExtDist::infinity() : ExtDist(detour)},
                                           "cosets " + label(s) + " and " + label(b) + " project differently to " +
                                               label(t) + " although every minimizing geodesic penetrates " +
                                               label(b)});
                }
            }
        if (rep.counts["hypothesis_matched"] == 0) rep.note("no triple satisfies the penetration hypothesis");
        return rep;
    }

    /// Own-relative diameter of every projection set, re-measured directly
    /// and compared against the stored constant.
    AxiomReport diameter_check() const {
        AxiomReport rep;
        rep.check = "projection_diameter";
        std::int64_t worst = 0;
        const std::size_t m = interior_.size();
        for (std::size_t t = 0; t < m; ++t)
            for (std::size_t s = 0; s < m; ++s) {
                if (t == s) continue;
                rep.bump("projections_measured");
                std::int64_t diam = proj_hat_diameter(t, s);
                worst = std::max(worst, diam);
                if (diam > c_)
                    rep.add_violation({"projection_diameter",
                                       {space_ids_[t], space_ids_[s]},
                                       {ExtDist(diam), ExtDist(c_)},
                                       "projection of " + label(s) + " to " + label(t) +
                                           " is wider than the measured constant"});
            }
        rep.counts["diameter_max"] = worst;
        rep.counts["diameter_bound"] = c_;
        return rep;
    }

    struct IntersectionBound {
        std::int64_t max_size = 0;
        std::string witness;
        std::size_t pairs_checked = 0;
    };

    /// Largest pairwise intersection of the conjugates w H w^-1 over
    /// distinct complete cosets, computed exactly by word arithmetic.
    IntersectionBound conjugate_intersection_bound() const {
        std::vector<std::pair<fp::Word, std::set<fp::Word>>> conj;
        for (std::size_t c = 0; c < coset_reps_.size(); ++c) {
            if (coset_members_[c].size() != static_cast<std::size_t>(spec_.q)) continue;
            std::set<fp::Word> elems;
            for (std::int64_t l = 0; l < spec_.q; ++l)
                elems.insert(fp_.mul(fp_.mul(coset_reps_[c], fp_.letter(1, l)), fp_.inv(coset_reps_[c])));
            conj.emplace_back(coset_reps_[c], std::move(elems));
        }
        IntersectionBound out;
        for (std::size_t i = 0; i < conj.size(); ++i)
            for (std::size_t j = i + 1; j < conj.size(); ++j) {
                ++out.pairs_checked;
                std::int64_t common = 0;
                for (const fp::Word& w : conj[i].second) common += conj[j].second.count(w);
                if (common > out.max_size) {
                    out.max_size = common;
                    out.witness = fp_.str(conj[i].first) + " / " + fp_.str(conj[j].first);
                }
            }
        return out;
    }

private:
    std::size_t space_index(SpaceId id) const {
        auto it = std::lower_bound(space_ids_.begin(), space_ids_.end(), id);
        if (it == space_ids_.end() || *it != id) throw std::invalid_argument("free product model: unknown space id");
        return static_cast<std::size_t>(it - space_ids_.begin());
    }
    std::size_t coset_of_space(SpaceId id) const { return interior_[space_index(id)]; }
    std::string label(std::size_t interior_idx) const { return fp_.str(coset_reps_[interior_[interior_idx]]); }

    static std::size_t member_index(const std::vector<int>& members, std::int64_t v) {
        auto it = std::lower_bound(members.begin(), members.end(), static_cast<int>(v));
        if (it == members.end() || *it != v)
            throw std::invalid_argument("free product model: vertex is not a coset member");
        return static_cast<std::size_t>(it - members.begin());
    }

    fp::Word coset_rep(fp::Word w) const {
        if (!w.empty() && w.back().fac == 1) w.pop_back();
        return w;
    }

    void build() {
        // generators: S runs over the chosen conjugates of the a-letters,
        // H over the nontrivial b-powers; both sets are inverse-closed
        std::vector<std::pair<fp::Word, bool>> moves;  // (word, is_h_move)
        for (int j = 0; j < spec_.conjugates; ++j)
            for (std::int64_t k = 1; k < spec_.p; ++k) {
                fp::Word w = fp_.mul(fp_.mul(fp_.letter(1, j), fp_.letter(0, k)), fp_.letter(1, -j));
                moves.emplace_back(std::move(w), false);
            }
        for (std::int64_t l = 1; l < spec_.q; ++l) moves.emplace_back(fp_.letter(1, l), true);

        // ball of the auxiliary graph
        std::map<fp::Word, std::int64_t> depth_of;
        std::deque<fp::Word> queue;
        depth_of[{}] = 0;
        queue.push_back({});
        while (!queue.empty()) {
            fp::Word w = queue.front();
            queue.pop_front();
            std::int64_t d = depth_of[w];
            if (d == spec_.radius) continue;
            for (const auto& [mv, is_h] : moves) {
                fp::Word t = fp_.mul(w, mv);
                if (depth_of.emplace(t, d + 1).second) queue.push_back(t);
            }
        }
        for (const auto& [w, d] : depth_of) words_.push_back(w);  // map order: sorted, deterministic
        std::map<fp::Word, int> id;
        for (std::size_t i = 0; i < words_.size(); ++i) id[words_[i]] = static_cast<int>(i);
        depth_.resize(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i) depth_[i] = depth_of[words_[i]];

        // cosets
        std::map<fp::Word, int> coset_id;
        for (const fp::Word& w : words_) coset_id.emplace(coset_rep(w), 0);
        int next = 0;
        for (auto& [rep, cid] : coset_id) {
            cid = next++;
            coset_reps_.push_back(rep);
        }
        coset_members_.assign(coset_reps_.size(), {});
        coset_of_.resize(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i) {
            int c = coset_id.at(coset_rep(words_[i]));
            coset_of_[i] = c;
            coset_members_[static_cast<std::size_t>(c)].push_back(static_cast<int>(i));
        }

        // tagged adjacency: H-edges carry the coset they live in
        adj_.assign(words_.size(), {});
        std::size_t edge_count = 0;
        for (std::size_t i = 0; i < words_.size(); ++i)
            for (const auto& [mv, is_h] : moves) {
                fp::Word t = fp_.mul(words_[i], mv);
                auto it = id.find(t);
                if (it == id.end() || it->second == static_cast<int>(i)) continue;
                adj_[i].emplace_back(it->second, is_h ? coset_of_[i] : -1);
                ++edge_count;
            }
        for (auto& row : adj_) {
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
        }

        build_report_.check = "free_product_build";
        build_report_.counts["ball_vertices"] = static_cast<std::int64_t>(words_.size());
        build_report_.counts["ball_edges"] = static_cast<std::int64_t>(edge_count / 2);
        build_report_.counts["cosets_seen"] = static_cast<std::int64_t>(coset_reps_.size());

        // interior selection with reported exclusions
        std::int64_t complete = 0, cut_incomplete = 0, cut_margin = 0, cut_disconnected = 0;
        std::vector<std::vector<std::vector<std::int64_t>>> hat_tables;
        for (std::size_t c = 0; c < coset_reps_.size(); ++c) {
            const auto& members = coset_members_[c];
            if (members.size() != static_cast<std::size_t>(spec_.q)) {
                ++cut_incomplete;
                exclude(c, "touches the ball boundary");
                continue;
            }
            ++complete;
            bool deep = true;
            for (int v : members)
                if (depth_[static_cast<std::size_t>(v)] > spec_.radius - spec_.margin) deep = false;
            if (!deep) {
                ++cut_margin;
                exclude(c, "inside the boundary margin");
                continue;
            }
            auto table = hat_table(c);
            bool connected = true;
            for (const auto& row : table)
                for (std::int64_t v : row)
                    if (v < 0) connected = false;
            if (!connected) {
                ++cut_disconnected;
                exclude(c, "own-relative metric not finite within the ball");
                continue;
            }
            interior_.push_back(c);
            hat_tables.push_back(std::move(table));
        }
        build_report_.counts["cosets_complete"] = complete;
        build_report_.counts["cosets_interior"] = static_cast<std::int64_t>(interior_.size());
        build_report_.counts["excluded_incomplete"] = cut_incomplete;
        build_report_.counts["excluded_margin"] = cut_margin;
        build_report_.counts["excluded_disconnected"] = cut_disconnected;
        if (interior_.size() < 3)
            throw std::invalid_argument("free product model: fewer than 3 interior cosets; enlarge the radius");
        hat_ = std::move(hat_tables);
        for (std::size_t i = 0; i < interior_.size(); ++i) space_ids_.push_back(static_cast<SpaceId>(i));

        // projections and pairwise coset distances
        const std::size_t m = interior_.size();
        proj_sets_.assign(m, std::vector<std::vector<std::int64_t>>(m));
        coset_dist_.assign(m, std::vector<std::int64_t>(m, 0));
        for (std::size_t s = 0; s < m; ++s) {
            std::vector<std::int64_t> dist = multi_source(interior_[s], -1);
            for (std::size_t t = 0; t < m; ++t) {
                if (t == s) continue;
                std::int64_t best = -1;
                for (int v : coset_members_[interior_[t]]) {
                    std::int64_t dv = dist[static_cast<std::size_t>(v)];
                    if (dv >= 0 && (best < 0 || dv < best)) best = dv;
                }
                if (best < 0)
                    throw std::logic_error("free product model: interior cosets are not mutually reachable");
                coset_dist_[s][t] = best;
                for (int v : coset_members_[interior_[t]])
                    if (dist[static_cast<std::size_t>(v)] == best)
                        proj_sets_[t][s].push_back(static_cast<std::int64_t>(v));
            }
        }

        // the constant: widest projection in its own-relative metric
        c_ = 0;
        for (std::size_t t = 0; t < m; ++t)
            for (std::size_t s = 0; s < m; ++s)
                if (t != s) c_ = std::max(c_, proj_hat_diameter(t, s));
        build_report_.counts["measured_c"] = c_;
        build_report_.counts["theta"] = theta();

        // realize each coset with its own-relative metric: a clique with
        // every edge subdivided to the right length keeps the member
        // distances exact, since the metric already satisfies the triangle
        // inequality
        ProjectionSystemBuilder builder;
        builder.set_theta(theta());
        for (std::size_t t = 0; t < m; ++t) {
            const auto& members = coset_members_[interior_[t]];
            std::vector<std::int64_t> vertices(members.begin(), members.end());
            std::vector<std::pair<std::int64_t, std::int64_t>> edges;
            std::int64_t fresh = -1;
            for (std::size_t i = 0; i < members.size(); ++i)
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    std::int64_t len = hat_[t][i][j];
                    std::int64_t prev = members[i];
                    for (std::int64_t step = 1; step < len; ++step) {
                        vertices.push_back(fresh);
                        edges.emplace_back(prev, fresh);
                        prev = fresh--;
                    }
                    edges.emplace_back(prev, members[j]);
                }
            builder.add_space(space_ids_[t], std::move(vertices), std::move(edges));
        }
        for (std::size_t t = 0; t < m; ++t)
            for (std::size_t s = 0; s < m; ++s)
                if (t != s) builder.set_projection(space_ids_[t], space_ids_[s], proj_sets_[t][s]);
        system_.emplace(builder.finalize());
    }

    void exclude(std::size_t coset, const std::string& why) {
        if (excluded_listed_ < 12)
            build_report_.note("coset " + fp_.str(coset_reps_[coset]) + " excluded: " + why);
        else if (excluded_listed_ == 12)
            build_report_.note("further exclusions elided");
        ++excluded_listed_;
    }

    /// Own-relative distances between the members of a coset: breadth-first
    /// search that never uses the coset's own H-edges.  -1 marks
    /// unreachable pairs.
    std::vector<std::vector<std::int64_t>> hat_table(std::size_t coset) const {
        const auto& members = coset_members_[coset];
        std::vector<std::vector<std::int64_t>> table(members.size(),
                                                     std::vector<std::int64_t>(members.size(), -1));
        for (std::size_t mi = 0; mi < members.size(); ++mi) {
            std::vector<std::int64_t> dist(words_.size(), -1);
            std::deque<int> queue{members[mi]};
            dist[static_cast<std::size_t>(members[mi])] = 0;
            while (!queue.empty()) {
                int u = queue.front();
                queue.pop_front();
                for (auto [w, tag] : adj_[static_cast<std::size_t>(u)]) {
                    if (tag == static_cast<int>(coset)) continue;
                    if (dist[static_cast<std::size_t>(w)] >= 0) continue;
                    dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                    queue.push_back(w);
                }
            }
            for (std::size_t mj = 0; mj < members.size(); ++mj)
                table[mi][mj] = dist[static_cast<std::size_t>(members[mj])];
        }
        return table;
    }

    /// Distances from every member of a coset, skipping the own-edges of
    /// the coset tagged `avoid_tag` (-1 avoids nothing).
    std::vector<std::int64_t> multi_source(std::size_t source_coset, int avoid_tag) const {
        std::vector<std::int64_t> dist(words_.size(), -1);
        std::deque<int> queue;
        for (int v : coset_members_[source_coset]) {
            dist[static_cast<std::size_t>(v)] = 0;
            queue.push_back(v);
        }
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (auto [w, tag] : adj_[static_cast<std::size_t>(u)]) {
                if (tag >= 0 && tag == avoid_tag) continue;
                if (dist[static_cast<std::size_t>(w)] >= 0) continue;
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(w);
            }
        }
        return dist;
    }

    std::int64_t min_over(const std::vector<std::int64_t>& dist, std::size_t target_coset) const {
        std::int64_t best = -1;
        for (int v : coset_members_[target_coset]) {
            std::int64_t dv = dist[static_cast<std::size_t>(v)];
            if (dv >= 0 && (best < 0 || dv < best)) best = dv;
        }
        return best;
    }

    std::int64_t proj_hat_diameter(std::size_t t, std::size_t s) const {
        const auto& members = coset_members_[interior_[t]];
        std::int64_t worst = 0;
        for (std::int64_t x : proj_sets_[t][s])
            for (std::int64_t z : proj_sets_[t][s]) {
                std::int64_t v = hat_[t][member_index(members, x)][member_index(members, z)];
                worst = std::max(worst, v);
            }
        return worst;
    }

    FreeProductSpec spec_;
    fp::FreeProduct fp_;
    std::vector<fp::Word> words_;
    std::vector<std::int64_t> depth_;
    std::vector<std::vector<std::pair<int, int>>> adj_;  // (neighbor, own-coset tag or -1)
    std::vector<fp::Word> coset_reps_;
    std::vector<std::vector<int>> coset_members_;
    std::vector<int> coset_of_;
    std::vector<std::size_t> interior_;                    // interior index -> coset index
    std::vector<SpaceId> space_ids_;                       // parallel to interior_
    std::vector<std::vector<std::vector<std::int64_t>>> hat_;  // per interior coset
    std::vector<std::vector<std::vector<std::int64_t>>> proj_sets_;  // [target][source]
    std::vector<std::vector<std::int64_t>> coset_dist_;
    std::int64_t c_ = 0;
    std::optional<ProjectionSystem> system_;
    AxiomReport build_report_;
    int excluded_listed_ = 0;
};

inline FreeProductModel gen_free_product(const FreeProductSpec& spec = {}) { return FreeProductModel(spec); }

/// The free-group-axes instance over G = Z_2 * Z with H = <b>: cosets of H
/// are infinite, so nothing is materialized.  With a single a-letter the
/// auxiliary graph is a tree of cliques; within a coset the own-relative
/// distance between distinct vertices is infinite, so every coset-to-coset
/// distance is 0 or infinity depending only on where geodesics enter.  The
/// three axes g_i = h_i a h_i with h_0 = 1, h_1 = b, h_2 = b^-1 then
/// project to three different entry points and the certificate goes
/// through at any K (theta is 0).
class SymbolicFreeGroup {
public:
    SymbolicFreeGroup() : fp_(2, 0) {
        g_[0] = fp_.letter(0, 1);
        g_[1] = fp_.mul(fp_.mul(fp_.letter(1, 1), fp_.letter(0, 1)), fp_.letter(1, 1));
        g_[2] = fp_.mul(fp_.mul(fp_.letter(1, -1), fp_.letter(0, 1)), fp_.letter(1, -1));
    }

    const fp::FreeProduct& words() const { return fp_; }
    const fp::Word& generator(int i) const { return g_[static_cast<std::size_t>(i)]; }

    fp::Word coset_rep(fp::Word w) const {
        if (!w.empty() && w.back().fac == 1) w.pop_back();
        return w;
    }

    /// Entry of the geodesics from coset `from` into coset `at`: the
    /// b-power at which they leave `at`.  Both arguments are coset
    /// representatives; they must be distinct.
    std::int64_t entry(const fp::Word& at, const fp::Word& from) const {
        fp::Word m = fp_.mul(fp_.inv(at), from);
        if (m.empty()) throw std::invalid_argument("symbolic instance: entry of a coset into itself");
        return m.front().fac == 1 ? m.front().exp : 0;
    }

    /// d_at(x, z) over coset representatives: 0 when the two cosets are
    /// seen under the same entry point, infinite otherwise.
    ExtDist d(const fp::Word& at, const fp::Word& x, const fp::Word& z) const {
        return entry(at, x) == entry(at, z) ? ExtDist(0) : ExtDist::infinity();
    }

    /// Cosets strictly between two others equal the a-letter count of the
    /// connecting word minus one; the complex distance is exactly the
    /// a-letter count.
    std::int64_t complex_distance(const fp::Word& x, const fp::Word& z) const {
        fp::Word m = fp_.mul(fp_.inv(x), z);
        std::int64_t zeros = 0;
        for (const fp::Block& blk : m) zeros += blk.fac == 0;
        return zeros;
    }

    fp::Word apply_word(const AltWord& w) const {
        fp::Word out;
        for (const auto& [idx, e] : w) {
            const fp::Word& g = g_[static_cast<std::size_t>(idx)];
            out = fp_.mul(out, e > 0 ? g : fp_.inv(g));
        }
        return coset_rep(out);
    }

    /// Rank-two free-group certificate run entirely on words: the same
    /// checks as the finite-system version (separation hypotheses, the
    /// labelled ball of reduced alternating words as a tree with distinct
    /// adjacent labels and wide 2-path gaps, injectivity, ordered
    /// containment along immersed paths, and the orbit-map lower bound),
    /// but with every distance decided by reduced-word combinatorics.
    bool certify(std::int64_t K, int radius, AxiomReport* report = nullptr,
                 std::size_t path_sample_cap = 4096) const {
        if (K < 0) throw std::invalid_argument("symbolic certificate: K must be nonnegative");
        if (radius < 1) throw std::invalid_argument("symbolic certificate: radius must be at least 1");
        AxiomReport local;
        AxiomReport& rep = report ? *report : local;
        rep.check = "free_group_certify";

        const fp::Word base;  // the coset H itself
        bool hyp_ok = true;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                rep.bump("hypothesis_checked", 2);
                hyp_ok &= separated(base, apply_word({{i, +1}}), apply_word({{j, +1}}), K, rep);
                hyp_ok &= separated(base, apply_word({{i, -1}}), apply_word({{j, -1}}), K, rep);
            }
        if (!hyp_ok) return false;

        // ball of reduced alternating words with parent edges; letter signs
        // alternate with the layer, matching the separation hypotheses
        std::vector<AltWord> ball;
        ball.push_back({});
        std::vector<int> parent{-1};
        std::vector<std::size_t> last_layer{0};
        for (int len = 1; len <= radius; ++len) {
            const int e = len % 2 == 1 ? +1 : -1;
            std::vector<std::size_t> layer;
            for (std::size_t wi : last_layer)
                for (int i = 0; i < 3; ++i) {
                    if (!ball[wi].empty() && ball[wi].back().first == i) continue;
                    AltWord next = ball[wi];
                    next.emplace_back(i, e);
                    ball.push_back(std::move(next));
                    parent.push_back(static_cast<int>(wi));
                    layer.push_back(ball.size() - 1);
                }
            last_layer = std::move(layer);
        }
        std::vector<fp::Word> labels(ball.size());
        std::vector<std::vector<int>> adj(ball.size());
        for (std::size_t i = 0; i < ball.size(); ++i) {
            labels[i] = apply_word(ball[i]);
            if (parent[i] >= 0) {
                adj[static_cast<std::size_t>(parent[i])].push_back(static_cast<int>(i));
                adj[i].push_back(parent[i]);
            }
        }
        for (auto& row : adj) std::sort(row.begin(), row.end());

        for (std::size_t i = 1; i < ball.size(); ++i) {
            rep.bump("adjacent_checked");
            if (labels[i] == labels[static_cast<std::size_t>(parent[i])]) {
                rep.add_violation({"tree_map_hypothesis", {}, {}, "adjacent words carry the same coset"});
                hyp_ok = false;
            }
        }
        if (hyp_ok)
            for (std::size_t y = 0; y < ball.size(); ++y)
                for (std::size_t i = 0; i < adj[y].size(); ++i)
                    for (std::size_t j = i + 1; j < adj[y].size(); ++j) {
                        rep.bump("two_paths_checked");
                        const fp::Word& u = labels[static_cast<std::size_t>(adj[y][i])];
                        const fp::Word& w = labels[static_cast<std::size_t>(adj[y][j])];
                        if (!(d(labels[y], u, w) > ExtDist(K))) {
                            rep.add_violation(
                                {"tree_map_hypothesis", {}, {d(labels[y], u, w)},
                                 "gap at the middle of a 2-path is not above K at coset " + fp_.str(labels[y])});
                            hyp_ok = false;
                        }
                    }
        if (!hyp_ok) return false;

        AxiomReport conclusion;
        conclusion.check = "tree_map_conclusion";
        {
            std::map<fp::Word, std::size_t> where;
            for (std::size_t i = 0; i < ball.size(); ++i)
                if (!where.emplace(labels[i], i).second)
                    conclusion.add_violation({"tree_map_injective", {}, {},
                                              "coset " + fp_.str(labels[i]) + " repeats in the labelled ball"});
        }
        if (!conclusion.passed) {
            rep.absorb(conclusion);
            throw CertificationError(rep);
        }

        // immersed paths are the tree geodesics; the ball is a tree by
        // construction, so walk parent pointers up to the meeting point
        std::vector<int> depth(ball.size());
        for (std::size_t i = 0; i < ball.size(); ++i) depth[i] = static_cast<int>(ball[i].size());
        std::vector<std::pair<int, int>> endpoint_pairs;
        for (int a = 0; a < static_cast<int>(ball.size()); ++a)
            for (int b = a + 1; b < static_cast<int>(ball.size()); ++b) endpoint_pairs.emplace_back(a, b);
        if (endpoint_pairs.size() > path_sample_cap) {
            Rng rng(path_sample_cap);
            rng.shuffle(endpoint_pairs);
            endpoint_pairs.resize(path_sample_cap);
            std::sort(endpoint_pairs.begin(), endpoint_pairs.end());
            rep.note("immersed paths sampled: " + std::to_string(path_sample_cap));
        }
        for (auto [a, b] : endpoint_pairs) {
            std::vector<int> up, down;
            int x = a, z = b;
            while (depth[static_cast<std::size_t>(x)] > depth[static_cast<std::size_t>(z)]) {
                up.push_back(x);
                x = parent[static_cast<std::size_t>(x)];
            }
            while (depth[static_cast<std::size_t>(z)] > depth[static_cast<std::size_t>(x)]) {
                down.push_back(z);
                z = parent[static_cast<std::size_t>(z)];
            }
            while (x != z) {
                up.push_back(x);
                down.push_back(z);
                x = parent[static_cast<std::size_t>(x)];
                z = parent[static_cast<std::size_t>(z)];
            }
            std::vector<int> path = std::move(up);
            path.push_back(x);
            path.insert(path.end(), down.rbegin(), down.rend());
            if (path.size() < 3) continue;
            rep.bump("immersed_paths_checked");
            const fp::Word& first = labels[static_cast<std::size_t>(path.front())];
            const fp::Word& last = labels[static_cast<std::size_t>(path.back())];
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                const fp::Word& mid = labels[static_cast<std::size_t>(path[i])];
                if (!(d(mid, first, last) > ExtDist(K)))
                    conclusion.add_violation({"tree_map_containment", {}, {d(mid, first, last)},
                                              "interior coset " + fp_.str(mid) +
                                                  " of an immersed path is not far from the endpoints"});
            }
            for (std::size_t i = 1; i + 1 < path.size(); ++i)
                for (std::size_t j = i + 1; j + 1 < path.size(); ++j) {
                    const fp::Word& yi = labels[static_cast<std::size_t>(path[i])];
                    const fp::Word& yj = labels[static_cast<std::size_t>(path[j])];
                    if (!(d(yi, first, yj) > ExtDist(0)))
                        conclusion.add_violation({"tree_map_order", {}, {d(yi, first, yj)},
                                                  "cosets along an immersed path are out of order"});
                }
        }
        if (!conclusion.passed) {
            rep.absorb(conclusion);
            throw CertificationError(rep);
        }

        for (std::size_t i = 1; i < ball.size(); ++i) {
            rep.bump("orbit_bound_checked");
            std::int64_t have = complex_distance(base, labels[i]);
            std::int64_t need = static_cast<std::int64_t>(ball[i].size() / 2) + 1;
            if (have < need) {
                rep.add_violation({"orbit_lower_bound", {}, {ExtDist(have), ExtDist(need)},
                                   "word of length " + std::to_string(ball[i].size()) +
                                       " lands too close to its start"});
                throw CertificationError(rep);
            }
        }
        return true;
    }

    struct Materialized {
        AbstractDistanceSystem system;
        SpaceId base;
        std::map<fp::Word, SpaceId> ids;
    };

    /// Finite table over the cosets reached by the labelled ball, closed
    /// under the cosets its connecting words pass through, for
    /// cross-checking against the generic machinery.  Feasible for small
    /// radii only.
    Materialized materialize(int radius) const {
        std::set<fp::Word> family;
        family.insert({});
        {
            std::deque<AltWord> queue;
            queue.push_back({});
            while (!queue.empty()) {
                AltWord w = queue.front();
                queue.pop_front();
                family.insert(apply_word(w));
                if (w.size() == static_cast<std::size_t>(radius)) continue;
                const int e = w.size() % 2 == 0 ? +1 : -1;
                for (int i = 0; i < 3; ++i) {
                    if (!w.empty() && w.back().first == i) continue;
                    AltWord next = w;
                    next.emplace_back(i, e);
                    queue.push_back(std::move(next));
                }
            }
        }
        // close under the cosets that geodesics pass through
        for (bool grew = true; grew;) {
            grew = false;
            std::vector<fp::Word> snapshot(family.begin(), family.end());
            for (const fp::Word& u : snapshot)
                for (const fp::Word& w : snapshot) {
                    fp::Word m = fp_.mul(fp_.inv(u), w);
                    fp::Word cur = u;
                    for (const fp::Block& blk : m) {
                        cur = fp_.mul(cur, fp_.letter(blk.fac, blk.exp));
                        grew |= family.insert(coset_rep(cur)).second;
                    }
                }
        }

        std::map<fp::Word, SpaceId> ids;
        std::vector<SpaceId> all;
        for (const fp::Word& w : family) {
            SpaceId id = static_cast<SpaceId>(all.size());
            ids.emplace(w, id);
            all.push_back(id);
        }
        std::vector<fp::Word> rev(family.begin(), family.end());
        std::vector<AbstractEntry> entries;
        for (std::size_t y = 0; y < rev.size(); ++y)
            for (std::size_t x = 0; x < rev.size(); ++x) {
                if (x == y) continue;
                for (std::size_t z = x; z < rev.size(); ++z) {
                    if (z == y) continue;
                    entries.push_back({static_cast<SpaceId>(y), static_cast<SpaceId>(x), static_cast<SpaceId>(z),
                                       d(rev[y], rev[x], rev[z])});
                }
            }
        return {AbstractDistanceSystem(all, entries, 0), ids.at({}), std::move(ids)};
    }

private:
    bool separated(const fp::Word& base, const fp::Word& u, const fp::Word& w, std::int64_t K,
                   AxiomReport& rep) const {
        if (u == base || w == base || u == w || !(d(base, u, w) > ExtDist(K))) {
            rep.add_violation({"free_group_hypothesis", {}, {},
                               "cosets " + fp_.str(u) + ", " + fp_.str(w) + " are not separated over " +
                                   fp_.str(base)});
            return false;
        }
        return true;
    }

    fp::FreeProduct fp_;
    fp::Word g_[3];
};

}  // namespace projcx
