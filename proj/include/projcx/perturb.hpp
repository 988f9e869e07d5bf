#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "axioms.hpp"
#include "ext_dist.hpp"
#include "report.hpp"
#include "system.hpp"

namespace projcx {

/// Which clause of the H(X,Z) definition a pair matched.
enum class HCase { both_far, first_equal, second_equal, both_equal };

inline const char* to_string(HCase c) {
    switch (c) {
        case HCase::both_far: return "both_far";
        case HCase::first_equal: return "first_equal";
        case HCase::second_equal: return "second_equal";
        case HCase::both_equal: return "both_equal";
    }
    return "?";
}

struct HPair {
    SpaceId first;
    SpaceId second;
    HCase situation;
};

struct ForcingSequence {
    std::vector<SpaceId> elements;  // distinct, length >= 2
    std::int64_t level;             // the K of the gap conditions
};

/// Memoizing evaluator for the modified distance tilde-d over one distance
/// table.  Construction is cheap; tilde values are computed on demand and
/// cached per (Y, {X,Z}).  Computed values falling outside the sandwich
/// [d(X,Z), d(X,Z)+2*theta] are recorded (never clamped): they indicate the
/// input does not satisfy the weak axioms at this theta.
class PerturbationContext {
public:
    PerturbationContext(const DistanceView& v, std::int64_t theta) : v_(&v), theta_(theta) {
        if (theta < 0) throw std::invalid_argument("perturbation: negative theta");
    }

    const DistanceView& view() const { return *v_; }
    std::int64_t theta() const { return theta_; }

    /// Membership of (a, b) in H(X, Z), by index.  The first clause needs
    /// entries d_X(a,b) and d_Z(a,b); when one of them has an argument equal
    /// to its subscript and the table lacks that entry, the clause cannot
    /// match.
    bool h_member_idx(int x, int z, int a, int b) const {
        const DistanceView& v = *v_;
        const ExtDist bound(2 * theta_);
        if (a == x && b == z) return true;
        if (a == x) return v.d_idx(z, x, b) > bound;  // b != z here, x != z always
        if (b == z) return v.d_idx(x, a, z) > bound;
        auto at_x = v.try_d_idx(x, a, b);
        auto at_z = v.try_d_idx(z, a, b);
        return at_x && at_z && *at_x > bound && *at_z > bound;
    }

    HCase h_case_idx(int x, int z, int a, int b) const {
        if (a == x && b == z) return HCase::both_equal;
        if (a == x) return HCase::first_equal;
        if (b == z) return HCase::second_equal;
        return HCase::both_far;
    }

    ExtDist tilde_idx(int y, int x, int z) {
        if (x == y || z == y) throw std::invalid_argument("tilde_d: subscript among the arguments");
        if (x > z) std::swap(x, z);
        auto key = std::make_tuple(y, x, z);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        ExtDist value = compute(y, x, z);
        cache_.emplace(key, value);
        return value;
    }

    ExtDist tilde(SpaceId Y, SpaceId X, SpaceId Z) {
        const DistanceView& v = *v_;
        return tilde_idx(v.index_of(Y), v.index_of(X), v.index_of(Z));
    }

    const std::vector<Violation>& sandwich_violations() const { return sandwich_; }

private:
    ExtDist compute(int y, int x, int z) {
        const DistanceView& v = *v_;
        const ExtDist two_theta(2 * theta_);
        ExtDist base = v.d_idx(y, x, z);
        if (!(base > two_theta)) return two_theta;
        if (x == z)
            throw std::invalid_argument("tilde_d: diagonal above 2*theta, input violates the diagonal bound");
        const int n = v.n();
        ExtDist best = base;  // the pair (X, Z) itself always belongs to H(X, Z)
        for (int a = 0; a < n; ++a) {
            if (a == y) continue;  // term undefined when the supremum pair contains Y
            for (int b = 0; b < n; ++b) {
                if (b == y) continue;
                if (a == x && b == z) continue;  // already counted as base
                if (!h_member_idx(x, z, a, b)) continue;
                best = max(best, v.d_idx(y, a, b));
            }
        }
        if (best > base + two_theta) {
            sandwich_.push_back({"tilde_sandwich",
                                 {v.id_at(y), v.id_at(x), v.id_at(z)},
                                 {base, best},
                                 "tilde value " + best.str() + " exceeds d + 2*theta with d = " + base.str()});
        }
        return best;
    }

    const DistanceView* v_;
    std::int64_t theta_;
    std::map<std::tuple<int, int, int>, ExtDist> cache_;
    std::vector<Violation> sandwich_;
};

/// Enumerates H(X, Z): all pairs (X', Z') matching one of the four defining
/// clauses, labeled with the matched clause.
inline std::vector<HPair> h_set(const DistanceView& v, std::int64_t theta, SpaceId X, SpaceId Z) {
    if (X == Z) throw std::invalid_argument("h_set: X = Z");
    PerturbationContext ctx(v, theta);
    int x = v.index_of(X), z = v.index_of(Z);
    std::vector<HPair> out;
    const int n = v.n();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (ctx.h_member_idx(x, z, a, b)) out.push_back({v.id_at(a), v.id_at(b), ctx.h_case_idx(x, z, a, b)});
    return out;
}

/// The modified distance.  `sandwich` (optional) receives a witness if the
/// computed value violates the bound tilde <= d + 2*theta.
inline ExtDist tilde_d(const DistanceView& v, std::int64_t theta, SpaceId Y, SpaceId X, SpaceId Z,
                       Violation* sandwich = nullptr) {
    PerturbationContext ctx(v, theta);
    ExtDist value = ctx.tilde(Y, X, Z);
    if (sandwich && !ctx.sandwich_violations().empty()) *sandwich = ctx.sandwich_violations().front();
    return value;
}

/// True iff `seq` is a K-forcing sequence: distinct elements and every
/// interior gap strictly above K.
inline bool is_forcing(PerturbationContext& ctx, const std::vector<SpaceId>& seq, std::int64_t K) {
    if (seq.size() < 2) throw std::invalid_argument("forcing sequence: need at least two elements");
    std::set<SpaceId> distinct(seq.begin(), seq.end());
    if (distinct.size() != seq.size()) throw std::invalid_argument("forcing sequence: elements must be distinct");
    const ExtDist k(K);
    for (std::size_t i = 1; i + 1 < seq.size(); ++i)
        if (!(ctx.tilde(seq[i], seq[i - 1], seq[i + 1]) > k)) return false;
    return true;
}

inline bool is_forcing(const DistanceView& v, std::int64_t theta, const std::vector<SpaceId>& seq, std::int64_t K) {
    PerturbationContext ctx(v, theta);
    return is_forcing(ctx, seq, K);
}

namespace detail {

/// Shared state for enumerating the 7*theta-forcing sequences between one
/// pair of spaces.
struct ForcingSearch {
    PerturbationContext* ctx;
    std::int64_t K;
    std::vector<int> pool;   // candidate interior elements, ascending
    int x, z;                // endpoints, indices
    std::int64_t node_budget;
    std::vector<std::vector<int>> maximal;  // completed sequences passing maximality
    std::vector<std::vector<int>>* completed = nullptr;  // every completed sequence, if wanted
    std::size_t completed_cap = 0;
    std::vector<int> seq;
    std::vector<char> in_seq;

    bool gap_ok(int at, int before, int after) { return ctx->tilde_idx(at, before, after) > ExtDist(K); }

    bool insertable_somewhere(const std::vector<int>& s) {
        for (int w : pool) {
            if (in_seq[static_cast<std::size_t>(w)]) continue;
            for (std::size_t i = 0; i + 1 < s.size(); ++i)
                if (gap_ok(w, s[i], s[i + 1])) return true;
        }
        return false;
    }

    void dfs() {
        if (--node_budget < 0)
            throw std::runtime_error("forcing sequence enumeration exceeded its node budget; "
                                     "the instance is too entangled for exhaustive refinement");
        int last = seq.back();
        int prev = seq.size() >= 2 ? seq[seq.size() - 2] : -1;
        // try to close with Z
        if (prev < 0 || gap_ok(last, prev, z)) {
            seq.push_back(z);
            if (completed && completed->size() < completed_cap) completed->push_back(seq);
            if (!insertable_somewhere(seq)) maximal.push_back(seq);
            seq.pop_back();
        }
        for (int w : pool) {
            if (in_seq[static_cast<std::size_t>(w)]) continue;
            if (prev >= 0 && !gap_ok(last, prev, w)) continue;
            seq.push_back(w);
            in_seq[static_cast<std::size_t>(w)] = 1;
            dfs();
            in_seq[static_cast<std::size_t>(w)] = 0;
            seq.pop_back();
        }
    }
};

inline ForcingSearch run_forcing_search(PerturbationContext& ctx, SpaceId X, SpaceId Z, std::int64_t node_budget,
                                        std::vector<std::vector<int>>* completed = nullptr,
                                        std::size_t completed_cap = 0) {
    if (X == Z) throw std::invalid_argument("forcing sequence enumeration: X = Z");
    const DistanceView& v = ctx.view();
    ForcingSearch search;
    search.ctx = &ctx;
    search.K = 7 * ctx.theta();
    search.x = v.index_of(X);
    search.z = v.index_of(Z);
    search.node_budget = node_budget;
    search.completed = completed;
    search.completed_cap = completed_cap;
    const ExtDist pool_bound(3 * ctx.theta());
    for (int w = 0; w < v.n(); ++w) {
        if (w == search.x || w == search.z) continue;
        if (v.d_idx(w, search.x, search.z) > pool_bound) search.pool.push_back(w);
    }
    search.in_seq.assign(static_cast<std::size_t>(v.n()), 0);
    search.seq = {search.x};
    search.in_seq[static_cast<std::size_t>(search.x)] = 1;
    search.in_seq[static_cast<std::size_t>(search.z)] = 1;
    search.dfs();
    return search;
}

}  // namespace detail

/// All maximal 7*theta-forcing sequences from X to Z.  Candidate interior
/// elements are restricted to {W : d_W(X,Z) > 3*theta}, which is exhaustive
/// whenever the weak axioms hold at theta (interior gaps above 7*theta force
/// d_W(X,Z) > 3*theta, and the same holds for any insertable element).
inline std::vector<std::vector<SpaceId>> refine_maximal_all(PerturbationContext& ctx, SpaceId X, SpaceId Z,
                                                            std::int64_t node_budget = 5000000) {
    const DistanceView& v = ctx.view();
    auto search = detail::run_forcing_search(ctx, X, Z, node_budget);
    std::vector<std::vector<SpaceId>> out;
    out.reserve(search.maximal.size());
    for (const auto& s : search.maximal) {
        std::vector<SpaceId> ids;
        ids.reserve(s.size());
        for (int i : s) ids.push_back(v.id_at(i));
        out.push_back(std::move(ids));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::vector<SpaceId>> refine_maximal_all(const DistanceView& v, std::int64_t theta, SpaceId X,
                                                            SpaceId Z, std::int64_t node_budget = 5000000) {
    PerturbationContext ctx(v, theta);
    return refine_maximal_all(ctx, X, Z, node_budget);
}

/// Penultimate elements: next-to-last entries of the maximal forcing
/// sequences from X to Z.  Nonempty whenever the weak axioms hold.
inline std::vector<SpaceId> penultimate(PerturbationContext& ctx, SpaceId X, SpaceId Z,
                                        std::int64_t node_budget = 5000000) {
    auto seqs = refine_maximal_all(ctx, X, Z, node_budget);
    std::set<SpaceId> p;
    for (const auto& s : seqs) p.insert(s[s.size() - 2]);
    return {p.begin(), p.end()};
}

inline std::vector<SpaceId> penultimate(const DistanceView& v, std::int64_t theta, SpaceId X, SpaceId Z) {
    PerturbationContext ctx(v, theta);
    return penultimate(ctx, X, Z);
}

/// Output of perturb_system: the rebuilt system plus the certificate that
/// was checked before returning.
struct PerturbResult {
    ProjectionSystem system;
    std::int64_t new_theta;
    AxiomReport certificate;
    std::map<std::pair<SpaceId, SpaceId>, std::vector<SpaceId>> penultimates;  // (X, Z) -> P_Z(X)
};

/// Replaces every projection pi_Z(X) by the union of pi_Z(W) over the
/// penultimate elements W of the maximal 7*theta-forcing sequences X -> Z,
/// then certifies: the new projections stay within the theta-neighborhood of
/// the old ones, the induced distances move by at most 2*theta, and the
/// strong axioms hold at 11*theta.  Throws CertificationError if any of
/// these checks fail; throws invalid_argument if the input does not satisfy
/// the weak axioms at theta.
inline PerturbResult perturb_system(const ProjectionSystem& sys, std::int64_t theta, const VerifyOptions& vopts = {}) {
    AxiomReport weak = verify_weak_axioms(sys.distances(), theta, vopts);
    if (!weak.passed)
        throw std::invalid_argument("perturb_system: input fails the weak axioms at theta = " + std::to_string(theta) +
                                    " (" + std::to_string(weak.counts.at("violations")) + " violations, first: " +
                                    (weak.violations.empty() ? std::string("?") : weak.violations.front().detail) + ")");

    PerturbationContext ctx(sys.distances(), theta);
    const auto& ids = sys.space_ids();

    AxiomReport cert;
    cert.check = "perturb_certificate";
    std::map<std::pair<SpaceId, SpaceId>, std::vector<SpaceId>> penultimates;

    ProjectionSystemBuilder b;
    b.set_theta(11 * theta);
    for (SpaceId id : ids) {
        const auto& g = sys.space(id);
        b.add_space(id, g.vertex_ids(), g.edge_list());
    }
    for (SpaceId Z : ids)
        for (SpaceId X : ids) {
            if (X == Z) continue;
            auto pset = penultimate(ctx, X, Z);
            if (pset.empty()) {
                cert.add_violation({"penultimate_empty", {X, Z}, {}, "no maximal forcing sequence found"});
                throw CertificationError(cert);
            }
            std::set<std::int64_t> pts;
            for (SpaceId W : pset)
                for (std::int64_t p : sys.proj(Z, W)) pts.insert(p);
            penultimates[{X, Z}] = pset;
            b.set_projection(Z, X, std::vector<std::int64_t>(pts.begin(), pts.end()));
            cert.bump("pairs_perturbed");
        }
    ProjectionSystem perturbed = b.finalize();

    // (1) new projections inside the theta-neighborhood of the old ones
    for (SpaceId Z : ids)
        for (SpaceId X : ids) {
            if (X == Z) continue;
            const auto& old_pts = sys.proj(Z, X);
            const auto& graph = sys.space(Z);
            for (std::int64_t p : perturbed.proj(Z, X)) {
                std::int64_t best = -1;
                for (std::int64_t q : old_pts) {
                    std::int64_t dpq = graph.distance(p, q);
                    if (best < 0 || dpq < best) best = dpq;
                }
                cert.bump("neighborhood_checked");
                if (best > theta)
                    cert.add_violation({"neighborhood",
                                        {Z, X},
                                        {ExtDist(best)},
                                        "new projection point " + std::to_string(p) + " is at distance " +
                                            std::to_string(best) + " > theta from the old set"});
            }
        }

    // (2) every distance moves by at most 2*theta (diagonals included)
    {
        const DistanceView& oldv = sys.distances();
        const DistanceView& newv = perturbed.distances();
        const int n = oldv.n();
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                if (x == y) continue;
                for (int z = x; z < n; ++z) {
                    if (z == y) continue;
                    std::int64_t a = oldv.d_idx(y, x, z).value();
                    std::int64_t bnew = newv.d_idx(y, x, z).value();
                    cert.bump("distance_drift_checked");
                    if (std::llabs(a - bnew) > 2 * theta)
                        cert.add_violation({"distance_drift",
                                            {ids[static_cast<std::size_t>(y)], ids[static_cast<std::size_t>(x)],
                                             ids[static_cast<std::size_t>(z)]},
                                            {ExtDist(a), ExtDist(bnew)},
                                            "perturbed distance differs from the original by more than 2*theta"});
                }
            }
    }

    // (3) strong axioms at 11*theta
    AxiomReport strong = verify_strong_axioms(perturbed.distances(), 11 * theta, vopts);
    cert.bump("strong_checked_triples", strong.counts.count("sp3_checked") ? strong.counts.at("sp3_checked") : 0);
    if (!strong.passed) {
        std::vector<Violation> copy = strong.violations;
        cert.add_violations_block(std::move(copy), strong.counts.at("violations"));
    }

    for (const auto& viol : ctx.sandwich_violations()) cert.add_violation(viol);

    if (!cert.passed) throw CertificationError(cert);
    return PerturbResult{std::move(perturbed), 11 * theta, std::move(cert), std::move(penultimates)};
}

struct PackOptions {
    std::int64_t sequence_budget = 50000;   // per start space, for the termination check
    std::int64_t refine_budget = 5000000;   // per pair, for maximal sequence enumeration
};

namespace detail {

inline bool within_additive(ExtDist a, ExtDist b, std::int64_t bound) {
    if (a.is_infinite() && b.is_infinite()) return true;
    if (a.is_infinite() || b.is_infinite()) return false;
    return std::llabs(a.value() - b.value()) <= bound;
}

/// Enumerates 4*theta-forcing sequences by extension and checks both
/// termination properties on every one of them.
struct TerminationScan {
    PerturbationContext* ctx;
    std::int64_t theta;
    std::int64_t budget;
    bool budget_hit = false;
    AxiomReport* rep;
    std::vector<int> seq;
    std::vector<char> in_seq;

    void check_last() {
        const DistanceView& v = ctx->view();
        const std::size_t k = seq.size() - 1;
        rep->bump("termination_sequences");
        ExtDist closing = v.d_idx(seq[k], seq[0], seq[k - 1]);
        if (closing > ExtDist(theta))
            rep->add_violation({"termination_closing",
                                {v.id_at(seq[k]), v.id_at(seq[0]), v.id_at(seq[k - 1])},
                                {closing},
                                "last element of a forcing sequence sees its start beyond theta"});
        for (std::size_t j = 1; j < k; ++j) {
            ExtDist gap = v.d_idx(seq[j], seq[j - 1], seq[j + 1]);
            for (std::size_t i = 0; i < j; ++i) {
                rep->bump("termination_triples");
                ExtDist wide = v.d_idx(seq[j], seq[i], seq[k]);
                if (!within_additive(wide, gap, 2 * theta))
                    rep->add_violation({"termination_spread",
                                        {v.id_at(seq[j]), v.id_at(seq[i]), v.id_at(seq[k])},
                                        {wide, gap},
                                        "distance across a forcing sequence drifts beyond 2*theta from the gap"});
            }
        }
    }

    void dfs() {
        if (--budget < 0) {
            budget_hit = true;
            return;
        }
        if (seq.size() >= 2) check_last();
        const DistanceView& v = ctx->view();
        const int n = v.n();
        int last = seq.back();
        int prev = seq.size() >= 2 ? seq[seq.size() - 2] : -1;
        for (int w = 0; w < n; ++w) {
            if (in_seq[static_cast<std::size_t>(w)]) continue;
            if (prev >= 0 && !(ctx->tilde_idx(last, prev, w) > ExtDist(4 * theta))) continue;
            seq.push_back(w);
            in_seq[static_cast<std::size_t>(w)] = 1;
            dfs();
            in_seq[static_cast<std::size_t>(w)] = 0;
            seq.pop_back();
            if (budget_hit && budget < 0) return;
        }
    }
};

}  // namespace detail

/// Audits the structural facts the perturbation relies on, over one distance
/// table: stability of distances across H-pairs, nesting of H-sets, the
/// monotonicity used when inserting into a forcing sequence, termination of
/// refinement, the bounded geodesic image property of maximal sequences, and
/// concatenation through penultimate elements.  Counts record how often each
/// hypothesis fired; a check that never fired is flagged as vacuous.
inline AxiomReport forcing_property_pack(const DistanceView& v, std::int64_t theta, const PackOptions& opts = {},
                                         const VerifyOptions& vopts = {}) {
    AxiomReport weak = verify_weak_axioms(v, theta, vopts);
    if (!weak.passed)
        throw std::invalid_argument("forcing_property_pack: input fails the weak axioms at theta = " +
                                    std::to_string(theta));

    AxiomReport rep;
    rep.check = "forcing_property_pack";
    PerturbationContext ctx(v, theta);
    const int n = v.n();
    const ExtDist two_theta(2 * theta);

    // stability of d_Y across H(X, Z), plus the pairing of endpoints
    for (int x = 0; x < n; ++x)
        for (int z = x + 1; z < n; ++z)
            for (int y = 0; y < n; ++y) {
                if (y == x || y == z) continue;
                ExtDist base = v.d_idx(y, x, z);
                if (!(base > two_theta)) continue;
                for (int a = 0; a < n; ++a) {
                    if (a == y) continue;
                    for (int b = 0; b < n; ++b) {
                        if (b == y) continue;
                        if (!ctx.h_member_idx(x, z, a, b)) continue;
                        rep.bump("h_move_checked");
                        if (!detail::within_additive(base, v.d_idx(y, a, b), 2 * theta))
                            rep.add_violation({"h_move",
                                               {v.id_at(y), v.id_at(x), v.id_at(z), v.id_at(a), v.id_at(b)},
                                               {base, v.d_idx(y, a, b)},
                                               "d_Y moves by more than 2*theta across an H-pair"});
                        bool straight = !(v.d_idx(y, x, a) > ExtDist(theta)) && !(v.d_idx(y, z, b) > ExtDist(theta));
                        bool crossed = !(v.d_idx(y, x, b) > ExtDist(theta)) && !(v.d_idx(y, z, a) > ExtDist(theta));
                        if (!straight && !crossed)
                            rep.add_violation({"h_move_pairing",
                                               {v.id_at(y), v.id_at(x), v.id_at(z), v.id_at(a), v.id_at(b)},
                                               {v.d_idx(y, x, a), v.d_idx(y, z, b)},
                                               "no pairing of an H-pair with its endpoints stays within theta"});
                    }
                }
            }

    // H(X, Z) nests into H(X, Y) once Y sees X, Z far apart
    for (int x = 0; x < n; ++x)
        for (int z = 0; z < n; ++z) {
            if (z == x) continue;
            for (int y = 0; y < n; ++y) {
                if (y == x || y == z) continue;
                if (!(v.d_idx(y, x, z) > ExtDist(4 * theta))) continue;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        if (!ctx.h_member_idx(x, z, a, b)) continue;
                        rep.bump("h_inclusion_checked");
                        if (!ctx.h_member_idx(x, y, a, b))
                            rep.add_violation({"h_inclusion",
                                               {v.id_at(x), v.id_at(z), v.id_at(y), v.id_at(a), v.id_at(b)},
                                               {v.d_idx(y, x, z)},
                                               "an H-pair for (X, Z) is missing from H(X, Y)"});
                    }
            }
        }

    // inserting a far element cannot shrink the modified distance
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            for (int z = 0; z < n; ++z) {
                if (z == y || z == x) continue;
                ExtDist txz = ctx.tilde_idx(y, x, z);
                if (!(txz > ExtDist(5 * theta))) continue;
                for (int w = 0; w < n; ++w) {
                    if (w == y || w == z) continue;
                    if (!(ctx.tilde_idx(w, y, z) > ExtDist(7 * theta))) continue;
                    rep.bump("insertion_monotonicity_checked");
                    ExtDist txw = w == x ? ExtDist(2 * theta) : ctx.tilde_idx(y, x, w);
                    if (txw < txz)
                        rep.add_violation({"insertion_monotonicity",
                                           {v.id_at(y), v.id_at(x), v.id_at(z), v.id_at(w)},
                                           {txz, txw},
                                           "modified distance drops after replacing the far endpoint"});
                }
            }
        }

    // termination data over the 4*theta-forcing sequences
    {
        detail::TerminationScan scan;
        scan.ctx = &ctx;
        scan.theta = theta;
        scan.rep = &rep;
        bool any_budget_hit = false;
        for (int start = 0; start < n; ++start) {
            scan.budget = opts.sequence_budget;
            scan.budget_hit = false;
            scan.in_seq.assign(static_cast<std::size_t>(n), 0);
            scan.seq = {start};
            scan.in_seq[static_cast<std::size_t>(start)] = 1;
            scan.dfs();
            if (scan.budget_hit) any_budget_hit = true;
        }
        if (any_budget_hit) rep.note("termination scan truncated by the sequence budget");
    }

    // enumerate through each ordered pair once, keeping both the maximal
    // sequences and a capped list of all completed ones
    struct PairSeqs {
        std::vector<std::vector<int>> maximal;
        std::vector<std::vector<int>> completed;
    };
    std::map<std::pair<int, int>, PairSeqs> seqs;
    auto seqs_for = [&](int a, int b) -> const PairSeqs& {
        auto key = std::make_pair(a, b);
        auto it = seqs.find(key);
        if (it == seqs.end()) {
            PairSeqs ps;
            auto search = detail::run_forcing_search(ctx, v.id_at(a), v.id_at(b), opts.refine_budget, &ps.completed,
                                                     2048);
            ps.maximal = std::move(search.maximal);
            it = seqs.emplace(key, std::move(ps)).first;
        }
        return it->second;
    };
    const ExtDist seven_theta(7 * theta);

    for (int x = 0; x < n; ++x)
        for (int z = 0; z < n; ++z) {
            if (z == x) continue;
            const PairSeqs& ps = seqs_for(x, z);

            // inserting an admissible element keeps a sequence forcing
            for (const auto& s : ps.completed) {
                std::set<int> members(s.begin(), s.end());
                for (int w = 0; w < n; ++w) {
                    if (members.count(w)) continue;
                    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                        if (!(ctx.tilde_idx(w, s[i], s[i + 1]) > seven_theta)) continue;
                        rep.bump("insertion_rule_checked");
                        std::vector<int> t(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                        t.push_back(w);
                        t.insert(t.end(), s.begin() + static_cast<std::ptrdiff_t>(i) + 1, s.end());
                        bool forcing = true;
                        for (std::size_t j = 1; j + 1 < t.size(); ++j)
                            if (!(ctx.tilde_idx(t[j], t[j - 1], t[j + 1]) > seven_theta)) {
                                forcing = false;
                                break;
                            }
                        if (!forcing)
                            rep.add_violation({"insertion_rule",
                                               {v.id_at(w), v.id_at(x), v.id_at(z)},
                                               {ctx.tilde_idx(w, s[i], s[i + 1])},
                                               "inserting an admissible element broke a forcing sequence"});
                    }
                }
            }

            // maximal sequences absorb every far element, and concatenate
            // through their penultimate elements
            for (const auto& s : ps.maximal) {
                std::set<int> members(s.begin(), s.end());
                for (int w = 0; w < n; ++w) {
                    if (w == x || w == z) continue;
                    rep.bump("absorption_scanned");
                    if (!(v.d_idx(w, x, z) > ExtDist(9 * theta))) continue;
                    rep.bump("absorption_checked");
                    if (!members.count(w))
                        rep.add_violation({"far_element_absorption",
                                           {v.id_at(w), v.id_at(x), v.id_at(z)},
                                           {v.d_idx(w, x, z)},
                                           "element far from both endpoints missing from a maximal sequence"});
                }
                int penult = s[s.size() - 2];
                for (int x2 = 0; x2 < n; ++x2) {
                    if (x2 == x || x2 == z) continue;
                    if (!(v.d_idx(x, x2, z) > ExtDist(8 * theta))) continue;
                    rep.bump("concatenation_checked");
                    bool found = false;
                    for (const auto& s2 : seqs_for(x2, z).maximal)
                        if (s2[s2.size() - 2] == penult) {
                            found = true;
                            break;
                        }
                    if (!found)
                        rep.add_violation({"concatenation",
                                           {v.id_at(x2), v.id_at(x), v.id_at(z), v.id_at(penult)},
                                           {v.d_idx(x, x2, z)},
                                           "no maximal sequence from the far element keeps the penultimate"});
                }
            }
        }

    for (const char* key : {"h_move_checked", "h_inclusion_checked", "insertion_monotonicity_checked",
                            "insertion_rule_checked", "termination_sequences", "absorption_checked",
                            "concatenation_checked"}) {
        if (!rep.counts.count(key)) rep.counts[key] = 0;
        if (rep.counts[key] == 0) rep.note(std::string(key) + ": vacuous, hypothesis never fired");
    }
    for (const auto& viol : ctx.sandwich_violations()) rep.add_violation(viol);
    return rep;
}

}  // namespace projcx
