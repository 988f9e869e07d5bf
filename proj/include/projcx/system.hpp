#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ext_dist.hpp"
#include "graph.hpp"

namespace projcx {

using SpaceId = std::int64_t;

/// Dense symmetric table of the quantities d_Y(X, Z), indexed by space.  The
/// core domain is all (Y, X, Z) with X != Y and Z != Y, diagonals X == Z
/// included.  Entries with one argument equal to the subscript (d_Y(X, Y))
/// may be present in table-backed systems and are absent for graph-backed
/// ones; use try_d for those.
class DistanceView {
public:
    DistanceView() = default;

    DistanceView(std::vector<SpaceId> ids, std::int64_t declared_theta) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        if (ids.empty()) throw std::invalid_argument("distance view: no spaces");
        if (declared_theta < 0) throw std::invalid_argument("distance view: negative theta");
        ids_ = std::move(ids);
        for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = static_cast<int>(i);
        theta_ = declared_theta;
        std::size_t n = ids_.size();
        tag_.assign(n * n * n, 0);
        val_.assign(n * n * n, 0);
    }

    int n() const { return static_cast<int>(ids_.size()); }
    const std::vector<SpaceId>& space_ids() const { return ids_; }
    SpaceId id_at(int i) const { return ids_.at(static_cast<std::size_t>(i)); }
    bool has_space(SpaceId id) const { return index_.count(id) > 0; }
    std::int64_t declared_theta() const { return theta_; }

    int index_of(SpaceId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw std::invalid_argument("distance view: unknown space " + std::to_string(id));
        return it->second;
    }

    /// Stores d_at(a, b) symmetrically in (a, b).
    void set_entry(SpaceId at, SpaceId a, SpaceId b, ExtDist v) {
        int y = index_of(at), x = index_of(a), z = index_of(b);
        if (x == y && z == y) throw std::invalid_argument("distance view: d_Y(Y, Y) is outside the domain");
        write(y, x, z, v);
        write(y, z, x, v);
    }

    bool has_idx(int y, int x, int z) const { return tag_[offset(y, x, z)] != 0; }

    ExtDist d_idx(int y, int x, int z) const {
        std::size_t o = offset(y, x, z);
        char t = tag_[o];
        if (t == 0) throw std::logic_error("distance view: entry not present");
        return t == 2 ? ExtDist::infinity() : ExtDist(val_[o]);
    }

    std::optional<ExtDist> try_d_idx(int y, int x, int z) const {
        std::size_t o = offset(y, x, z);
        char t = tag_[o];
        if (t == 0) return std::nullopt;
        return t == 2 ? ExtDist::infinity() : ExtDist(val_[o]);
    }

    ExtDist d(SpaceId Y, SpaceId X, SpaceId Z) const {
        int y = index_of(Y), x = index_of(X), z = index_of(Z);
        if (x == y || z == y)
            throw std::invalid_argument("distance view: d_" + std::to_string(Y) + "(" + std::to_string(X) + ", " +
                                        std::to_string(Z) + ") has an argument equal to the subscript; use try_d");
        return d_idx(y, x, z);
    }

    std::optional<ExtDist> try_d(SpaceId Y, SpaceId X, SpaceId Z) const {
        return try_d_idx(index_of(Y), index_of(X), index_of(Z));
    }

    /// True when every core-domain entry is present.
    bool core_complete(std::string* first_missing = nullptr) const {
        int nn = n();
        for (int y = 0; y < nn; ++y)
            for (int x = 0; x < nn; ++x) {
                if (x == y) continue;
                for (int z = x; z < nn; ++z) {
                    if (z == y) continue;
                    if (!has_idx(y, x, z)) {
                        if (first_missing)
                            *first_missing = "d_" + std::to_string(ids_[static_cast<std::size_t>(y)]) + "(" +
                                             std::to_string(ids_[static_cast<std::size_t>(x)]) + ", " +
                                             std::to_string(ids_[static_cast<std::size_t>(z)]) + ")";
                        return false;
                    }
                }
            }
        return true;
    }

private:
    std::size_t offset(int y, int x, int z) const {
        std::size_t n = ids_.size();
        return (static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x)) * n + static_cast<std::size_t>(z);
    }

    void write(int y, int x, int z, ExtDist v) {
        std::size_t o = offset(y, x, z);
        if (tag_[o] != 0) {
            ExtDist old = tag_[o] == 2 ? ExtDist::infinity() : ExtDist(val_[o]);
            if (old != v)
                throw std::invalid_argument("distance view: contradictory duplicate entry for d_" +
                                            std::to_string(ids_[static_cast<std::size_t>(y)]) + "(" +
                                            std::to_string(ids_[static_cast<std::size_t>(x)]) + ", " +
                                            std::to_string(ids_[static_cast<std::size_t>(z)]) + ")");
            return;
        }
        if (v.is_infinite()) {
            tag_[o] = 2;
        } else {
            tag_[o] = 1;
            val_[o] = v.value();
        }
    }

    std::vector<SpaceId> ids_;
    std::map<SpaceId, int> index_;
    std::vector<std::int64_t> val_;
    std::vector<char> tag_;  // 0 absent, 1 finite, 2 infinite
    std::int64_t theta_ = 0;
};

class ProjectionSystemBuilder;

/// A finite family of connected unit-edge graphs ("spaces") with, for every
/// ordered pair of distinct spaces (Y, X), a nonempty projection set
/// pi_Y(X) inside Y.  The derived quantities
///   d_Y(X, Z) = diam_Y(pi_Y(X) u pi_Y(Z))
/// are tabulated once at construction.  Construction does not check any
/// axiom beyond shape validity; verification is a separate step.
class ProjectionSystem {
public:
    std::int64_t theta() const { return view_.declared_theta(); }
    const std::vector<SpaceId>& space_ids() const { return ids_; }
    int space_count() const { return static_cast<int>(ids_.size()); }
    bool has_space(SpaceId id) const { return view_.has_space(id); }
    int space_index(SpaceId id) const { return view_.index_of(id); }
    SpaceId space_id_at(int i) const { return view_.id_at(i); }

    const MetricSpaceGraph& space(SpaceId id) const { return graphs_[static_cast<std::size_t>(space_index(id))]; }

    /// pi_target(source): sorted vertex ids inside `target`.
    const std::vector<std::int64_t>& proj(SpaceId target, SpaceId source) const {
        int t = space_index(target), s = space_index(source);
        if (t == s) throw std::invalid_argument("projection of a space to itself is undefined");
        return proj_[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)];
    }

    const DistanceView& distances() const { return view_; }
    ExtDist d(SpaceId Y, SpaceId X, SpaceId Z) const { return view_.d(Y, X, Z); }

private:
    friend class ProjectionSystemBuilder;
    ProjectionSystem() = default;

    std::vector<SpaceId> ids_;
    std::vector<MetricSpaceGraph> graphs_;             // parallel to ids_
    std::vector<std::vector<std::vector<std::int64_t>>> proj_;  // [target][source]
    DistanceView view_;
};

class ProjectionSystemBuilder {
public:
    ProjectionSystemBuilder& set_theta(std::int64_t theta) {
        if (theta < 0) throw std::invalid_argument("builder: negative theta");
        theta_ = theta;
        return *this;
    }

    ProjectionSystemBuilder& add_space(SpaceId id, std::vector<std::int64_t> vertices,
                                       std::vector<std::pair<std::int64_t, std::int64_t>> edges) {
        if (spaces_.count(id)) throw std::invalid_argument("builder: duplicate space id " + std::to_string(id));
        spaces_.emplace(id, MetricSpaceGraph(std::move(vertices), edges));
        return *this;
    }

    ProjectionSystemBuilder& set_projection(SpaceId target, SpaceId source, std::vector<std::int64_t> points) {
        if (target == source) throw std::invalid_argument("builder: projection target equals source");
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        proj_[{target, source}] = std::move(points);
        return *this;
    }

    ProjectionSystem finalize() {
        if (spaces_.empty()) throw std::invalid_argument("builder: no spaces");
        ProjectionSystem sys;
        for (const auto& [id, g] : spaces_) sys.ids_.push_back(id);  // map iteration is sorted
        sys.view_ = DistanceView(sys.ids_, theta_);
        for (auto& [id, g] : spaces_) sys.graphs_.push_back(std::move(g));

        std::size_t n = sys.ids_.size();
        sys.proj_.assign(n, std::vector<std::vector<std::int64_t>>(n));
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t s = 0; s < n; ++s) {
                if (t == s) continue;
                auto it = proj_.find({sys.ids_[t], sys.ids_[s]});
                if (it == proj_.end())
                    throw std::invalid_argument("builder: missing projection of space " + std::to_string(sys.ids_[s]) +
                                                " to space " + std::to_string(sys.ids_[t]));
                if (it->second.empty())
                    throw std::invalid_argument("builder: empty projection of space " + std::to_string(sys.ids_[s]) +
                                                " to space " + std::to_string(sys.ids_[t]));
                for (std::int64_t p : it->second)
                    if (!sys.graphs_[t].has_vertex(p))
                        throw std::invalid_argument("builder: projection point " + std::to_string(p) +
                                                    " is not a vertex of space " + std::to_string(sys.ids_[t]));
                sys.proj_[t][s] = it->second;
            }
        }
        for (auto it = proj_.begin(); it != proj_.end(); ++it)
            if (!sys.view_.has_space(it->first.first) || !sys.view_.has_space(it->first.second))
                throw std::invalid_argument("builder: projection references unknown space");

        tabulate(sys);
        return sys;
    }

private:
    // d_Y(X, Z) for all X, Z != Y, via pairwise distances between projection points
    static void tabulate(ProjectionSystem& sys) {
        std::size_t n = sys.ids_.size();
        for (std::size_t y = 0; y < n; ++y) {
            MetricSpaceGraph& g = sys.graphs_[y];
            std::vector<std::int64_t> sources;
            for (std::size_t s = 0; s < n; ++s)
                if (s != y)
                    for (std::int64_t p : sys.proj_[y][s]) sources.push_back(p);
            std::sort(sources.begin(), sources.end());
            sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
            g.precompute_rows(sources);

            std::map<std::int64_t, std::map<std::int64_t, std::int64_t>> pd;
            for (std::int64_t p : sources) pd[p] = g.distances_from(p);

            auto pair_max = [&](const std::vector<std::int64_t>& A, const std::vector<std::int64_t>& B) {
                std::int64_t best = 0;
                for (std::int64_t p : A)
                    for (std::int64_t q : B) best = std::max(best, pd.at(p).at(q));
                return best;
            };

            std::vector<std::int64_t> diam(n, 0);
            for (std::size_t x = 0; x < n; ++x) {
                if (x == y) continue;
                diam[x] = pair_max(sys.proj_[y][x], sys.proj_[y][x]);
                sys.view_.set_entry(sys.ids_[y], sys.ids_[x], sys.ids_[x], ExtDist(diam[x]));
            }
            for (std::size_t x = 0; x < n; ++x) {
                if (x == y) continue;
                for (std::size_t z = x + 1; z < n; ++z) {
                    if (z == y) continue;
                    std::int64_t cross = pair_max(sys.proj_[y][x], sys.proj_[y][z]);
                    std::int64_t v = std::max({diam[x], diam[z], cross});
                    sys.view_.set_entry(sys.ids_[y], sys.ids_[x], sys.ids_[z], ExtDist(v));
                }
            }
        }
    }

    std::int64_t theta_ = 0;
    std::map<SpaceId, MetricSpaceGraph> spaces_;
    std::map<std::pair<SpaceId, SpaceId>, std::vector<std::int64_t>> proj_;
};

/// Entry of a table-backed system: the value d_at(a, b).
struct AbstractEntry {
    SpaceId at;
    SpaceId a;
    SpaceId b;
    ExtDist value;
};

/// Distance data given directly as a table rather than via graphs and
/// projections.  Every core-domain entry must be supplied; entries of the
/// form d_Y(X, Y) are optional extras.
class AbstractDistanceSystem {
public:
    AbstractDistanceSystem(std::vector<SpaceId> ids, const std::vector<AbstractEntry>& entries,
                           std::int64_t declared_theta)
        : view_(std::move(ids), declared_theta) {
        for (const auto& e : entries) {
            if (!view_.has_space(e.at) || !view_.has_space(e.a) || !view_.has_space(e.b))
                throw std::invalid_argument("abstract system: entry references unknown space");
            view_.set_entry(e.at, e.a, e.b, e.value);  // throws on contradictory duplicates
        }
        std::string missing;
        if (!view_.core_complete(&missing))
            throw std::invalid_argument("abstract system: missing entry " + missing);
    }

    const std::vector<SpaceId>& space_ids() const { return view_.space_ids(); }
    std::int64_t theta() const { return view_.declared_theta(); }
    const DistanceView& distances() const { return view_; }
    ExtDist d(SpaceId Y, SpaceId X, SpaceId Z) const { return view_.d(Y, X, Z); }

private:
    DistanceView view_;
};

}  // namespace projcx
