#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "axioms.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "system.hpp"

namespace projcx {

// ----------------------------------------------------------------- fences

/// Parallel path-spaces with endpoint projections: space i sees every space
/// with a smaller index at its left endpoint and every space with a larger
/// index at its right endpoint.  The strong axioms hold exactly at theta 0.
inline ProjectionSystem make_fence_system(const std::vector<std::int64_t>& lengths) {
    if (lengths.size() < 2) throw std::invalid_argument("fence: need at least two spaces");
    ProjectionSystemBuilder b;
    b.set_theta(0);
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        std::int64_t L = lengths[i];
        if (L < 1) throw std::invalid_argument("fence: path length must be at least 1");
        std::vector<std::int64_t> vs;
        std::vector<std::pair<std::int64_t, std::int64_t>> es;
        for (std::int64_t v = 0; v <= L; ++v) vs.push_back(v);
        for (std::int64_t v = 0; v < L; ++v) es.emplace_back(v, v + 1);
        b.add_space(static_cast<SpaceId>(i), std::move(vs), std::move(es));
    }
    for (std::size_t i = 0; i < lengths.size(); ++i)
        for (std::size_t j = 0; j < lengths.size(); ++j) {
            if (i == j) continue;
            b.set_projection(static_cast<SpaceId>(i), static_cast<SpaceId>(j),
                             {j < i ? 0 : lengths[i]});
        }
    return b.finalize();
}

inline ProjectionSystem gen_fence(int n, std::int64_t L) {
    if (n < 2) throw std::invalid_argument("fence: n must be at least 2");
    return make_fence_system(std::vector<std::int64_t>(static_cast<std::size_t>(n), L));
}

// ------------------------------------------------------------- tree axes

/// A finite tree together with a family of geodesic segments in it.
struct TreeAxes {
    MetricSpaceGraph tree;
    std::vector<std::vector<std::int64_t>> axes;  // each a vertex path in the tree
};

namespace detail {

inline void validate_axis(const MetricSpaceGraph& tree, const std::vector<std::int64_t>& axis) {
    if (axis.empty()) throw std::invalid_argument("tree axes: empty axis");
    std::set<std::int64_t> seen;
    for (std::size_t k = 0; k < axis.size(); ++k) {
        if (!tree.has_vertex(axis[k])) throw std::invalid_argument("tree axes: axis vertex not in tree");
        if (!seen.insert(axis[k]).second) throw std::invalid_argument("tree axes: axis repeats a vertex");
        if (k > 0 && !tree.has_edge(axis[k - 1], axis[k]))
            throw std::invalid_argument("tree axes: consecutive axis vertices are not adjacent");
    }
    // in a tree, a simple path is automatically the geodesic, but keep the
    // explicit distance check so corrupted inputs fail loudly
    if (tree.distance(axis.front(), axis.back()) != static_cast<std::int64_t>(axis.size()) - 1)
        throw std::invalid_argument("tree axes: axis is not a geodesic");
}

inline std::vector<std::int64_t> canonical_axis(std::vector<std::int64_t> axis) {
    if (!axis.empty() && axis.front() > axis.back()) std::reverse(axis.begin(), axis.end());
    return axis;
}

}  // namespace detail

/// Spaces are the axes with their subpath metric; the projection of axis B
/// to axis A maps every vertex of B to its nearest vertex of A in the tree
/// metric (unique, since A is convex).  Returns the system and the smallest
/// constant at which the weak axioms hold.
inline std::pair<ProjectionSystem, std::int64_t> gen_tree_axes(const TreeAxes& spec) {
    const MetricSpaceGraph& tree = spec.tree;
    if (tree.edge_count() + 1 != tree.vertex_count()) throw std::invalid_argument("tree axes: graph is not a tree");
    if (spec.axes.size() < 2) throw std::invalid_argument("tree axes: need at least two axes");

    std::set<std::vector<std::int64_t>> canon;
    for (const auto& axis : spec.axes) {
        detail::validate_axis(tree, axis);
        if (!canon.insert(detail::canonical_axis(axis)).second)
            throw std::invalid_argument("tree axes: duplicate axis");
    }

    std::vector<std::int64_t> all_axis_vertices;
    for (const auto& axis : spec.axes)
        for (std::int64_t v : axis) all_axis_vertices.push_back(v);
    MetricSpaceGraph tree_rows = tree;  // local copy so row caching stays private
    tree_rows.precompute_rows(all_axis_vertices);

    ProjectionSystemBuilder b;
    b.set_theta(0);
    for (std::size_t i = 0; i < spec.axes.size(); ++i) {
        const auto& axis = spec.axes[i];
        std::vector<std::pair<std::int64_t, std::int64_t>> es;
        for (std::size_t k = 1; k < axis.size(); ++k) es.emplace_back(axis[k - 1], axis[k]);
        b.add_space(static_cast<SpaceId>(i), axis, std::move(es));
    }
    for (std::size_t i = 0; i < spec.axes.size(); ++i)
        for (std::size_t j = 0; j < spec.axes.size(); ++j) {
            if (i == j) continue;
            std::set<std::int64_t> image;
            for (std::int64_t bvert : spec.axes[j]) {
                auto near = tree_rows.nearest_in(bvert, spec.axes[i]);
                for (std::int64_t p : near) image.insert(p);
            }
            b.set_projection(static_cast<SpaceId>(i), static_cast<SpaceId>(j),
                             std::vector<std::int64_t>(image.begin(), image.end()));
        }

    ProjectionSystem sys = b.finalize();
    auto theta = infer_theta(sys.distances());
    if (!theta) throw std::logic_error("tree axes: no admissible theta");  // unreachable: finite, symmetric, triangle
    if (*theta == sys.theta()) return {std::move(sys), *theta};

    // rebuild with the inferred constant recorded on the system
    ProjectionSystemBuilder b2;
    b2.set_theta(*theta);
    for (SpaceId id : sys.space_ids()) {
        const auto& g = sys.space(id);
        b2.add_space(id, g.vertex_ids(), g.edge_list());
    }
    for (SpaceId t : sys.space_ids())
        for (SpaceId s : sys.space_ids())
            if (t != s) b2.set_projection(t, s, sys.proj(t, s));
    return {b2.finalize(), *theta};
}

/// Seeded random tree with random geodesic axes.
inline TreeAxes random_tree_axes(std::uint64_t seed, int axis_count, int tree_size) {
    if (tree_size < 2) throw std::invalid_argument("tree axes: tree too small");
    if (axis_count < 2) throw std::invalid_argument("tree axes: need at least two axes");
    Rng rng(seed);
    std::vector<std::int64_t> vs;
    std::vector<std::pair<std::int64_t, std::int64_t>> es;
    for (int v = 0; v < tree_size; ++v) {
        vs.push_back(v);
        if (v > 0) es.emplace_back(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(v))), v);
    }
    MetricSpaceGraph tree(vs, es);

    std::set<std::vector<std::int64_t>> canon;
    std::vector<std::vector<std::int64_t>> axes;
    int attempts = 0;
    while (static_cast<int>(axes.size()) < axis_count) {
        if (++attempts > 100 * axis_count) throw std::invalid_argument("tree axes: could not find enough distinct axes");
        auto u = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(tree_size)));
        auto v = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(tree_size)));
        if (u == v) continue;
        auto path = tree.shortest_path(u, v);
        if (canon.insert(detail::canonical_axis(path)).second) axes.push_back(std::move(path));
    }
    return {std::move(tree), std::move(axes)};
}

// -------------------------------------------------------------- abstract

/// Seeded random distance table.  Symmetry holds by construction; everything
/// else is left to chance, so most outputs violate some axiom and exercise
/// witness reporting.  Occasional INF entries and side entries d_Y(X,Y) are
/// included.
inline AbstractDistanceSystem gen_abstract(std::uint64_t seed, int size, std::int64_t theta) {
    if (size < 2) throw std::invalid_argument("abstract: need at least two spaces");
    if (theta < 0) throw std::invalid_argument("abstract: negative theta");
    Rng rng(seed);
    std::vector<SpaceId> ids;
    for (int i = 0; i < size; ++i) ids.push_back(i);
    std::vector<AbstractEntry> entries;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            if (x == y) continue;
            for (int z = x; z < size; ++z) {
                if (z == y) continue;
                ExtDist value(0);
                if (x == z) {
                    value = ExtDist(rng.range(0, theta + 2));
                } else if (rng.chance(1, 16)) {
                    value = ExtDist::infinity();
                } else {
                    value = ExtDist(rng.range(0, 4 * theta + 4));
                }
                entries.push_back({ids[static_cast<std::size_t>(y)], ids[static_cast<std::size_t>(x)],
                                   ids[static_cast<std::size_t>(z)], value});
            }
        }
    // sprinkle side entries d_Y(X, Y)
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            if (x == y) continue;
            if (rng.chance(1, 4))
                entries.push_back({ids[static_cast<std::size_t>(y)], ids[static_cast<std::size_t>(x)],
                                   ids[static_cast<std::size_t>(y)], ExtDist(rng.range(0, 4 * theta + 4))});
        }
    return AbstractDistanceSystem(ids, entries, theta);
}

}  // namespace projcx
