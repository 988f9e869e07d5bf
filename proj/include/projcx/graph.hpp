#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ext_dist.hpp"

namespace projcx {

/// Connected graph with unit edge lengths over arbitrary int64 vertex ids.
/// Distances are BFS distances.  Rows can be precomputed for hot sources;
/// precompute before any concurrent use, queries never mutate the cache.
class MetricSpaceGraph {
public:
    MetricSpaceGraph() = default;

    MetricSpaceGraph(std::vector<std::int64_t> vertex_ids,
                     const std::vector<std::pair<std::int64_t, std::int64_t>>& edge_ids) {
        std::sort(vertex_ids.begin(), vertex_ids.end());
        vertex_ids.erase(std::unique(vertex_ids.begin(), vertex_ids.end()), vertex_ids.end());
        if (vertex_ids.empty()) throw std::invalid_argument("graph: no vertices");
        ids_ = std::move(vertex_ids);
        for (std::size_t i = 0; i < ids_.size(); ++i) index_of_[ids_[i]] = static_cast<int>(i);

        adj_.assign(ids_.size(), {});
        std::set<std::pair<int, int>> seen;
        for (const auto& [a, b] : edge_ids) {
            int u = checked_index(a), v = checked_index(b);
            if (u == v) throw std::invalid_argument("graph: self-loop on vertex " + std::to_string(a));
            auto key = std::minmax(u, v);
            if (!seen.insert(key).second) continue;
            adj_[static_cast<std::size_t>(u)].push_back(v);
            adj_[static_cast<std::size_t>(v)].push_back(u);
        }
        for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
        edge_count_ = seen.size();

        // connectivity is part of the contract
        std::vector<std::int64_t> row = bfs_row(0);
        for (std::size_t i = 0; i < row.size(); ++i)
            if (row[i] < 0)
                throw std::invalid_argument("graph: not connected (vertex " + std::to_string(ids_[i]) +
                                            " unreachable from " + std::to_string(ids_[0]) + ")");
    }

    std::size_t vertex_count() const { return ids_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    const std::vector<std::int64_t>& vertex_ids() const { return ids_; }

    bool has_vertex(std::int64_t id) const { return index_of_.count(id) > 0; }

    bool has_edge(std::int64_t a, std::int64_t b) const {
        int u = checked_index(a), v = checked_index(b);
        const auto& nb = adj_[static_cast<std::size_t>(u)];
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Canonical edge list, each edge as (smaller id, larger id), sorted.
    std::vector<std::pair<std::int64_t, std::int64_t>> edge_list() const {
        std::vector<std::pair<std::int64_t, std::int64_t>> out;
        out.reserve(edge_count_);
        for (std::size_t u = 0; u < adj_.size(); ++u)
            for (int v : adj_[u])
                if (static_cast<int>(u) < v)
                    out.emplace_back(ids_[u], ids_[static_cast<std::size_t>(v)]);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Fill the row cache for the given sources.  Not thread safe; run it
    /// before sharing the graph across threads.
    void precompute_rows(const std::vector<std::int64_t>& sources) {
        for (std::int64_t s : sources) {
            int i = checked_index(s);
            if (!row_cache_.count(i)) row_cache_[i] = bfs_row(i);
        }
    }

    void precompute_all_rows() { precompute_rows(ids_); }

    std::int64_t distance(std::int64_t a, std::int64_t b) const {
        int u = checked_index(a), v = checked_index(b);
        if (u == v) return 0;
        if (auto it = row_cache_.find(u); it != row_cache_.end()) return it->second[static_cast<std::size_t>(v)];
        if (auto it = row_cache_.find(v); it != row_cache_.end()) return it->second[static_cast<std::size_t>(u)];
        return bfs_row(u)[static_cast<std::size_t>(v)];
    }

    /// All BFS distances from one source, keyed by vertex id.
    std::map<std::int64_t, std::int64_t> distances_from(std::int64_t src) const {
        int s = checked_index(src);
        std::vector<std::int64_t> row;
        if (auto it = row_cache_.find(s); it != row_cache_.end())
            row = it->second;
        else
            row = bfs_row(s);
        std::map<std::int64_t, std::int64_t> out;
        for (std::size_t i = 0; i < row.size(); ++i) out[ids_[i]] = row[i];
        return out;
    }

    /// Ids in `candidates` at minimal distance from src, sorted.
    std::vector<std::int64_t> nearest_in(std::int64_t src, const std::vector<std::int64_t>& candidates) const {
        if (candidates.empty()) throw std::invalid_argument("nearest_in: empty candidate set");
        auto rows = distances_from(src);
        std::int64_t best = -1;
        for (std::int64_t c : candidates) {
            auto it = rows.find(c);
            if (it == rows.end()) throw std::invalid_argument("nearest_in: candidate not in graph");
            if (best < 0 || it->second < best) best = it->second;
        }
        std::vector<std::int64_t> out;
        for (std::int64_t c : candidates)
            if (rows.at(c) == best) out.push_back(c);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// One shortest path a -> b as vertex ids.  Deterministic: each vertex
    /// takes the smallest-id predecessor.
    std::vector<std::int64_t> shortest_path(std::int64_t a, std::int64_t b) const {
        int s = checked_index(a), t = checked_index(b);
        std::vector<std::int64_t> dist(ids_.size(), -1);
        std::vector<int> parent(ids_.size(), -1);
        std::deque<int> q;
        dist[static_cast<std::size_t>(s)] = 0;
        q.push_back(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            if (u == t) break;
            for (int v : adj_[static_cast<std::size_t>(u)]) {
                if (dist[static_cast<std::size_t>(v)] < 0) {
                    dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                    parent[static_cast<std::size_t>(v)] = u;
                    q.push_back(v);
                }
            }
        }
        if (dist[static_cast<std::size_t>(t)] < 0) throw std::logic_error("shortest_path: disconnected");
        std::vector<std::int64_t> path;
        for (int cur = t; cur != -1; cur = parent[static_cast<std::size_t>(cur)]) path.push_back(ids_[static_cast<std::size_t>(cur)]);
        std::reverse(path.begin(), path.end());
        return path;
    }

    /// Max pairwise distance within a set of vertex ids.
    std::int64_t set_diameter(const std::vector<std::int64_t>& set_ids) const {
        if (set_ids.empty()) throw std::invalid_argument("set_diameter: empty set");
        std::int64_t best = 0;
        for (std::size_t i = 0; i < set_ids.size(); ++i) {
            auto rows = distances_from(set_ids[i]);
            for (std::size_t j = i + 1; j < set_ids.size(); ++j) best = std::max(best, rows.at(set_ids[j]));
        }
        return best;
    }

private:
    int checked_index(std::int64_t id) const {
        auto it = index_of_.find(id);
        if (it == index_of_.end()) throw std::invalid_argument("graph: unknown vertex " + std::to_string(id));
        return it->second;
    }

    std::vector<std::int64_t> bfs_row(int src) const {
        std::vector<std::int64_t> dist(ids_.size(), -1);
        std::deque<int> q;
        dist[static_cast<std::size_t>(src)] = 0;
        q.push_back(src);
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int v : adj_[static_cast<std::size_t>(u)]) {
                if (dist[static_cast<std::size_t>(v)] < 0) {
                    dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                    q.push_back(v);
                }
            }
        }
        return dist;
    }

    std::vector<std::int64_t> ids_;
    std::map<std::int64_t, int> index_of_;
    std::vector<std::vector<int>> adj_;
    std::size_t edge_count_ = 0;
    std::map<int, std::vector<std::int64_t>> row_cache_;
};

/// Undirected graph with positive integer edge weights on vertices 0..n-1.
/// Distances by Dijkstra; may be infinite if disconnected.
class WeightedGraph {
public:
    explicit WeightedGraph(std::size_t n) : adj_(n) {}

    std::size_t vertex_count() const { return adj_.size(); }

    void add_edge(std::size_t u, std::size_t v, std::int64_t w) {
        if (u >= adj_.size() || v >= adj_.size()) throw std::invalid_argument("weighted graph: vertex out of range");
        if (u == v) throw std::invalid_argument("weighted graph: self-loop");
        if (w <= 0) throw std::invalid_argument("weighted graph: non-positive weight");
        auto key = std::minmax(u, v);
        auto it = weight_.find(key);
        if (it != weight_.end()) {
            if (w < it->second) {
                it->second = w;
                rebuild_needed_ = true;
            }
            return;
        }
        weight_[key] = w;
        adj_[u].emplace_back(v, w);
        adj_[v].emplace_back(u, w);
        ++edge_count_;
    }

    std::size_t edge_count() const { return edge_count_; }

    /// (u, v, w) with u < v, sorted.
    std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> edge_list() const {
        std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> out;
        out.reserve(weight_.size());
        for (const auto& [key, w] : weight_) out.emplace_back(key.first, key.second, w);
        return out;
    }

    const std::vector<std::pair<std::size_t, std::int64_t>>& neighbors(std::size_t u) const {
        return adj_.at(u);
    }

    std::vector<std::int64_t> dijkstra_row(std::size_t src) const {
        sync_adj();
        std::vector<std::int64_t> dist(adj_.size(), -1);
        using Item = std::pair<std::int64_t, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        dist[src] = 0;
        pq.emplace(0, src);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d != dist[u]) continue;
            for (const auto& [v, w] : adj_[u]) {
                std::int64_t nd = d + w;
                if (dist[v] < 0 || nd < dist[v]) {
                    dist[v] = nd;
                    pq.emplace(nd, v);
                }
            }
        }
        return dist;
    }

    /// Not thread safe; run before sharing across threads.
    void precompute_all_rows() const {
        sync_adj();
        if (!row_cache_.empty()) return;
        row_cache_.resize(adj_.size());
        for (std::size_t s = 0; s < adj_.size(); ++s) row_cache_[s] = dijkstra_row(s);
    }

    ExtDist distance(std::size_t u, std::size_t v) const {
        std::int64_t d;
        if (!row_cache_.empty()) {
            d = row_cache_[u][v];
        } else {
            d = dijkstra_row(u)[v];
        }
        return d < 0 ? ExtDist::infinity() : ExtDist(d);
    }

private:
    // add_edge may lower an existing weight; lazily rebuild adjacency then
    void sync_adj() const {
        if (!rebuild_needed_) return;
        for (auto& nb : adj_) nb.clear();
        for (const auto& [key, w] : weight_) {
            adj_[key.first].emplace_back(key.second, w);
            adj_[key.second].emplace_back(key.first, w);
        }
        rebuild_needed_ = false;
    }

    mutable std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> adj_;
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> weight_;
    std::size_t edge_count_ = 0;
    mutable bool rebuild_needed_ = false;
    mutable std::vector<std::vector<std::int64_t>> row_cache_;
};

}  // namespace projcx
