#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sbm {

struct GraphBuildStats {
    std::int64_t dropped_self_loops = 0;
    std::int64_t collapsed_duplicates = 0;
};

// Undirected simple graph stored as sorted neighbor lists.
// Immutable after construction; all operations on it are pure.
class Graph {
public:
    Graph() = default;

    // Deduplicates, symmetrizes and drops self-loops. Endpoints outside
    // [0, n) are a construction error naming the offending pair.
    static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                            GraphBuildStats* stats = nullptr) {
        if (n < 0) throw std::invalid_argument("graph: negative node count");
        GraphBuildStats local;
        Graph g;
        g.n_ = n;
        g.adj_.assign(static_cast<size_t>(n), {});
        for (const auto& [u, v] : edges) {
            if (u < 0 || u >= n || v < 0 || v >= n) {
                std::ostringstream os;
                os << "graph: edge (" << u << "," << v << ") out of range [0," << n << ")";
                throw std::invalid_argument(os.str());
            }
            if (u == v) {
                ++local.dropped_self_loops;
                continue;
            }
            g.adj_[static_cast<size_t>(u)].push_back(v);
            g.adj_[static_cast<size_t>(v)].push_back(u);
        }
        for (auto& nbrs : g.adj_) {
            std::sort(nbrs.begin(), nbrs.end());
            const auto before = nbrs.size();
            nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
            local.collapsed_duplicates += static_cast<std::int64_t>(before - nbrs.size());
        }
        local.collapsed_duplicates /= 2;  // counted once per endpoint
        std::int64_t deg_sum = 0;
        for (const auto& nbrs : g.adj_) deg_sum += static_cast<std::int64_t>(nbrs.size());
        g.edge_count_ = deg_sum / 2;
        if (stats) *stats = local;
        return g;
    }

    int node_count() const { return n_; }
    std::int64_t edge_count() const { return edge_count_; }

    const std::vector<int>& neighbors(int u) const { return adj_[static_cast<size_t>(u)]; }

    int degree(int u) const { return static_cast<int>(adj_[static_cast<size_t>(u)].size()); }

    bool has_edge(int u, int v) const {
        const auto& nbrs = adj_[static_cast<size_t>(u)];
        return std::binary_search(nbrs.begin(), nbrs.end(), v);
    }

    // Visits each edge once with u < v.
    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        for (int u = 0; u < n_; ++u)
            for (int v : adj_[static_cast<size_t>(u)])
                if (u < v) fn(u, v);
    }

    // Dense 0/1 adjacency with zero diagonal.
    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
        for_each_edge([&](int u, int v) {
            a(u, v) = 1.0;
            a(v, u) = 1.0;
        });
        return a;
    }

private:
    int n_ = 0;
    std::int64_t edge_count_ = 0;
    std::vector<std::vector<int>> adj_;
};

inline Graph build_graph(int n, const std::vector<std::pair<int, int>>& edges,
                         GraphBuildStats* stats = nullptr) {
    return Graph::from_edges(n, edges, stats);
}

// Community assignment over {0, 1, ..., k}; 0 marks a node left
// unassigned (leave-one-out vectors), and is only legal when the vector
// is explicitly treated as partial.
struct LabelVector {
    std::vector<int> values;
    int k = 0;

    LabelVector() = default;
    LabelVector(std::vector<int> v, int communities) : values(std::move(v)), k(communities) {}

    int size() const { return static_cast<int>(values.size()); }
    int operator[](int u) const { return values[static_cast<size_t>(u)]; }
    int& operator[](int u) { return values[static_cast<size_t>(u)]; }

    bool complete() const {
        return std::all_of(values.begin(), values.end(), [](int x) { return x >= 1; });
    }

    void validate(bool allow_partial = false) const {
        for (size_t u = 0; u < values.size(); ++u) {
            const int x = values[u];
            if (x < 0 || x > k) {
                std::ostringstream os;
                os << "labels: value " << x << " at node " << u << " outside [0," << k << "]";
                throw std::invalid_argument(os.str());
            }
            if (x == 0 && !allow_partial) {
                std::ostringstream os;
                os << "labels: node " << u << " unassigned in a complete vector";
                throw std::invalid_argument(os.str());
            }
        }
    }

    // sizes()[l] is the number of nodes with label l, l in [0, k].
    std::vector<std::int64_t> sizes() const {
        std::vector<std::int64_t> s(static_cast<size_t>(k) + 1, 0);
        for (int x : values) ++s[static_cast<size_t>(x)];
        return s;
    }

    bool operator==(const LabelVector& other) const {
        return k == other.k && values == other.values;
    }
};

using DegreeVector = std::vector<int>;

inline DegreeVector degrees(const Graph& g) {
    DegreeVector d(static_cast<size_t>(g.node_count()));
    for (int u = 0; u < g.node_count(); ++u) d[static_cast<size_t>(u)] = g.degree(u);
    return d;
}

inline double average_degree(const Graph& g) {
    if (g.node_count() == 0) throw std::invalid_argument("average_degree: empty graph");
    return 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
}

struct SubgraphResult {
    Graph graph;
    std::vector<int> old_to_new;  // -1 for nodes not in the subgraph
    std::vector<int> new_to_old;
};

namespace detail {

inline SubgraphResult induced_subgraph(const Graph& g, const std::vector<int>& keep) {
    SubgraphResult out;
    out.old_to_new.assign(static_cast<size_t>(g.node_count()), -1);
    out.new_to_old = keep;
    for (size_t i = 0; i < keep.size(); ++i)
        out.old_to_new[static_cast<size_t>(keep[i])] = static_cast<int>(i);
    std::vector<std::pair<int, int>> edges;
    for (int u : keep)
        for (int v : g.neighbors(u))
            if (u < v && out.old_to_new[static_cast<size_t>(v)] >= 0)
                edges.emplace_back(out.old_to_new[static_cast<size_t>(u)],
                                   out.old_to_new[static_cast<size_t>(v)]);
    out.graph = Graph::from_edges(static_cast<int>(keep.size()), edges);
    return out;
}

}  // namespace detail

// Component labels by BFS; ties between equal-sized components go to the
// one containing the smallest original index.
inline SubgraphResult largest_connected_component(const Graph& g) {
    const int n = g.node_count();
    if (n == 0) throw std::invalid_argument("largest_connected_component: empty graph");
    std::vector<int> comp(static_cast<size_t>(n), -1);
    int best_root = -1;
    std::int64_t best_size = -1;
    std::vector<int> queue;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<size_t>(s)] >= 0) continue;
        queue.assign(1, s);
        comp[static_cast<size_t>(s)] = s;
        std::int64_t size = 0;
        while (!queue.empty()) {
            const int u = queue.back();
            queue.pop_back();
            ++size;
            for (int v : g.neighbors(u)) {
                if (comp[static_cast<size_t>(v)] < 0) {
                    comp[static_cast<size_t>(v)] = s;
                    queue.push_back(v);
                }
            }
        }
        if (size > best_size) {  // first root with max size wins ties
            best_size = size;
            best_root = s;
        }
    }
    std::vector<int> keep;
    keep.reserve(static_cast<size_t>(best_size));
    for (int u = 0; u < n; ++u)
        if (comp[static_cast<size_t>(u)] == best_root) keep.push_back(u);
    return detail::induced_subgraph(g, keep);
}

inline SubgraphResult subgraph_excluding(const Graph& g, int u) {
    if (u < 0 || u >= g.node_count()) {
        std::ostringstream os;
        os << "subgraph_excluding: node " << u << " out of range [0," << g.node_count() << ")";
        throw std::invalid_argument(os.str());
    }
    std::vector<int> keep;
    keep.reserve(static_cast<size_t>(g.node_count()) - 1);
    for (int v = 0; v < g.node_count(); ++v)
        if (v != u) keep.push_back(v);
    return detail::induced_subgraph(g, keep);
}

}  // namespace sbm
