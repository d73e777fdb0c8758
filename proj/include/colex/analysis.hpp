#pragma once
// Structural analysis of ColexNet: basic statistics, centrality, Louvain
// communities, family/area subnetworks, and adjusted Rand index comparisons.

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "colex/common.hpp"
#include "colex/graph.hpp"

namespace colex {

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double avg_degree = 0;      // 2 * edges / nodes, a self-loop adds 2 to its node
    double edges_per_node = 0;  // edges / nodes
    std::size_t components = 0;
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

// Nodes of a ColexNet numbered in key order.
struct NodeIndex {
    std::vector<std::string> keys;
    std::map<std::string, std::size_t> id;

    explicit NodeIndex(const ColexNet& net) : keys(net.nodes().begin(), net.nodes().end()) {
        for (std::size_t i = 0; i < keys.size(); ++i) id.emplace(keys[i], i);
    }
};

}  // namespace detail

inline GraphStats graph_stats(const ColexNet& net) {
    GraphStats s;
    s.nodes = net.node_count();
    s.edges = net.edge_count();
    if (s.nodes == 0) return s;
    s.avg_degree = 2.0 * double(s.edges) / double(s.nodes);
    s.edges_per_node = double(s.edges) / double(s.nodes);
    detail::NodeIndex ix(net);
    detail::UnionFind uf(s.nodes);
    for (const auto& [e, _] : net.edges()) uf.unite(ix.id.at(e.first), ix.id.at(e.second));
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < s.nodes; ++i) roots.insert(uf.find(i));
    s.components = roots.size();
    return s;
}

// Degree with self-loops counted twice.
inline std::map<std::string, std::size_t> degrees(const ColexNet& net) {
    std::map<std::string, std::size_t> d;
    for (const auto& n : net.nodes()) d[n] = 0;
    for (const auto& [e, _] : net.edges()) {
        ++d[e.first];
        ++d[e.second];
    }
    return d;
}

// Exact shortest-path betweenness (Brandes accumulation) on the unweighted,
// undirected graph; self-loops are ignored and each pair is counted once.
inline std::map<std::string, double> betweenness(const ColexNet& net) {
    detail::NodeIndex ix(net);
    const std::size_t n = ix.keys.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [e, _] : net.edges()) {
        if (e.self_loop()) continue;
        auto a = ix.id.at(e.first), b = ix.id.at(e.second);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<double> bc(n, 0.0), sigma(n), delta(n);
    std::vector<long> dist(n);
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        stack.clear();
        for (std::size_t v = 0; v < n; ++v) {
            preds[v].clear();
            sigma[v] = 0;
            dist[v] = -1;
            delta[v] = 0;
        }
        sigma[s] = 1;
        dist[s] = 0;
        std::queue<std::size_t> bfs;
        bfs.push(s);
        while (!bfs.empty()) {
            auto v = bfs.front();
            bfs.pop();
            stack.push_back(v);
            for (auto w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    bfs.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            auto w = *it;
            for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < n; ++i) out[ix.keys[i]] = bc[i] / 2.0;
    return out;
}

// ---------------------------------------------------------------- Louvain

struct Partition {
    std::map<std::string, std::size_t> assignment;  // node -> community
    double modularity = 0;
    std::vector<double> pass_modularity;  // after every local-move sweep, all levels

    std::size_t community_count() const {
        std::set<std::size_t> c;
        for (const auto& [_, id] : assignment) c.insert(id);
        return c.size();
    }
};

namespace detail {

// Weighted undirected graph; self-loop weight kept apart from adjacency.
struct WeightedGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self;
    std::vector<double> strength;  // weighted degree, self-loops twice
    double total = 0;              // m: sum of edge weights, each edge once

    explicit WeightedGraph(std::size_t n) : adj(n), self(n, 0.0), strength(n, 0.0) {}

    void add(std::size_t a, std::size_t b, double w) {
        total += w;
        if (a == b) {
            self[a] += w;
            strength[a] += 2 * w;
            return;
        }
        adj[a].emplace_back(b, w);
        adj[b].emplace_back(a, w);
        strength[a] += w;
        strength[b] += w;
    }
    std::size_t size() const { return adj.size(); }
};

inline double modularity(const WeightedGraph& g, const std::vector<std::size_t>& comm, double resolution) {
    if (g.total == 0) return 0.0;
    std::map<std::size_t, double> inner, tot;
    for (std::size_t v = 0; v < g.size(); ++v) {
        inner[comm[v]] += g.self[v];
        tot[comm[v]] += g.strength[v];
        for (auto [u, w] : g.adj[v])
            if (u > v && comm[u] == comm[v]) inner[comm[v]] += w;
    }
    double q = 0, m = g.total;
    for (const auto& [c, t] : tot) q += inner[c] / m - resolution * (t / (2 * m)) * (t / (2 * m));
    return q;
}

}  // namespace detail

struct LouvainConfig {
    double resolution = 0.1;
    std::uint64_t seed = 114514;
};

// Two-phase modularity optimization (local moves, then aggregation) on edge
// weights = attesting-language counts. Node visit order is shuffled per sweep.
inline Partition louvain(const ColexNet& net, const LouvainConfig& cfg = {}) {
    detail::NodeIndex ix(net);
    const std::size_t n = ix.keys.size();
    Partition part;
    if (n == 0) return part;

    detail::WeightedGraph base(n);
    for (const auto& [e, langs] : net.edges()) base.add(ix.id.at(e.first), ix.id.at(e.second), double(langs.size()));

    std::vector<std::size_t> membership(n);  // original node -> current aggregate node
    std::iota(membership.begin(), membership.end(), 0);
    detail::WeightedGraph g = base;
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x10c4));
    const double m = base.total;

    for (std::size_t level = 0; m > 0; ++level) {
        const std::size_t k = g.size();
        std::vector<std::size_t> comm(k);
        std::iota(comm.begin(), comm.end(), 0);
        std::vector<double> tot = g.strength;
        std::vector<double> link(k, 0.0);
        std::vector<std::size_t> touched;
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        bool any_move = false;

        for (;;) {
            shuffle(order, rng);
            bool moved = false;
            for (auto v : order) {
                const std::size_t own = comm[v];
                const double kv = g.strength[v];
                for (auto [u, w] : g.adj[v]) {
                    if (link[comm[u]] == 0) touched.push_back(comm[u]);
                    link[comm[u]] += w;
                }
                tot[own] -= kv;
                auto gain = [&](std::size_t c) { return link[c] / m - cfg.resolution * tot[c] * kv / (2 * m * m); };
                std::size_t best = own;
                double best_gain = gain(own);
                for (auto c : touched) {
                    double gc = gain(c);
                    if (gc > best_gain + 1e-12) {
                        best = c;
                        best_gain = gc;
                    }
                }
                tot[best] += kv;
                comm[v] = best;
                if (best != own) moved = true;
                for (auto c : touched) link[c] = 0;
                link[own] = 0;
                touched.clear();
            }
            std::vector<std::size_t> flat(n);
            for (std::size_t i = 0; i < n; ++i) flat[i] = comm[membership[i]];
            part.pass_modularity.push_back(detail::modularity(base, flat, cfg.resolution));
            if (!moved) break;
            any_move = true;
        }

        // renumber communities in order of first appearance and aggregate
        std::map<std::size_t, std::size_t> renum;
        for (std::size_t v = 0; v < k; ++v) renum.emplace(comm[v], renum.size());
        for (auto& c : comm) c = renum.at(c);
        for (auto& mbr : membership) mbr = comm[mbr];
        if (!any_move || renum.size() == k) break;

        detail::WeightedGraph next(renum.size());
        std::map<std::pair<std::size_t, std::size_t>, double> merged;
        for (std::size_t v = 0; v < k; ++v) {
            if (g.self[v] > 0) merged[{comm[v], comm[v]}] += g.self[v];
            for (auto [u, w] : g.adj[v])
                if (u > v) {
                    auto a = comm[v], b = comm[u];
                    merged[{std::min(a, b), std::max(a, b)}] += w;
                }
        }
        for (const auto& [ab, w] : merged) next.add(ab.first, ab.second, w);
        g = std::move(next);
    }

    // community ids ordered by their smallest member key
    std::map<std::size_t, std::size_t> label;
    for (std::size_t i = 0; i < n; ++i) label.emplace(membership[i], label.size());
    std::vector<std::size_t> final_comm(n);
    for (std::size_t i = 0; i < n; ++i) {
        final_comm[i] = label.at(membership[i]);
        part.assignment[ix.keys[i]] = final_comm[i];
    }
    part.modularity = detail::modularity(base, final_comm, cfg.resolution);
    return part;
}

// Modularity of an arbitrary assignment, for checking partitions from elsewhere.
inline double modularity(const ColexNet& net, const std::map<std::string, std::size_t>& assignment, double resolution) {
    detail::NodeIndex ix(net);
    detail::WeightedGraph g(ix.keys.size());
    for (const auto& [e, langs] : net.edges()) g.add(ix.id.at(e.first), ix.id.at(e.second), double(langs.size()));
    std::vector<std::size_t> comm(ix.keys.size());
    for (std::size_t i = 0; i < comm.size(); ++i) comm[i] = assignment.at(ix.keys[i]);
    return detail::modularity(g, comm, resolution);
}

// ---------------------------------------------------------------- subnetworks

using Grouping = std::map<LanguageId, std::string>;

inline Grouping read_grouping(std::istream& in) {
    Grouping g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto parts = split(line, '\t');
        if (parts.size() != 2 || trim(parts[1]).empty())
            throw ValidationError("grouping:" + std::to_string(lineno) + ": expected iso<TAB>group");
        g[LanguageId(std::string(trim(parts[0])))] = std::string(trim(parts[1]));
    }
    return g;
}

inline std::vector<std::string> group_labels(const Grouping& g) {
    std::set<std::string> s;
    for (const auto& [_, label] : g) s.insert(label);
    return {s.begin(), s.end()};
}

// Edges attested by at least one language of the group, re-weighted by the
// group's attestations only.
inline ColexNet subnetwork(const ColexNet& net, const Grouping& grouping, const std::string& group) {
    std::set<LanguageId> members;
    for (const auto& [l, label] : grouping)
        if (label == group) members.insert(l);
    if (members.empty()) throw ValidationError("unknown group '" + group + "'");
    ColexNet out;
    for (const auto& [e, langs] : net.edges())
        for (const auto& l : langs)
            if (members.count(l)) out.attest(e, l);
    return out;
}

// ---------------------------------------------------------------- adjusted Rand index

inline double choose2(double x) { return x * (x - 1) / 2; }

inline double adjusted_rand_index(const std::map<std::string, std::size_t>& p1, const std::map<std::string, std::size_t>& p2) {
    if (p1.size() != p2.size()) throw Error("adjusted_rand_index: node sets differ");
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> table;
    std::map<std::size_t, std::size_t> rows, cols;
    auto it2 = p2.begin();
    for (const auto& [node, c1] : p1) {
        if (it2->first != node) throw Error("adjusted_rand_index: node sets differ");
        ++table[{c1, it2->second}];
        ++rows[c1];
        ++cols[it2->second];
        ++it2;
    }
    const double n = double(p1.size());
    // trivial cases: both one cluster, or both all singletons
    if (p1.size() <= 1 || (rows.size() == cols.size() && (rows.size() == 1 || rows.size() == p1.size()))) return 1.0;
    double index = 0, sa = 0, sb = 0;
    for (const auto& [_, c] : table) index += choose2(double(c));
    for (const auto& [_, c] : rows) sa += choose2(double(c));
    for (const auto& [_, c] : cols) sb += choose2(double(c));
    // scaled by C(n,2) so integer-valued inputs stay exact
    const double pairs = choose2(n);
    return (index * pairs - sa * sb) / ((sa + sb) / 2 * pairs - sa * sb);
}

inline double adjusted_rand_index(const Partition& a, const Partition& b) { return adjusted_rand_index(a.assignment, b.assignment); }

// ARI restricted to the nodes both partitions share; nullopt if none are shared.
inline std::optional<double> adjusted_rand_index_on_common(const Partition& a, const Partition& b) {
    std::map<std::string, std::size_t> ra, rb;
    for (const auto& [node, c] : a.assignment) {
        auto it = b.assignment.find(node);
        if (it == b.assignment.end()) continue;
        ra[node] = c;
        rb[node] = it->second;
    }
    if (ra.empty()) return std::nullopt;
    return adjusted_rand_index(ra, rb);
}

struct AriMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;  // mean over runs
};

// Pairwise ARI between the Louvain partitions of each group's subnetwork,
// averaged over `runs` seeds (seed, seed+1, ...). Groups whose subnetwork is
// empty get no partition; pairs without shared nodes score 0.
inline AriMatrix ari_matrix(const ColexNet& net, const Grouping& grouping, const LouvainConfig& cfg, std::size_t runs,
                            unsigned workers = 1) {
    AriMatrix out;
    out.labels = group_labels(grouping);
    const std::size_t k = out.labels.size();
    std::vector<ColexNet> subs;
    for (const auto& g : out.labels) subs.push_back(subnetwork(net, grouping, g));
    out.values.assign(k, std::vector<double>(k, 0.0));
    std::vector<std::vector<std::vector<double>>> per_run(runs, std::vector<std::vector<double>>(k, std::vector<double>(k, 0.0)));
    parallel_for(runs, workers, [&](std::size_t r) {
        LouvainConfig rc{cfg.resolution, cfg.seed + r};
        std::vector<Partition> parts;
        for (const auto& s : subs) parts.push_back(louvain(s, rc));
        for (std::size_t i = 0; i < k; ++i) {
            per_run[r][i][i] = 1.0;
            for (std::size_t j = i + 1; j < k; ++j) {
                double v = adjusted_rand_index_on_common(parts[i], parts[j]).value_or(0.0);
                per_run[r][i][j] = per_run[r][j][i] = v;
            }
        }
    });
    for (const auto& m : per_run)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) out.values[i][j] += m[i][j] / double(runs);
    return out;
}

// ---------------------------------------------------------------- TSV

inline void write_partition_tsv(std::ostream& out, const Partition& p) {
    for (const auto& [node, c] : p.assignment) out << node << '\t' << c << '\n';
}

inline void write_ari_tsv(std::ostream& out, const AriMatrix& m) {
    out << "group";
    for (const auto& l : m.labels) out << '\t' << l;
    out << '\n';
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << m.labels[i];
        for (double v : m.values[i]) out << '\t' << fixed6(v);
        out << '\n';
    }
}

}  // namespace colex
