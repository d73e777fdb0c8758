#pragma once
// Second-order biased random walks over ColexNet+.
//
// From current node v, having arrived from t, the next node x is drawn with
// unnormalized weight alpha(t, x) * w(v, x), where alpha is 1/p when x == t,
// 1 when x is adjacent to t, and 1/q otherwise. On a bipartite graph the
// middle case never happens.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "colex/common.hpp"
#include "colex/graph.hpp"

namespace colex {

struct WalkConfig {
    double p = 0.5;
    double q = 2.0;
    std::size_t walks_per_node = 10;
    std::size_t walk_length = 80;
    std::uint64_t seed = 1;
    bool uniform_weights = false;  // ignore ColexNet+ multiplicities

    void validate() const {
        if (!(p > 0) || !(q > 0)) throw ValidationError("walk p and q must be positive");
        if (walk_length < 2) throw ValidationError("walk_length must be >= 2");
        if (walks_per_node < 1) throw ValidationError("walks_per_node must be >= 1");
    }
};

// Undirected weighted graph in CSR form with neighbor lists sorted by id.
class WalkGraph {
public:
    using WeightedEdge = std::tuple<std::string, std::string, double>;

    static WalkGraph from_edges(const std::vector<WeightedEdge>& edges) {
        WalkGraph g;
        std::map<std::string, std::size_t> ids;
        for (const auto& [a, b, _] : edges) {
            ids.emplace(a, 0);
            ids.emplace(b, 0);
        }
        for (auto& [k, id] : ids) {
            id = g.keys_.size();
            g.keys_.push_back(k);
            g.is_ngram_.push_back(is_ngram_key(k) ? 1 : 0);
        }
        std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(g.keys_.size());
        for (const auto& [a, b, w] : edges) {
            if (!(w > 0)) throw Error("walk graph edge weights must be positive");
            auto ia = static_cast<std::uint32_t>(ids[a]), ib = static_cast<std::uint32_t>(ids[b]);
            adj[ia].emplace_back(ib, w);
            if (ia != ib) adj[ib].emplace_back(ia, w);
        }
        g.offsets_.push_back(0);
        for (auto& list : adj) {
            std::sort(list.begin(), list.end());
            // merge parallel edges
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (!g.targets_.empty() && g.targets_.size() > g.offsets_.back() && g.targets_.back() == list[i].first)
                    g.weights_.back() += list[i].second;
                else {
                    g.targets_.push_back(list[i].first);
                    g.weights_.push_back(list[i].second);
                }
            }
            g.offsets_.push_back(g.targets_.size());
        }
        for (std::size_t i = 0; i < g.keys_.size(); ++i) g.index_.emplace(g.keys_[i], i);
        return g;
    }

    static WalkGraph from_colexnetplus(const ColexNetPlus& net, bool uniform_weights = false) {
        std::vector<WeightedEdge> edges;
        edges.reserve(net.edge_count());
        for (const auto& [e, m] : net.edges()) edges.emplace_back(e.first, e.second, uniform_weights ? 1.0 : double(m));
        return from_edges(edges);
    }

    std::size_t size() const { return keys_.size(); }
    const std::string& key(std::size_t v) const { return keys_[v]; }
    const std::vector<std::string>& keys() const { return keys_; }
    bool is_ngram(std::size_t v) const { return is_ngram_[v] != 0; }

    std::optional<std::size_t> find(const std::string& k) const {
        auto it = index_.find(k);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::span<const std::uint32_t> neighbors(std::size_t v) const {
        return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::span<const double> weights(std::size_t v) const {
        return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    bool adjacent(std::size_t u, std::size_t x) const {
        auto n = neighbors(u);
        return std::binary_search(n.begin(), n.end(), static_cast<std::uint32_t>(x));
    }

private:
    std::vector<std::string> keys_;
    std::vector<char> is_ngram_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> targets_;
    std::vector<double> weights_;
};

// Search bias between the previous node t and a candidate x.
inline double search_bias(const WalkGraph& g, std::size_t prev, std::size_t x, const WalkConfig& cfg) {
    if (x == prev) return 1.0 / cfg.p;
    if (g.adjacent(prev, x)) return 1.0;
    return 1.0 / cfg.q;
}

// Unnormalized transition weights from cur, written into `out` (parallel to neighbors(cur)).
inline double transition_weights(const WalkGraph& g, std::optional<std::size_t> prev, std::size_t cur, const WalkConfig& cfg,
                                 std::vector<double>& out) {
    auto nb = g.neighbors(cur);
    auto w = g.weights(cur);
    out.resize(nb.size());
    double total = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
        out[i] = (prev ? search_bias(g, *prev, nb[i], cfg) : 1.0) * w[i];
        total += out[i];
    }
    return total;
}

// Normalized next-step distribution over the neighbors of cur.
inline std::vector<std::pair<std::size_t, double>> transition_distribution(const WalkGraph& g, std::optional<std::size_t> prev,
                                                                           std::size_t cur, const WalkConfig& cfg) {
    if (g.neighbors(cur).empty()) throw Error("node " + g.key(cur) + " has no neighbors");
    if (prev && !g.adjacent(*prev, cur)) throw Error("previous node " + g.key(*prev) + " is not adjacent to " + g.key(cur));
    std::vector<double> w;
    double total = transition_weights(g, prev, cur, cfg, w);
    std::vector<std::pair<std::size_t, double>> out;
    auto nb = g.neighbors(cur);
    for (std::size_t i = 0; i < nb.size(); ++i) out.emplace_back(nb[i], w[i] / total);
    return out;
}

// Same, keyed by node name.
inline std::map<std::string, double> transition_distribution(const WalkGraph& g, const std::optional<std::string>& prev,
                                                             const std::string& cur, const WalkConfig& cfg) {
    auto c = g.find(cur);
    if (!c) throw Error("unknown node " + cur);
    std::optional<std::size_t> p;
    if (prev) {
        p = g.find(*prev);
        if (!p) throw Error("unknown node " + *prev);
    }
    std::map<std::string, double> out;
    for (auto [x, pr] : transition_distribution(g, p, *c, cfg)) out[g.key(x)] = pr;
    return out;
}

using Walk = std::vector<std::uint32_t>;

template <class Rng>
std::size_t sample_next(const WalkGraph& g, std::optional<std::size_t> prev, std::size_t cur, const WalkConfig& cfg, Rng& rng,
                        std::vector<double>& scratch) {
    double total = transition_weights(g, prev, cur, cfg, scratch);
    double u = uniform01(rng) * total;
    auto nb = g.neighbors(cur);
    for (std::size_t i = 0; i < nb.size(); ++i) {
        u -= scratch[i];
        if (u < 0) return nb[i];
    }
    return nb.back();
}

template <class Rng>
Walk walk_from(const WalkGraph& g, std::size_t start, const WalkConfig& cfg, Rng& rng) {
    Walk w{static_cast<std::uint32_t>(start)};
    std::vector<double> scratch;
    std::optional<std::size_t> prev;
    std::size_t cur = start;
    while (w.size() < cfg.walk_length && !g.neighbors(cur).empty()) {
        std::size_t next = sample_next(g, prev, cur, cfg, rng, scratch);
        prev = cur;
        cur = next;
        w.push_back(static_cast<std::uint32_t>(cur));
    }
    return w;
}

// walks_per_node rounds; each round visits every node once in a seeded
// shuffled order. Walk i of round r uses its own engine seeded from
// (seed, r, start node), so the output does not depend on scheduling.
inline std::vector<Walk> generate_walks(const WalkGraph& g, const WalkConfig& cfg, unsigned workers = 1) {
    cfg.validate();
    if (g.size() == 0) throw Error("cannot walk an empty graph");
    const std::size_t n = g.size();
    std::vector<Walk> walks(cfg.walks_per_node * n);
    std::vector<std::size_t> order(n);
    for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::mt19937_64 shuffler(derive_seed(cfg.seed, 0x5eed, r));
        shuffle(order, shuffler);
        parallel_for(n, workers, [&](std::size_t i) {
            std::mt19937_64 rng(derive_seed(cfg.seed, r + 1, order[i]));
            walks[r * n + i] = walk_from(g, order[i], cfg, rng);
        });
    }
    return walks;
}

inline void write_walks(std::ostream& out, const WalkGraph& g, const std::vector<Walk>& walks) {
    for (const auto& w : walks) {
        for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << g.key(w[i]);
        out << '\n';
    }
}

}  // namespace colex
