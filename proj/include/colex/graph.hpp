#pragma once
// ColexNet: concepts joined by the languages that colexify them.
// ColexNet+: the bipartite expansion linking concepts to the ngrams that
// realize each surviving colexification.

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "colex/assoc.hpp"
#include "colex/common.hpp"

namespace colex {

// Unordered concept pair stored with first <= second; first == second is a self-loop.
struct ConceptPair {
    std::string first;
    std::string second;

    ConceptPair() = default;
    ConceptPair(std::string a, std::string b) : first(std::move(a)), second(std::move(b)) {
        if (second < first) std::swap(first, second);
    }
    bool self_loop() const { return first == second; }
    auto operator<=>(const ConceptPair&) const = default;
};

class ColexNet {
public:
    void attest(const ConceptPair& e, const LanguageId& l) {
        edges_[e].insert(l);
        nodes_.insert(e.first);
        nodes_.insert(e.second);
    }

    const std::map<ConceptPair, std::set<LanguageId>>& edges() const { return edges_; }
    const std::set<std::string>& nodes() const { return nodes_; }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t node_count() const { return nodes_.size(); }

    bool has_edge(const ConceptPair& e) const { return edges_.count(e) != 0; }
    std::size_t weight(const ConceptPair& e) const {
        auto it = edges_.find(e);
        return it == edges_.end() ? 0 : it->second.size();
    }

    // Neighbors of a concept, self excluded.
    std::set<std::string> neighbors(const std::string& node) const {
        std::set<std::string> out;
        for (const auto& [e, _] : edges_) {
            if (e.self_loop()) continue;
            if (e.first == node) out.insert(e.second);
            else if (e.second == node) out.insert(e.first);
        }
        return out;
    }

    // All neighbor sets at once, self-loops excluded.
    std::map<std::string, std::set<std::string>> adjacency() const {
        std::map<std::string, std::set<std::string>> out;
        for (const auto& n : nodes_) out[n];
        for (const auto& [e, _] : edges_) {
            if (e.self_loop()) continue;
            out[e.first].insert(e.second);
            out[e.second].insert(e.first);
        }
        return out;
    }

    bool operator==(const ColexNet&) const = default;

private:
    std::map<ConceptPair, std::set<LanguageId>> edges_;
    std::set<std::string> nodes_;
};

// Concepts a record links its focal concept to. A record whose backward pass
// returns only the focal concept is a stable concept and yields a self-loop;
// otherwise the focal concept itself is not paired with itself.
inline std::vector<std::string> colexified_partners(const PatternRecord& r) {
    if (r.concepts.size() == 1 && r.concepts.front() == r.focal) return {r.focal};
    std::vector<std::string> out;
    for (const auto& c : r.concepts)
        if (c != r.focal) out.push_back(c);
    return out;
}

// Weight counts languages: a language attests a pair at most once no matter
// how many of its records produce it.
inline ColexNet build_colexnet(const std::vector<PatternRecord>& patterns) {
    ColexNet net;
    for (const auto& r : patterns)
        for (const auto& c : colexified_partners(r)) net.attest(ConceptPair(r.focal, c), r.language);
    return net;
}

struct PruneConfig {
    std::size_t lambda = 50;
    void validate() const {
        if (lambda < 1) throw ValidationError("lambda must be >= 1");
    }
};

// Drops edges attested by fewer than lambda languages, then zero-degree nodes.
inline ColexNet prune(const ColexNet& net, const PruneConfig& cfg) {
    cfg.validate();
    ColexNet out;
    for (const auto& [e, langs] : net.edges())
        if (langs.size() >= cfg.lambda)
            for (const auto& l : langs) out.attest(e, l);
    return out;
}

inline std::string ngram_key(const LanguageId& l, std::string_view ngram) { return l.str() + ":" + std::string(ngram); }

// Node keys of the form `iso:text` are ngrams; everything else is a concept.
inline bool is_ngram_key(std::string_view key) {
    return key.size() > 4 && key[3] == ':' && LanguageId::valid(key.substr(0, 3));
}

class ColexNetPlus {
public:
    using Edge = std::pair<std::string, std::string>;  // (concept, ngram key)

    void add(const std::string& concept_node, const std::string& ngram, std::size_t multiplicity = 1) {
        if (multiplicity == 0) return;
        edges_[{concept_node, ngram}] += multiplicity;
        concepts_.insert(concept_node);
        ngrams_.insert(ngram);
    }

    const std::map<Edge, std::size_t>& edges() const { return edges_; }
    const std::set<std::string>& concept_nodes() const { return concepts_; }
    const std::set<std::string>& ngram_nodes() const { return ngrams_; }
    std::size_t node_count() const { return concepts_.size() + ngrams_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }

    std::size_t multiplicity(const std::string& c, const std::string& g) const {
        auto it = edges_.find({c, g});
        return it == edges_.end() ? 0 : it->second;
    }

    bool operator==(const ColexNetPlus&) const = default;

private:
    std::map<Edge, std::size_t> edges_;
    std::set<std::string> concepts_;
    std::set<std::string> ngrams_;
};

// Every record pair that survived pruning contributes concept-ngram edges for
// each of its forward-pass ngrams; concept-concept edges never appear.
inline ColexNetPlus build_colexnetplus(const std::vector<PatternRecord>& patterns, const ColexNet& pruned) {
    ColexNetPlus g;
    for (const auto& r : patterns) {
        for (const auto& c : colexified_partners(r)) {
            if (!pruned.has_edge(ConceptPair(r.focal, c))) continue;
            for (const auto& t : r.ngrams) {
                auto key = ngram_key(r.language, t);
                g.add(r.focal, key);
                if (c != r.focal) g.add(c, key);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------- TSV

inline void write_colexnet_tsv(std::ostream& out, const ColexNet& net) {
    for (const auto& [e, langs] : net.edges()) {
        out << e.first << '\t' << e.second << '\t' << langs.size() << '\t';
        bool first = true;
        for (const auto& l : langs) {
            out << (first ? "" : ",") << l.str();
            first = false;
        }
        out << '\n';
    }
}

inline ColexNet read_colexnet_tsv(std::istream& in) {
    ColexNet net;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split(line, '\t');
        std::string where = "colexnet:" + std::to_string(lineno);
        if (parts.size() != 4) throw ValidationError(where + ": expected 4 columns");
        ConceptPair e{std::string(parts[0]), std::string(parts[1])};
        std::size_t n = 0;
        for (auto l : split(parts[3], ',')) {
            net.attest(e, LanguageId(std::string(l)));
            ++n;
        }
        if (std::to_string(n) != parts[2]) throw ValidationError(where + ": weight does not match language list");
    }
    return net;
}

inline void write_colexnetplus_tsv(std::ostream& out, const ColexNetPlus& g) {
    for (const auto& [e, m] : g.edges()) out << e.first << '\t' << e.second << '\t' << m << '\n';
}

inline ColexNetPlus read_colexnetplus_tsv(std::istream& in) {
    ColexNetPlus g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split(line, '\t');
        std::string where = "colexnet+:" + std::to_string(lineno);
        if (parts.size() != 3 || !is_ngram_key(parts[1])) throw ValidationError(where + ": malformed edge");
        g.add(std::string(parts[0]), std::string(parts[1]), std::stoull(std::string(parts[2])));
    }
    return g;
}

}  // namespace colex
