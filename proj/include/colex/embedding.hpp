#pragma once
// Node embedding table with cosine queries and verse vectors.

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "colex/common.hpp"
#include "colex/corpus.hpp"
#include "colex/graph.hpp"

namespace colex {

class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::vector<std::string> keys, std::size_t dim, std::vector<float> data)
        : keys_(std::move(keys)), dim_(dim), data_(std::move(data)) {
        if (data_.size() != keys_.size() * dim_) throw Error("embedding table: data size does not match vocabulary");
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            if (!index_.emplace(keys_[i], i).second) throw Error("embedding table: duplicate key " + keys_[i]);
            if (is_ngram_key(keys_[i])) {
                auto& m = max_ngram_len_[keys_[i].substr(0, 3)];
                m = std::max(m, utf8_count(keys_[i]) - 4);
            }
        }
        norms_.resize(keys_.size());
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            double s = 0;
            for (auto x : row(i)) s += double(x) * double(x);
            norms_[i] = std::sqrt(s);
        }
    }

    std::size_t size() const { return keys_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& keys() const { return keys_; }
    const std::string& key(std::size_t i) const { return keys_[i]; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    double norm(std::size_t i) const { return norms_[i]; }

    std::optional<std::size_t> find(const std::string& k) const {
        auto it = index_.find(k);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    bool contains(const std::string& k) const { return index_.count(k) != 0; }

    // Longest ngram (in code points) of a language present in the vocabulary.
    std::size_t max_ngram_len(const std::string& iso) const {
        auto it = max_ngram_len_.find(iso);
        return it == max_ngram_len_.end() ? 0 : it->second;
    }

    bool operator==(const EmbeddingTable& o) const { return keys_ == o.keys_ && dim_ == o.dim_ && data_ == o.data_; }

private:
    std::vector<std::string> keys_;
    std::size_t dim_ = 0;
    std::vector<float> data_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> index_;
    std::map<std::string, std::size_t> max_ngram_len_;
};

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double s = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return s / (std::sqrt(na) * std::sqrt(nb));
}

inline double cosine(const EmbeddingTable& t, std::size_t i, std::size_t j) {
    if (t.norm(i) == 0 || t.norm(j) == 0) return 0.0;
    double s = 0;
    auto a = t.row(i), b = t.row(j);
    for (std::size_t d = 0; d < t.dim(); ++d) s += double(a[d]) * double(b[d]);
    return s / (t.norm(i) * t.norm(j));
}

inline double cosine(const EmbeddingTable& t, const std::string& a, const std::string& b) {
    auto i = t.find(a), j = t.find(b);
    if (!i || !j) throw Error("cosine: unknown node " + (!i ? a : b));
    return cosine(t, *i, *j);
}

// Candidate restriction for neighbor queries.
struct VocabFilter {
    enum class Kind { All, Concepts, Language };
    Kind kind = Kind::All;
    std::string language;

    static VocabFilter all() { return {}; }
    static VocabFilter concepts() { return {Kind::Concepts, {}}; }
    static VocabFilter lang(const LanguageId& l) { return {Kind::Language, l.str()}; }

    bool accepts(const std::string& key) const {
        switch (kind) {
            case Kind::All: return true;
            case Kind::Concepts: return !is_ngram_key(key);
            case Kind::Language: return is_ngram_key(key) && key.compare(0, 3, language) == 0;
        }
        return false;
    }
};

struct Neighbor {
    std::string key;
    double cosine = 0;
};

// Top-k by cosine, query excluded, ties broken by key.
inline std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& t, const std::string& query, std::size_t k,
                                               const VocabFilter& filter = {}) {
    auto q = t.find(query);
    if (!q) throw Error("nearest_neighbors: unknown query " + query);
    std::vector<Neighbor> cands;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i == *q || !filter.accepts(t.key(i))) continue;
        cands.push_back({t.key(i), cosine(t, *q, i)});
    }
    if (cands.empty()) throw Error("nearest_neighbors: empty filtered vocabulary for " + query);
    auto cmp = [](const Neighbor& a, const Neighbor& b) { return a.cosine != b.cosine ? a.cosine > b.cosine : a.key < b.key; };
    k = std::min(k, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(), cmp);
    cands.resize(k);
    return cands;
}

// Vocabulary units of one verse. Pivot tokens map to concept nodes by lemma;
// other languages contribute every vocabulary ngram found inside a token.
inline std::set<std::size_t> verse_units(const EmbeddingTable& t, const Corpus& corpus, const LanguageId& lang, std::size_t ordinal) {
    std::set<std::size_t> units;
    const auto& text = corpus.text(lang);
    if (ordinal >= text.tokens.size() || !text.aligned.test(ordinal)) return units;
    if (lang == corpus.pivot) {
        for (const auto& tok : text.tokens[ordinal])
            if (auto id = t.find(std::string(unmark_token(tok)))) units.insert(*id);
        return units;
    }
    const std::size_t max_len = t.max_ngram_len(lang.str());
    if (max_len == 0) return units;
    std::string key = lang.str() + ":";
    for (const auto& tok : text.tokens[ordinal]) {
        detail::for_each_ngram(tok, max_len, [&](std::string_view g) {
            key.resize(4);
            key += g;
            if (auto id = t.find(key)) units.insert(*id);
        });
    }
    return units;
}

// Mean of the verse's unit vectors; nullopt when no unit is in the vocabulary.
inline std::optional<std::vector<double>> embed_verse(const EmbeddingTable& t, const Corpus& corpus, const LanguageId& lang,
                                                      std::size_t ordinal) {
    auto units = verse_units(t, corpus, lang, ordinal);
    if (units.empty()) return std::nullopt;
    std::vector<double> v(t.dim(), 0.0);
    for (auto u : units) {
        auto r = t.row(u);
        for (std::size_t d = 0; d < t.dim(); ++d) v[d] += r[d];
    }
    for (auto& x : v) x /= double(units.size());
    return v;
}

inline std::optional<std::vector<double>> embed_verse(const EmbeddingTable& t, const Corpus& corpus, const LanguageId& lang,
                                                      const std::string& verse_id) {
    auto ord = corpus.ordinal(verse_id);
    if (!ord) return std::nullopt;
    return embed_verse(t, corpus, lang, *ord);
}

// ---------------------------------------------------------------- text format

inline void write_embeddings(std::ostream& out, const EmbeddingTable& t) {
    out << t.size() << ' ' << t.dim() << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << t.key(i);
        for (auto x : t.row(i)) out << ' ' << fixed6(x);
        out << '\n';
    }
}

inline EmbeddingTable read_embeddings(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("embeddings: missing header");
    auto head = split_ws(line);
    if (head.size() != 2) throw ValidationError("embeddings: malformed header");
    const std::size_t n = std::stoull(std::string(head[0])), dim = std::stoull(std::string(head[1]));
    std::vector<std::string> keys;
    std::vector<float> data;
    keys.reserve(n);
    data.reserve(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw ValidationError("embeddings: truncated file");
        auto parts = split_ws(line);
        if (parts.size() != dim + 1) throw ValidationError("embeddings: row " + std::to_string(i + 1) + " has wrong width");
        keys.emplace_back(parts[0]);
        for (std::size_t d = 1; d <= dim; ++d) data.push_back(std::stof(std::string(parts[d])));
    }
    return EmbeddingTable(std::move(keys), dim, std::move(data));
}

}  // namespace colex
