#pragma once
// Verse-aligned parallel corpus, boundary-marked character ngrams, and the
// per-language ngram -> verse occurrence index that the association search
// runs on.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "colex/common.hpp"
#include "colex/verse_set.hpp"

namespace colex {

// Tokens of one language, indexed by global verse ordinal. Tokens are stored
// marked (`$hand$`); verses the language lacks have aligned.test(v) == false.
struct LanguageText {
    LanguageId language;
    std::vector<std::vector<std::string>> tokens;
    VerseSet aligned;
};

struct Corpus {
    LanguageId pivot;
    std::vector<std::string> verse_ids;  // sorted pivot verse ids; position = ordinal
    std::unordered_map<std::string, std::size_t> ordinal_of;
    std::map<LanguageId, LanguageText> texts;

    std::size_t width() const { return verse_ids.size(); }

    bool has(const LanguageId& l) const { return texts.count(l) != 0; }

    const LanguageText& text(const LanguageId& l) const {
        auto it = texts.find(l);
        if (it == texts.end()) throw Error("language " + l.str() + " not in corpus");
        return it->second;
    }

    std::optional<std::size_t> ordinal(const std::string& verse_id) const {
        auto it = ordinal_of.find(verse_id);
        if (it == ordinal_of.end()) return std::nullopt;
        return it->second;
    }

    // All non-pivot languages in lexicographic order.
    std::vector<LanguageId> targets() const {
        std::vector<LanguageId> out;
        for (const auto& [l, _] : texts)
            if (l != pivot) out.push_back(l);
        return out;
    }
};

using LemmaMap = std::unordered_map<std::string, std::string>;
// verse id -> raw text, in file order
using RawVerses = std::vector<std::pair<std::string, std::string>>;

inline std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> out;
    for (auto piece : split_ws(raw)) {
        auto tok = normalize_token(piece);
        if (!tok.empty()) out.push_back(std::move(tok));
    }
    return out;
}

// Builds a corpus from already-read text. Verses absent from the pivot are
// dropped; pivot tokens go through the lemma map with identity fallback.
inline Corpus build_corpus(const std::map<LanguageId, RawVerses>& raw, const LanguageId& pivot,
                           const LemmaMap& lemmas = {}) {
    auto pit = raw.find(pivot);
    if (pit == raw.end()) throw ValidationError("pivot language " + pivot.str() + " missing from corpus");

    Corpus c;
    c.pivot = pivot;
    for (const auto& [id, _] : pit->second) c.verse_ids.push_back(id);
    std::sort(c.verse_ids.begin(), c.verse_ids.end());
    for (std::size_t i = 0; i < c.verse_ids.size(); ++i) c.ordinal_of.emplace(c.verse_ids[i], i);

    for (const auto& [lang, verses] : raw) {
        LanguageText t{lang, std::vector<std::vector<std::string>>(c.width()), VerseSet(c.width())};
        for (const auto& [id, text] : verses) {
            auto ord = c.ordinal(id);
            if (!ord) continue;
            auto toks = tokenize(text);
            for (auto& tok : toks) {
                if (lang == pivot) {
                    auto lit = lemmas.find(tok);
                    if (lit != lemmas.end()) tok = lit->second;
                }
                tok = mark_token(tok);
            }
            t.tokens[*ord] = std::move(toks);
            t.aligned.set(*ord);
        }
        c.texts.emplace(lang, std::move(t));
    }
    return c;
}

inline RawVerses read_verse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    RawVerses out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto tab = line.find('\t');
        std::string id = tab == std::string::npos ? std::string() : std::string(trim(std::string_view(line).substr(0, tab)));
        if (id.empty())
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": malformed line (expected VerseId<TAB>text)");
        if (!seen.insert(id).second)
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": duplicate verse id " + id);
        out.emplace_back(std::move(id), line.substr(tab + 1));
    }
    return out;
}

inline LemmaMap read_lemma_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open lemma map " + path.string());
    LemmaMap out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto parts = split(line, '\t');
        if (parts.size() != 2 || trim(parts[0]).empty() || trim(parts[1]).empty())
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": malformed lemma line");
        auto surface = normalize_token(trim(parts[0]));
        auto lemma = normalize_token(trim(parts[1]));
        if (!surface.empty() && !lemma.empty()) out[surface] = lemma;
    }
    return out;
}

// Reads every `<iso>.txt` in `dir`. Files whose stem is not a language code are ignored.
inline Corpus load_corpus(const std::filesystem::path& dir, const LanguageId& pivot,
                          const std::optional<std::filesystem::path>& lemma_map = std::nullopt) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ValidationError("corpus directory " + dir.string() + " does not exist");
    if (!fs::exists(dir / (pivot.str() + ".txt")))
        throw ValidationError("pivot file " + (dir / (pivot.str() + ".txt")).string() + " missing");

    std::map<LanguageId, RawVerses> raw;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        auto stem = entry.path().stem().string();
        if (!LanguageId::valid(stem)) continue;
        raw.emplace(LanguageId(stem), read_verse_file(entry.path()));
    }
    LemmaMap lemmas;
    if (lemma_map) lemmas = read_lemma_map(*lemma_map);
    return build_corpus(raw, pivot, lemmas);
}

// ---------------------------------------------------------------- ngrams

constexpr std::size_t kUnlimited = 0;

namespace detail {

// Calls fn(string_view) for every substring of a marked token that has at
// least one non-marker character and at most max_len code points. May repeat.
template <class Fn>
void for_each_ngram(std::string_view token, std::size_t max_len, Fn&& fn) {
    if (token.size() < 3 || token.front() != kBoundary || token.back() != kBoundary) return;
    auto off = utf8_offsets(token);
    const std::size_t n = off.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t jmax = max_len == kUnlimited ? n : std::min(n, i + max_len);
        for (std::size_t j = i + 1; j <= jmax; ++j) {
            // the only marker-only substrings are the two single `$` ends
            if (j == i + 1 && (i == 0 || i == n - 1)) continue;
            fn(token.substr(off[i], off[j] - off[i]));
        }
    }
}

}  // namespace detail

// Distinct ngrams of a marked token, sorted. max_len counts code points,
// boundary markers included; kUnlimited disables the bound.
inline std::vector<std::string> enumerate_ngrams(std::string_view token, std::size_t max_len = kUnlimited) {
    std::set<std::string> out;
    detail::for_each_ngram(token, max_len, [&](std::string_view g) { out.emplace(g); });
    return {out.begin(), out.end()};
}

// ---------------------------------------------------------------- occurrence index

struct IndexConfig {
    std::size_t max_len = 8;
    std::map<LanguageId, std::size_t> max_len_override;
    std::size_t min_verses = 2;

    std::size_t max_len_for(const LanguageId& l) const {
        auto it = max_len_override.find(l);
        return it == max_len_override.end() ? max_len : it->second;
    }
};

using Postings = std::vector<std::uint32_t>;

class OccurrenceIndex {
public:
    OccurrenceIndex() = default;

    // ngrams must be sorted and parallel to postings (each sorted, non-empty).
    OccurrenceIndex(LanguageId lang, VerseSet aligned, std::vector<std::string> ngrams, std::vector<Postings> postings)
        : language_(std::move(lang)), aligned_(std::move(aligned)), ngrams_(std::move(ngrams)), postings_(std::move(postings)) {
        doc_count_ = aligned_.count();
        verse_ngrams_.assign(aligned_.width(), {});
        for (std::uint32_t id = 0; id < postings_.size(); ++id)
            for (auto v : postings_[id]) verse_ngrams_[v].push_back(id);
    }

    const LanguageId& language() const { return language_; }
    std::size_t width() const { return aligned_.width(); }
    std::size_t doc_count() const { return doc_count_; }
    const VerseSet& aligned() const { return aligned_; }
    std::size_t size() const { return ngrams_.size(); }
    bool empty() const { return ngrams_.empty(); }

    const std::string& ngram(std::size_t id) const { return ngrams_[id]; }
    const std::vector<std::string>& ngrams() const { return ngrams_; }
    const Postings& postings(std::size_t id) const { return postings_[id]; }
    std::size_t cardinality(std::size_t id) const { return postings_[id].size(); }
    // ids of ngrams occurring in global verse v
    const std::vector<std::uint32_t>& in_verse(std::size_t v) const { return verse_ngrams_[v]; }

    std::optional<std::size_t> find(std::string_view g) const {
        auto it = std::lower_bound(ngrams_.begin(), ngrams_.end(), g);
        if (it == ngrams_.end() || *it != g) return std::nullopt;
        return static_cast<std::size_t>(it - ngrams_.begin());
    }

    VerseSet verse_set(std::size_t id) const {
        VerseSet s(width());
        for (auto v : postings_[id]) s.set(v);
        return s;
    }

    std::optional<VerseSet> operator[](std::string_view g) const {
        auto id = find(g);
        if (!id) return std::nullopt;
        return verse_set(*id);
    }

private:
    LanguageId language_;
    VerseSet aligned_;
    std::size_t doc_count_ = 0;
    std::vector<std::string> ngrams_;
    std::vector<Postings> postings_;
    std::vector<std::vector<std::uint32_t>> verse_ngrams_;
};

inline OccurrenceIndex build_occurrence_index(const Corpus& corpus, const LanguageId& language, const IndexConfig& cfg = {}) {
    const auto& text = corpus.text(language);
    const std::size_t max_len = cfg.max_len_for(language);
    std::unordered_map<std::string, Postings> map;
    std::unordered_set<std::string_view> in_verse;
    text.aligned.for_each([&](std::size_t v) {
        in_verse.clear();
        for (const auto& tok : text.tokens[v])
            detail::for_each_ngram(tok, max_len, [&](std::string_view g) { in_verse.insert(g); });
        for (auto g : in_verse) map[std::string(g)].push_back(static_cast<std::uint32_t>(v));
    });

    std::vector<std::pair<std::string, Postings>> kept;
    kept.reserve(map.size());
    for (auto& [g, p] : map)
        if (p.size() >= std::max<std::size_t>(1, cfg.min_verses)) kept.emplace_back(g, std::move(p));
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::string> ngrams;
    std::vector<Postings> postings;
    ngrams.reserve(kept.size());
    postings.reserve(kept.size());
    for (auto& [g, p] : kept) {
        ngrams.push_back(std::move(g));
        postings.push_back(std::move(p));  // already ascending: verses visited in order
    }
    return OccurrenceIndex(language, text.aligned, std::move(ngrams), std::move(postings));
}

// ---------------------------------------------------------------- concept pool

class ConceptPool {
public:
    ConceptPool() = default;
    ConceptPool(std::size_t width, std::vector<std::string> concepts, std::vector<std::size_t> frequency,
                std::vector<Postings> postings)
        : width_(width), concepts_(std::move(concepts)), frequency_(std::move(frequency)), postings_(std::move(postings)) {
        verse_concepts_.assign(width_, {});
        for (std::uint32_t id = 0; id < postings_.size(); ++id)
            for (auto v : postings_[id]) verse_concepts_[v].push_back(id);
    }

    std::size_t width() const { return width_; }
    std::size_t size() const { return concepts_.size(); }
    bool empty() const { return concepts_.empty(); }
    const std::string& concept_at(std::size_t id) const { return concepts_[id]; }
    const std::vector<std::string>& concepts() const { return concepts_; }
    std::size_t frequency(std::size_t id) const { return frequency_[id]; }
    const Postings& postings(std::size_t id) const { return postings_[id]; }
    const std::vector<std::uint32_t>& in_verse(std::size_t v) const { return verse_concepts_[v]; }

    std::optional<std::size_t> find(std::string_view lemma) const {
        auto it = std::lower_bound(concepts_.begin(), concepts_.end(), lemma);
        if (it == concepts_.end() || *it != lemma) return std::nullopt;
        return static_cast<std::size_t>(it - concepts_.begin());
    }
    bool contains(std::string_view lemma) const { return find(lemma).has_value(); }

    VerseSet verse_set(std::size_t id) const {
        VerseSet s(width_);
        for (auto v : postings_[id]) s.set(v);
        return s;
    }

private:
    std::size_t width_ = 0;
    std::vector<std::string> concepts_;
    std::vector<std::size_t> frequency_;
    std::vector<Postings> postings_;
    std::vector<std::vector<std::uint32_t>> verse_concepts_;
};

// Pivot lemmata whose token count lies in [min_freq, max_freq]. Lemmata
// containing ':' are skipped since ':' separates language and ngram in node keys.
inline ConceptPool build_concept_pool(const Corpus& corpus, std::size_t min_freq = 5, std::size_t max_freq = 2000) {
    const auto& text = corpus.text(corpus.pivot);
    std::map<std::string, std::pair<std::size_t, Postings>> counts;
    text.aligned.for_each([&](std::size_t v) {
        for (const auto& tok : text.tokens[v]) {
            auto& [freq, post] = counts[std::string(unmark_token(tok))];
            ++freq;
            if (post.empty() || post.back() != v) post.push_back(static_cast<std::uint32_t>(v));
        }
    });
    std::vector<std::string> concepts;
    std::vector<std::size_t> freqs;
    std::vector<Postings> postings;
    for (auto& [lemma, fp] : counts) {
        if (lemma.empty() || lemma.find(':') != std::string::npos) continue;
        if (fp.first < min_freq || fp.first > max_freq) continue;
        concepts.push_back(lemma);
        freqs.push_back(fp.first);
        postings.push_back(std::move(fp.second));
    }
    if (concepts.empty()) log_warn("concept pool is empty");
    return ConceptPool(corpus.width(), std::move(concepts), std::move(freqs), std::move(postings));
}

// ---------------------------------------------------------------- cache files

inline std::string join_ordinals(const Postings& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(p[i]);
    }
    return s;
}

inline Postings parse_ordinals(std::string_view s, std::size_t width, const std::string& where) {
    Postings out;
    if (trim(s).empty()) return out;
    for (auto part : split(s, ',')) {
        std::uint64_t v = 0;
        if (part.empty()) throw ValidationError(where + ": empty ordinal");
        for (char ch : part) {
            if (ch < '0' || ch > '9') throw ValidationError(where + ": bad ordinal '" + std::string(part) + "'");
            v = v * 10 + static_cast<std::uint64_t>(ch - '0');
        }
        if (v >= width) throw ValidationError(where + ": ordinal out of range");
        if (!out.empty() && v <= out.back()) throw ValidationError(where + ": ordinals not ascending");
        out.push_back(static_cast<std::uint32_t>(v));
    }
    return out;
}

// `ngram<TAB>comma-separated verse ordinals`, one line per ngram, sorted.
inline void write_index_tsv(std::ostream& out, const OccurrenceIndex& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) out << idx.ngram(i) << '\t' << join_ordinals(idx.postings(i)) << '\n';
}

inline OccurrenceIndex read_index_tsv(std::istream& in, const LanguageId& lang, const VerseSet& aligned) {
    std::vector<std::string> ngrams;
    std::vector<Postings> postings;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tab = line.find('\t');
        std::string where = "index " + lang.str() + ":" + std::to_string(lineno);
        if (tab == std::string::npos || tab == 0) throw ValidationError(where + ": malformed line");
        auto p = parse_ordinals(std::string_view(line).substr(tab + 1), aligned.width(), where);
        if (p.empty()) throw ValidationError(where + ": empty verse set");
        std::string g = line.substr(0, tab);
        if (!ngrams.empty() && g <= ngrams.back()) throw ValidationError(where + ": ngrams not sorted");
        ngrams.push_back(std::move(g));
        postings.push_back(std::move(p));
    }
    return OccurrenceIndex(lang, aligned, std::move(ngrams), std::move(postings));
}

// `lemma<TAB>frequency<TAB>ordinals`
inline void write_pool_tsv(std::ostream& out, const ConceptPool& pool) {
    for (std::size_t i = 0; i < pool.size(); ++i)
        out << pool.concept_at(i) << '\t' << pool.frequency(i) << '\t' << join_ordinals(pool.postings(i)) << '\n';
}

inline ConceptPool read_pool_tsv(std::istream& in, std::size_t width) {
    std::vector<std::string> concepts;
    std::vector<std::size_t> freqs;
    std::vector<Postings> postings;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto parts = split(line, '\t');
        std::string where = "concept pool:" + std::to_string(lineno);
        if (parts.size() != 3) throw ValidationError(where + ": malformed line");
        concepts.emplace_back(parts[0]);
        freqs.push_back(std::stoull(std::string(parts[1])));
        postings.push_back(parse_ordinals(parts[2], width, where));
    }
    return ConceptPool(width, std::move(concepts), std::move(freqs), std::move(postings));
}

}  // namespace colex
