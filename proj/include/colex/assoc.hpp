#pragma once
// Chi-squared association search between English concepts and target-language
// ngrams. The forward pass picks ngrams for a focal concept; the backward pass
// picks concepts for the selected ngrams. More than one concept coming back
// means the language colexifies them.

#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "colex/common.hpp"
#include "colex/corpus.hpp"
#include "colex/verse_set.hpp"
#include "json.hpp"

namespace colex {

struct ChiSquare {
    double score = 0.0;
    int direction = 0;  // sign(ad - bc)
};

// Pearson's statistic on the 2x2 table [[a, b], [c, d]]. Any empty margin gives 0.
inline ChiSquare chi_square(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    const double r1 = double(a + b), r2 = double(c + d), c1 = double(a + c), c2 = double(b + d);
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return {};
    const double n = double(a + b + c + d);
    const double diff = double(a) * double(d) - double(b) * double(c);
    if (diff == 0) return {};
    return {n * diff * diff / (r1 * r2 * c1 * c2), diff > 0 ? 1 : -1};
}

// |selected ∩ target| / |target|
inline double coverage(const VerseSet& selected, const VerseSet& target) {
    auto t = target.count();
    if (t == 0) throw Error("coverage: empty target verse set");
    return double(selected.intersect_count(target)) / double(t);
}

struct FPConfig {
    double alpha = 0.9;
    std::size_t max_iters = 3;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
        if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
    }
};

struct Scored {
    std::string item;
    double chi2 = 0.0;
    bool operator==(const Scored&) const = default;
};

namespace detail {

struct Pick {
    std::size_t id = 0;
    double chi2 = 0.0;
    std::size_t overlap = 0;
};

inline bool approx_equal(double x, double y) { return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)}); }

// Ranking among positively associated candidates: chi2, then overlap with
// the residual, then longer text, then lexicographically smaller text.
inline bool ranks_before(double chi_x, std::size_t ov_x, std::string_view lx, double chi_y, std::size_t ov_y,
                         std::string_view ly) {
    if (!approx_equal(chi_x, chi_y)) return chi_x > chi_y;
    if (ov_x != ov_y) return ov_x > ov_y;
    auto nx = utf8_count(lx), ny = utf8_count(ly);
    if (nx != ny) return nx > ny;
    return lx < ly;
}

// Residual greedy selection. Space provides size(), in_verse(v), count(id)
// (verse count within the aligned set), label(id), verse_set(id).
template <class Space>
std::vector<Pick> greedy_select(const Space& space, const VerseSet& target, std::size_t n_docs, const FPConfig& cfg) {
    std::vector<Pick> picks;
    if (target.empty()) return picks;
    VerseSet residual = target;
    VerseSet covered(target.width());
    std::vector<std::uint32_t> overlap(space.size(), 0);
    std::vector<std::uint32_t> touched;
    std::vector<char> chosen(space.size(), 0);

    for (std::size_t round = 0; round < cfg.max_iters && !residual.empty(); ++round) {
        residual.for_each([&](std::size_t v) {
            for (auto id : space.in_verse(v))
                if (overlap[id]++ == 0) touched.push_back(id);
        });
        const std::uint64_t r = residual.count();
        bool found = false;
        Pick best;
        for (auto id : touched) {
            if (chosen[id]) continue;
            const std::uint64_t a = overlap[id];
            const std::uint64_t b = r - a;
            const std::uint64_t c = space.count(id) - a;
            const std::uint64_t d = n_docs - a - b - c;
            auto cs = chi_square(a, b, c, d);
            if (cs.direction <= 0) continue;
            if (!found || ranks_before(cs.score, a, space.label(id), best.chi2, best.overlap, space.label(best.id))) {
                best = {id, cs.score, a};
                found = true;
            }
        }
        for (auto id : touched) overlap[id] = 0;
        touched.clear();
        if (!found) break;

        chosen[best.id] = 1;
        picks.push_back(best);
        auto vs = space.verse_set(best.id);
        covered |= vs;
        residual.subtract(vs);
        if (coverage(covered, target) >= cfg.alpha) break;
    }
    return picks;
}

struct NgramSpace {
    const OccurrenceIndex& idx;
    std::size_t size() const { return idx.size(); }
    const std::vector<std::uint32_t>& in_verse(std::size_t v) const { return idx.in_verse(v); }
    std::uint64_t count(std::size_t id) const { return idx.cardinality(id); }
    std::string_view label(std::size_t id) const { return idx.ngram(id); }
    VerseSet verse_set(std::size_t id) const { return idx.verse_set(id); }
};

}  // namespace detail

// Concept verse counts restricted to one language's aligned verses.
// Computed once per language and shared by every backward pass in it.
class ConceptView {
public:
    ConceptView(const ConceptPool& pool, const VerseSet& aligned) : pool_(pool), aligned_(aligned), counts_(pool.size(), 0) {
        for (std::size_t id = 0; id < pool.size(); ++id)
            for (auto v : pool.postings(id))
                if (aligned.test(v)) ++counts_[id];
    }
    std::size_t size() const { return pool_.size(); }
    const std::vector<std::uint32_t>& in_verse(std::size_t v) const { return pool_.in_verse(v); }
    std::uint64_t count(std::size_t id) const { return counts_[id]; }
    std::string_view label(std::size_t id) const { return pool_.concept_at(id); }
    VerseSet verse_set(std::size_t id) const { return pool_.verse_set(id) & aligned_; }

private:
    const ConceptPool& pool_;
    const VerseSet& aligned_;
    std::vector<std::uint64_t> counts_;
};

inline std::vector<Scored> forward_pass(const std::string& focal, const ConceptPool& pool, const OccurrenceIndex& index,
                                        const FPConfig& cfg = {}) {
    auto fid = pool.find(focal);
    if (!fid) throw Error("forward_pass: concept '" + focal + "' not in pool");
    if (pool.width() != index.width()) throw Error("forward_pass: pool and index disagree on verse count");
    if (index.empty()) return {};
    VerseSet target = pool.verse_set(*fid) & index.aligned();
    std::vector<Scored> out;
    for (const auto& p : detail::greedy_select(detail::NgramSpace{index}, target, index.doc_count(), cfg))
        out.push_back({index.ngram(p.id), p.chi2});
    return out;
}

inline VerseSet union_of_ngrams(const std::vector<std::string>& ngrams, const OccurrenceIndex& index) {
    VerseSet vt(index.width());
    for (const auto& t : ngrams) {
        auto id = index.find(t);
        if (!id) throw Error("ngram '" + t + "' not in index for " + index.language().str());
        for (auto v : index.postings(*id)) vt.set(v);
    }
    return vt;
}

inline std::vector<Scored> backward_pass(const std::vector<std::string>& ngrams, const ConceptView& view,
                                         const OccurrenceIndex& index, const FPConfig& cfg = {}) {
    if (ngrams.empty()) throw Error("backward_pass: empty ngram list");
    VerseSet vt = union_of_ngrams(ngrams, index);
    std::vector<Scored> out;
    for (const auto& p : detail::greedy_select(view, vt, index.doc_count(), cfg))
        out.push_back({std::string(view.label(p.id)), p.chi2});
    return out;
}

inline std::vector<Scored> backward_pass(const std::vector<std::string>& ngrams, const ConceptPool& pool,
                                         const OccurrenceIndex& index, const FPConfig& cfg = {}) {
    ConceptView view(pool, index.aligned());
    return backward_pass(ngrams, view, index, cfg);
}

// ---------------------------------------------------------------- pattern records

struct PatternRecord {
    LanguageId language;
    std::string focal;
    std::vector<std::string> ngrams;    // forward-pass selections, in order
    std::vector<std::string> concepts;  // backward-pass selections, in order
    std::vector<double> ngram_chi2;
    std::vector<double> concept_chi2;

    bool operator==(const PatternRecord&) const = default;
};

inline PatternRecord find_pattern(const std::string& focal, const ConceptView& view, const ConceptPool& pool,
                                  const OccurrenceIndex& index, const FPConfig& cfg) {
    PatternRecord rec{index.language(), focal, {}, {}, {}, {}};
    for (auto& s : forward_pass(focal, pool, index, cfg)) {
        rec.ngrams.push_back(std::move(s.item));
        rec.ngram_chi2.push_back(s.chi2);
    }
    if (rec.ngrams.empty()) return rec;
    for (auto& s : backward_pass(rec.ngrams, view, index, cfg)) {
        rec.concepts.push_back(std::move(s.item));
        rec.concept_chi2.push_back(s.chi2);
    }
    return rec;
}

// One record per (language, concept) with a non-empty forward pass, ordered
// by language then concept. Failures for a single pair are logged and skipped.
inline std::vector<PatternRecord> extract_patterns(const ConceptPool& pool, const std::map<LanguageId, OccurrenceIndex>& indexes,
                                                   const FPConfig& cfg = {}, unsigned workers = 1) {
    cfg.validate();
    std::vector<const OccurrenceIndex*> langs;
    for (const auto& [_, idx] : indexes) langs.push_back(&idx);
    std::vector<std::vector<PatternRecord>> per_lang(langs.size());
    std::mutex log_mu;

    parallel_for(langs.size(), workers, [&](std::size_t li) {
        const auto& index = *langs[li];
        ConceptView view(pool, index.aligned());
        for (const auto& focal : pool.concepts()) {
            try {
                auto rec = find_pattern(focal, view, pool, index, cfg);
                if (!rec.ngrams.empty()) per_lang[li].push_back(std::move(rec));
            } catch (const std::exception& e) {
                std::lock_guard lock(log_mu);
                log_warn("pattern " + index.language().str() + "/" + focal + " skipped: " + e.what());
            }
        }
    });

    std::vector<PatternRecord> out;
    for (auto& v : per_lang)
        for (auto& r : v) out.push_back(std::move(r));
    std::sort(out.begin(), out.end(), [](const PatternRecord& a, const PatternRecord& b) {
        return std::tie(a.language, a.focal) < std::tie(b.language, b.focal);
    });
    return out;
}

// ---------------------------------------------------------------- JSONL

namespace detail {

inline std::string json_str(const std::string& s) {
    return nlohmann::json(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline void json_str_array(std::ostream& out, const std::vector<std::string>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << json_str(v[i]);
    out << ']';
}

inline void json_num_array(std::ostream& out, const std::vector<double>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << fixed6(v[i]);
    out << ']';
}

}  // namespace detail

inline void write_pattern_jsonl(std::ostream& out, const PatternRecord& r) {
    out << "{\"lang\":" << detail::json_str(r.language.str()) << ",\"focal\":" << detail::json_str(r.focal) << ",\"ngrams\":";
    detail::json_str_array(out, r.ngrams);
    out << ",\"concepts\":";
    detail::json_str_array(out, r.concepts);
    out << ",\"chi2\":{\"ngrams\":";
    detail::json_num_array(out, r.ngram_chi2);
    out << ",\"concepts\":";
    detail::json_num_array(out, r.concept_chi2);
    out << "}}\n";
}

inline void write_patterns_jsonl(std::ostream& out, const std::vector<PatternRecord>& recs) {
    for (const auto& r : recs) write_pattern_jsonl(out, r);
}

inline std::vector<PatternRecord> read_patterns_jsonl(std::istream& in) {
    std::vector<PatternRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            PatternRecord r{LanguageId(j.at("lang").get<std::string>()), j.at("focal").get<std::string>(),
                            j.at("ngrams").get<std::vector<std::string>>(), j.at("concepts").get<std::vector<std::string>>(),
                            j.at("chi2").at("ngrams").get<std::vector<double>>(),
                            j.at("chi2").at("concepts").get<std::vector<double>>()};
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("patterns:" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace colex
