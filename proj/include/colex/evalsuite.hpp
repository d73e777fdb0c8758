#pragma once
// Evaluation protocols: colexification recall against a gold edge list,
// roundtrip translation, verse retrieval, and zero-shot verse classification.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "colex/common.hpp"
#include "colex/corpus.hpp"
#include "colex/embedding.hpp"
#include "colex/graph.hpp"

namespace colex {

// ---------------------------------------------------------------- colexification recall

struct GoldColexSet {
    std::map<std::string, std::set<std::string>> neighbors;  // symmetric

    void add(std::string a, std::string b) {
        if (a == b) return;
        neighbors[a].insert(b);
        neighbors[b].insert(a);
    }
    std::set<std::string> concepts() const {
        std::set<std::string> out;
        for (const auto& [c, _] : neighbors) out.insert(c);
        return out;
    }
};

// `gloss1<TAB>gloss2` lines; glosses are lowercased and multiword glosses skipped.
inline GoldColexSet read_gold_colex(std::istream& in) {
    GoldColexSet gold;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto parts = split(line, '\t');
        if (parts.size() != 2) throw ValidationError("gold colex:" + std::to_string(lineno) + ": expected 2 columns");
        auto a = std::string(trim(parts[0])), b = std::string(trim(parts[1]));
        if (a.empty() || b.empty() || a.find(' ') != std::string::npos || b.find(' ') != std::string::npos) continue;
        gold.add(normalize_token(a), normalize_token(b));
    }
    return gold;
}

struct ClicsReport {
    std::size_t common = 0;  // |P|
    double micro_recall = 0;
    double macro_recall = 0;
    double aw_colex = 0;  // mean count of net neighbors absent from gold
};

inline ClicsReport eval_clics(const ColexNet& net, const GoldColexSet& gold) {
    auto adj = net.adjacency();
    ClicsReport r;
    std::size_t hit_total = 0, gold_total = 0;
    double macro = 0, extra = 0;
    for (const auto& [s, t] : gold.neighbors) {
        auto it = adj.find(s);
        if (it == adj.end() || t.empty()) continue;
        const auto& c = it->second;
        std::size_t hits = 0;
        for (const auto& x : t) hits += c.count(x);
        std::size_t wrong = 0;
        for (const auto& x : c) wrong += t.count(x) ? 0 : 1;
        ++r.common;
        hit_total += hits;
        gold_total += t.size();
        macro += double(hits) / double(t.size());
        extra += double(wrong);
    }
    if (r.common == 0) throw Error("eval_clics: no concepts shared between gold standard and graph");
    r.micro_recall = double(hit_total) / double(gold_total);
    r.macro_recall = macro / double(r.common);
    r.aw_colex = extra / double(r.common);
    return r;
}

// ---------------------------------------------------------------- roundtrip translation

inline constexpr std::array<std::size_t, 3> kTopK{1, 5, 10};

struct RoundtripResult {
    std::array<bool, 3> success{};  // at k = 1, 5, 10
    bool flagged = false;           // some hop had no candidates
    std::vector<std::string> path;  // w0, w1, w2, w3, then the top-1 of the last hop
};

// w0 -> l1 -> l2 -> l3 -> source concepts, each hop a nearest-neighbor search
// restricted to that language's vocabulary.
inline RoundtripResult roundtrip_trial(const EmbeddingTable& t, const std::string& w0, const std::vector<LanguageId>& langs,
                                       const LanguageId& source) {
    if (!t.contains(w0)) throw ValidationError("roundtrip: start word " + w0 + " not in vocabulary");
    std::set<LanguageId> distinct(langs.begin(), langs.end());
    if (distinct.size() != langs.size()) throw ValidationError("roundtrip: intermediate languages must be distinct");
    if (distinct.count(source)) throw ValidationError("roundtrip: intermediate languages must differ from the source");

    RoundtripResult r;
    r.path.push_back(w0);
    std::string cur = w0;
    try {
        for (const auto& l : langs) {
            cur = nearest_neighbors(t, cur, 1, VocabFilter::lang(l)).front().key;
            r.path.push_back(cur);
        }
        auto back = nearest_neighbors(t, cur, kTopK.back(), VocabFilter::concepts());
        r.path.push_back(back.front().key);
        for (std::size_t ki = 0; ki < kTopK.size(); ++ki)
            for (std::size_t i = 0; i < std::min(kTopK[ki], back.size()); ++i)
                if (back[i].key == w0) r.success[ki] = true;
    } catch (const Error&) {
        r.flagged = true;
        r.success = {};
    }
    return r;
}

struct RoundtripReport {
    std::size_t start_words = 0;
    std::size_t trials = 0;
    std::size_t flagged = 0;
    std::array<double, 3> accuracy{};                 // averaged over trials
    std::vector<std::vector<LanguageId>> languages;   // per trial
    std::vector<std::array<double, 3>> per_trial;
};

// Concept nodes present in the table, the default start-word list.
inline std::vector<std::string> concept_vocabulary(const EmbeddingTable& t) {
    std::vector<std::string> out;
    for (const auto& k : t.keys())
        if (!is_ngram_key(k)) out.push_back(k);
    return out;
}

// Languages with at least one ngram node in the table.
inline std::vector<LanguageId> table_languages(const EmbeddingTable& t) {
    std::set<std::string> isos;
    for (const auto& k : t.keys())
        if (is_ngram_key(k)) isos.insert(k.substr(0, 3));
    std::vector<LanguageId> out;
    for (const auto& s : isos) out.emplace_back(s);
    return out;
}

inline RoundtripReport eval_roundtrip(const EmbeddingTable& t, const LanguageId& source, std::vector<LanguageId> candidates,
                                      const std::vector<std::string>& start_words, std::size_t trials, std::uint64_t seed,
                                      std::size_t hops = 3) {
    std::erase(candidates, source);
    if (candidates.size() < hops) throw ValidationError("roundtrip: need at least " + std::to_string(hops) + " intermediate languages");
    if (start_words.empty()) throw ValidationError("roundtrip: no start words");
    RoundtripReport rep;
    rep.start_words = start_words.size();
    rep.trials = trials;
    std::mt19937_64 rng(derive_seed(seed, 0x7217));
    for (std::size_t trial = 0; trial < trials; ++trial) {
        auto pool = candidates;
        shuffle(pool, rng);
        std::vector<LanguageId> langs(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(hops));
        std::array<double, 3> acc{};
        for (const auto& w : start_words) {
            auto r = roundtrip_trial(t, w, langs, source);
            rep.flagged += r.flagged ? 1 : 0;
            for (std::size_t k = 0; k < 3; ++k) acc[k] += r.success[k] ? 1.0 : 0.0;
        }
        for (auto& a : acc) a /= double(start_words.size());
        for (std::size_t k = 0; k < 3; ++k) rep.accuracy[k] += acc[k] / double(trials);
        rep.languages.push_back(langs);
        rep.per_trial.push_back(acc);
    }
    return rep;
}

// ---------------------------------------------------------------- verse retrieval

struct RetrievalLanguage {
    LanguageId language;
    std::size_t queries = 0;               // query verses evaluated
    std::size_t target_unembeddable = 0;   // counted as failures
    std::array<double, 3> accuracy{};
};

struct RetrievalReport {
    std::vector<RetrievalLanguage> languages;
    std::vector<LanguageId> excluded;      // below the coverage threshold
    std::size_t skipped_queries = 0;       // query verses with no embedding
    std::array<double, 3> accuracy{};      // mean over languages
};

inline RetrievalReport eval_retrieval(const EmbeddingTable& t, const Corpus& corpus, const LanguageId& query_lang,
                                      const std::vector<LanguageId>& target_langs, const std::vector<std::string>& verse_ids,
                                      double min_coverage = 0.8) {
    if (verse_ids.empty()) throw ValidationError("retrieval: no verses");
    std::vector<std::size_t> ords;
    for (const auto& id : verse_ids) {
        auto o = corpus.ordinal(id);
        if (!o) throw ValidationError("retrieval: verse " + id + " not in corpus");
        ords.push_back(*o);
    }
    RetrievalReport rep;
    std::vector<std::size_t> query_pos;
    std::vector<std::vector<double>> qvec(ords.size());
    for (std::size_t i = 0; i < ords.size(); ++i) {
        if (auto v = embed_verse(t, corpus, query_lang, ords[i])) {
            qvec[i] = std::move(*v);
            query_pos.push_back(i);
        } else {
            ++rep.skipped_queries;
        }
    }
    if (query_pos.empty()) throw ValidationError("retrieval: no query verse is embeddable in " + query_lang.str());

    for (const auto& l : target_langs) {
        if (!corpus.has(l)) throw ValidationError("retrieval: language " + l.str() + " not in corpus");
        const auto& text = corpus.text(l);
        std::size_t present = 0;
        for (auto o : ords) present += text.aligned.test(o) ? 1 : 0;
        if (double(present) < min_coverage * double(ords.size())) {
            rep.excluded.push_back(l);
            continue;
        }
        std::vector<std::optional<std::vector<double>>> tvec(ords.size());
        for (std::size_t i = 0; i < ords.size(); ++i) tvec[i] = embed_verse(t, corpus, l, ords[i]);

        RetrievalLanguage res{l, 0, 0, {}};
        for (auto qi : query_pos) {
            ++res.queries;
            if (!tvec[qi]) {
                ++res.target_unembeddable;
                continue;
            }
            const double correct = cosine(qvec[qi], *tvec[qi]);
            std::size_t rank = 0;  // candidates ranked strictly ahead of the correct verse
            for (std::size_t j = 0; j < ords.size(); ++j) {
                if (j == qi || !tvec[j]) continue;
                double c = cosine(qvec[qi], *tvec[j]);
                if (c > correct || (c == correct && ords[j] < ords[qi])) ++rank;
            }
            for (std::size_t k = 0; k < 3; ++k) res.accuracy[k] += rank < kTopK[k] ? 1.0 : 0.0;
        }
        for (auto& a : res.accuracy) a /= double(res.queries);
        rep.languages.push_back(res);
    }
    if (rep.languages.empty()) throw ValidationError("retrieval: no target language meets the coverage threshold");
    for (const auto& r : rep.languages)
        for (std::size_t k = 0; k < 3; ++k) rep.accuracy[k] += r.accuracy[k] / double(rep.languages.size());
    return rep;
}

// ---------------------------------------------------------------- classification

struct ClassifierConfig {
    std::size_t epochs = 500;
    double learning_rate = 0.1;
    double l2 = 1e-4;
};

// Multinomial logistic regression. Row c of `weights` holds dim coefficients
// followed by the bias.
struct Classifier {
    std::vector<std::string> classes;
    std::size_t dim = 0;
    std::vector<double> weights;
    bool degenerate = false;  // trained on a single class

    std::vector<double> probabilities(const std::vector<double>& x) const {
        const std::size_t C = classes.size();
        std::vector<double> z(C);
        for (std::size_t c = 0; c < C; ++c) {
            const double* w = weights.data() + c * (dim + 1);
            double s = w[dim];
            for (std::size_t d = 0; d < dim; ++d) s += w[d] * x[d];
            z[c] = s;
        }
        double mx = *std::max_element(z.begin(), z.end()), sum = 0;
        for (auto& v : z) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (auto& v : z) v /= sum;
        return z;
    }

    const std::string& predict(const std::vector<double>& x) const {
        auto p = probabilities(x);
        return classes[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
    }
};

// Mean cross-entropy plus (l2/2)*||W||^2 over non-bias weights. When grad is
// non-null it receives the gradient with respect to clf.weights.
inline double classifier_objective(const Classifier& clf, const std::vector<std::vector<double>>& X, const std::vector<std::size_t>& y,
                                   double l2, std::vector<double>* grad = nullptr) {
    const std::size_t C = clf.classes.size(), D = clf.dim, n = X.size();
    if (grad) grad->assign(clf.weights.size(), 0.0);
    double loss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto p = clf.probabilities(X[i]);
        loss -= std::log(std::max(p[y[i]], 1e-300));
        if (!grad) continue;
        for (std::size_t c = 0; c < C; ++c) {
            const double r = (p[c] - (c == y[i] ? 1.0 : 0.0)) / double(n);
            double* g = grad->data() + c * (D + 1);
            for (std::size_t d = 0; d < D; ++d) g[d] += r * X[i][d];
            g[D] += r;
        }
    }
    loss /= double(n);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t d = 0; d < D; ++d) {
            const double w = clf.weights[c * (D + 1) + d];
            loss += 0.5 * l2 * w * w;
            if (grad) (*grad)[c * (D + 1) + d] += l2 * w;
        }
    return loss;
}

// Full-batch gradient descent from all-zero weights; classes are the sorted
// distinct labels. loss_trace, when given, receives the objective before each step.
inline Classifier train_classifier(const std::vector<std::vector<double>>& X, const std::vector<std::string>& labels,
                                   const ClassifierConfig& cfg = {}, std::vector<double>* loss_trace = nullptr) {
    if (X.empty() || X.size() != labels.size()) throw ValidationError("train_classifier: need equally many vectors and labels (> 0)");
    Classifier clf;
    std::set<std::string> cls(labels.begin(), labels.end());
    clf.classes.assign(cls.begin(), cls.end());
    clf.dim = X.front().size();
    for (const auto& x : X)
        if (x.size() != clf.dim) throw ValidationError("train_classifier: inconsistent vector dimensions");
    clf.weights.assign(clf.classes.size() * (clf.dim + 1), 0.0);
    clf.degenerate = clf.classes.size() < 2;
    if (clf.degenerate) log_warn("classifier trained on a single class");

    std::vector<std::size_t> y;
    for (const auto& l : labels)
        y.push_back(static_cast<std::size_t>(std::lower_bound(clf.classes.begin(), clf.classes.end(), l) - clf.classes.begin()));
    std::vector<double> grad;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        double loss = classifier_objective(clf, X, y, cfg.l2, &grad);
        if (loss_trace) loss_trace->push_back(loss);
        for (std::size_t i = 0; i < grad.size(); ++i) clf.weights[i] -= cfg.learning_rate * grad[i];
    }
    return clf;
}

// Unweighted mean of per-class F1 over every class seen in gold or predictions.
// A class with no true positives scores 0.
inline double macro_f1(const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
    if (gold.size() != pred.size() || gold.empty()) throw Error("macro_f1: size mismatch or empty input");
    std::set<std::string> cls(gold.begin(), gold.end());
    cls.insert(pred.begin(), pred.end());
    double sum = 0;
    for (const auto& c : cls) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            bool g = gold[i] == c, p = pred[i] == c;
            tp += g && p;
            fp += !g && p;
            fn += g && !p;
        }
        if (tp == 0) continue;
        double prec = double(tp) / double(tp + fp), rec = double(tp) / double(tp + fn);
        sum += 2 * prec * rec / (prec + rec);
    }
    return sum / double(cls.size());
}

// verse id -> label
using SplitLabels = std::vector<std::pair<std::string, std::string>>;

inline SplitLabels read_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("missing split file " + path.string());
    SplitLabels out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto parts = split(line, '\t');
        if (parts.size() != 2 || trim(parts[0]).empty() || trim(parts[1]).empty())
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected VerseId<TAB>label");
        out.emplace_back(std::string(trim(parts[0])), std::string(trim(parts[1])));
    }
    return out;
}

inline std::filesystem::path split_path(const std::filesystem::path& dir, const LanguageId& l, const std::string& split_name) {
    return dir / (l.str() + "." + split_name + ".tsv");
}

struct EmbeddedSplit {
    std::vector<std::vector<double>> X;
    std::vector<std::string> y;
    std::size_t excluded = 0;  // verses with no embedding
};

inline EmbeddedSplit embed_split(const EmbeddingTable& t, const Corpus& corpus, const LanguageId& l, const SplitLabels& split) {
    EmbeddedSplit out;
    for (const auto& [id, label] : split) {
        auto v = embed_verse(t, corpus, l, id);
        if (!v) {
            ++out.excluded;
            continue;
        }
        out.X.push_back(std::move(*v));
        out.y.push_back(label);
    }
    return out;
}

struct ClassificationLanguage {
    LanguageId language;
    std::size_t evaluated = 0;
    std::size_t excluded = 0;
    double macro_f1 = 0;
};

struct ClassificationReport {
    std::size_t train_size = 0;
    std::size_t train_excluded = 0;
    bool degenerate = false;
    std::vector<ClassificationLanguage> languages;
    double average_f1 = 0;
};

inline Classifier train_on_split(const EmbeddingTable& t, const Corpus& corpus, const LanguageId& train_lang,
                                 const std::filesystem::path& splits_dir, const ClassifierConfig& cfg,
                                 ClassificationReport* rep = nullptr) {
    auto train = embed_split(t, corpus, train_lang, read_split(split_path(splits_dir, train_lang, "train")));
    if (train.X.empty()) throw ValidationError("classification: no embeddable training verse in " + train_lang.str());
    auto clf = train_classifier(train.X, train.y, cfg);
    if (rep) {
        rep->train_size = train.X.size();
        rep->train_excluded = train.excluded;
        rep->degenerate = clf.degenerate;
    }
    return clf;
}

// Zero-shot evaluation of a trained classifier on each target language's test split.
inline ClassificationReport eval_classification(const Classifier& clf, const EmbeddingTable& t, const Corpus& corpus,
                                                const std::vector<LanguageId>& target_langs, const std::filesystem::path& splits_dir,
                                                ClassificationReport rep = {}) {
    for (const auto& l : target_langs) {
        auto test = embed_split(t, corpus, l, read_split(split_path(splits_dir, l, "test")));
        ClassificationLanguage r{l, test.X.size(), test.excluded, 0.0};
        if (!test.X.empty()) {
            std::vector<std::string> pred;
            for (const auto& x : test.X) pred.push_back(clf.predict(x));
            r.macro_f1 = macro_f1(test.y, pred);
        }
        rep.languages.push_back(r);
    }
    if (rep.languages.empty()) throw ValidationError("classification: no target languages");
    for (const auto& r : rep.languages) rep.average_f1 += r.macro_f1 / double(rep.languages.size());
    return rep;
}

}  // namespace colex
