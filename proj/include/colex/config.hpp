#pragma once
// Pipeline configuration: a flat TOML-style key/value file with [sections],
// quoted strings, numbers, booleans and one-line arrays.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "colex/analysis.hpp"
#include "colex/assoc.hpp"
#include "colex/common.hpp"
#include "colex/corpus.hpp"
#include "colex/evalsuite.hpp"
#include "colex/graph.hpp"
#include "colex/skipgram.hpp"
#include "colex/walk.hpp"

namespace colex {

class KeyValues {
public:
    static KeyValues parse(std::istream& in, const std::string& name = "config") {
        KeyValues kv;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto where = [&] { return name + ":" + std::to_string(lineno); };
            auto s = trim(strip_comment(line));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ValidationError(where() + ": unterminated section header");
                section = std::string(trim(s.substr(1, s.size() - 2)));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string_view::npos) throw ValidationError(where() + ": expected key = value");
            auto key = std::string(trim(s.substr(0, eq)));
            auto value = std::string(trim(s.substr(eq + 1)));
            if (key.empty() || value.empty()) throw ValidationError(where() + ": empty key or value");
            kv.set(section.empty() ? key : section + "." + key, value);
        }
        return kv;
    }

    // value keeps its source spelling (quotes included) until read
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& raw() const { return values_; }

    std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& [k, _] : values_)
            if (k.rfind(prefix, 0) == 0) out.push_back(k.substr(prefix.size()));
        return out;
    }

    std::string str(const std::string& key, const std::string& def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : unquote(it->second, key);
    }
    std::optional<std::string> opt_str(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return str(key, "");
    }
    double real(const std::string& key, double def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ValidationError("config key " + key + ": expected a number, got " + it->second);
        }
    }
    std::size_t count(const std::string& key, std::size_t def) const {
        double v = real(key, double(def));
        if (v < 0 || v != std::floor(v)) throw ValidationError("config key " + key + ": expected a non-negative integer");
        return static_cast<std::size_t>(v);
    }
    bool flag(const std::string& key, bool def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        throw ValidationError("config key " + key + ": expected true or false");
    }
    std::vector<std::string> list(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return {};
        std::string_view s = it->second;
        if (s.size() < 2 || s.front() != '[' || s.back() != ']') return {unquote(it->second, key)};
        std::vector<std::string> out;
        s = trim(s.substr(1, s.size() - 2));
        if (s.empty()) return out;
        for (auto part : split(s, ',')) {
            auto p = trim(part);
            if (!p.empty()) out.push_back(unquote(std::string(p), key));
        }
        return out;
    }

private:
    static std::string_view strip_comment(std::string_view s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    }
    static std::string unquote(const std::string& v, const std::string& key) {
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
            std::string out;
            for (std::size_t i = 1; i + 1 < v.size(); ++i) {
                if (v[i] == '\\' && i + 2 < v.size()) ++i;
                out += v[i];
            }
            return out;
        }
        if (!v.empty() && v.front() == '"') throw ValidationError("config key " + key + ": unterminated string");
        return v;
    }

    std::map<std::string, std::string> values_;
};

struct EvalConfig {
    std::optional<std::filesystem::path> gold_colex;
    std::optional<std::filesystem::path> splits_dir;
    std::optional<std::filesystem::path> retrieval_verses;
    std::string train_lang = "eng";
    std::size_t retrieval_max_verses = 500;
    double retrieval_min_coverage = 0.8;
    std::size_t roundtrip_trials = 10;
    ClassifierConfig classifier;
};

struct AnalysisConfig {
    std::vector<std::filesystem::path> groupings;
    LouvainConfig louvain;
    std::size_t ari_runs = 50;
};

struct PipelineConfig {
    std::filesystem::path corpus_dir;
    LanguageId pivot{"eng"};
    std::optional<std::filesystem::path> lemma_map;
    IndexConfig index;
    std::size_t min_freq = 5;
    std::size_t max_freq = 2000;
    FPConfig fp;
    std::size_t lambda = 50;            // graph used for embedding and analysis
    std::vector<std::size_t> lambdas;   // sweep, ascending
    WalkConfig walk;
    TrainConfig train;
    bool write_walks = false;
    EvalConfig eval;
    AnalysisConfig analysis;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0 = all cores
    bool deterministic = false;
    KeyValues source;      // effective key/values, for hashing

    unsigned worker_count() const { return workers == 0 ? default_workers() : workers; }

    // Sweep values plus the primary lambda, ascending and unique.
    std::vector<std::size_t> graph_lambdas() const {
        std::set<std::size_t> s(lambdas.begin(), lambdas.end());
        s.insert(lambda);
        return {s.begin(), s.end()};
    }

    // Stable hash of the effective settings, output location excluded.
    std::string hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& [k, v] : source.raw()) {
            if (k == "output_dir") continue;
            h = fnv1a64(k + "=" + v + "\n", h);
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    void validate() const {
        namespace fs = std::filesystem;
        auto need = [](const fs::path& p, const std::string& what) {
            if (!fs::exists(p)) throw ValidationError(what + " " + p.string() + " does not exist");
        };
        need(corpus_dir, "corpus_dir");
        if (lemma_map) need(*lemma_map, "lemma_map");
        if (eval.gold_colex) need(*eval.gold_colex, "gold_colex");
        if (eval.splits_dir) need(*eval.splits_dir, "splits_dir");
        if (eval.retrieval_verses) need(*eval.retrieval_verses, "retrieval_verses");
        for (const auto& g : analysis.groupings) need(g, "grouping");
        if (min_freq > max_freq) throw ValidationError("pool min_freq exceeds max_freq");
        fp.validate();
        PruneConfig{lambda}.validate();
        if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw ValidationError("lambda list must be ascending");
        walk.validate();
        train.validate();
        if (eval.retrieval_min_coverage < 0 || eval.retrieval_min_coverage > 1)
            throw ValidationError("retrieval_min_coverage must lie in [0, 1]");
    }
};

// Builds the effective configuration. Relative paths resolve against base_dir.
inline PipelineConfig make_config(const KeyValues& kv, const std::filesystem::path& base_dir) {
    auto path = [&](const std::string& key) -> std::optional<std::filesystem::path> {
        auto s = kv.opt_str(key);
        if (!s || s->empty()) return std::nullopt;
        std::filesystem::path p(*s);
        return p.is_absolute() ? p : base_dir / p;
    };
    PipelineConfig c;
    c.source = kv;
    c.corpus_dir = path("corpus_dir").value_or(base_dir / "corpus");
    c.pivot = LanguageId(kv.str("pivot", "eng"));
    c.lemma_map = path("lemma_map");
    c.output_dir = path("output_dir").value_or(base_dir / "out");
    c.seed = kv.count("seed", 1);
    c.workers = static_cast<unsigned>(kv.count("workers", 0));
    c.deterministic = kv.flag("deterministic", false);

    c.index.max_len = kv.count("index.max_len", 8);
    c.index.min_verses = kv.count("index.min_verses", 2);
    for (const auto& iso : kv.keys_with_prefix("index.max_len_override."))
        c.index.max_len_override[LanguageId(iso)] = kv.count("index.max_len_override." + iso, 0);

    c.min_freq = kv.count("pool.min_freq", 5);
    c.max_freq = kv.count("pool.max_freq", 2000);
    c.fp.alpha = kv.real("fp.alpha", 0.9);
    c.fp.max_iters = kv.count("fp.max_iters", 3);

    c.lambda = kv.count("prune.lambda", 50);
    for (const auto& s : kv.list("prune.lambdas")) {
        try {
            c.lambdas.push_back(std::stoull(s));
        } catch (const std::exception&) {
            throw ValidationError("prune.lambdas: bad entry " + s);
        }
    }
    if (c.lambdas.empty()) c.lambdas.push_back(c.lambda);

    c.walk.p = kv.real("walk.p", 0.5);
    c.walk.q = kv.real("walk.q", 2.0);
    c.walk.walks_per_node = kv.count("walk.walks_per_node", 10);
    c.walk.walk_length = kv.count("walk.walk_length", 80);
    c.walk.uniform_weights = kv.flag("walk.uniform_weights", false);
    c.walk.seed = c.seed;
    c.write_walks = kv.flag("walk.write_walks", false);

    c.train.dim = kv.count("train.dim", 200);
    c.train.window = kv.count("train.window", 5);
    c.train.negatives = kv.count("train.negatives", 5);
    c.train.epochs = kv.count("train.epochs", 5);
    c.train.learning_rate = kv.real("train.learning_rate", 0.025);
    c.train.seed = c.seed;
    c.train.threads = static_cast<unsigned>(kv.count("train.threads", 0));

    c.eval.gold_colex = path("eval.gold_colex");
    c.eval.splits_dir = path("eval.splits_dir");
    c.eval.retrieval_verses = path("eval.retrieval_verses");
    c.eval.train_lang = kv.str("eval.train_lang", c.pivot.str());
    c.eval.retrieval_max_verses = kv.count("eval.retrieval_max_verses", 500);
    c.eval.retrieval_min_coverage = kv.real("eval.retrieval_min_coverage", 0.8);
    c.eval.roundtrip_trials = kv.count("eval.roundtrip_trials", 10);
    c.eval.classifier.epochs = kv.count("eval.classifier_epochs", 500);
    c.eval.classifier.learning_rate = kv.real("eval.classifier_lr", 0.1);
    c.eval.classifier.l2 = kv.real("eval.classifier_l2", 1e-4);

    for (const auto& g : kv.list("analysis.groupings")) {
        std::filesystem::path p(g);
        c.analysis.groupings.push_back(p.is_absolute() ? p : base_dir / p);
    }
    c.analysis.louvain.resolution = kv.real("analysis.resolution", 0.1);
    c.analysis.louvain.seed = kv.count("analysis.louvain_seed", 114514);
    c.analysis.ari_runs = kv.count("analysis.ari_runs", 50);
    return c;
}

inline KeyValues read_key_values(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open config " + file.string());
    return KeyValues::parse(in, file.string());
}

}  // namespace colex
