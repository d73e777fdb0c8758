#pragma once
// Subcommand driver. Each stage reads upstream artifacts from the output
// directory, writes its own, and records both in manifests/<stage>.json.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "colex/analysis.hpp"
#include "colex/assoc.hpp"
#include "colex/config.hpp"
#include "colex/corpus.hpp"
#include "colex/embedding.hpp"
#include "colex/evalsuite.hpp"
#include "colex/graph.hpp"
#include "colex/skipgram.hpp"
#include "colex/walk.hpp"
#include "json.hpp"

namespace colex::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

inline const std::vector<std::string> kStages{"index",          "patterns",       "graphs",        "embed", "eval-clics",
                                              "eval-roundtrip", "eval-retrieval", "eval-classify", "analyze"};

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

// Tracks what a stage reads and writes so the manifest lists every file.
class Artifacts {
public:
    Artifacts(fs::path root, std::string stage) : root_(std::move(root)), stage_(std::move(stage)) {}

    fs::path require(const std::string& rel) {
        auto p = root_ / rel;
        if (!fs::exists(p)) throw ValidationError("stage " + stage_ + ": missing upstream artifact " + p.string());
        inputs_.push_back(rel);
        return p;
    }
    void external(const fs::path& p) { inputs_.push_back(fs::absolute(p).lexically_normal().string()); }

    std::ofstream create(const std::string& rel) {
        auto p = root_ / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Error("cannot write " + p.string());
        outputs_.push_back(rel);
        return out;
    }

    void write_manifest(const PipelineConfig& cfg, double seconds) const {
        ojson m;
        m["stage"] = stage_;
        m["config_hash"] = cfg.hash();
        m["seed"] = cfg.seed;
        m["inputs"] = inputs_;
        m["outputs"] = outputs_;
        m["wall_time_s"] = round6(seconds);
        auto p = root_ / "manifests" / (stage_ + ".json");
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << m.dump(2) << '\n';
    }

private:
    fs::path root_;
    std::string stage_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
};

inline std::string lambda_tag(std::size_t l) { return "l" + std::to_string(l); }

inline Corpus load_configured_corpus(const PipelineConfig& cfg, Artifacts& art) {
    art.external(cfg.corpus_dir);
    if (cfg.lemma_map) art.external(*cfg.lemma_map);
    return load_corpus(cfg.corpus_dir, cfg.pivot, cfg.lemma_map);
}

template <class T, class Reader>
T read_file(const fs::path& p, Reader&& reader) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + p.string());
    return reader(in);
}

// ---------------------------------------------------------------- stages

inline void stage_index(const PipelineConfig& cfg, Artifacts& art) {
    auto corpus = load_configured_corpus(cfg, art);
    auto pool = build_concept_pool(corpus, cfg.min_freq, cfg.max_freq);
    {
        auto out = art.create("index/verses.txt");
        for (const auto& id : corpus.verse_ids) out << id << '\n';
    }
    {
        auto out = art.create("index/aligned.tsv");
        for (const auto& [l, text] : corpus.texts) {
            Postings p;
            for (auto v : text.aligned.ordinals()) p.push_back(static_cast<std::uint32_t>(v));
            out << l.str() << '\t' << join_ordinals(p) << '\n';
        }
    }
    {
        auto out = art.create("index/concepts.tsv");
        write_pool_tsv(out, pool);
    }
    auto targets = corpus.targets();
    std::vector<OccurrenceIndex> built(targets.size());
    parallel_for(targets.size(), cfg.worker_count(),
                 [&](std::size_t i) { built[i] = build_occurrence_index(corpus, targets[i], cfg.index); });
    for (std::size_t i = 0; i < targets.size(); ++i) {
        auto out = art.create("index/" + targets[i].str() + ".tsv");
        write_index_tsv(out, built[i]);
    }
    log_info("index: " + std::to_string(corpus.width()) + " verses, " + std::to_string(targets.size()) + " target languages, " +
             std::to_string(pool.size()) + " concepts");
}

struct LoadedIndex {
    ConceptPool pool;
    std::map<LanguageId, OccurrenceIndex> indexes;
};

inline LoadedIndex load_index(const PipelineConfig& cfg, Artifacts& art) {
    std::size_t width = 0;
    {
        std::ifstream in(art.require("index/verses.txt"));
        std::string line;
        while (std::getline(in, line)) ++width;
    }
    LoadedIndex li;
    li.pool = read_file<ConceptPool>(art.require("index/concepts.tsv"), [&](std::istream& in) { return read_pool_tsv(in, width); });
    std::ifstream in(art.require("index/aligned.tsv"));
    std::string line;
    while (std::getline(in, line)) {
        auto parts = split(line, '\t');
        if (parts.size() != 2) throw ValidationError("index/aligned.tsv: malformed line");
        LanguageId l{std::string(parts[0])};
        if (l == cfg.pivot) continue;
        VerseSet aligned(width);
        for (auto v : parse_ordinals(parts[1], width, "index/aligned.tsv")) aligned.set(v);
        auto idx = read_file<OccurrenceIndex>(art.require("index/" + l.str() + ".tsv"),
                                              [&](std::istream& s) { return read_index_tsv(s, l, aligned); });
        li.indexes.emplace(l, std::move(idx));
    }
    return li;
}

inline void stage_patterns(const PipelineConfig& cfg, Artifacts& art) {
    auto li = load_index(cfg, art);
    auto recs = extract_patterns(li.pool, li.indexes, cfg.fp, cfg.worker_count());
    auto out = art.create("patterns.jsonl");
    write_patterns_jsonl(out, recs);
    log_info("patterns: " + std::to_string(recs.size()) + " records");
}

inline ColexNet load_raw_net(Artifacts& art) {
    return read_file<ColexNet>(art.require("graphs/colexnet_raw.tsv"), [](std::istream& in) { return read_colexnet_tsv(in); });
}

inline void stage_graphs(const PipelineConfig& cfg, Artifacts& art) {
    auto recs = read_file<std::vector<PatternRecord>>(art.require("patterns.jsonl"), [](std::istream& in) { return read_patterns_jsonl(in); });
    auto raw = build_colexnet(recs);
    {
        auto out = art.create("graphs/colexnet_raw.tsv");
        write_colexnet_tsv(out, raw);
    }
    for (auto l : cfg.graph_lambdas()) {
        auto net = prune(raw, PruneConfig{l});
        auto plus = build_colexnetplus(recs, net);
        auto a = art.create("graphs/colexnet_" + lambda_tag(l) + ".tsv");
        write_colexnet_tsv(a, net);
        auto b = art.create("graphs/colexnetplus_" + lambda_tag(l) + ".tsv");
        write_colexnetplus_tsv(b, plus);
        log_info("graphs: lambda=" + std::to_string(l) + " colexnet " + std::to_string(net.node_count()) + " nodes / " +
                 std::to_string(net.edge_count()) + " edges, colexnet+ " + std::to_string(plus.node_count()) + " nodes / " +
                 std::to_string(plus.edge_count()) + " edges");
    }
}

inline std::string embeddings_rel(const PipelineConfig& cfg) { return "embed/embeddings_" + lambda_tag(cfg.lambda) + ".txt"; }

inline void stage_embed(const PipelineConfig& cfg, Artifacts& art) {
    auto plus = read_file<ColexNetPlus>(art.require("graphs/colexnetplus_" + lambda_tag(cfg.lambda) + ".tsv"),
                                        [](std::istream& in) { return read_colexnetplus_tsv(in); });
    if (plus.edge_count() == 0) throw Error("ColexNet+ at lambda=" + std::to_string(cfg.lambda) + " is empty; nothing to embed");
    auto g = WalkGraph::from_colexnetplus(plus, cfg.walk.uniform_weights);
    TrainConfig tcfg = cfg.train;
    tcfg.threads = cfg.deterministic ? 1 : (tcfg.threads == 0 ? cfg.worker_count() : tcfg.threads);
    std::vector<Walk> walks;
    auto table = embed_graph(g, cfg.walk, tcfg, cfg.worker_count(), &walks);
    {
        auto out = art.create(embeddings_rel(cfg));
        write_embeddings(out, table);
    }
    if (cfg.write_walks) {
        auto out = art.create("embed/walks_" + lambda_tag(cfg.lambda) + ".txt");
        write_walks(out, g, walks);
    }
    log_info("embed: " + std::to_string(table.size()) + " nodes, dim " + std::to_string(table.dim()) + ", " +
             std::to_string(walks.size()) + " walks");
}

inline EmbeddingTable load_table(const PipelineConfig& cfg, Artifacts& art) {
    return read_file<EmbeddingTable>(art.require(embeddings_rel(cfg)), [](std::istream& in) { return read_embeddings(in); });
}

inline void stage_eval_clics(const PipelineConfig& cfg, const std::vector<std::size_t>& lambdas, Artifacts& art) {
    if (!cfg.eval.gold_colex) throw ValidationError("eval-clics: eval.gold_colex is not configured");
    art.external(*cfg.eval.gold_colex);
    auto gold = read_file<GoldColexSet>(*cfg.eval.gold_colex, [](std::istream& in) { return read_gold_colex(in); });
    auto raw = load_raw_net(art);
    ojson reports = ojson::array();
    auto tsv = art.create("reports/clics.tsv");
    tsv << "lambda\tcommon\tmicro_recall\tmacro_recall\taw_colex\n";
    for (auto l : lambdas) {
        auto net = prune(raw, PruneConfig{l});
        ojson r;
        r["lambda"] = l;
        try {
            auto rep = eval_clics(net, gold);
            r["common"] = rep.common;
            r["micro_recall"] = round6(rep.micro_recall);
            r["macro_recall"] = round6(rep.macro_recall);
            r["aw_colex"] = round6(rep.aw_colex);
            tsv << l << '\t' << rep.common << '\t' << fixed6(rep.micro_recall) << '\t' << fixed6(rep.macro_recall) << '\t'
                << fixed6(rep.aw_colex) << '\n';
        } catch (const Error& e) {
            r["common"] = 0;
            r["error"] = e.what();
            tsv << l << "\t0\tNA\tNA\tNA\n";
        }
        reports.push_back(r);
    }
    art.create("reports/clics.json") << ojson{{"reports", reports}}.dump(2) << '\n';
}

inline void stage_eval_roundtrip(const PipelineConfig& cfg, Artifacts& art) {
    auto table = load_table(cfg, art);
    auto rep = eval_roundtrip(table, cfg.pivot, table_languages(table), concept_vocabulary(table), cfg.eval.roundtrip_trials, cfg.seed);
    ojson j;
    j["start_words"] = rep.start_words;
    j["trials"] = rep.trials;
    j["flagged"] = rep.flagged;
    j["top1"] = round6(rep.accuracy[0]);
    j["top5"] = round6(rep.accuracy[1]);
    j["top10"] = round6(rep.accuracy[2]);
    ojson trials = ojson::array();
    auto tsv = art.create("reports/roundtrip.tsv");
    tsv << "trial\tlanguages\ttop1\ttop5\ttop10\n";
    for (std::size_t t = 0; t < rep.per_trial.size(); ++t) {
        std::string langs;
        for (const auto& l : rep.languages[t]) langs += (langs.empty() ? "" : ",") + l.str();
        const auto& a = rep.per_trial[t];
        trials.push_back(ojson{{"languages", langs}, {"top1", round6(a[0])}, {"top5", round6(a[1])}, {"top10", round6(a[2])}});
        tsv << t << '\t' << langs << '\t' << fixed6(a[0]) << '\t' << fixed6(a[1]) << '\t' << fixed6(a[2]) << '\n';
    }
    j["per_trial"] = trials;
    art.create("reports/roundtrip.json") << j.dump(2) << '\n';
}

inline std::vector<std::string> retrieval_verse_ids(const PipelineConfig& cfg, const Corpus& corpus, Artifacts& art) {
    std::vector<std::string> ids;
    if (cfg.eval.retrieval_verses) {
        art.external(*cfg.eval.retrieval_verses);
        std::ifstream in(*cfg.eval.retrieval_verses);
        std::string line;
        while (std::getline(in, line))
            if (!trim(line).empty()) ids.emplace_back(trim(line));
        return ids;
    }
    for (std::size_t i = 0; i < std::min(cfg.eval.retrieval_max_verses, corpus.width()); ++i) ids.push_back(corpus.verse_ids[i]);
    return ids;
}

inline void stage_eval_retrieval(const PipelineConfig& cfg, Artifacts& art) {
    auto table = load_table(cfg, art);
    auto corpus = load_configured_corpus(cfg, art);
    auto ids = retrieval_verse_ids(cfg, corpus, art);
    auto rep = eval_retrieval(table, corpus, cfg.pivot, corpus.targets(), ids, cfg.eval.retrieval_min_coverage);
    ojson j;
    j["query_language"] = cfg.pivot.str();
    j["verses"] = ids.size();
    j["skipped_queries"] = rep.skipped_queries;
    j["top1"] = round6(rep.accuracy[0]);
    j["top5"] = round6(rep.accuracy[1]);
    j["top10"] = round6(rep.accuracy[2]);
    ojson excluded = ojson::array();
    for (const auto& l : rep.excluded) excluded.push_back(l.str());
    j["excluded_languages"] = excluded;
    ojson langs = ojson::array();
    auto tsv = art.create("reports/retrieval.tsv");
    tsv << "language\tqueries\ttarget_unembeddable\ttop1\ttop5\ttop10\n";
    for (const auto& r : rep.languages) {
        langs.push_back(ojson{{"language", r.language.str()},
                              {"queries", r.queries},
                              {"target_unembeddable", r.target_unembeddable},
                              {"top1", round6(r.accuracy[0])},
                              {"top5", round6(r.accuracy[1])},
                              {"top10", round6(r.accuracy[2])}});
        tsv << r.language.str() << '\t' << r.queries << '\t' << r.target_unembeddable << '\t' << fixed6(r.accuracy[0]) << '\t'
            << fixed6(r.accuracy[1]) << '\t' << fixed6(r.accuracy[2]) << '\n';
    }
    j["languages"] = langs;
    art.create("reports/retrieval.json") << j.dump(2) << '\n';
}

inline void stage_eval_classify(const PipelineConfig& cfg, Artifacts& art) {
    if (!cfg.eval.splits_dir) throw ValidationError("eval-classify: eval.splits_dir is not configured");
    const auto& dir = *cfg.eval.splits_dir;
    auto table = load_table(cfg, art);
    auto corpus = load_configured_corpus(cfg, art);
    LanguageId train_lang(cfg.eval.train_lang);
    art.external(split_path(dir, train_lang, "train"));
    std::vector<LanguageId> targets;
    for (const auto& l : corpus.targets()) {
        if (l == train_lang || !fs::exists(split_path(dir, l, "test"))) continue;
        targets.push_back(l);
        art.external(split_path(dir, l, "test"));
    }
    if (targets.empty()) throw ValidationError("eval-classify: no target language has a test split in " + dir.string());
    ClassificationReport rep;
    auto clf = train_on_split(table, corpus, train_lang, dir, cfg.eval.classifier, &rep);
    rep = eval_classification(clf, table, corpus, targets, dir, rep);
    ojson j;
    j["train_language"] = train_lang.str();
    j["train_size"] = rep.train_size;
    j["train_excluded"] = rep.train_excluded;
    j["degenerate"] = rep.degenerate;
    j["average_macro_f1"] = round6(rep.average_f1);
    ojson langs = ojson::array();
    auto tsv = art.create("reports/classify.tsv");
    tsv << "language\tevaluated\texcluded\tmacro_f1\n";
    for (const auto& r : rep.languages) {
        langs.push_back(ojson{{"language", r.language.str()}, {"evaluated", r.evaluated}, {"excluded", r.excluded}, {"macro_f1", round6(r.macro_f1)}});
        tsv << r.language.str() << '\t' << r.evaluated << '\t' << r.excluded << '\t' << fixed6(r.macro_f1) << '\n';
    }
    j["languages"] = langs;
    art.create("reports/classify.json") << j.dump(2) << '\n';
}

inline void stage_analyze(const PipelineConfig& cfg, const std::vector<std::size_t>& lambdas, Artifacts& art) {
    auto raw = load_raw_net(art);
    {
        auto tsv = art.create("analysis/stats.tsv");
        tsv << "lambda\tnodes\tedges\tavg_degree\tedges_per_node\tcomponents\n";
        for (auto l : lambdas) {
            auto s = graph_stats(prune(raw, PruneConfig{l}));
            tsv << l << '\t' << s.nodes << '\t' << s.edges << '\t' << fixed6(s.avg_degree) << '\t' << fixed6(s.edges_per_node) << '\t'
                << s.components << '\n';
        }
    }
    auto net = prune(raw, PruneConfig{cfg.lambda});
    auto deg = degrees(net);
    auto bc = betweenness(net);
    {
        auto tsv = art.create("analysis/degree_distribution.tsv");
        std::map<std::size_t, std::size_t> hist;
        for (const auto& [_, d] : deg) ++hist[d];
        tsv << "degree\tcount\n";
        for (const auto& [d, c] : hist) tsv << d << '\t' << c << '\n';
    }
    {
        auto tsv = art.create("analysis/centrality.tsv");
        tsv << "node\tdegree\tdegree_centrality\tbetweenness\n";
        const double denom = deg.size() > 1 ? double(deg.size() - 1) : 1.0;
        for (const auto& [n, d] : deg) tsv << n << '\t' << d << '\t' << fixed6(double(d) / denom) << '\t' << fixed6(bc.at(n)) << '\n';
    }
    ojson j;
    j["lambda"] = cfg.lambda;
    auto s = graph_stats(net);
    j["stats"] = ojson{{"nodes", s.nodes}, {"edges", s.edges}, {"avg_degree", round6(s.avg_degree)},
                       {"edges_per_node", round6(s.edges_per_node)}, {"components", s.components}};
    if (net.node_count() > 0) {
        auto part = louvain(net, cfg.analysis.louvain);
        auto out = art.create("analysis/partition.tsv");
        write_partition_tsv(out, part);
        j["louvain"] = ojson{{"resolution", cfg.analysis.louvain.resolution},
                             {"seed", cfg.analysis.louvain.seed},
                             {"communities", part.community_count()},
                             {"modularity", round6(part.modularity)}};
    }
    ojson ari = ojson::array();
    for (const auto& gpath : cfg.analysis.groupings) {
        art.external(gpath);
        auto grouping = read_file<Grouping>(gpath, [](std::istream& in) { return read_grouping(in); });
        auto m = ari_matrix(net, grouping, cfg.analysis.louvain, cfg.analysis.ari_runs, cfg.worker_count());
        std::string rel = "analysis/ari_" + gpath.stem().string() + ".tsv";
        auto out = art.create(rel);
        write_ari_tsv(out, m);
        ari.push_back(ojson{{"grouping", gpath.stem().string()}, {"groups", m.labels.size()}, {"runs", cfg.analysis.ari_runs}, {"file", rel}});
    }
    j["ari"] = ari;
    art.create("analysis/analysis.json") << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- driver

struct Invocation {
    std::string stage;
    PipelineConfig cfg;
    std::vector<std::size_t> lambda_flags;
};

inline void run_stage(const std::string& stage, const Invocation& inv) {
    const auto& cfg = inv.cfg;
    Artifacts art(cfg.output_dir, stage);
    auto t0 = std::chrono::steady_clock::now();
    auto sweep = inv.lambda_flags.empty() ? cfg.graph_lambdas() : inv.lambda_flags;
    if (stage == "index") stage_index(cfg, art);
    else if (stage == "patterns") stage_patterns(cfg, art);
    else if (stage == "graphs") stage_graphs(cfg, art);
    else if (stage == "embed") stage_embed(cfg, art);
    else if (stage == "eval-clics") stage_eval_clics(cfg, sweep, art);
    else if (stage == "eval-roundtrip") stage_eval_roundtrip(cfg, art);
    else if (stage == "eval-retrieval") stage_eval_retrieval(cfg, art);
    else if (stage == "eval-classify") stage_eval_classify(cfg, art);
    else if (stage == "analyze") stage_analyze(cfg, sweep, art);
    else throw ValidationError("unknown stage " + stage);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    art.write_manifest(cfg, secs);
}

inline void run_all(const Invocation& inv) {
    const auto& cfg = inv.cfg;
    for (const auto& stage : kStages) {
        if (stage == "eval-clics" && !cfg.eval.gold_colex) {
            log_info("all: skipping eval-clics (no eval.gold_colex)");
            continue;
        }
        if (stage == "eval-classify" && !cfg.eval.splits_dir) {
            log_info("all: skipping eval-classify (no eval.splits_dir)");
            continue;
        }
        if (stage == "eval-roundtrip") {
            std::ifstream in(fs::path(cfg.output_dir) / embeddings_rel(cfg));
            if (in && table_languages(read_embeddings(in)).size() < 3) {
                log_warn("all: skipping eval-roundtrip (fewer than 3 languages embedded)");
                continue;
            }
        }
        log_info("stage " + stage);
        run_stage(stage, inv);
    }
}

// Entry point. Exit codes: 0 success, 1 usage/validation error, 2 runtime failure.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"colexnet: colexification graphs and multilingual node embeddings from a parallel corpus"};
    app.require_subcommand(1);
    std::string config_path;
    std::string output_dir;
    std::vector<std::size_t> lambdas;
    std::vector<std::string> overrides;
    std::int64_t seed = -1;
    int workers = -1;
    bool deterministic = false;
    app.add_option("-c,--config", config_path, "pipeline config file")->required();
    app.add_option("-o,--output-dir", output_dir, "output directory (overrides COLEXNET_OUTPUT_DIR and the config)");
    app.add_option("--lambda", lambdas, "lambda value(s) for eval-clics / analyze sweeps");
    app.add_option("--set", overrides, "override a config key, e.g. --set fp.alpha=0.8");
    app.add_option("--seed", seed, "global seed");
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
    app.add_flag("--deterministic", deterministic, "force the serial, bit-reproducible embedding trainer");
    for (const auto& s : kStages) app.add_subcommand(s)->fallthrough();
    app.add_subcommand("all", "run every stage in order")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        err << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        fs::path cfg_file(config_path);
        auto kv = read_key_values(cfg_file);
        for (const auto& o : overrides) {
            auto eq = o.find('=');
            if (eq == std::string::npos) throw ValidationError("--set expects key=value, got " + o);
            kv.set(std::string(trim(std::string_view(o).substr(0, eq))), std::string(trim(std::string_view(o).substr(eq + 1))));
        }
        if (seed >= 0) kv.set("seed", std::to_string(seed));
        if (workers >= 0) kv.set("workers", std::to_string(workers));
        if (deterministic) kv.set("deterministic", "true");
        if (const char* env = std::getenv("COLEXNET_OUTPUT_DIR"); env && *env) kv.set("output_dir", std::string("\"") + env + "\"");
        if (!output_dir.empty()) kv.set("output_dir", "\"" + output_dir + "\"");

        Invocation inv{app.get_subcommands().front()->get_name(), make_config(kv, cfg_file.parent_path()), lambdas};
        inv.cfg.validate();
        for (auto l : lambdas) PruneConfig{l}.validate();
        if (inv.stage == "all") run_all(inv);
        else run_stage(inv.stage, inv);
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace colex::cli
