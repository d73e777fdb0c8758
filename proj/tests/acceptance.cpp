// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "cli_support.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace colex;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void check(const std::string& name, const std::function<Outcome()>& fn, double budget_s = 0) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        o.pass = false;
        o.detail += "; over time budget of " + std::to_string(budget_s) + " s";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-34s %s [%.3f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<std::string> items(const std::vector<Scored>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.item);
    return out;
}

synth::Spec planted_spec() {
    synth::Spec s;
    s.planted = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}};
    return s;
}

Outcome chi_square_oracle() {
    std::mt19937_64 rng(1000);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t a = rng() % 500, b = rng() % 500, c = rng() % 500, d = rng() % 500;
        auto got = chi_square(a, b, c, d);
        double n = double(a + b + c + d), diff = double(a) * double(d) - double(b) * double(c);
        double den = double(a + b) * double(c + d) * double(a + c) * double(b + d);
        double want = den == 0 ? 0.0 : n * diff * diff / den;
        double err = std::abs(got.score - want) / std::max(1.0, want);
        worst = std::max(worst, err);
        int dir = diff > 0 ? 1 : diff < 0 ? -1 : 0;
        if (den == 0) dir = 0;
        if (got.direction != dir) return {false, "direction mismatch on table " + std::to_string(i)};
    }
    return {worst <= 1e-9, "1000 tables, max relative error " + fmt(worst)};
}

Outcome toy_fp_bp_oracle() {
    auto corpus = synth::toy();
    auto pool = build_concept_pool(corpus, 1);
    IndexConfig cfg;
    cfg.min_verses = 1;
    std::size_t cases = 0;
    for (const char* l : {"xx1", "xx2"}) {
        LanguageId lang(l);
        auto idx = build_occurrence_index(corpus, lang, cfg);
        for (const auto& f : pool.concepts()) {
            auto fp = items(forward_pass(f, pool, idx));
            if (fp != oracle::forward_pass(corpus, lang, f, pool.concepts(), cfg.max_len, 1))
                return {false, "forward pass differs for " + f + " in " + l};
            if (!fp.empty() && items(backward_pass(fp, pool, idx)) != oracle::backward_pass(corpus, lang, fp, pool.concepts(), cfg.max_len, 1))
                return {false, "backward pass differs for " + f + " in " + l};
            ++cases;
        }
    }
    auto idx = build_occurrence_index(corpus, LanguageId("xx1"), cfg);
    auto bp = items(backward_pass(items(forward_pass("hand", pool, idx)), pool, idx));
    bool ok = bp == std::vector<std::string>{"hand", "arm"};
    return {ok && cases == 8, std::to_string(cases) + " concept/language cases agree; BP(FP(hand, xx1)) = [" +
                                  (bp.empty() ? "" : bp[0]) + (bp.size() > 1 ? ", " + bp[1] : "") + "]"};
}

Outcome planted_recovery() {
    auto data = synth::generate(planted_spec());
    auto net = build_colexnet(synth::patterns(synth::corpus(data)));
    std::size_t recovered = 0;
    for (const auto& [a, b] : data.planted) recovered += net.weight({a, b}) >= 1;
    std::size_t spurious = 0;
    for (const auto& [e, langs] : net.edges()) {
        if (e.self_loop() || langs.size() < 2) continue;
        if (std::find(data.planted.begin(), data.planted.end(), std::make_pair(e.first, e.second)) == data.planted.end()) ++spurious;
    }
    return {recovered >= 4 && spurious == 0,
            std::to_string(recovered) + "/5 planted edges, " + std::to_string(spurious) + " non-planted edges with weight >= 2"};
}

Outcome lambda_monotone() {
    auto net = build_colexnet(synth::patterns(synth::corpus(synth::generate(planted_spec()))));
    std::string detail;
    bool ok = true;
    std::size_t prev_nodes = SIZE_MAX, prev_edges = SIZE_MAX;
    for (std::size_t l : {1u, 2u, 3u, 5u}) {
        auto p = prune(net, {l});
        ok = ok && p.node_count() <= prev_nodes && p.edge_count() <= prev_edges;
        prev_nodes = p.node_count();
        prev_edges = p.edge_count();
        detail += "l" + std::to_string(l) + ":" + std::to_string(p.node_count()) + "/" + std::to_string(p.edge_count()) + " ";
    }
    return {ok, "nodes/edges " + detail};
}

Outcome walk_law() {
    auto recs = synth::patterns(synth::corpus(synth::generate(planted_spec())));
    auto g = WalkGraph::from_colexnetplus(build_colexnetplus(recs, prune(build_colexnet(recs), {1})));
    WalkConfig cfg;
    auto walks = generate_walks(g, cfg, 4);
    for (const auto& w : walks)
        for (std::size_t i = 1; i < w.size(); ++i)
            if (g.is_ngram(w[i]) == g.is_ngram(w[i - 1])) return {false, "walk repeats a node kind"};
    auto star = WalkGraph::from_edges({{"c1", "xx1:$g$", 1}, {"c2", "xx1:$g$", 1}, {"c3", "xx1:$g$", 1}});
    auto d = transition_distribution(star, std::string("c1"), "xx1:$g$", cfg);
    double err = std::max({std::abs(d.at("c1") - 2.0 / 3.0), std::abs(d.at("c2") - 1.0 / 6.0), std::abs(d.at("c3") - 1.0 / 6.0)});
    return {err <= 1e-12, std::to_string(walks.size()) + " walks alternate; star distribution error " + fmt(err)};
}

Outcome embedding_transfer() {
    synth::Spec spec;
    auto data = synth::generate(spec);
    auto corpus = synth::corpus(data);
    auto recs = synth::patterns(corpus);
    auto plus = build_colexnetplus(recs, prune(build_colexnet(recs), {1}));
    auto g = WalkGraph::from_colexnetplus(plus);
    WalkConfig wcfg;
    wcfg.seed = 7;
    TrainConfig tcfg;
    tcfg.dim = 50;
    tcfg.epochs = 5;
    tcfg.seed = 7;
    auto table = embed_graph(g, wcfg, tcfg, 4);
    auto ret = eval_retrieval(table, corpus, corpus.pivot, corpus.targets(), corpus.verse_ids);
    auto rt = eval_roundtrip(table, corpus.pivot, table_languages(table), data.concepts, 10, 7);
    return {ret.accuracy[0] >= 0.9 && rt.accuracy[0] >= 0.8,
            "retrieval top-1 " + fmt(ret.accuracy[0]) + ", roundtrip top-1 " + fmt(rt.accuracy[0])};
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

Outcome gradient_checks() {
    std::mt19937_64 rng(86);
    const double h = 1e-5;
    auto rnd = [&] { return uniform01(rng) * 2 - 1; };
    double worst_sg = 0, worst_clf = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t dim = 10, k = 5;
        std::vector<std::vector<double>> v(k + 2, std::vector<double>(dim));
        for (auto& row : v)
            for (auto& x : row) x = rnd();
        auto loss = [&](const std::vector<std::vector<double>>& w) {
            std::vector<std::span<const double>> negs(w.begin() + 2, w.end());
            return sgns_loss<double>(w[0], w[1], negs);
        };
        std::vector<std::vector<double>> gr(k + 2, std::vector<double>(dim));
        std::vector<std::span<const double>> negs(v.begin() + 2, v.end());
        std::vector<std::span<double>> gnegs(gr.begin() + 2, gr.end());
        sgns_gradient<double>(v[0], v[1], negs, gr[0], gr[1], gnegs);
        std::vector<double> an, nu;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t d = 0; d < dim; ++d) {
                auto p = v, m = v;
                p[i][d] += h;
                m[i][d] -= h;
                nu.push_back((loss(p) - loss(m)) / (2 * h));
                an.push_back(gr[i][d]);
            }
        worst_sg = std::max(worst_sg, rel_error(an, nu));
    }
    for (int t = 0; t < 100; ++t) {
        Classifier clf;
        clf.classes = {"a", "b", "c", "d"};
        clf.dim = 5;
        for (std::size_t i = 0; i < 4 * 6; ++i) clf.weights.push_back(rnd());
        std::vector<std::vector<double>> X(15, std::vector<double>(5));
        std::vector<std::size_t> y;
        for (auto& x : X) {
            for (auto& e : x) e = rnd();
            y.push_back(uniform_index(rng, 4));
        }
        std::vector<double> grad, nu;
        classifier_objective(clf, X, y, 1e-3, &grad);
        for (std::size_t i = 0; i < clf.weights.size(); ++i) {
            auto p = clf, m = clf;
            p.weights[i] += h;
            m.weights[i] -= h;
            nu.push_back((classifier_objective(p, X, y, 1e-3) - classifier_objective(m, X, y, 1e-3)) / (2 * h));
        }
        worst_clf = std::max(worst_clf, rel_error(grad, nu));
    }
    return {worst_sg < 1e-4 && worst_clf < 1e-4,
            "max relative error skip-gram " + fmt(worst_sg) + ", classifier " + fmt(worst_clf) + " (100 points each)"};
}

Outcome ari_oracle() {
    auto parts = oracle::set_partitions(6);
    double worst = 0;
    for (const auto& x : parts)
        for (const auto& y : parts)
            worst = std::max(worst, std::abs(adjusted_rand_index(oracle::as_assignment(x), oracle::as_assignment(y)) - oracle::ari_pairs(x, y)));
    bool self = true;
    for (const auto& x : parts) self = self && adjusted_rand_index(oracle::as_assignment(x), oracle::as_assignment(x)) == 1.0;
    double swap = adjusted_rand_index(oracle::as_assignment({0, 0, 1, 1}), oracle::as_assignment({0, 1, 0, 1}));
    return {worst <= 1e-12 && self && swap == -0.5,
            std::to_string(parts.size()) + " partitions, max error " + fmt(worst) + "; ARI(P,P)=1; {ab|cd} vs {ac|bd} = " + fmt(swap)};
}

Outcome louvain_checks() {
    ColexNet net;
    auto add = [&](ColexNet& n, const std::string& a, const std::string& b, std::size_t w) {
        static const char* langs[] = {"aaa", "bbb", "ccc", "ddd"};
        for (std::size_t i = 0; i < w; ++i) n.attest({a, b}, LanguageId(langs[i]));
    };
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) add(net, "k" + std::to_string(s * 5 + i), "k" + std::to_string(s * 5 + j), 1);
    add(net, "k4", "k5", 1);
    auto p = louvain(net, {1.0, 114514});
    bool cliques = p.community_count() == 2;
    for (int i = 0; i < 10; ++i) cliques = cliques && p.assignment.at("k" + std::to_string(i)) == p.assignment.at(i < 5 ? "k0" : "k5");
    std::mt19937_64 rng(20);
    std::size_t graphs = 0;
    bool monotone = true;
    while (graphs < 20) {
        ColexNet g;
        std::size_t n = 20 + uniform_index(rng, 30);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (uniform01(rng) < 0.12) add(g, "n" + std::to_string(i), "n" + std::to_string(j), 1 + uniform_index(rng, 4));
        if (g.edge_count() == 0) continue;
        ++graphs;
        auto q = louvain(g, {0.1 + 0.9 * double(graphs % 2), graphs});
        for (std::size_t i = 1; i < q.pass_modularity.size(); ++i) monotone = monotone && q.pass_modularity[i] >= q.pass_modularity[i - 1] - 1e-12;
    }
    return {cliques && monotone, std::string("two cliques ") + (cliques ? "recovered" : "NOT recovered") + "; modularity " +
                                     (monotone ? "non-decreasing" : "decreased") + " on 20 random graphs"};
}

Outcome clics_arithmetic() {
    ColexNet net;
    net.attest({"a", "b"}, LanguageId("xx1"));
    net.attest({"b", "d"}, LanguageId("xx1"));
    GoldColexSet gold;
    gold.add("a", "b");
    gold.add("a", "c");
    auto r = eval_clics(net, gold);
    return {r.micro_recall == 2.0 / 3.0 && r.macro_recall == 0.75 && r.aw_colex == 0.5,
            "micro " + fmt(r.micro_recall) + ", macro " + fmt(r.macro_recall) + ", aw_colex " + fmt(r.aw_colex)};
}

Outcome determinism() {
    auto a = clitest::fresh_dir("accept_a"), b = clitest::fresh_dir("accept_b");
    auto cfg = clitest::toy_config().string();
    auto ra = clitest::run({"all", "-c", cfg, "-o", a.string()});
    auto rb = clitest::run({"all", "-c", cfg, "-o", b.string()});
    if (ra.code != 0 || rb.code != 0) return {false, "pipeline failed: " + ra.err + rb.err};
    auto sa = clitest::snapshot(a), sb = clitest::snapshot(b);
    std::size_t differing = 0;
    for (const auto& [k, v] : sa)
        if (!sb.count(k) || sb.at(k) != v) ++differing;
    differing += sb.size() > sa.size() ? sb.size() - sa.size() : 0;
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    return {differing == 0 && !sa.empty(), std::to_string(sa.size()) + " artifacts compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
    check("chi-square oracle", chi_square_oracle, 1.0);
    check("toy forward/backward oracle", toy_fp_bp_oracle, 1.0);
    check("planted colexification recovery", planted_recovery, 10.0);
    check("lambda monotonicity", lambda_monotone);
    check("bipartite walk law", walk_law);
    check("embedding transfer", embedding_transfer, 60.0);
    check("gradient checks", gradient_checks);
    check("ARI oracle", ari_oracle);
    check("Louvain", louvain_checks);
    check("CLICS metric arithmetic", clics_arithmetic);
    check("determinism of `all` on toy", determinism, 10.0);
    std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}
