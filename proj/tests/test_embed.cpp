#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "colex/skipgram.hpp"
#include "support/synthetic.hpp"

using namespace colex;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = (uniform01(rng) * 2 - 1) * scale;
    return v;
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

EmbeddingTable table(std::vector<std::string> keys, std::vector<std::vector<float>> rows) {
    std::vector<float> data;
    for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
    std::size_t dim = rows.front().size();
    return EmbeddingTable(std::move(keys), dim, std::move(data));
}

}  // namespace

TEST(Sgns, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(17);
    const std::size_t dim = 12, k = 5;
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        // vectors: 0 = center, 1 = context, 2.. = negatives
        std::vector<std::vector<double>> vecs;
        for (std::size_t i = 0; i < k + 2; ++i) vecs.push_back(random_vec(dim, rng, 0.8));
        auto loss_at = [&](const std::vector<std::vector<double>>& v) {
            std::vector<std::span<const double>> negs;
            for (std::size_t i = 2; i < v.size(); ++i) negs.emplace_back(v[i]);
            return sgns_loss<double>(v[0], v[1], negs);
        };
        std::vector<std::vector<double>> grads(k + 2, std::vector<double>(dim));
        std::vector<std::span<const double>> negs;
        std::vector<std::span<double>> gnegs;
        for (std::size_t i = 2; i < k + 2; ++i) {
            negs.emplace_back(vecs[i]);
            gnegs.emplace_back(grads[i]);
        }
        double loss = sgns_gradient<double>(vecs[0], vecs[1], negs, grads[0], grads[1], gnegs);
        EXPECT_NEAR(loss, loss_at(vecs), 1e-12);
        std::vector<double> analytic, numeric;
        for (std::size_t i = 0; i < k + 2; ++i)
            for (std::size_t d = 0; d < dim; ++d) {
                auto plus = vecs, minus = vecs;
                plus[i][d] += h;
                minus[i][d] -= h;
                numeric.push_back((loss_at(plus) - loss_at(minus)) / (2 * h));
                analytic.push_back(grads[i][d]);
            }
        EXPECT_LT(rel_error(analytic, numeric), 1e-4);
    }
}

TEST(Sgns, StableLogSigmoid) {
    EXPECT_NEAR(log_sigmoid(0.0), -std::log(2.0), 1e-15);
    EXPECT_TRUE(std::isfinite(log_sigmoid(-800.0)));
    EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
    EXPECT_NEAR(sigmoid(40.0), 1.0, 1e-15);
}

TEST(Train, SerialModeIsBitReproducible) {
    auto g = WalkGraph::from_edges({{"a", "x:$p$", 1}, {"b", "x:$p$", 1}, {"b", "x:$q$", 2}, {"c", "x:$q$", 1}, {"c", "y:$r$", 1}});
    WalkConfig w;
    w.walk_length = 10;
    TrainConfig t;
    t.dim = 8;
    auto a = embed_graph(g, w, t);
    auto b = embed_graph(g, w, t);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), g.size());
    EXPECT_EQ(a.dim(), 8u);
    t.seed = 99;
    EXPECT_FALSE(a == embed_graph(g, w, t));
}

TEST(Train, ParallelModeProducesFiniteVectors) {
    auto g = WalkGraph::from_edges({{"a", "x:$p$", 1}, {"b", "x:$p$", 1}, {"b", "x:$q$", 2}, {"c", "x:$q$", 1}});
    TrainConfig t;
    t.dim = 8;
    t.threads = 4;
    auto e = embed_graph(g, WalkConfig{}, t, 4);
    for (std::size_t i = 0; i < e.size(); ++i)
        for (auto x : e.row(i)) EXPECT_TRUE(std::isfinite(x));
}

TEST(Train, Validation) {
    TrainConfig t;
    t.dim = 0;
    EXPECT_THROW(t.validate(), ValidationError);
    EXPECT_THROW(train_skipgram({}, {}, TrainConfig{}), Error);
}

TEST(Train, PlantedTranslationIsNearestNeighbor) {
    auto c = synth::toy();
    auto pool = build_concept_pool(c, 1);
    IndexConfig icfg;
    icfg.min_verses = 1;
    std::map<LanguageId, OccurrenceIndex> idx;
    for (const auto& l : c.targets()) idx.emplace(l, build_occurrence_index(c, l, icfg));
    auto recs = extract_patterns(pool, idx);
    auto plus = build_colexnetplus(recs, prune(build_colexnet(recs), {1}));
    auto g = WalkGraph::from_colexnetplus(plus);
    TrainConfig t;
    t.dim = 16;
    t.epochs = 10;
    auto e = embed_graph(g, WalkConfig{}, t);
    EXPECT_EQ(nearest_neighbors(e, "hand", 1, VocabFilter::lang(LanguageId("xx2"))).front().key, "xx2:$mano$");
}

TEST(Cosine, Basics) {
    auto t = table({"a", "b", "c", "z"}, {{1, 0}, {2, 0}, {0, 1}, {0, 0}});
    EXPECT_NEAR(cosine(t, "a", "b"), 1.0, 1e-12);
    EXPECT_NEAR(cosine(t, "a", "c"), 0.0, 1e-12);
    EXPECT_EQ(cosine(t, "a", "z"), 0.0);
    EXPECT_THROW(cosine(t, "a", "nope"), Error);
}

TEST(NearestNeighbors, FiltersTiesAndErrors) {
    auto t = table({"hand", "arm", "xx1:$ruka$", "xx2:$mano$", "xx2:$brazo$"},
                   {{1, 0}, {0.8f, 0.6f}, {1, 0.1f}, {1, 0}, {2, 0}});
    auto all = nearest_neighbors(t, "hand", 10);
    EXPECT_EQ(all.size(), 4u);
    EXPECT_EQ(all[0].key, "xx2:$brazo$");
    EXPECT_EQ(all[1].key, "xx2:$mano$");
    EXPECT_EQ(nearest_neighbors(t, "xx1:$ruka$", 5, VocabFilter::concepts()).front().key, "hand");
    EXPECT_EQ(nearest_neighbors(t, "hand", 5, VocabFilter::lang(LanguageId("xx1"))).size(), 1u);
    EXPECT_THROW(nearest_neighbors(t, "foot", 1), Error);
    EXPECT_THROW(nearest_neighbors(t, "hand", 1, VocabFilter::lang(LanguageId("xx9"))), Error);
}

TEST(EmbedVerse, MeanOfMatchedUnits) {
    std::map<LanguageId, RawVerses> raw;
    raw[LanguageId("eng")] = {{"v1", "hand arm"}, {"v2", "sky"}, {"v3", "arm hand hand"}};
    raw[LanguageId("xx1")] = {{"v1", "ruka"}, {"v2", "nebo"}, {"v3", "ruka"}};
    auto c = build_corpus(raw, LanguageId("eng"));
    auto t = table({"hand", "arm", "xx1:$ru", "xx1:ka$"}, {{1, 0}, {0, 1}, {2, 2}, {4, 0}});
    auto v = embed_verse(t, c, LanguageId("xx1"), std::string("v1"));
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(*v, (std::vector<double>{3, 1}));
    EXPECT_FALSE(embed_verse(t, c, LanguageId("xx1"), std::string("v2")).has_value());
    auto e1 = embed_verse(t, c, LanguageId("eng"), std::string("v1"));
    auto e3 = embed_verse(t, c, LanguageId("eng"), std::string("v3"));
    ASSERT_TRUE(e1 && e3);
    EXPECT_EQ(*e1, (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(*e1, *e3);
}

TEST(EmbeddingFile, RoundTrip) {
    auto t = table({"hand", "xx1:$ruka$"}, {{0.25f, -1.5f}, {0.125f, 3.0f}});
    std::stringstream ss;
    write_embeddings(ss, t);
    EXPECT_EQ(ss.str(), "2 2\nhand 0.250000 -1.500000\nxx1:$ruka$ 0.125000 3.000000\n");
    EXPECT_EQ(read_embeddings(ss), t);
    std::stringstream bad("2 2\nhand 1 2\n");
    EXPECT_THROW(read_embeddings(bad), ValidationError);
}
