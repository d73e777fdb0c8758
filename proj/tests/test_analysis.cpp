#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "colex/analysis.hpp"
#include "support/oracles.hpp"

using namespace colex;

namespace {

const char* kLangs[] = {"aaa", "bbb", "ccc", "ddd", "eee", "fff", "ggg", "hhh"};

void add(ColexNet& net, const std::string& a, const std::string& b, std::size_t w = 1) {
    for (std::size_t i = 0; i < w; ++i) net.attest(ConceptPair(a, b), LanguageId(kLangs[i]));
}

ColexNet two_cliques() {
    ColexNet net;
    for (int side = 0; side < 2; ++side)
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) add(net, std::string(1, char('a' + side * 5 + i)), std::string(1, char('a' + side * 5 + j)));
    add(net, "e", "f");
    return net;
}

ColexNet random_net(std::mt19937_64& rng, std::size_t n, double p, bool loops = false) {
    ColexNet net;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + (loops ? 0 : 1); j < n; ++j)
            if (uniform01(rng) < p) add(net, "n" + std::to_string(i), "n" + std::to_string(j), 1 + uniform_index(rng, 4));
    return net;
}

}  // namespace

TEST(Stats, TriangleAndDisjointEdges) {
    ColexNet tri;
    add(tri, "a", "b");
    add(tri, "b", "c");
    add(tri, "a", "c");
    auto s = graph_stats(tri);
    EXPECT_EQ(s.nodes, 3u);
    EXPECT_EQ(s.edges, 3u);
    EXPECT_DOUBLE_EQ(s.avg_degree, 2.0);
    EXPECT_DOUBLE_EQ(s.edges_per_node, 1.0);
    EXPECT_EQ(s.components, 1u);
    ColexNet two;
    add(two, "a", "b");
    add(two, "c", "d");
    EXPECT_EQ(graph_stats(two).components, 2u);
    auto empty = graph_stats(ColexNet{});
    EXPECT_EQ(empty.nodes, 0u);
    EXPECT_EQ(empty.avg_degree, 0.0);
}

TEST(Betweenness, PathStarComplete) {
    ColexNet path;
    add(path, "a", "b");
    add(path, "b", "c");
    auto bp = betweenness(path);
    EXPECT_DOUBLE_EQ(bp["b"], 1.0);
    EXPECT_DOUBLE_EQ(bp["a"], 0.0);
    EXPECT_DOUBLE_EQ(bp["c"], 0.0);
    for (std::size_t n : {3u, 5u, 8u}) {
        ColexNet star;
        for (std::size_t i = 1; i < n; ++i) add(star, "hub", "leaf" + std::to_string(i));
        // n nodes in total, so the hub has n-1 leaves
        EXPECT_DOUBLE_EQ(betweenness(star)["hub"], double((n - 1) * (n - 2)) / 2.0);
    }
    ColexNet k5;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) add(k5, std::to_string(i), std::to_string(j));
    for (const auto& [_, b] : betweenness(k5)) EXPECT_DOUBLE_EQ(b, 0.0);
}

TEST(Betweenness, MatchesAllPairsOracle) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        auto net = random_net(rng, 10 + trial % 30, 0.12 + 0.01 * (trial % 5), trial % 3 == 0);
        auto got = betweenness(net);
        auto want = oracle::betweenness(net);
        ASSERT_EQ(got.size(), want.size());
        for (const auto& [n, b] : want) EXPECT_NEAR(got.at(n), b, 1e-9) << n;
    }
}

TEST(Degrees, SelfLoopCountsTowardDegree) {
    ColexNet net;
    add(net, "a", "a");
    add(net, "a", "b");
    auto d = degrees(net);
    EXPECT_GE(d["a"], 2u);
    EXPECT_EQ(d["b"], 1u);
}

TEST(Louvain, RecoversTwoCliques) {
    auto net = two_cliques();
    auto p = louvain(net, {1.0, 7});
    EXPECT_EQ(p.community_count(), 2u);
    for (char c = 'a'; c <= 'e'; ++c) EXPECT_EQ(p.assignment.at(std::string(1, c)), p.assignment.at("a"));
    for (char c = 'f'; c <= 'j'; ++c) EXPECT_EQ(p.assignment.at(std::string(1, c)), p.assignment.at("f"));
    // exhaustive check over every split into at most two parts
    std::vector<std::string> nodes(net.nodes().begin(), net.nodes().end());
    double best = -1;
    std::map<std::string, std::size_t> best_assign;
    for (std::size_t mask = 0; mask < (1u << (nodes.size() - 1)); ++mask) {
        std::map<std::string, std::size_t> a;
        for (std::size_t i = 0; i < nodes.size(); ++i) a[nodes[i]] = i == 0 ? 0 : (mask >> (i - 1)) & 1;
        double q = oracle::modularity(net, a, 1.0);
        if (q > best) {
            best = q;
            best_assign = a;
        }
    }
    EXPECT_NEAR(p.modularity, best, 1e-12);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(p.assignment, best_assign), 1.0);
}

TEST(Louvain, SingleNode) {
    ColexNet net;
    add(net, "a", "a");
    auto p = louvain(net, {1.0, 1});
    EXPECT_EQ(p.community_count(), 1u);
    EXPECT_NEAR(p.modularity, 0.0, 1e-12);
    auto low = louvain(net);
    EXPECT_NEAR(low.modularity, oracle::modularity(net, low.assignment, 0.1), 1e-12);
}

TEST(Louvain, ModularityNonDecreasingAndMatchesDefinition) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto net = random_net(rng, 15 + trial, 0.15, trial % 2 == 0);
        if (net.edge_count() == 0) continue;
        for (double gamma : {0.1, 1.0}) {
            auto p = louvain(net, {gamma, std::uint64_t(trial)});
            ASSERT_FALSE(p.pass_modularity.empty());
            for (std::size_t i = 1; i < p.pass_modularity.size(); ++i)
                EXPECT_GE(p.pass_modularity[i], p.pass_modularity[i - 1] - 1e-12);
            EXPECT_NEAR(p.modularity, oracle::modularity(net, p.assignment, gamma), 1e-9);
            EXPECT_NEAR(modularity(net, p.assignment, gamma), p.modularity, 1e-9);
            EXPECT_EQ(p.assignment.size(), net.node_count());
        }
    }
}

TEST(Louvain, SeededRunsAreReproducible) {
    std::mt19937_64 rng(5);
    auto net = random_net(rng, 40, 0.1);
    auto a = louvain(net, {0.5, 3}), b = louvain(net, {0.5, 3});
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.pass_modularity, b.pass_modularity);
}

TEST(Subnetwork, GroupFiltering) {
    ColexNet net;
    net.attest({"hand", "arm"}, LanguageId("xx1"));
    net.attest({"wind", "wind"}, LanguageId("xx1"));
    net.attest({"wind", "wind"}, LanguageId("xx2"));
    net.attest({"blow", "wind"}, LanguageId("xx2"));
    net.attest({"blow", "wind"}, LanguageId("xx3"));
    Grouping g{{LanguageId("xx1"), "a"}, {LanguageId("xx2"), "b"}, {LanguageId("xx3"), "b"}};
    auto b = subnetwork(net, g, "b");
    EXPECT_FALSE(b.has_edge({"hand", "arm"}));
    EXPECT_EQ(b.weight({"blow", "wind"}), 2u);
    EXPECT_EQ(b.weight({"wind", "wind"}), 1u);
    Grouping all{{LanguageId("xx1"), "all"}, {LanguageId("xx2"), "all"}, {LanguageId("xx3"), "all"}};
    EXPECT_EQ(subnetwork(net, all, "all"), net);
    EXPECT_THROW(subnetwork(net, g, "zzz"), ValidationError);
    std::stringstream ss("xx1\tslavic\nxx2\tromance\n");
    EXPECT_EQ(read_grouping(ss).size(), 2u);
}

TEST(Ari, Examples) {
    auto p = oracle::as_assignment({0, 0, 1, 1});
    EXPECT_DOUBLE_EQ(adjusted_rand_index(p, p), 1.0);
    EXPECT_EQ(adjusted_rand_index(p, oracle::as_assignment({0, 1, 0, 1})), -0.5);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(p, oracle::as_assignment({7, 7, 3, 3})), 1.0);
    EXPECT_THROW(adjusted_rand_index(p, oracle::as_assignment({0, 0, 1})), Error);
}

TEST(Ari, MatchesPairCountingOnAllPartitionsOfSix) {
    auto parts = oracle::set_partitions(6);
    ASSERT_EQ(parts.size(), 203u);
    for (const auto& x : parts)
        for (const auto& y : parts) {
            double got = adjusted_rand_index(oracle::as_assignment(x), oracle::as_assignment(y));
            ASSERT_NEAR(got, oracle::ari_pairs(x, y), 1e-12);
            ASSERT_NEAR(got, adjusted_rand_index(oracle::as_assignment(y), oracle::as_assignment(x)), 1e-12);
        }
}

TEST(Ari, OnCommonNodes) {
    Partition a, b;
    a.assignment = {{"a", 0}, {"b", 0}, {"c", 1}};
    b.assignment = {{"b", 5}, {"c", 6}, {"d", 6}};
    EXPECT_DOUBLE_EQ(*adjusted_rand_index_on_common(a, b), 1.0);
    Partition c;
    c.assignment = {{"z", 0}};
    EXPECT_FALSE(adjusted_rand_index_on_common(a, c).has_value());
}

TEST(AriMatrix, SymmetricWithUnitDiagonal) {
    std::mt19937_64 rng(3);
    ColexNet net;
    const char* langs[] = {"xx1", "xx2", "xx3", "xx4"};
    for (int i = 0; i < 30; ++i)
        for (int j = i + 1; j < 30; ++j)
            for (auto l : langs)
                if (uniform01(rng) < 0.08) net.attest({"n" + std::to_string(i), "n" + std::to_string(j)}, LanguageId(l));
    Grouping g{{LanguageId("xx1"), "a"}, {LanguageId("xx2"), "a"}, {LanguageId("xx3"), "b"}, {LanguageId("xx4"), "c"}};
    auto m = ari_matrix(net, g, {0.1, 114514}, 5, 3);
    ASSERT_EQ(m.labels, (std::vector<std::string>{"a", "b", "c"}));
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(m.values[i][i], 1.0);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(m.values[i][j], m.values[j][i]);
    }
    EXPECT_EQ(m.values, ari_matrix(net, g, {0.1, 114514}, 5, 1).values);
}
