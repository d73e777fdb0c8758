#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "colex/common.hpp"
#include "colex/verse_set.hpp"

using namespace colex;

TEST(LanguageId, AcceptsThreeCharCodes) {
    EXPECT_EQ(LanguageId("eng").str(), "eng");
    EXPECT_NO_THROW(LanguageId("xx1"));
    EXPECT_THROW(LanguageId("en"), ValidationError);
    EXPECT_THROW(LanguageId("Eng"), ValidationError);
    EXPECT_THROW(LanguageId("1ab"), ValidationError);
    EXPECT_LT(LanguageId("deu"), LanguageId("eng"));
}

TEST(Normalize, LowercasesAndStripsEdgePunctuation) {
    EXPECT_EQ(normalize_token("Hands,"), "hands");
    EXPECT_EQ(normalize_token("\"Ruka!\""), "ruka");
    EXPECT_EQ(normalize_token("don't"), "don't");
    EXPECT_EQ(normalize_token("ÄÖÜ"), "äöü");
    EXPECT_EQ(normalize_token("РУКА"), "рука");
    EXPECT_EQ(normalize_token("ΛΟΓΟΣ"), "λογοσ");
    EXPECT_EQ(normalize_token("..."), "");
    EXPECT_EQ(normalize_token("a$b"), "ab");
}

TEST(Utf8, CountsCodePoints) {
    EXPECT_EQ(utf8_count("$ndöhi$"), 7u);
    EXPECT_EQ(utf8_count("рука"), 4u);
    EXPECT_EQ(utf8_count(""), 0u);
    std::string s;
    utf8_append(s, U'ö');
    EXPECT_EQ(s, "ö");
    EXPECT_EQ(utf8_decode("ö"), U'ö');
}

TEST(Markers, WrapAndUnwrap) {
    EXPECT_EQ(mark_token("hand"), "$hand$");
    EXPECT_EQ(unmark_token("$hand$"), "hand");
}

TEST(Fixed6, SixDecimalsWithoutNegativeZero) {
    EXPECT_EQ(fixed6(2.88), "2.880000");
    EXPECT_EQ(fixed6(-1e-9), "0.000000");
    EXPECT_EQ(fixed6(-0.5), "-0.500000");
}

TEST(Random, SeededShuffleIsReproducible) {
    std::vector<int> a(50), b(50);
    for (int i = 0; i < 50; ++i) a[i] = b[i] = i;
    std::mt19937_64 r1(derive_seed(9, 1)), r2(derive_seed(9, 1));
    shuffle(a, r1);
    shuffle(b, r2);
    EXPECT_EQ(a, b);
    std::sort(a.begin(), a.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(a[i], i);
    EXPECT_NE(derive_seed(9, 1), derive_seed(9, 2));
    std::mt19937_64 r(1);
    for (int i = 0; i < 1000; ++i) {
        double u = uniform01(r);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(100, 4, [](std::size_t i) {
                     if (i == 37) throw Error("boom");
                 }),
                 Error);
}

TEST(VerseSet, SetAlgebra) {
    VerseSet a(130), b(130);
    for (std::size_t v : {0u, 5u, 64u, 129u}) a.set(v);
    for (std::size_t v : {5u, 64u, 100u}) b.set(v);
    EXPECT_EQ(a.count(), 4u);
    EXPECT_EQ(a.intersect_count(b), 2u);
    EXPECT_EQ((a & b).count(), 2u);
    EXPECT_EQ((a | b).count(), 5u);
    EXPECT_TRUE((a & b).subset_of(a));
    EXPECT_FALSE(a.subset_of(b));
    auto c = a;
    c.subtract(b);
    EXPECT_EQ(c.ordinals(), (std::vector<std::size_t>{0, 129}));
    EXPECT_THROW(a.intersect_count(VerseSet(10)), Error);
}
