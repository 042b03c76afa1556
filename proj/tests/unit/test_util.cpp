#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>

#include "debate/util.hpp"

using namespace debate;

TEST(Hashing, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(short_hash("abc"), "ba7816bf8f01cfea");
}

TEST(Hashing, MixSeedIsOrderSensitive) {
    EXPECT_EQ(mix_seed({1, 2, 3}), mix_seed({1, 2, 3}));
    EXPECT_NE(mix_seed({1, 2, 3}), mix_seed({3, 2, 1}));
    EXPECT_NE(hash64("arith-1"), hash64("arith-2"));
}

TEST(SplitMix, ReferenceSequence) {
    // Published splitmix64 outputs for seed 0.
    SplitMix64 r(0);
    EXPECT_EQ(r.next(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(r.next(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(r.next(), 0x06c45d188009454fULL);
}

TEST(SplitMix, UniformIntStaysInRange) {
    SplitMix64 r(42);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 10000; ++i) {
        auto v = r.uniform_int(-3, 3);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 3);
        seen.insert(v);
        double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    EXPECT_EQ(seen.size(), 7u);
}

TEST(Strings, Basics) {
    EXPECT_EQ(trim("  a b \n"), "a b");
    EXPECT_EQ(to_lower("YeS"), "yes");
    EXPECT_EQ(split_lines("a\r\nb\nc").size(), 3u);
    EXPECT_TRUE(starts_with_ci("Yes, it is", "yes"));
    EXPECT_FALSE(starts_with_ci("Ye", "yes"));
    EXPECT_EQ(replace_all("aXbXc", "X", "--"), "a--b--c");
    EXPECT_EQ(count_words("  one two\tthree\n"), 3);
}

TEST(Template, PositionalAndNamed) {
    EXPECT_EQ(fill_template("What is {}+{}?", {"1", "2"}), "What is 1+2?");
    EXPECT_EQ(fill_template("Solve <Problem> now", {}, {{"Problem", "x"}}), "Solve x now");
    EXPECT_EQ(fill_template("keep {{answer}} and <Other>", {}, {}), "keep {{answer}} and <Other>");
}

TEST(Numbers, CanonicalFormatting) {
    EXPECT_EQ(format_number(42.0), "42");
    EXPECT_EQ(format_number(-5.0), "-5");
    EXPECT_EQ(format_number(3.50), "3.5");
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(1e6), "1000000");
}

TEST(Clock, ManualClockAdvancesOnSleep) {
    ManualClock c;
    auto t0 = c.now();
    c.sleep_for(std::chrono::seconds(3));
    EXPECT_EQ(c.now() - t0, std::chrono::seconds(3));
    c.advance(std::chrono::milliseconds(5));
    EXPECT_EQ(c.now() - t0, std::chrono::milliseconds(3005));
    EXPECT_EQ(c.timestamp(), "1970-01-01T00:00:00Z");
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(200);
    parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsLowestIndexFailure) {
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 30) throw std::runtime_error("fail " + std::to_string(i));
        });
        FAIL() << "expected exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "fail 7");
    }
}
