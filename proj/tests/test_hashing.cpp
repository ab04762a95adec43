#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "reference.hpp"

using namespace rkit;

TEST(Seed, HexRoundTrip) {
    std::string hex = "0123456789abcdef" "fedcba9876543210" "0000000000000001" "ffffffffffffffff";
    Seed s = Seed::from_hex(hex);
    EXPECT_EQ(s.words[0], 0x0123456789abcdefULL);
    EXPECT_EQ(s.words[3], ~u64{0});
    EXPECT_EQ(s.to_hex(), hex);
    EXPECT_EQ(Seed::from_hex("0123456789ABCDEFFEDCBA98765432100000000000000001FFFFFFFFFFFFFFFF"), s);
}

TEST(Seed, RejectsMalformedHex) {
    EXPECT_THROW(Seed::from_hex("00"), UsageError);
    EXPECT_THROW(Seed::from_hex(std::string(63, '0')), UsageError);
    EXPECT_THROW(Seed::from_hex(std::string(63, '0') + "g"), UsageError);
}

TEST(Seed, DerivedChildrenAreDistinctAndStable) {
    Seed root = Seed::from_u64(7);
    std::set<std::string> seen;
    for (u64 tag = 0; tag < 200; ++tag) {
        EXPECT_TRUE(seen.insert(root.derive(Domain::attempt, tag).to_hex()).second);
        EXPECT_TRUE(seen.insert(root.derive(Domain::group, tag).to_hex()).second);
    }
    EXPECT_EQ(root.derive(Domain::attempt, 3), Seed::from_u64(7).derive(Domain::attempt, 3));
}

TEST(SeedStream, BelowIsUniform) {
    SeedStream s(Seed::from_u64(1), Domain::sample, 0);
    const u64 buckets = 10;
    const u64 draws = 100000;
    std::vector<u64> count(buckets, 0);
    for (u64 i = 0; i < draws; ++i) {
        u64 x = s.below(buckets);
        ASSERT_LT(x, buckets);
        ++count[x];
    }
    double chi = 0;
    double expected = static_cast<double>(draws) / buckets;
    for (u64 c : count) chi += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi, 27.9);  // chi-square, 9 degrees of freedom, p = 0.001
}

TEST(SeedStream, BelowHandlesExtremeBounds) {
    SeedStream s(Seed::from_u64(2), Domain::sample, 0);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(s.below(1), 0u);
        EXPECT_LT(s.below(~u64{0}), ~u64{0});
    }
}

TEST(HashToRange, StaysInRangeAndSpreads) {
    Seed seed = Seed::from_u64(3);
    std::vector<u64> count(16, 0);
    for (u64 k = 0; k < 16000; ++k) {
        u64 x = hash_to_range(seed, k, 16);
        ASSERT_LT(x, 16u);
        ++count[x];
    }
    for (u64 c : count) EXPECT_NEAR(static_cast<double>(c), 1000.0, 150.0);
    EXPECT_THROW(hash_to_range(seed, 1, 0), UsageError);
}

TEST(KWisePoly, EvaluatesThePolynomial) {
    auto h = KWisePoly::sample(Seed::from_u64(4), 6);
    EXPECT_EQ(h.independence(), 6u);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        u64 x = rng();
        ref::BigInt acc = 0, power = 1;
        const u64 p = h.modulus();
        for (u64 c : h.coefficients()) {
            acc += power * c;
            power = power * (x % p) % p;
        }
        ASSERT_EQ(h(x), static_cast<u64>(acc % p));
        ASSERT_LT(h.to_range(x, 37), 37u);
    }
}

TEST(KWisePoly, PairwiseCollisionRate) {
    // Over random members of the family, Pr[h(x) = h(y)] in a range of r cells is about 1/r.
    const u64 r = 64;
    u64 collisions = 0;
    const u64 trials = 20000;
    for (u64 t = 0; t < trials; ++t) {
        auto h = KWisePoly::sample(Seed::from_u64(t), 2);
        collisions += h.to_range(17, r) == h.to_range(99, r);
    }
    double rate = static_cast<double>(collisions) / trials;
    EXPECT_NEAR(rate, 1.0 / r, 5 * std::sqrt(1.0 / r / trials));
}

TEST(KWisePoly, Validation) {
    EXPECT_THROW(KWisePoly::sample(Seed{}, 0), UsageError);
    EXPECT_THROW(KWisePoly(15, {1}), UsageError);
    EXPECT_THROW(KWisePoly(kKWiseModulus, {}), UsageError);
}

TEST(Permutation, IsBijectionWithInverse) {
    for (u64 m : {1u, 2u, 7u, 256u, 1000u}) {
        auto perm = make_permutation(Seed::from_u64(m), m);
        std::vector<bool> hit(m, false);
        for (u32 j = 0; j < m; ++j) {
            u32 f = perm.forward(j);
            ASSERT_LT(f, m);
            ASSERT_FALSE(hit[f]);
            hit[f] = true;
            ASSERT_EQ(perm.inverse(f), j);
        }
    }
    EXPECT_THROW(make_permutation(Seed{}, 0), UsageError);
    EXPECT_THROW(SeededPermutation(std::vector<u32>{0, 0}), IntegrityError);
}

TEST(Permutation, PositionsAreUniform) {
    const u32 m = 8;
    std::vector<u64> where(m, 0);
    const u64 trials = 8000;
    for (u64 t = 0; t < trials; ++t) ++where[make_permutation(Seed::from_u64(t), m).forward(0)];
    for (u64 c : where) EXPECT_NEAR(static_cast<double>(c), 1000.0, 150.0);
}
