#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "reference.hpp"

using namespace rkit;

namespace {

FilterStructure make_filter(std::mt19937_64& rng, std::size_t n, u32 v, std::vector<u64>& keys) {
    keys = ref::keys_of(ref::random_pairs(rng, n, 1));
    return build_filter(keys, RetrievalParams::from_b(n, v, 8), Seed::from_u64(n * 131 + v));
}

}  // namespace

TEST(Filter, NoFalseNegatives) {
    std::mt19937_64 rng(40);
    for (u32 v : {1u, 5u, 16u, 64u}) {
        std::vector<u64> keys;
        auto f = make_filter(rng, 3000, v, keys);
        for (u64 k : keys) ASSERT_TRUE(query_filter(f, k)) << v;
    }
}

TEST(Filter, FalsePositiveRateNearEpsilon) {
    std::mt19937_64 rng(41);
    for (u32 v : {4u, 7u}) {
        std::vector<u64> keys;
        auto f = make_filter(rng, 5000, v, keys);
        std::sort(keys.begin(), keys.end());
        const u64 trials = 200000;
        u64 hits = 0;
        for (u64 i = 0; i < trials;) {
            u64 x = rng() % kMaxUniverse;
            if (std::binary_search(keys.begin(), keys.end(), x)) continue;
            hits += f.contains(x);
            ++i;
        }
        double eps = std::ldexp(1.0, -static_cast<int>(v));
        EXPECT_DOUBLE_EQ(f.epsilon(), eps);
        double sigma = std::sqrt(eps * (1 - eps) / trials);
        EXPECT_NEAR(static_cast<double>(hits) / trials, eps, 5 * sigma) << v;
    }
}

TEST(Filter, FingerprintRange) {
    Seed s = Seed::from_u64(1);
    for (u64 k = 0; k < 1000; ++k) {
        EXPECT_LT(FilterStructure::fingerprint(s, 3, k), 8u);
        EXPECT_LT(FilterStructure::fingerprint(s, 17, k), u64{1} << 17);
    }
}

TEST(Filter, SerializationRoundTripAndLedger) {
    std::mt19937_64 rng(42);
    std::vector<u64> keys;
    auto f = make_filter(rng, 4000, 10, keys);
    auto bytes = f.to_bytes();
    EXPECT_EQ(open_container(bytes).kind, StructureKind::filter);
    auto g = FilterStructure::from_bytes(bytes);
    EXPECT_EQ(g.to_bytes(), bytes);
    for (u64 k : keys) ASSERT_TRUE(g.contains(k));
    auto rep = measure_space(f);
    EXPECT_EQ(rep.total_bits, bytes.size() * 8);
    EXPECT_EQ(rep.payload_bits + rep.rank_bits + rep.dict_bits + rep.seed_bits + rep.overhead_bits, rep.total_bits);
    EXPECT_DOUBLE_EQ(rep.info_bits, 4000.0 * 10);
    EXPECT_THROW(RetrievalStructure::from_bytes(bytes), IntegrityError);
}

TEST(Filter, DuplicateKeysRejected) {
    std::vector<u64> keys{1, 2, 2};
    EXPECT_THROW(build_filter(keys, RetrievalParams::from_b(3, 8, 8), Seed{}), UsageError);
}
