#include <random>

#include <gtest/gtest.h>

#include "reference.hpp"

using namespace rkit;

namespace {

// Answer from the uncompressed solution, evaluated bit by bit over the expanded row.
u64 dense_answer(const RetrievalStructure& s, u64 key) {
    const auto& x = s.oracle_solution();
    const auto& p = s.params();
    auto row = ref::expand({s.row_for(key)}, p.m, p.ell)[0];
    u64 out = 0;
    for (unsigned plane = 0; plane < p.v; ++plane) out |= u64{ref::dot_gf2(row, x, plane)} << plane;
    return out;
}

}  // namespace

TEST(RetrievalParams, ColumnsAndSlack) {
    auto p = RetrievalParams::from_b(10000, 8, 8);
    // m = n + ceil(2 n / 2^(8/4)) + 64 ceil(log2 n), rounded up to a multiple of ell.
    EXPECT_EQ(p.m, 10000u + 5000 + 64 * 14);
    EXPECT_EQ(p.m % p.ell, 0u);
    EXPECT_DOUBLE_EQ(p.t(), 1.0);
    EXPECT_EQ(RetrievalParams::from_t(1000, 8, 1.0).ell, 8u);
    EXPECT_EQ(RetrievalParams::from_t(1000, 10, 2.0).ell, 12u);
    auto tiny = RetrievalParams::from_b(1, 8, 16);
    EXPECT_GE(tiny.m, 32u);
    EXPECT_THROW(RetrievalParams::from_b(100, 0, 8), ConfigError);
    EXPECT_THROW(RetrievalParams::from_b(100, 65, 8), ConfigError);
    EXPECT_THROW(RetrievalParams::from_b(100, 8, 0), ConfigError);
    EXPECT_THROW(RetrievalParams::from_b(100, 8, 65), ConfigError);
    EXPECT_THROW(RetrievalParams::from_b(0, 8, 8), ConfigError);
    EXPECT_THROW(RetrievalParams::from_t(100, 8, 0), ConfigError);
    SlackConstants bad{1, 0, 1};
    EXPECT_THROW(RetrievalParams::from_b(100, 8, 8, bad), ConfigError);
}

TEST(Retrieval, RoundTripAcrossShapes) {
    std::mt19937_64 rng(30);
    struct Case {
        std::size_t n;
        u32 v, b;
    };
    for (Case c : {Case{1, 8, 8}, Case{2, 1, 1}, Case{500, 1, 4}, Case{3000, 8, 8}, Case{2000, 13, 12},
                   Case{2000, 64, 16}, Case{1500, 64, 64}, Case{4000, 32, 2}}) {
        auto pairs = ref::random_pairs(rng, c.n, c.v);
        auto params = RetrievalParams::from_b(c.n, c.v, c.b);
        auto s = build_retrieval(pairs, params, Seed::from_u64(c.n + c.b));
        for (const auto& kv : pairs) ASSERT_EQ(query(s, kv.key), kv.value) << c.n << "/" << c.v << "/" << c.b;
        EXPECT_EQ(s.free_bits().size(), params.m);
        EXPECT_EQ(s.free_bits().ones(), params.m - params.n);
    }
}

TEST(Retrieval, QueryCostIsBoundedByTwoBlocks) {
    std::mt19937_64 rng(31);
    auto pairs = ref::random_pairs(rng, 4000, 10);
    for (u32 b : {4u, 8u, 16u}) {
        auto s = build_retrieval(pairs, RetrievalParams::from_b(pairs.size(), 10, b), Seed::from_u64(b));
        const unsigned per_block = (b * 10 + 63) / 64 + 1;
        for (const auto& kv : pairs) {
            QueryStats st;
            s.query(kv.key, &st);
            ASSERT_LE(st.payload_words, 2 * per_block);
            ASSERT_LE(st.dict_steps, 16u);
        }
    }
}

TEST(Retrieval, OracleEquivalence) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 25; ++trial) {
        std::size_t n = 1 + rng() % 128;
        u32 v = 1 + static_cast<u32>(rng() % 20);
        u32 b = 1 + static_cast<u32>(rng() % 16);
        auto pairs = ref::random_pairs(rng, n, v);
        auto s = build_retrieval(pairs, RetrievalParams::from_b(n, v, b), Seed::from_u64(trial), {.retain_oracle = true});
        for (const auto& kv : pairs) {
            ASSERT_EQ(s.query(kv.key), dense_answer(s, kv.key));
            ASSERT_EQ(s.query(kv.key), recompute_query(s, kv.key));
        }
        for (int i = 0; i < 50; ++i) {
            u64 other = rng() % kMaxUniverse;
            ASSERT_EQ(s.query(other), dense_answer(s, other));
        }
    }
}

TEST(Retrieval, OracleUnavailableByDefault) {
    std::mt19937_64 rng(33);
    auto pairs = ref::random_pairs(rng, 10, 8);
    auto s = build_retrieval(pairs, RetrievalParams::from_b(10, 8, 8), Seed{});
    EXPECT_FALSE(s.has_oracle());
    EXPECT_THROW(s.oracle_solution(), UnavailableError);
}

TEST(Retrieval, SerializationRoundTripAndLedger) {
    std::mt19937_64 rng(34);
    auto pairs = ref::random_pairs(rng, 5000, 9);
    auto s = build_retrieval(pairs, RetrievalParams::from_b(5000, 9, 8), Seed::from_u64(9));
    auto bytes = s.to_bytes();
    auto t = RetrievalStructure::from_bytes(bytes);
    EXPECT_EQ(t.to_bytes(), bytes);
    for (const auto& kv : pairs) ASSERT_EQ(t.query(kv.key), kv.value);
    auto rep = measure_space(s);
    EXPECT_EQ(rep.total_bits, bytes.size() * 8);
    EXPECT_EQ(rep.payload_bits + rep.rank_bits + rep.dict_bits + rep.seed_bits + rep.overhead_bits, rep.total_bits);
    EXPECT_EQ(rep.payload_bits, 5000u * 9);
    EXPECT_DOUBLE_EQ(rep.info_bits, 5000.0 * 9);
}

TEST(Retrieval, DeterministicForOneSeed) {
    std::mt19937_64 rng(35);
    auto pairs = ref::random_pairs(rng, 2000, 8);
    auto params = RetrievalParams::from_b(2000, 8, 8);
    EXPECT_EQ(build_retrieval(pairs, params, Seed::from_u64(1)).to_bytes(),
              build_retrieval(pairs, params, Seed::from_u64(1)).to_bytes());
    EXPECT_NE(build_retrieval(pairs, params, Seed::from_u64(1)).to_bytes(),
              build_retrieval(pairs, params, Seed::from_u64(2)).to_bytes());
}

TEST(Retrieval, CorruptedBodiesAreRejected) {
    std::mt19937_64 rng(36);
    auto pairs = ref::random_pairs(rng, 300, 8);
    auto bytes = build_retrieval(pairs, RetrievalParams::from_b(300, 8, 8), Seed{}).to_bytes();
    auto truncated = Bytes(bytes.begin(), bytes.end() - 9);
    EXPECT_THROW(RetrievalStructure::from_bytes(truncated), IntegrityError);
    auto flipped = bytes;
    flipped[kHeaderBytes + 3] ^= 1;
    EXPECT_THROW(RetrievalStructure::from_bytes(flipped), IntegrityError);
    auto wrong_kind = frame_container(StructureKind::filter, 0, open_container(bytes).body);
    EXPECT_THROW(RetrievalStructure::from_bytes(wrong_kind), IntegrityError);
}

TEST(Retrieval, InputValidation) {
    auto params = RetrievalParams::from_b(2, 4, 8);
    std::vector<KeyValue> dup{{5, 1}, {5, 2}};
    EXPECT_THROW(build_retrieval(dup, params, Seed{}), UsageError);
    std::vector<KeyValue> wide{{5, 16}, {6, 0}};
    EXPECT_THROW(build_retrieval(wide, params, Seed{}), UsageError);
    std::vector<KeyValue> far{{kMaxUniverse, 1}, {6, 0}};
    EXPECT_THROW(build_retrieval(far, params, Seed{}), UsageError);
    std::vector<KeyValue> one{{5, 1}};
    EXPECT_THROW(build_retrieval(one, params, Seed{}), UsageError);
    auto narrow = params;
    narrow.universe = 6;
    std::vector<KeyValue> outside{{5, 1}, {6, 0}};
    EXPECT_THROW(build_retrieval(outside, narrow, Seed{}), UsageError);
}

TEST(Retrieval, BuildFailureReportsAttempts) {
    std::mt19937_64 rng(37);
    auto pairs = ref::random_pairs(rng, 2000, 8);
    auto params = RetrievalParams::from_b(2000, 8, 4, SlackConstants{0, 4, 0});
    params.max_attempts = 3;
    try {
        build_retrieval(pairs, params, Seed{});
        FAIL() << "expected a build failure with no slack columns";
    } catch (const BuildFailure& e) {
        EXPECT_EQ(e.attempts(), 3u);
    }
}

TEST(Retrieval, DwFullRankRateAtDefaults) {
    auto est = fullrank_rate(RetrievalParams::from_b(2048, 8, 8), 40, Seed::from_u64(5));
    EXPECT_GE(est.rate, 0.5);
}
