#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "rkit/augmented.hpp"
#include "rkit/filter.hpp"
#include "rkit/oracle.hpp"
#include "rkit/retrieval.hpp"
#include "rkit/split.hpp"

namespace rkit {

struct CheckRecord {
    std::string name;
    std::string suite;
    double statistic = 0;
    double bound = 0;
    std::string relation;  // how statistic compares to bound when passing: "==", "<=", ">="
    bool passed = false;
    std::string detail;
};

struct ValidationOptions {
    Seed seed;
    bool inject_fault = false;  // flip one payload bit in every retrieval structure before checking
};

struct ValidationCheck {
    std::string name;
    std::string suite;
    std::function<CheckRecord(const ValidationOptions&)> run;
};

namespace detail {

inline CheckRecord record(std::string name, double statistic, double bound, std::string relation, std::string detail = {}) {
    CheckRecord r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.bound = bound;
    r.relation = relation;
    if (relation == "==") r.passed = statistic == bound;
    else if (relation == "<=") r.passed = statistic <= bound;
    else r.passed = statistic >= bound;
    r.detail = std::move(detail);
    return r;
}

inline std::vector<KeyValue> random_pairs(const Seed& seed, u64 n, u32 v) {
    SeedStream s(seed, Domain::sample, n);
    std::vector<u64> keys;
    keys.reserve(n);
    std::unordered_set<u64> seen;
    while (keys.size() < n) {
        u64 k = s.below(kMaxUniverse);
        if (seen.insert(k).second) keys.push_back(k);
    }
    std::vector<KeyValue> pairs;
    pairs.reserve(n);
    for (u64 k : keys) pairs.push_back({k, s.next() & low_mask(v)});
    return pairs;
}

inline void inject(RetrievalStructure& s, const ValidationOptions& opt) {
    if (opt.inject_fault && !s.mutable_payload().empty()) s.mutable_payload()[0] ^= 1;
}

inline CheckRecord check_retrieval_round_trip(const ValidationOptions& opt) {
    u64 exact = 0, total = 0;
    for (u64 i = 0; i < 3; ++i) {
        Seed seed = opt.seed.derive(Domain::sample, 100 + i);
        auto pairs = random_pairs(seed, 10000, 8);
        auto s = build_retrieval(pairs, RetrievalParams::from_b(pairs.size(), 8, 8), seed);
        inject(s, opt);
        for (const auto& kv : pairs) exact += s.query(kv.key) == kv.value;
        total += pairs.size();
    }
    return record("retrieval_round_trip", static_cast<double>(exact) / static_cast<double>(total), 1.0, "==",
                  "n=10000 v=8 b=8, 3 seeds");
}

inline CheckRecord check_retrieval_oracle(const ValidationOptions& opt) {
    u64 mismatches = 0;
    for (u64 i = 0; i < 20; ++i) {
        Seed seed = opt.seed.derive(Domain::sample, 200 + i);
        u64 n = 16 + i * 5;
        auto pairs = random_pairs(seed, n, 8);
        auto s = build_retrieval(pairs, RetrievalParams::from_b(n, 8, 4 + static_cast<u32>(i % 3) * 4), seed, {true});
        inject(s, opt);
        for (const auto& kv : pairs) mismatches += s.query(kv.key) != recompute_query(s, kv.key);
        SeedStream absent(seed, Domain::sample, 1);
        for (int k = 0; k < 100; ++k) {
            u64 key = absent.below(kMaxUniverse);
            mismatches += s.query(key) != recompute_query(s, key);
        }
    }
    return record("retrieval_oracle_equivalence", static_cast<double>(mismatches), 0, "==", "20 instances, n <= 111");
}

inline CheckRecord check_augmented_oracle(const ValidationOptions& opt) {
    u64 mismatches = 0;
    for (u64 i = 0; i < 5; ++i) {
        Seed seed = opt.seed.derive(Domain::sample, 300 + i);
        AugmentedConfig cfg;
        cfg.n = 64;
        cfg.c = 4;
        cfg.value_range = 64 * 64 * 64;
        auto pairs = random_pairs(seed, 48, 18);
        std::vector<u64> aug(16);
        SeedStream s(seed, Domain::entry_values, 0);
        for (auto& a : aug) a = s.below(cfg.value_range);
        auto st = build_augmented(pairs, aug, cfg, seed);
        for (const auto& kv : pairs) mismatches += st.query_key(kv.key) != recompute_query_key(st, kv.key);
        for (u64 j = 0; j < 16; ++j) mismatches += st.query_aug(j) != recompute_query_aug(st, j);
    }
    return record("augmented_oracle_equivalence", static_cast<double>(mismatches), 0, "==", "5 instances, n=64 c=4");
}

inline CheckRecord check_augmented_round_trip(const ValidationOptions& opt) {
    AugmentedConfig cfg;
    cfg.n = 256;
    cfg.c = 4;
    cfg.value_range = u64{256} * 256 * 256;
    auto pairs = random_pairs(opt.seed.derive(Domain::sample, 400), 192, 24);
    std::vector<u64> aug(64);
    SeedStream s(opt.seed, Domain::entry_values, 400);
    for (auto& a : aug) a = s.below(cfg.value_range);
    auto st = build_augmented(pairs, aug, cfg, opt.seed.derive(Domain::sample, 401));
    u64 exact = 0;
    for (const auto& kv : pairs) exact += st.query_key(kv.key) == kv.value;
    for (u64 j = 0; j < 64; ++j) exact += st.query_aug(j) == aug[j];
    return record("augmented_round_trip", static_cast<double>(exact) / 256.0, 1.0, "==", "n=256 c=4 V=n^3");
}

inline CheckRecord check_dw_rate(const ValidationOptions& opt) {
    auto params = RetrievalParams::from_b(4096, 8, 8);
    auto est = fullrank_rate(params, 50, opt.seed.derive(Domain::sample, 500));
    return record("dw_fullrank_rate", est.rate, 0.25, ">=",
                  "n=4096 ell=8, 50 trials, stderr " + std::to_string(est.std_error));
}

inline CheckRecord check_augmented_rate(const ValidationOptions& opt) {
    AugmentedRateConfig cfg{2, 2, 3, 4, next_prime(u64{1} << 20)};
    auto est = fullrank_rate(cfg, 100, opt.seed.derive(Domain::sample, 600));
    return record("augmented_fullrank_rate", est.rate, 0.99, ">=", "n=2 c=2 gamma=3 alpha=4 V=2^20, 100 trials");
}

inline CheckRecord check_hall(const ValidationOptions& opt) {
    u64 failures = 0;
    for (u64 t = 0; t < 10; ++t) {
        Seed seed = opt.seed.derive(Domain::sample, 700 + t);
        auto params = AugmentedMatrixParams::make(256, 4, 3, 4, next_prime(u64{1} << 24), seed);
        auto keys = random_pairs(seed, 192, 1);
        std::vector<u64> ks;
        for (const auto& kv : keys) ks.push_back(kv.key);
        failures += !hall_check(augmented_matrix_rows(params, ks), 256);
    }
    for (u64 t = 0; t < 30; ++t) {
        Seed seed = opt.seed.derive(Domain::sample, 800 + t);
        SeedStream s(seed, Domain::sample, 0);
        u32 n = 4 + static_cast<u32>(t % 9);
        std::vector<SparseRowFp> rows(n);
        for (auto& r : rows) {
            for (int k = 0; k < 2; ++k) r.entries.push_back({static_cast<u32>(s.below(n)), 1});
            detail::canonicalize(r.entries, 2);
        }
        failures += hall_check(rows, n) != hall_exhaustive(rows, n);
    }
    return record("hall_matching", static_cast<double>(failures), 0, "==",
                  "10 matrices at n=256; 30 exhaustive comparisons at n <= 12");
}

inline CheckRecord check_coverage(const ValidationOptions& opt) {
    auto tail = coverage_tail({64, 4, 2}, 16, 2000, opt.seed.derive(Domain::sample, 900));
    double z = std::abs(tail.mean_uncovered - tail.expected_uncovered) / tail.mean_std_error;
    return record("coverage_expectation", z, 3.0, "<=",
                  "mean " + std::to_string(tail.mean_uncovered) + " vs expected " + std::to_string(tail.expected_uncovered));
}

inline CheckRecord check_filter_negatives(const ValidationOptions& opt) {
    auto pairs = random_pairs(opt.seed.derive(Domain::sample, 1000), 10000, 1);
    std::vector<u64> keys;
    for (const auto& kv : pairs) keys.push_back(kv.key);
    auto f = build_filter(keys, RetrievalParams::from_b(keys.size(), 10, 6), opt.seed.derive(Domain::sample, 1001));
    detail::inject(f.mutable_inner(), opt);
    u64 misses = 0;
    for (u64 k : keys) misses += !f.contains(k);
    return record("filter_no_false_negatives", static_cast<double>(misses), 0, "==", "n=10000 v=10");
}

inline CheckRecord check_filter_fpr(const ValidationOptions& opt) {
    auto pairs = random_pairs(opt.seed.derive(Domain::sample, 1000), 10000, 1);
    std::vector<u64> keys;
    for (const auto& kv : pairs) keys.push_back(kv.key);
    auto f = build_filter(keys, RetrievalParams::from_b(keys.size(), 10, 6), opt.seed.derive(Domain::sample, 1001));
    std::vector<u64> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    SeedStream s(opt.seed, Domain::sample, 1002);
    u64 trials = 0, hits = 0;
    while (trials < 200000) {
        u64 x = s.below(kMaxUniverse);
        if (std::binary_search(sorted.begin(), sorted.end(), x)) continue;
        ++trials;
        hits += f.contains(x);
    }
    double ratio = static_cast<double>(hits) / static_cast<double>(trials) / f.epsilon();
    auto r = record("filter_fpr_ratio", ratio, 0.75, ">=", "FPR / 2^-10 over 2e5 non-keys, must lie in [0.75, 1.25]");
    r.passed = ratio >= 0.75 && ratio <= 1.25;
    return r;
}

inline CheckRecord check_split(const ValidationOptions& opt) {
    auto pairs = random_pairs(opt.seed.derive(Domain::sample, 1100), 20000, 8);
    std::vector<u64> keys, values;
    for (const auto& kv : pairs) {
        keys.push_back(kv.key);
        values.push_back(kv.value);
    }
    SplitConfig cfg;
    auto s = split_build(cfg, keys, values, {}, opt.seed.derive(Domain::sample, 1101));
    for (auto& b : s.mutable_buckets()) detail::inject(std::get<RetrievalStructure>(b), opt);
    u64 wrong = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) wrong += s.query(keys[i]) != values[i];
    auto rep = space_report(s);
    bool ledger = rep.components_sum() == rep.redundancy() && rep.total_bits == s.to_bytes().size() * 8;
    return record("split_round_trip_and_ledger", static_cast<double>(wrong) + (ledger ? 0 : 1), 0, "==",
                  "n=20000 v=8; wrong answers plus ledger mismatch");
}

inline CheckRecord check_determinism(const ValidationOptions& opt) {
    auto pairs = random_pairs(opt.seed.derive(Domain::sample, 1200), 5000, 8);
    Seed seed = opt.seed.derive(Domain::sample, 1201);
    auto params = RetrievalParams::from_b(pairs.size(), 8, 8);
    auto a = build_retrieval(pairs, params, seed).to_bytes();
    auto b = build_retrieval(pairs, params, seed).to_bytes();
    return record("determinism", a == b ? 1 : 0, 1, "==", "two builds with one seed");
}

inline CheckRecord check_integrity(const ValidationOptions& opt) {
    auto pairs = random_pairs(opt.seed.derive(Domain::sample, 1300), 500, 8);
    auto bytes = build_retrieval(pairs, RetrievalParams::from_b(pairs.size(), 8, 8), opt.seed).to_bytes();
    u64 undetected = 0;
    SeedStream s(opt.seed, Domain::sample, 1301);
    for (int i = 0; i < 50; ++i) {
        auto copy = bytes;
        copy[s.below(copy.size())] ^= static_cast<std::uint8_t>(1 + s.below(255));
        try {
            (void)RetrievalStructure::from_bytes(copy);
            ++undetected;
        } catch (const IntegrityError&) {
        }
    }
    auto truncated = bytes;
    truncated.resize(truncated.size() / 2);
    try {
        (void)RetrievalStructure::from_bytes(truncated);
        ++undetected;
    } catch (const IntegrityError&) {
    }
    return record("container_integrity", static_cast<double>(undetected), 0, "==", "50 byte corruptions plus truncation");
}

}  // namespace detail

inline const std::vector<ValidationCheck>& validation_checks() {
    static const std::vector<ValidationCheck> checks = {
        {"retrieval_round_trip", "retrieval", detail::check_retrieval_round_trip},
        {"retrieval_oracle_equivalence", "oracle", detail::check_retrieval_oracle},
        {"augmented_oracle_equivalence", "oracle", detail::check_augmented_oracle},
        {"augmented_round_trip", "augmented", detail::check_augmented_round_trip},
        {"dw_fullrank_rate", "retrieval", detail::check_dw_rate},
        {"augmented_fullrank_rate", "augmented", detail::check_augmented_rate},
        {"hall_matching", "oracle", detail::check_hall},
        {"coverage_expectation", "oracle", detail::check_coverage},
        {"filter_no_false_negatives", "filter", detail::check_filter_negatives},
        {"filter_fpr_ratio", "filter", detail::check_filter_fpr},
        {"split_round_trip_and_ledger", "split", detail::check_split},
        {"determinism", "format", detail::check_determinism},
        {"container_integrity", "format", detail::check_integrity},
    };
    return checks;
}

// Runs the checks whose name or suite is selected (all when the selection is empty).
inline std::vector<CheckRecord> run_validation(const std::vector<std::string>& selection, const ValidationOptions& opt) {
    for (const auto& sel : selection) {
        bool known = false;
        for (const auto& c : validation_checks()) known = known || c.name == sel || c.suite == sel;
        if (!known) throw UsageError("unknown check or suite '" + sel + "'");
    }
    std::vector<CheckRecord> out;
    for (const auto& c : validation_checks()) {
        bool chosen = selection.empty() ||
                      std::find_if(selection.begin(), selection.end(),
                                   [&](const std::string& s) { return s == c.name || s == c.suite; }) != selection.end();
        if (!chosen) continue;
        CheckRecord r;
        try {
            r = c.run(opt);
        } catch (const std::exception& e) {
            r = detail::record(c.name, 0, 0, "==");
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.suite = c.suite;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace rkit
