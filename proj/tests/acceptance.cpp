// Acceptance harness: `acceptance [--criterion N]...` runs the selected criteria (all by
// default) and prints one PASS/FAIL line each. Exit status is 0 only if every selected
// criterion passes.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "rkit/rkit.hpp"

using namespace rkit;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Seed root_seed(u64 criterion) { return Seed::from_u64(0x5eed0000 + criterion); }

std::vector<KeyValue> pairs_for(const Seed& seed, u64 n, u32 v) {
    SeedStream s(seed, Domain::sample, n);
    std::unordered_set<u64> seen;
    std::vector<KeyValue> out;
    out.reserve(n);
    while (out.size() < n) {
        u64 k = s.below(kMaxUniverse);
        if (seen.insert(k).second) out.push_back({k, s.next() & low_mask(v)});
    }
    return out;
}

std::vector<u64> keys_of(const std::vector<KeyValue>& pairs) {
    std::vector<u64> out;
    for (const auto& kv : pairs) out.push_back(kv.key);
    return out;
}

std::vector<u64> values_of(const std::vector<KeyValue>& pairs) {
    std::vector<u64> out;
    for (const auto& kv : pairs) out.push_back(kv.value);
    return out;
}

std::vector<u64> aug_values(const Seed& seed, u64 count, u64 range) {
    SeedStream s(seed, Domain::entry_values, count);
    std::vector<u64> out(count);
    for (auto& a : out) a = s.below(range);
    return out;
}

std::string fmt(double x, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << x;
    return os.str();
}

// 1. Exact retrieval at n = 10^4, v = 8 for b in {4, 8, 16}, 20 seeds each, under 60 s per point.
Outcome retrieval_round_trip() {
    const u64 n = 10000;
    bool pass = true;
    std::string detail;
    for (u32 b : {4u, 8u, 16u}) {
        auto t0 = Clock::now();
        u64 wrong = 0, failures = 0;
        for (u64 s = 0; s < 20; ++s) {
            Seed seed = root_seed(1).derive(Domain::sample, b * 100 + s);
            auto pairs = pairs_for(seed, n, 8);
            try {
                auto st = build_retrieval(pairs, RetrievalParams::from_b(n, 8, b), seed);
                for (const auto& kv : pairs) wrong += st.query(kv.key) != kv.value;
            } catch (const BuildFailure&) {
                ++failures;
            }
        }
        double secs = seconds_since(t0);
        pass = pass && wrong == 0 && failures == 0 && secs < 60;
        detail += "b=" + std::to_string(b) + ": wrong=" + std::to_string(wrong) + " failed=" + std::to_string(failures) +
                  " " + fmt(secs, 3) + "s; ";
    }
    return {pass, detail};
}

// 2. Mean redundancy over 10 seeds at n = 2^16 is nonincreasing in b and halves from b=4 to b=16.
Outcome redundancy_monotone() {
    const u64 n = u64{1} << 16;
    std::vector<double> mean;
    std::string detail;
    for (u32 b : {4u, 8u, 12u, 16u}) {
        double sum = 0;
        for (u64 s = 0; s < 10; ++s) {
            Seed seed = root_seed(2).derive(Domain::sample, s);
            auto pairs = pairs_for(seed, n, 8);
            sum += measure_space(build_retrieval(pairs, RetrievalParams::from_b(n, 8, b), seed)).redundancy();
        }
        mean.push_back(sum / 10);
        detail += "b=" + std::to_string(b) + ":" + fmt(mean.back(), 7) + " ";
    }
    bool pass = true;
    for (std::size_t i = 1; i < mean.size(); ++i) pass = pass && mean[i] <= mean[i - 1];
    double ratio = mean.back() / mean.front();
    pass = pass && ratio <= 0.5;
    return {pass, detail + "ratio=" + fmt(ratio)};
}

// 3. Per-attempt full-rank rate of the two-block system at ell = 8, n = 2^12, over 200 attempts.
Outcome dw_fullrank() {
    auto est = fullrank_rate(RetrievalParams::from_b(4096, 8, 8), 200, root_seed(3));
    return {est.rate >= 0.25,
            "rate=" + fmt(est.rate) + " (" + std::to_string(est.successes) + "/200, stderr " + fmt(est.std_error) + ")"};
}

// 4. Augmented build at n = 4096, c = 4, gamma = 3, V = n^3: per-build success, exact answers,
// n field elements in memory and a packed form within the size bound.
Outcome augmented_exact() {
    const u64 n = 4096, c = 4, builds = 100;
    AugmentedConfig cfg;
    cfg.n = n;
    cfg.c = c;
    cfg.gamma = 3;
    cfg.value_range = n * n * n;
    cfg.max_attempts = 1;
    const u64 p = cfg.field_order();
    const double bound = static_cast<double>(n) * std::log2(static_cast<double>(p)) + n / 8.0 + 512;
    u64 ok = 0, wrong = 0, bad_memory = 0, oversize = 0;
    u64 packed_bits = 0;
    auto t0 = Clock::now();
    for (u64 i = 0; i < builds; ++i) {
        Seed seed = root_seed(4).derive(Domain::sample, i);
        auto pairs = pairs_for(seed, n - n / c, 36);
        for (auto& kv : pairs) kv.value %= cfg.value_range;
        auto aug = aug_values(seed, n / c, cfg.value_range);
        try {
            auto s = build_augmented(pairs, aug, cfg, seed);
            ++ok;
            for (const auto& kv : pairs) wrong += s.query_key(kv.key) != kv.value;
            for (u64 j = 0; j < n / c; ++j) wrong += s.query_aug(j) != aug[j];
            auto rep = measure_space(s, 0);
            auto reread = AugmentedStructure::from_bytes(s.to_bytes(0));
            bad_memory += s.memory().size() != n || reread.memory() != s.memory() || rep.payload_bits != n * s.element_bits();
            auto pm = s.pack_memory(8);
            packed_bits = pm.bits();
            oversize += static_cast<double>(pm.bits()) > bound;
            bad_memory += pm.unpack_all() != s.memory();
        } catch (const BuildFailure&) {
        }
    }
    bool pass = ok >= 99 && wrong == 0 && bad_memory == 0 && oversize == 0;
    return {pass, "builds=" + std::to_string(ok) + "/100 wrong=" + std::to_string(wrong) +
                      " memory_mismatch=" + std::to_string(bad_memory) + " packed_bits=" + std::to_string(packed_bits) +
                      " bound=" + fmt(bound, 8) + " " + fmt(seconds_since(t0), 4) + "s"};
}

// 5. Compressed answers equal dense recomputation on 100 random instances with n <= 128.
Outcome oracle_equivalence() {
    u64 mismatches = 0, checked = 0;
    for (u64 i = 0; i < 100; ++i) {
        Seed seed = root_seed(5).derive(Domain::sample, i);
        SeedStream shape(seed, Domain::sample, 0);
        if (i % 2 == 0) {
            u64 n = 1 + shape.below(128);
            u32 v = 1 + static_cast<u32>(shape.below(24));
            u32 b = 1 + static_cast<u32>(shape.below(16));
            auto pairs = pairs_for(seed, n, v);
            auto s = build_retrieval(pairs, RetrievalParams::from_b(n, v, b), seed, {.retain_oracle = true});
            for (const auto& kv : pairs) {
                mismatches += s.query(kv.key) != recompute_query(s, kv.key);
                ++checked;
            }
        } else {
            u64 c = 2 + shape.below(3);
            u64 n = c * (1 + shape.below(128 / c));
            AugmentedConfig cfg;
            cfg.n = n;
            cfg.c = c;
            cfg.value_range = std::max<u64>(n * n * n, 8);
            auto pairs = pairs_for(seed, n - n / c, 62);
            for (auto& kv : pairs) kv.value %= cfg.value_range;
            auto aug = aug_values(seed, n / c, cfg.value_range);
            auto s = build_augmented(pairs, aug, cfg, seed);
            for (const auto& kv : pairs) {
                mismatches += s.query_key(kv.key) != recompute_query_key(s, kv.key);
                ++checked;
            }
            for (u64 j = 0; j < n / c; ++j) {
                mismatches += s.query_aug(j) != recompute_query_aug(s, j);
                ++checked;
            }
        }
    }
    return {mismatches == 0, "mismatches=" + std::to_string(mismatches) + " over " + std::to_string(checked) + " queries"};
}

// 6. Hall condition on 100 augmented matrices at n = 256, and agreement with subset
// enumeration on 100 instances with n <= 16.
Outcome hall_validation() {
    u64 failing = 0;
    for (u64 i = 0; i < 100; ++i) {
        Seed seed = root_seed(6).derive(Domain::sample, i);
        AugmentedConfig cfg;
        cfg.n = 256;
        cfg.value_range = u64{256} * 256 * 256;
        auto params = AugmentedMatrixParams::make(cfg.n, cfg.c, cfg.resolved_gamma(), cfg.alpha, cfg.field_order(), seed);
        auto keys = keys_of(pairs_for(seed, 192, 1));
        failing += !hall_check(augmented_matrix_rows(params, keys), 256);
    }
    u64 disagree = 0, violated = 0;
    for (u64 i = 0; i < 100; ++i) {
        Seed seed = root_seed(6).derive(Domain::group, i);
        SeedStream s(seed, Domain::sample, 0);
        std::vector<SparseRowFp> rows;
        u32 n;
        if (i % 2 == 0) {
            u64 c = 2 + s.below(3);
            n = static_cast<u32>(c * (1 + s.below(16 / c)));
            auto params = AugmentedMatrixParams::make(n, c, 3, 1, 11, seed);
            std::vector<u64> keys(n - n / c);
            for (auto& k : keys) k = s.below(kMaxUniverse);
            rows = augmented_matrix_rows(params, keys);
        } else {
            n = 4 + static_cast<u32>(s.below(13));
            rows.resize(n);
            for (auto& r : rows) {
                u64 k = 1 + s.below(2);
                for (u64 j = 0; j < k; ++j) r.entries.push_back({static_cast<u32>(s.below(n)), 1});
                detail::canonicalize(r.entries, 2);
            }
        }
        bool exhaustive = hall_exhaustive(rows, n);
        violated += !exhaustive;
        disagree += hall_check(rows, n) != exhaustive;
    }
    return {failing == 0 && disagree == 0, "n=256 failures=" + std::to_string(failing) + "/100; small-n disagreements=" +
                                               std::to_string(disagree) + "/100 (" + std::to_string(violated) +
                                               " instances violate Hall)"};
}

// 7. Mean number of uncovered blocks with n/c = 64, two permutations and 16 dropped rows.
Outcome coverage() {
    auto tail = coverage_tail({64, 4, 2}, 16, 10000, root_seed(7));
    double z = std::abs(tail.mean_uncovered - 4.0) / tail.mean_std_error;
    return {z <= 3.0, "mean=" + fmt(tail.mean_uncovered) + " expected=" + fmt(tail.expected_uncovered) +
                          " stderr=" + fmt(tail.mean_std_error) + " z=" + fmt(z, 3)};
}

// 8. Filter at n = 10^4, v = 10: no false negatives and FPR over 10^6 non-keys within 25% of 2^-10.
Outcome filter_fpr() {
    Seed seed = root_seed(8);
    auto keys = keys_of(pairs_for(seed, 10000, 1));
    auto f = build_filter(keys, RetrievalParams::from_b(keys.size(), 10, 8), seed);
    u64 misses = 0;
    for (u64 k : keys) misses += !f.contains(k);
    std::vector<u64> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    SeedStream s(seed, Domain::sample, 1);
    u64 trials = 0, hits = 0;
    while (trials < 1000000) {
        u64 x = s.below(kMaxUniverse);
        if (std::binary_search(sorted.begin(), sorted.end(), x)) continue;
        ++trials;
        hits += f.contains(x);
    }
    double ratio = static_cast<double>(hits) / static_cast<double>(trials) / std::ldexp(1.0, -10);
    return {misses == 0 && ratio >= 0.75 && ratio <= 1.25,
            "false_negatives=" + std::to_string(misses) + " fpr/2^-10=" + fmt(ratio)};
}

// 9. Split retrieval at n = 10^5 with an exact ledger and rare overflows, plus the small-V
// path with 2 ceil(log2 n) seed groups and no bucket failures.
Outcome split_equivalence() {
    const u64 n = 100000;
    SplitConfig cfg;
    u64 wrong = 0, ledger_bad = 0, overflows = 0, attempts = 0;
    auto t0 = Clock::now();
    for (u64 i = 0; i < 100; ++i) {
        Seed seed = root_seed(9).derive(Domain::sample, i);
        auto pairs = pairs_for(seed, n, 8);
        auto s = split_build(cfg, keys_of(pairs), values_of(pairs), {}, seed);
        overflows += s.stats().overflows;
        attempts += s.stats().master_attempts;
        if (i < 3) {
            for (const auto& kv : pairs) wrong += s.query(kv.key) != kv.value;
            auto rep = space_report(s);
            auto bytes = s.to_bytes();
            ledger_bad += rep.total_bits != bytes.size() * 8 || rep.components_sum() != rep.redundancy();
            auto back = SplitStructure::from_bytes(bytes);
            for (const auto& kv : pairs) wrong += back.query(kv.key) != kv.value;
        }
    }
    double overflow_rate = static_cast<double>(overflows) / 100.0;
    double split_secs = seconds_since(t0);

    const u64 small_n = 4096, c = 4, V = u64{1} << 20;
    SplitConfig sv;
    sv.kind = SplitKind::small_v;
    sv.value_range = V;
    u64 bucket_failures = 0, sv_wrong = 0, groups = 0;
    for (u64 i = 0; i < 100; ++i) {
        Seed seed = root_seed(9).derive(Domain::group, i);
        auto pairs = pairs_for(seed, small_n - small_n / c, 20);
        auto aug = aug_values(seed, small_n / c, V);
        auto s = split_build(sv, keys_of(pairs), values_of(pairs), aug, seed);
        bucket_failures += s.stats().bucket_failures;
        groups = s.shape().groups;
        if (i < 5) {
            for (const auto& kv : pairs) sv_wrong += s.query_key(kv.key) != kv.value;
            for (u64 j = 0; j < aug.size(); ++j) sv_wrong += s.query_aug(j) != aug[j];
        }
    }
    bool pass = wrong == 0 && ledger_bad == 0 && overflow_rate <= 0.01 && bucket_failures == 0 && sv_wrong == 0 &&
                groups == 2 * 12;
    return {pass, "n=1e5: wrong=" + std::to_string(wrong) + " ledger_mismatch=" + std::to_string(ledger_bad) +
                      " overflows=" + std::to_string(overflows) + "/100 builds (" + std::to_string(attempts) +
                      " master seeds, " + fmt(split_secs, 3) + "s); small-V: bucket_failures=" +
                      std::to_string(bucket_failures) + " groups=" + std::to_string(groups) +
                      " wrong=" + std::to_string(sv_wrong)};
}

int run_cli(const std::string& args, const std::string& out = "/dev/null") {
    int status = std::system((std::string(RKIT_CLI_PATH) + " " + args + " >" + out + " 2>/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. Identical seeds give byte-identical containers, in process and across two CLI runs.
Outcome determinism() {
    Seed seed = root_seed(10);
    auto pairs = pairs_for(seed, 20000, 8);
    u64 differ = 0;
    auto params = RetrievalParams::from_b(pairs.size(), 8, 8);
    differ += build_retrieval(pairs, params, seed).to_bytes() != build_retrieval(pairs, params, seed).to_bytes();
    differ += build_filter(keys_of(pairs), params, seed).to_bytes() !=
              build_filter(keys_of(pairs), params, seed).to_bytes();
    SplitConfig cfg;
    differ += split_build(cfg, keys_of(pairs), values_of(pairs), {}, seed).to_bytes() !=
              split_build(cfg, keys_of(pairs), values_of(pairs), {}, seed).to_bytes();
    AugmentedConfig acfg;
    acfg.n = 256;
    acfg.value_range = u64{1} << 24;
    auto apairs = pairs_for(seed, 192, 24);
    auto aug = aug_values(seed, 64, acfg.value_range);
    differ += build_augmented(apairs, aug, acfg, seed).to_bytes(4) != build_augmented(apairs, aug, acfg, seed).to_bytes(4);

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("rkit_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::string in = (dir / "pairs.tsv").string();
    std::string hex = seed.to_hex();
    int codes = run_cli("gen --n 20000 --seed " + hex, in);
    u64 cli_differ = 0;
    for (std::string extra : {"", " --split", " --kind filter"}) {
        std::string a = (dir / "a.rkit").string(), b = (dir / "b.rkit").string();
        codes |= run_cli("build -i " + in + " -o " + a + " --seed " + hex + extra);
        codes |= run_cli("build -i " + in + " -o " + b + " --seed " + hex + extra);
        cli_differ += read_file(a) != read_file(b);
    }
    fs::remove_all(dir);
    return {differ == 0 && cli_differ == 0 && codes == 0,
            "in-process differing=" + std::to_string(differ) + "/4; cli differing=" + std::to_string(cli_differ) +
                "/3; cli exit status " + std::to_string(codes)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criterion number 1-10 (repeatable; default all)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"retrieval round trip", retrieval_round_trip},
        {"redundancy monotone in b", redundancy_monotone},
        {"two-block full-rank rate", dw_fullrank},
        {"augmented exactness and packed size", augmented_exact},
        {"oracle equivalence", oracle_equivalence},
        {"Hall condition and matching", hall_validation},
        {"coverage expectation", coverage},
        {"filter false-positive rate", filter_fpr},
        {"split equivalence and ledger", split_equivalence},
        {"determinism", determinism},
    };
    if (selected.empty()) {
        for (int i = 1; i <= 10; ++i) selected.push_back(i);
    }
    bool all = true;
    for (int id : selected) {
        const auto& [name, fn] = criteria[static_cast<std::size_t>(id - 1)];
        auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "criterion " << id << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
                  << " (" << fmt(seconds_since(t0), 4) << "s)" << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
