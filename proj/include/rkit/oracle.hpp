#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rkit/augmented.hpp"
#include "rkit/errors.hpp"
#include "rkit/field.hpp"
#include "rkit/hashing.hpp"
#include "rkit/linalg.hpp"
#include "rkit/retrieval.hpp"
#include "rkit/rowgen.hpp"

namespace rkit {

// Binomial point estimate with its standard error.
struct MonteCarloEstimate {
    u64 trials = 0;
    u64 successes = 0;
    double rate = 0;
    double std_error = 0;

    static MonteCarloEstimate of(u64 successes, u64 trials) {
        MonteCarloEstimate e;
        e.trials = trials;
        e.successes = successes;
        e.rate = trials == 0 ? 0 : static_cast<double>(successes) / static_cast<double>(trials);
        e.std_error = trials == 0 ? 0 : std::sqrt(e.rate * (1 - e.rate) / static_cast<double>(trials));
        return e;
    }
};

// Maximum bipartite matching between rows and their active columns (augmenting paths).
inline std::size_t max_matching(std::span<const SparseRowFp> rows, u32 columns) {
    std::vector<int> owner(columns, -1);
    std::vector<u32> seen(columns, 0);
    u32 stamp = 0;
    std::size_t matched = 0;
    struct Frame {
        u32 row;
        std::size_t next;
    };
    std::vector<Frame> stack;
    std::vector<u32> path_cols;
    for (u32 start = 0; start < rows.size(); ++start) {
        ++stamp;
        stack.assign(1, {start, 0});
        path_cols.clear();
        bool found = false;
        while (!stack.empty() && !found) {
            auto& top = stack.back();
            const auto& entries = rows[top.row].entries;
            if (top.next == entries.size()) {
                stack.pop_back();
                if (!path_cols.empty()) path_cols.pop_back();
                continue;
            }
            u32 col = entries[top.next++].column;
            if (col >= columns) throw UsageError("max_matching: column index out of range");
            if (seen[col] == stamp) continue;
            seen[col] = stamp;
            path_cols.push_back(col);
            if (owner[col] < 0) {
                found = true;
            } else {
                stack.push_back({static_cast<u32>(owner[col]), 0});
            }
        }
        if (!found) continue;
        for (std::size_t i = 0; i < path_cols.size(); ++i) owner[path_cols[i]] = static_cast<int>(stack[i].row);
        ++matched;
    }
    return matched;
}

// True iff the n x n pattern admits a perfect row-column matching.
inline bool hall_check(std::span<const SparseRowFp> rows, u32 n) {
    if (rows.size() != n) return false;
    return max_matching(rows, n) == n;
}

// Hall's condition checked over every row subset; for n <= 20.
inline bool hall_exhaustive(std::span<const SparseRowFp> rows, u32 n) {
    if (n > 20) throw UsageError("hall_exhaustive: at most 20 rows");
    if (rows.size() != n) return false;
    std::vector<u32> masks(n, 0);
    for (u32 i = 0; i < n; ++i) {
        for (const auto& e : rows[i].entries) {
            if (e.column >= n) throw UsageError("hall_exhaustive: column index out of range");
            masks[i] |= u32{1} << e.column;
        }
    }
    for (u32 subset = 1; subset < (u32{1} << n); ++subset) {
        u32 cover = 0;
        for (u32 i = 0; i < n; ++i) {
            if (subset >> i & 1) cover |= masks[i];
        }
        if (std::popcount(cover) < std::popcount(subset)) return false;
    }
    return true;
}

// The realized square matrix of an augmented instance with the given retrieval keys.
inline std::vector<SparseRowFp> augmented_matrix_rows(const AugmentedMatrixParams& params, std::span<const u64> keys) {
    std::vector<SparseRowFp> rows;
    rows.reserve(params.n);
    for (u64 k : keys) rows.push_back(coupon_row(params, k));
    for (u64 j = 0; j < params.block_count(); ++j) rows.push_back(augmented_row(params, j));
    return rows;
}

inline DenseMatrixFp to_dense(std::span<const SparseRowFp> rows, std::size_t columns) {
    DenseMatrixFp a(rows.size(), columns);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& e : rows[i].entries) a.at(i, e.column) = e.value;
    }
    return a;
}

// Rank of two-block rows expanded to dense bit rows.
inline std::size_t rank_dense_gf2(std::span<const TwoBlockRowGF2> rows, u32 m, u32 ell) {
    const std::size_t words = (m + 63) / 64;
    std::vector<std::vector<u64>> a(rows.size(), std::vector<u64>(words, 0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (u32 j = 0; j < ell; ++j) {
            if (rows[i].pattern_a >> j & 1) {
                u64 c = u64{rows[i].block_a} * ell + j;
                a[i][c / 64] ^= u64{1} << (c % 64);
            }
            if (rows[i].pattern_b >> j & 1) {
                u64 c = u64{rows[i].block_b} * ell + j;
                a[i][c / 64] ^= u64{1} << (c % 64);
            }
        }
    }
    std::size_t rank = 0;
    for (u32 col = 0; col < m && rank < a.size(); ++col) {
        std::size_t piv = rank;
        while (piv < a.size() && !(a[piv][col / 64] >> (col % 64) & 1)) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i != rank && (a[i][col / 64] >> (col % 64) & 1)) {
                for (std::size_t w = 0; w < words; ++w) a[i][w] ^= a[rank][w];
            }
        }
        ++rank;
    }
    return rank;
}

// Pivot columns of the row space of two-block rows: positions where the rank over the
// column suffix grows, scanning right to left. Canonical for the row space.
inline std::vector<u32> pivot_columns_dense_gf2(std::span<const TwoBlockRowGF2> rows, u32 m, u32 ell) {
    const std::size_t words = (m + 63) / 64;
    std::vector<std::vector<u64>> basis;
    std::vector<u32> leads;
    for (const auto& r : rows) {
        std::vector<u64> x(words, 0);
        for (u32 j = 0; j < ell; ++j) {
            if (r.pattern_a >> j & 1) {
                u64 c = u64{r.block_a} * ell + j;
                x[c / 64] ^= u64{1} << (c % 64);
            }
            if (r.pattern_b >> j & 1) {
                u64 c = u64{r.block_b} * ell + j;
                x[c / 64] ^= u64{1} << (c % 64);
            }
        }
        for (;;) {
            u32 lead = m;
            for (std::size_t w = 0; w < words; ++w) {
                if (x[w] != 0) {
                    lead = static_cast<u32>(w * 64 + static_cast<std::size_t>(std::countr_zero(x[w])));
                    break;
                }
            }
            if (lead == m) break;
            auto it = std::find(leads.begin(), leads.end(), lead);
            if (it == leads.end()) {
                leads.push_back(lead);
                basis.push_back(x);
                break;
            }
            const auto& b = basis[static_cast<std::size_t>(it - leads.begin())];
            for (std::size_t w = 0; w < words; ++w) x[w] ^= b[w];
        }
    }
    std::sort(leads.begin(), leads.end());
    return leads;
}

struct AugmentedRateConfig {
    u64 n = 0;
    u64 c = 2;
    u64 gamma = 3;
    u64 alpha = 4;
    u64 p = 0;
};

enum class RankEngine { automatic, reference, fast };

// Fraction of sampled augmented matrices of full rank; each trial draws fresh seeds and keys.
inline MonteCarloEstimate fullrank_rate(const AugmentedRateConfig& cfg, u64 trials, const Seed& seed,
                                        RankEngine engine = RankEngine::automatic) {
    if (trials == 0) throw UsageError("fullrank_rate: at least one trial required");
    const bool reference = engine == RankEngine::reference || (engine == RankEngine::automatic && cfg.n <= 256);
    const PrimeField field(cfg.p);
    u64 ok = 0;
    for (u64 t = 0; t < trials; ++t) {
        Seed ts = seed.derive(Domain::sample, t);
        auto params = AugmentedMatrixParams::make(cfg.n, cfg.c, cfg.gamma, cfg.alpha, cfg.p, ts);
        SeedStream keys_stream(ts, Domain::sample, cfg.n);
        std::vector<u64> keys(cfg.n - cfg.n / cfg.c);
        for (auto& k : keys) k = keys_stream.below(kMaxUniverse);
        auto rows = augmented_matrix_rows(params, keys);
        std::size_t rank;
        if (reference) {
            rank = rank_dense(field, to_dense(rows, cfg.n));
        } else {
            std::vector<u64> rhs(rows.size(), 0);
            rank = solve_fp(field, rows, rhs, static_cast<u32>(cfg.n)).rank;
        }
        ok += rank == cfg.n;
    }
    return MonteCarloEstimate::of(ok, trials);
}

// Fraction of sampled two-block systems with full row rank under the given parameters.
inline MonteCarloEstimate fullrank_rate(const RetrievalParams& params, u64 trials, const Seed& seed,
                                        RankEngine engine = RankEngine::automatic) {
    if (trials == 0) throw UsageError("fullrank_rate: at least one trial required");
    const bool reference = engine == RankEngine::reference || (engine == RankEngine::automatic && params.n <= 256);
    u64 ok = 0;
    std::vector<TwoBlockRowGF2> rows(params.n);
    std::vector<u64> rhs(params.n, 0);
    for (u64 t = 0; t < trials; ++t) {
        Seed ts = seed.derive(Domain::sample, t);
        DWParams dw = params.dw(ts);
        SeedStream keys_stream(ts, Domain::sample, params.n);
        for (auto& r : rows) r = dw_row(dw, keys_stream.below(params.universe));
        std::size_t rank = reference ? rank_dense_gf2(rows, params.m, params.ell)
                                     : solve_gf2_planes(rows, rhs, params.m, params.ell).rank;
        ok += rank == params.n;
    }
    return MonteCarloEstimate::of(ok, trials);
}

struct CoverageParams {
    u64 blocks = 0;  // n/c
    u64 c = 1;
    u64 tau_perm = 0;
};

struct CoverageTail {
    u64 samples = 0;
    double mean_uncovered = 0;
    double mean_std_error = 0;
    double expected_uncovered = 0;
    MonteCarloEstimate tail;  // Pr[uncovered > t / c]
};

// Drops t random augmented rows out of n/c, draws fresh permutations per sample and
// counts blocks hit by none of the remaining rows.
inline CoverageTail coverage_tail(const CoverageParams& params, u64 t, u64 samples, const Seed& seed) {
    if (params.blocks == 0 || t > params.blocks) throw UsageError("coverage_tail: need 0 <= t <= n/c");
    if (samples == 0) throw UsageError("coverage_tail: at least one sample required");
    CoverageTail out;
    out.samples = samples;
    out.expected_uncovered = static_cast<double>(params.blocks) *
                             std::pow(static_cast<double>(t) / static_cast<double>(params.blocks),
                                      static_cast<double>(params.tau_perm));
    const double threshold = static_cast<double>(t) / static_cast<double>(params.c);
    double sum = 0;
    double sum_sq = 0;
    u64 exceed = 0;
    std::vector<std::uint8_t> missing(params.blocks);
    std::vector<std::uint8_t> covered(params.blocks);
    for (u64 s = 0; s < samples; ++s) {
        Seed ss = seed.derive(Domain::sample, s);
        auto drop = make_permutation(ss.derive(Domain::sample, 0), params.blocks);
        std::fill(missing.begin(), missing.end(), 0);
        for (u64 i = 0; i < t; ++i) missing[drop.forward(static_cast<u32>(i))] = 1;
        std::fill(covered.begin(), covered.end(), 0);
        for (u64 i = 0; i < params.tau_perm; ++i) {
            auto perm = make_permutation(ss.derive(Domain::permutation, i), params.blocks);
            for (u32 j = 0; j < params.blocks; ++j) {
                if (!missing[j]) covered[perm.forward(j)] = 1;
            }
        }
        u64 uncovered = static_cast<u64>(std::count(covered.begin(), covered.end(), 0));
        sum += static_cast<double>(uncovered);
        sum_sq += static_cast<double>(uncovered) * static_cast<double>(uncovered);
        exceed += static_cast<double>(uncovered) > threshold;
    }
    const double n = static_cast<double>(samples);
    out.mean_uncovered = sum / n;
    double var = samples > 1 ? (sum_sq - sum * sum / n) / (n - 1) : 0;
    out.mean_std_error = std::sqrt(std::max(0.0, var) / n);
    out.tail = MonteCarloEstimate::of(exceed, samples);
    return out;
}

// Answer recomputed from the uncompressed solution vector by a naive inner product.
inline u64 recompute_query(const RetrievalStructure& s, u64 key) {
    const auto& x = s.oracle_solution();
    const auto row = s.row_for(key);
    const u32 ell = s.params().ell;
    u64 answer = 0;
    for (u32 j = 0; j < ell; ++j) {
        if (row.pattern_a >> j & 1) answer ^= x[u64{row.block_a} * ell + j];
        if (row.pattern_b >> j & 1) answer ^= x[u64{row.block_b} * ell + j];
    }
    return answer;
}

// Dense row times memory vector, in FieldElement arithmetic.
inline u64 recompute_query(const AugmentedStructure& s, const SparseRowFp& row) {
    PrimeField field(s.field_order());
    std::vector<FieldElement> dense(s.memory().size(), field.element(0));
    for (const auto& e : row.entries) dense[e.column] = dense[e.column] + field.element(e.value);
    FieldElement acc = field.element(0);
    for (std::size_t i = 0; i < dense.size(); ++i) acc = acc + dense[i] * field.element(s.memory()[i]);
    return acc.value();
}

inline u64 recompute_query_key(const AugmentedStructure& s, u64 key) {
    return recompute_query(s, coupon_row(s.matrix(), key));
}

inline u64 recompute_query_aug(const AugmentedStructure& s, u64 j) {
    return recompute_query(s, augmented_row(s.matrix(), j));
}

}  // namespace rkit
