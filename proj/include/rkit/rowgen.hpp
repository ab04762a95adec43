#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "rkit/errors.hpp"
#include "rkit/field.hpp"
#include "rkit/hashing.hpp"
#include "rkit/linalg.hpp"

namespace rkit {

// Column layout and seed of the two-block GF(2) rows. The second block of a row lies
// at most `window` blocks after the first.
struct DWParams {
    u64 n = 0;
    u32 ell = 0;
    u32 m = 0;
    u32 window = 0;
    Seed seed;

    u32 block_count() const { return ell == 0 ? 0 : m / ell; }

    static u32 default_window(u32 ell, u32 block_count) {
        u32 w = (1024 + ell - 1) / ell;
        return std::max<u32>(1, std::min<u32>(w, block_count > 1 ? block_count - 1 : 1));
    }

    void validate() const {
        if (ell == 0 || ell > 64) throw ConfigError("block width must lie in [1, 64]");
        if (m % ell != 0) throw ConfigError("column count must be a multiple of the block width");
        if (block_count() < 2) throw ConfigError("at least two column blocks are required");
        if (window == 0) throw ConfigError("block window must be positive");
        if (m <= n) throw ConfigError("column count must exceed the key count");
    }
};

inline TwoBlockRowGF2 dw_row(const DWParams& params, u64 key, Domain domain = Domain::dw_row) {
    params.validate();
    SeedStream stream(params.seed, domain, key);
    const u32 blocks = params.block_count();
    TwoBlockRowGF2 row;
    row.block_a = static_cast<u32>(stream.below(blocks - 1));
    u32 reach = std::min<u32>(params.window, blocks - 1 - row.block_a);
    row.block_b = row.block_a + 1 + static_cast<u32>(stream.below(reach));
    const u64 mask = low_mask(params.ell);
    do {
        row.pattern_a = stream.next() & mask;
    } while (row.pattern_a == 0);
    do {
        row.pattern_b = stream.next() & mask;
    } while (row.pattern_b == 0);
    return row;
}

// Shape and randomness of the augmented matrix: n columns in n/c blocks of c.
struct AugmentedMatrixParams {
    u64 n = 0;
    u64 c = 0;
    u64 gamma = 0;
    u64 alpha = 0;
    u64 p = 0;
    u64 tau_coup = 0;
    u64 tau_perm = 0;
    Seed seed;
    std::vector<SeededPermutation> perms;

    u64 block_count() const { return c == 0 ? 0 : n / c; }

    static AugmentedMatrixParams make(u64 n, u64 c, u64 gamma, u64 alpha, u64 p, const Seed& seed) {
        auto a = shape(n, c, gamma, alpha, p, seed);
        a.perms.reserve(a.tau_perm);
        for (u64 i = 0; i < a.tau_perm; ++i) a.perms.push_back(make_permutation(seed.derive(Domain::permutation, i), n / c));
        return a;
    }

    // As make, with explicitly supplied permutations.
    static AugmentedMatrixParams with_permutations(u64 n, u64 c, u64 gamma, u64 alpha, u64 p, const Seed& seed,
                                                   std::vector<SeededPermutation> perms) {
        auto a = shape(n, c, gamma, alpha, p, seed);
        if (perms.size() != a.tau_perm) throw UsageError("permutation count must equal tau_perm");
        for (const auto& perm : perms) {
            if (perm.size() != n / c) throw UsageError("permutation domain must have n/c blocks");
        }
        a.perms = std::move(perms);
        return a;
    }

private:
    static AugmentedMatrixParams shape(u64 n, u64 c, u64 gamma, u64 alpha, u64 p, const Seed& seed) {
        if (c < 2) throw ConfigError("c must exceed 1");
        if (n < c || n % c != 0) throw ConfigError("c must divide n");
        if (n > 0xffffffffULL) throw ConfigError("n must fit in 32 bits");
        if (gamma < 3) throw ConfigError("gamma must be at least 3");
        if (p < 2 || p >= kModulusLimit || !is_prime(p)) throw ConfigError("field order must be a prime below 2^62");
        AugmentedMatrixParams a;
        a.n = n;
        a.c = c;
        a.gamma = gamma;
        a.alpha = alpha;
        a.p = p;
        a.tau_coup = alpha * std::max(c, gamma);
        a.tau_perm = alpha * c * c * gamma;
        a.seed = seed;
        return a;
    }
};

// gamma := max(3, ceil(log_n V)).
inline u64 gamma_for(u64 n, u64 v) {
    if (n < 2) return 3;
    u64 g = 0;
    u128 power = 1;
    while (power < v) {
        power *= n;
        ++g;
    }
    return std::max<u64>(3, g);
}

namespace detail {

// Sorts by column, merges duplicates by field addition, drops zero coefficients.
inline void canonicalize(std::vector<SparseEntry>& entries, u64 p) {
    std::sort(entries.begin(), entries.end(), [](const SparseEntry& x, const SparseEntry& y) { return x.column < y.column; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < entries.size();) {
        u32 col = entries[i].column;
        u64 sum = 0;
        for (; i < entries.size() && entries[i].column == col; ++i) {
            sum += entries[i].value;
            if (sum >= p) sum -= p;
        }
        if (sum != 0) entries[out++] = {col, sum};
    }
    entries.resize(out);
}

inline void append_coupons(const AugmentedMatrixParams& params, Domain domain, u64 key, std::vector<SparseEntry>& out) {
    SeedStream stream(params.seed, domain, key);
    for (u64 t = 0; t < params.tau_coup; ++t) {
        u32 col = static_cast<u32>(stream.below(params.n));
        u64 value = 1 + stream.below(params.p - 1);
        out.push_back({col, value});
    }
}

}  // namespace detail

inline SparseRowFp coupon_row(const AugmentedMatrixParams& params, u64 key, Domain domain = Domain::coupon_key) {
    SparseRowFp row;
    row.entries.reserve(params.tau_coup);
    detail::append_coupons(params, domain, key, row.entries);
    detail::canonicalize(row.entries, params.p);
    return row;
}

// Blocks p_i(j) for every permutation i (with repetition).
inline std::vector<u32> permutation_blocks(const AugmentedMatrixParams& params, u64 j) {
    if (j >= params.block_count()) throw UsageError("augmented index out of range");
    std::vector<u32> blocks;
    blocks.reserve(params.perms.size());
    for (const auto& perm : params.perms) blocks.push_back(perm.forward(static_cast<u32>(j)));
    return blocks;
}

inline SparseRowFp augmented_row(const AugmentedMatrixParams& params, u64 j) {
    if (j >= params.block_count()) throw UsageError("augmented index out of range");
    SparseRowFp row;
    row.entries.reserve(params.tau_coup + params.tau_perm * params.c);
    detail::append_coupons(params, Domain::coupon_aug, j, row.entries);
    SeedStream values(params.seed, Domain::entry_values, j);
    for (const auto& perm : params.perms) {
        u64 base = u64{perm.forward(static_cast<u32>(j))} * params.c;
        for (u64 k = 0; k < params.c; ++k) {
            u64 v = values.below(params.p);
            if (v != 0) row.entries.push_back({static_cast<u32>(base + k), v});
        }
    }
    detail::canonicalize(row.entries, params.p);
    return row;
}

}  // namespace rkit
