#pragma once

// Slow reference implementations used as ground truth by the unit tests. They share no
// code with the library beyond plain data types.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rkit/rkit.hpp"

namespace ref {

using rkit::u64;
using BigInt = boost::multiprecision::cpp_int;

inline bool is_prime_trial(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

inline u64 mulmod(u64 a, u64 b, u64 p) { return static_cast<u64>((BigInt(a) * b) % p); }

inline u64 powmod(u64 a, u64 e, u64 p) { return static_cast<u64>(boost::multiprecision::powm(BigInt(a), BigInt(e), BigInt(p))); }

// Extended Euclid over signed big integers.
inline u64 inverse(u64 a, u64 p) {
    BigInt r0 = p, r1 = a % p, s0 = 0, s1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt r2 = r0 - q * r1;
        r0 = r1;
        r1 = r2;
        BigInt s2 = s0 - q * s1;
        s0 = s1;
        s1 = s2;
    }
    BigInt x = s0 % p;
    if (x < 0) x += p;
    return static_cast<u64>(x);
}

using Gf2Matrix = std::vector<std::vector<bool>>;

inline Gf2Matrix expand(const std::vector<rkit::TwoBlockRowGF2>& rows, u64 m, unsigned ell) {
    Gf2Matrix out(rows.size(), std::vector<bool>(m, false));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (unsigned b = 0; b < ell; ++b) {
            if ((rows[i].pattern_a >> b) & 1) out[i][u64{rows[i].block_a} * ell + b] = true;
            if ((rows[i].pattern_b >> b) & 1) out[i][u64{rows[i].block_b} * ell + b] = true;
        }
    }
    return out;
}

inline std::size_t rank_gf2(Gf2Matrix a) {
    std::size_t rank = 0;
    const std::size_t cols = a.empty() ? 0 : a[0].size();
    for (std::size_t j = 0; j < cols && rank < a.size(); ++j) {
        std::size_t piv = rank;
        while (piv < a.size() && !a[piv][j]) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i != rank && a[i][j]) {
                for (std::size_t k = 0; k < cols; ++k) a[i][k] = a[i][k] != a[rank][k];
            }
        }
        ++rank;
    }
    return rank;
}

inline bool dot_gf2(const std::vector<bool>& row, const std::vector<u64>& x, unsigned plane) {
    bool acc = false;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] && ((x[k] >> plane) & 1)) acc = !acc;
    }
    return acc;
}

using FpMatrix = std::vector<std::vector<u64>>;

inline FpMatrix expand(const std::vector<rkit::SparseRowFp>& rows, u64 m) {
    FpMatrix out(rows.size(), std::vector<u64>(m, 0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& e : rows[i].entries) out[i][e.column] = e.value;
    }
    return out;
}

inline std::size_t rank_fp(FpMatrix a, u64 p) {
    std::size_t rank = 0;
    const std::size_t cols = a.empty() ? 0 : a[0].size();
    for (std::size_t j = 0; j < cols && rank < a.size(); ++j) {
        std::size_t piv = rank;
        while (piv < a.size() && a[piv][j] == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[rank]);
        u64 inv = inverse(a[rank][j], p);
        for (std::size_t i = rank + 1; i < a.size(); ++i) {
            if (a[i][j] == 0) continue;
            u64 f = mulmod(a[i][j], inv, p);
            for (std::size_t k = 0; k < cols; ++k) a[i][k] = (a[i][k] + p - mulmod(f, a[rank][k], p)) % p;
        }
        ++rank;
    }
    return rank;
}

inline u64 dot_fp(const std::vector<u64>& row, const std::vector<u64>& x, u64 p) {
    BigInt acc = 0;
    for (std::size_t k = 0; k < row.size(); ++k) acc += BigInt(row[k]) * x[k];
    return static_cast<u64>(acc % p);
}

// Hall's condition by enumerating every subset of rows.
inline bool hall_by_subsets(const std::vector<rkit::SparseRowFp>& rows) {
    const std::size_t n = rows.size();
    for (u64 mask = 1; mask < (u64{1} << n); ++mask) {
        std::vector<std::uint32_t> cols;
        for (std::size_t i = 0; i < n; ++i) {
            if ((mask >> i) & 1) {
                for (const auto& e : rows[i].entries) cols.push_back(e.column);
            }
        }
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        if (cols.size() < static_cast<std::size_t>(__builtin_popcountll(mask))) return false;
    }
    return true;
}

inline std::vector<rkit::KeyValue> random_pairs(std::mt19937_64& rng, std::size_t n, unsigned v,
                                                u64 universe = rkit::kMaxUniverse) {
    std::uniform_int_distribution<u64> key(0, universe - 1);
    std::map<u64, bool> seen;
    std::vector<rkit::KeyValue> out;
    const u64 mask = v >= 64 ? ~u64{0} : (u64{1} << v) - 1;
    while (out.size() < n) {
        u64 k = key(rng);
        if (seen.emplace(k, true).second) out.push_back({k, rng() & mask});
    }
    return out;
}

inline std::vector<u64> keys_of(const std::vector<rkit::KeyValue>& pairs) {
    std::vector<u64> out;
    out.reserve(pairs.size());
    for (const auto& kv : pairs) out.push_back(kv.key);
    return out;
}

inline std::vector<u64> values_of(const std::vector<rkit::KeyValue>& pairs) {
    std::vector<u64> out;
    out.reserve(pairs.size());
    for (const auto& kv : pairs) out.push_back(kv.value);
    return out;
}

}  // namespace ref
