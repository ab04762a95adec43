#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rkit/detail/fp_echelon.hpp"
#include "rkit/errors.hpp"
#include "rkit/field.hpp"

namespace rkit {

struct SparseEntry {
    u32 column;
    u64 value;
    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sorted (column, nonzero coefficient) pairs over F_p.
struct SparseRowFp {
    std::vector<SparseEntry> entries;
    friend bool operator==(const SparseRowFp&, const SparseRowFp&) = default;
};

// GF(2) row whose support lies in two ell-bit column blocks.
struct TwoBlockRowGF2 {
    u32 block_a = 0;
    u32 block_b = 0;
    u64 pattern_a = 0;
    u64 pattern_b = 0;
    friend bool operator==(const TwoBlockRowGF2&, const TwoBlockRowGF2&) = default;
};

enum class SolveStatus { full_rank, rank_deficient };

template <class T>
struct SolveOutcome {
    std::vector<T> solution;         // length m, zero at free columns
    std::vector<u32> pivot_columns;  // ascending
    SolveStatus status = SolveStatus::rank_deficient;
    std::size_t rank = 0;

    bool full_rank() const { return status == SolveStatus::full_rank; }
};

inline SolveOutcome<u64> solve_fp(const PrimeField& field, std::span<const SparseRowFp> rows,
                                  std::span<const u64> rhs, u32 m) {
    if (rows.size() != rhs.size()) throw UsageError("solve_fp: one right-hand side per row required");
    if (rows.size() > m) throw UsageError("solve_fp: more rows than columns");
    const u64 p = field.modulus();
    detail::DenseEchelon ech(field, rows.size(), m);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        u64* dst = ech.row(i);
        long long prev = -1;
        for (const auto& e : rows[i].entries) {
            if (e.column >= m) throw UsageError("solve_fp: column index out of range");
            if (static_cast<long long>(e.column) <= prev) throw UsageError("solve_fp: row columns must increase");
            if (e.value == 0 || e.value >= p) throw UsageError("solve_fp: coefficients must be nonzero residues");
            prev = e.column;
            dst[e.column] = e.value;
        }
        if (rhs[i] >= p) throw UsageError("solve_fp: right-hand side is not a residue");
        ech.rhs(i) = rhs[i];
    }
    ech.run();
    SolveOutcome<u64> out;
    out.rank = ech.rank();
    out.status = out.rank == rows.size() ? SolveStatus::full_rank : SolveStatus::rank_deficient;
    out.solution = ech.back_substitute();
    out.pivot_columns.assign(ech.pivot_columns().begin(), ech.pivot_columns().end());
    return out;
}

inline SolveOutcome<u64> solve_fp(std::span<const SparseRowFp> rows, std::span<const FieldElement> rhs, u32 m) {
    if (rhs.empty()) return solve_fp(PrimeField(2), rows, std::span<const u64>{}, m);
    std::vector<u64> raw(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        if (rhs[i].modulus() != rhs[0].modulus()) throw UsageError("solve_fp: right-hand sides have different moduli");
        raw[i] = rhs[i].value();
    }
    return solve_fp(PrimeField(rhs[0].modulus()), rows, raw, m);
}

namespace detail {

struct Gf2Pivot {
    u32 first_word;
    u32 words;
    std::size_t offset;
    u64 rhs;
};

inline void validate_gf2(std::span<const TwoBlockRowGF2> rows, u32 m, u32 ell) {
    if (ell == 0 || ell > 64) throw UsageError("solve_gf2: block width must lie in [1, 64]");
    if (m % ell != 0) throw UsageError("solve_gf2: column count must be a multiple of the block width");
    if (rows.size() > m) throw UsageError("solve_gf2: more rows than columns");
    u32 blocks = m / ell;
    u64 mask = ell == 64 ? ~u64{0} : (u64{1} << ell) - 1;
    for (const auto& r : rows) {
        if (r.block_a >= blocks || r.block_b >= blocks) throw UsageError("solve_gf2: block index out of range");
        if (r.block_a == r.block_b) throw UsageError("solve_gf2: row blocks must differ");
        if ((r.pattern_a & ~mask) != 0 || (r.pattern_b & ~mask) != 0)
            throw UsageError("solve_gf2: pattern wider than the block");
        if ((r.pattern_a | r.pattern_b) == 0) throw UsageError("solve_gf2: empty row");
    }
}

inline void set_pattern(u64* words, u64 first_bit, u64 pattern) {
    while (pattern != 0) {
        int b = std::countr_zero(pattern);
        pattern &= pattern - 1;
        u64 bit = first_bit + static_cast<u64>(b);
        words[bit / 64] |= u64{1} << (bit % 64);
    }
}

}  // namespace detail

// Solves v GF(2) systems sharing one matrix: bit j of rhs[i] is the right-hand side of
// row i in plane j, and bit j of solution[c] is column c's value in plane j.
// Rows are inserted in order of leading block into an echelon basis; each row only
// touches the words between its two blocks, so banded inputs solve in near-linear time.
inline SolveOutcome<u64> solve_gf2_planes(std::span<const TwoBlockRowGF2> rows, std::span<const u64> rhs, u32 m,
                                          u32 ell) {
    if (rows.size() != rhs.size()) throw UsageError("solve_gf2: one right-hand side per row required");
    detail::validate_gf2(rows, m, ell);
    const std::size_t total_words = (static_cast<std::size_t>(m) + 63) / 64;

    std::vector<u32> order(rows.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](u32 x, u32 y) {
        return std::min(rows[x].block_a, rows[x].block_b) < std::min(rows[y].block_a, rows[y].block_b);
    });

    std::vector<int> pivot_of(m, -1);
    std::vector<detail::Gf2Pivot> pivots;
    pivots.reserve(rows.size());
    std::vector<u64> pool;
    std::vector<u64> buf(total_words, 0);

    for (u32 idx : order) {
        const auto& r = rows[idx];
        u64 bit_a = static_cast<u64>(r.block_a) * ell;
        u64 bit_b = static_cast<u64>(r.block_b) * ell;
        detail::set_pattern(buf.data(), bit_a, r.pattern_a);
        detail::set_pattern(buf.data(), bit_b, r.pattern_b);
        std::size_t lo = std::min(bit_a, bit_b) / 64;
        std::size_t hi = (std::max(bit_a, bit_b) + ell - 1) / 64 + 1;
        u64 value = rhs[idx];
        for (;;) {
            while (lo < hi && buf[lo] == 0) ++lo;
            if (lo == hi) break;
            u32 col = static_cast<u32>(lo * 64 + static_cast<std::size_t>(std::countr_zero(buf[lo])));
            int pv = pivot_of[col];
            if (pv < 0) {
                while (buf[hi - 1] == 0) --hi;
                detail::Gf2Pivot piv{static_cast<u32>(lo), static_cast<u32>(hi - lo), pool.size(), value};
                pool.insert(pool.end(), buf.begin() + static_cast<std::ptrdiff_t>(lo),
                            buf.begin() + static_cast<std::ptrdiff_t>(hi));
                std::fill(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi), 0);
                pivot_of[col] = static_cast<int>(pivots.size());
                pivots.push_back(piv);
                break;
            }
            const auto& piv = pivots[static_cast<std::size_t>(pv)];
            const u64* src = pool.data() + piv.offset;
            for (u32 w = 0; w < piv.words; ++w) buf[piv.first_word + w] ^= src[w];
            hi = std::max<std::size_t>(hi, piv.first_word + piv.words);
            value ^= piv.rhs;
        }
    }

    SolveOutcome<u64> out;
    out.rank = pivots.size();
    out.status = out.rank == rows.size() ? SolveStatus::full_rank : SolveStatus::rank_deficient;
    out.solution.assign(m, 0);
    for (u32 c = m; c-- > 0;) {
        int pv = pivot_of[c];
        if (pv < 0) continue;
        const auto& piv = pivots[static_cast<std::size_t>(pv)];
        const u64* src = pool.data() + piv.offset;
        u64 value = piv.rhs;
        for (u32 w = 0; w < piv.words; ++w) {
            u64 word = src[w];
            while (word != 0) {
                u32 j = (piv.first_word + w) * 64 + static_cast<u32>(std::countr_zero(word));
                word &= word - 1;
                if (j != c) value ^= out.solution[j];
            }
        }
        out.solution[c] = value;
    }
    for (u32 c = 0; c < m; ++c) {
        if (pivot_of[c] >= 0) out.pivot_columns.push_back(c);
    }
    return out;
}

// Single-plane form: rhs_bits[i] in {0, 1}; solution entries are 0 or 1.
inline SolveOutcome<u64> solve_gf2(std::span<const TwoBlockRowGF2> rows, std::span<const std::uint8_t> rhs_bits, u32 m,
                                   u32 ell) {
    std::vector<u64> planes(rhs_bits.size());
    for (std::size_t i = 0; i < rhs_bits.size(); ++i) {
        if (rhs_bits[i] > 1) throw UsageError("solve_gf2: right-hand side bits must be 0 or 1");
        planes[i] = rhs_bits[i];
    }
    return solve_gf2_planes(rows, planes, m, ell);
}

// Row-major dense matrix over F_p.
struct DenseMatrixFp {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<u64> values;

    DenseMatrixFp() = default;
    DenseMatrixFp(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0) {}
    u64& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    u64 at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// Rank by textbook Gaussian elimination with scalar arithmetic.
inline std::size_t rank_dense(const PrimeField& field, DenseMatrixFp a) {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < a.cols && rank < a.rows; ++j) {
        std::size_t piv = rank;
        while (piv < a.rows && a.at(piv, j) % field.modulus() == 0) ++piv;
        if (piv == a.rows) continue;
        for (std::size_t jj = 0; jj < a.cols; ++jj) std::swap(a.at(piv, jj), a.at(rank, jj));
        u64 inv = field.inv(a.at(rank, j));
        for (std::size_t i = rank + 1; i < a.rows; ++i) {
            u64 f = field.mul(a.at(i, j) % field.modulus(), inv);
            if (f == 0) continue;
            for (std::size_t jj = j; jj < a.cols; ++jj) {
                a.at(i, jj) = field.sub(a.at(i, jj) % field.modulus(), field.mul(f, a.at(rank, jj) % field.modulus()));
            }
        }
        ++rank;
    }
    return rank;
}

}  // namespace rkit
