#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#if defined(__AVX512IFMA__) && defined(__AVX512F__)
#include <immintrin.h>
#define RKIT_HAVE_IFMA 1
#endif

#include "rkit/detail/modular.hpp"

namespace rkit::detail {

// Row-major view: element (i, j) at data[i * stride + j].
struct MatrixView {
    u64* data;
    std::size_t stride;
    u64* row(std::size_t i) const { return data + i * stride; }
};

// C[i][j] -= sum_k L(i, k) * U(k, j) mod p, for i < rows, j < cols, k < depth.
// L(i, k) = lrow(i)[lcol[k]], U(k, j) = urow[k][j]; all values are residues.
struct GemmOperands {
    MatrixView c;            // rows of C start at c.row(0), columns at offset 0
    std::size_t rows;
    std::size_t cols;
    const u64* const* lrows;  // per C row: pointer to the row holding its multipliers
    const std::size_t* lcol;  // per k: column of the multiplier within lrows[i]
    const u64* const* urows;  // per k: pointer to the U row (already offset to column 0 of C)
    std::size_t depth;
};

inline void gemm_sub_generic(const GemmOperands& g, u64 p) {
    constexpr std::size_t kColumnBlock = 1024;
    for (std::size_t j0 = 0; j0 < g.cols; j0 += kColumnBlock) {
        std::size_t j1 = std::min(g.cols, j0 + kColumnBlock);
        for (std::size_t i = 0; i < g.rows; ++i) {
            u64* crow = g.c.row(i);
            const u64* lrow = g.lrows[i];
            for (std::size_t k = 0; k < g.depth; ++k) {
                u64 m = lrow[g.lcol[k]];
                if (m == 0) continue;
                ShoupMul f(p - m, p);
                const u64* urow = g.urows[k];
                for (std::size_t j = j0; j < j1; ++j) {
                    u64 s = crow[j] + f(urow[j]);
                    crow[j] = s >= p ? s - p : s;
                }
            }
        }
    }
}

#ifdef RKIT_HAVE_IFMA
// Fused multiply-add on 52-bit limbs: a product f * x splits into lo52 + hi52 * 2^52.
class IfmaGemm {
public:
    static constexpr std::size_t MR = 4;
    static constexpr std::size_t NR = 24;
    static constexpr std::size_t KC = 512;
    static constexpr std::size_t MC = 64;

    explicit IfmaGemm(u64 p)
        : p_(p), reduce_(p), r52_(static_cast<u64>((static_cast<u128>(1) << 52) % p), p) {}

    static bool supports(u64 p) { return p < (u64{1} << 52); }

    void operator()(const GemmOperands& g) {
        if (g.rows == 0 || g.cols == 0 || g.depth == 0) return;
        std::size_t strips = (g.cols + NR - 1) / NR;
        for (std::size_t pc = 0; pc < g.depth; pc += KC) {
            std::size_t kc = std::min(KC, g.depth - pc);
            pack_u(g, pc, kc, strips);
            for (std::size_t ic = 0; ic < g.rows; ic += MC) {
                std::size_t mc = std::min(MC, g.rows - ic);
                pack_l(g, ic, mc, pc, kc);
                for (std::size_t s = 0; s < strips; ++s) {
                    const u64* ustrip = upack_.data() + s * kc * NR;
                    std::size_t ncols = std::min(NR, g.cols - s * NR);
                    for (std::size_t ir = 0; ir < mc; ir += MR) {
                        std::size_t nrows = std::min(MR, mc - ir);
                        kernel(kc, lpack_.data() + ir * kc, ustrip, g, ic + ir, nrows, s * NR, ncols);
                    }
                }
            }
        }
    }

private:
    void pack_u(const GemmOperands& g, std::size_t pc, std::size_t kc, std::size_t strips) {
        upack_.assign(strips * kc * NR, 0);
        for (std::size_t s = 0; s < strips; ++s) {
            std::size_t j0 = s * NR;
            std::size_t ncols = std::min(NR, g.cols - j0);
            u64* dst = upack_.data() + s * kc * NR;
            for (std::size_t k = 0; k < kc; ++k) {
                const u64* src = g.urows[pc + k] + j0;
                std::copy(src, src + ncols, dst + k * NR);
            }
        }
    }

    // Negated multipliers, grouped MR rows at a time: lpack[(ir / MR) * kc * MR + k * MR + r].
    void pack_l(const GemmOperands& g, std::size_t ic, std::size_t mc, std::size_t pc, std::size_t kc) {
        std::size_t groups = (mc + MR - 1) / MR;
        lpack_.assign(groups * kc * MR, 0);
        for (std::size_t i = 0; i < mc; ++i) {
            const u64* lrow = g.lrows[ic + i];
            u64* dst = lpack_.data() + (i / MR) * kc * MR + (i % MR);
            for (std::size_t k = 0; k < kc; ++k) {
                u64 m = lrow[g.lcol[pc + k]];
                dst[k * MR] = m == 0 ? 0 : p_ - m;
            }
        }
    }

    void kernel(std::size_t kc, const u64* lp, const u64* up, const GemmOperands& g, std::size_t row0,
                std::size_t nrows, std::size_t col0, std::size_t ncols) {
        __m512i lo[MR][3];
        __m512i hi[MR][3];
        for (std::size_t r = 0; r < MR; ++r) {
            for (std::size_t c = 0; c < 3; ++c) lo[r][c] = hi[r][c] = _mm512_setzero_si512();
        }
        for (std::size_t k = 0; k < kc; ++k) {
            const u64* u = up + k * NR;
            __m512i x0 = _mm512_loadu_si512(u);
            __m512i x1 = _mm512_loadu_si512(u + 8);
            __m512i x2 = _mm512_loadu_si512(u + 16);
            for (std::size_t r = 0; r < MR; ++r) {
                __m512i f = _mm512_set1_epi64(static_cast<long long>(lp[k * MR + r]));
                lo[r][0] = _mm512_madd52lo_epu64(lo[r][0], f, x0);
                hi[r][0] = _mm512_madd52hi_epu64(hi[r][0], f, x0);
                lo[r][1] = _mm512_madd52lo_epu64(lo[r][1], f, x1);
                hi[r][1] = _mm512_madd52hi_epu64(hi[r][1], f, x1);
                lo[r][2] = _mm512_madd52lo_epu64(lo[r][2], f, x2);
                hi[r][2] = _mm512_madd52hi_epu64(hi[r][2], f, x2);
            }
        }
        alignas(64) u64 los[NR];
        alignas(64) u64 his[NR];
        for (std::size_t r = 0; r < nrows; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                _mm512_store_si512(los + 8 * c, lo[r][c]);
                _mm512_store_si512(his + 8 * c, hi[r][c]);
            }
            u64* crow = g.c.row(row0 + r) + col0;
            for (std::size_t j = 0; j < ncols; ++j) {
                u64 s = crow[j] + reduce_(los[j]);
                s = (s >= p_ ? s - p_ : s) + r52_(his[j]);
                crow[j] = s >= p_ ? s - p_ : s;
            }
        }
    }

    u64 p_;
    Barrett reduce_;
    ShoupMul r52_;
    std::vector<u64> upack_;
    std::vector<u64> lpack_;
};
#endif

// Dispatches to the fastest kernel valid for p.
class GemmEngine {
public:
    explicit GemmEngine(u64 p)
        : p_(p)
#ifdef RKIT_HAVE_IFMA
          ,
          ifma_(p)
#endif
    {
    }

    void operator()(const GemmOperands& g) {
#ifdef RKIT_HAVE_IFMA
        if (IfmaGemm::supports(p_)) {
            ifma_(g);
            return;
        }
#endif
        gemm_sub_generic(g, p_);
    }

private:
    u64 p_;
#ifdef RKIT_HAVE_IFMA
    IfmaGemm ifma_;
#endif
};

}  // namespace rkit::detail
