#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "rkit/detail/fp_gemm.hpp"
#include "rkit/detail/modular.hpp"
#include "rkit/field.hpp"

namespace rkit::detail {

// Dense row echelon form over F_p of an augmented matrix [A | b] by recursive
// right-looking elimination. Pivots are chosen at the leftmost available column,
// so the pivot set is the reduced-echelon pivot set of the row space of A.
class DenseEchelon {
public:
    DenseEchelon(const PrimeField& field, std::size_t rows, std::size_t cols)
        : field_(field),
          p_(field.modulus()),
          rows_(rows),
          cols_(cols),
          stride_(cols + 1),
          a_(rows * (cols + 1), 0),
          gemm_(field.modulus()) {}

    u64* row(std::size_t i) { return a_.data() + i * stride_; }
    u64& rhs(std::size_t i) { return a_[i * stride_ + cols_]; }

    void run() { factor(0, cols_ + 1); }

    std::size_t rank() const { return pivot_col_.size(); }
    const std::vector<std::size_t>& pivot_columns() const { return pivot_col_; }

    // Solution with zero free columns; meaningful for the independent rows.
    std::vector<u64> back_substitute() {
        std::vector<u64> x(cols_, 0);
        std::vector<ShoupMul> xs(rank());
        for (std::size_t k = rank(); k-- > 0;) {
            const u64* r = row(k);
            u64 acc = r[cols_];
            for (std::size_t kk = k + 1; kk < rank(); ++kk) {
                u64 u = r[pivot_col_[kk]];
                if (u != 0) acc = field_.sub(acc, xs[kk](u));
            }
            x[pivot_col_[k]] = acc;
            xs[k] = ShoupMul(acc, p_);
        }
        return x;
    }

private:
    static constexpr std::size_t kBaseWidth = 32;
    static constexpr std::size_t kTrsmBase = 16;

    void factor(std::size_t a, std::size_t e) {
        if (e - a <= kBaseWidth) {
            base_factor(a, e);
            return;
        }
        std::size_t mid = a + (e - a) / 2;
        std::size_t k0 = rank();
        factor(a, mid);
        std::size_t k1 = rank();
        if (k1 > k0) {
            trsm(k0, k1, mid, e);
            gemm(k1, rows_, k0, k1, mid, e);
        }
        factor(mid, e);
    }

    void base_factor(std::size_t a, std::size_t e) {
        for (std::size_t j = a; j < e && j < cols_; ++j) {
            std::size_t r = rank();
            std::size_t piv = r;
            while (piv < rows_ && row(piv)[j] == 0) ++piv;
            if (piv == rows_) continue;
            if (piv != r) std::swap_ranges(row(piv), row(piv) + stride_, row(r));
            u64* pr = row(r);
            u64 inv = field_.inv(pr[j]);
            ShoupMul scale(inv, p_);
            for (std::size_t jj = j + 1; jj < e; ++jj) pr[jj] = scale(pr[jj]);
            pr[j] = 1;
            for (std::size_t i = r + 1; i < rows_; ++i) {
                u64* ri = row(i);
                u64 m = ri[j];
                if (m == 0) continue;
                ShoupMul f(p_ - m, p_);
                for (std::size_t jj = j + 1; jj < e; ++jj) {
                    u64 s = ri[jj] + f(pr[jj]);
                    ri[jj] = s >= p_ ? s - p_ : s;
                }
            }
            pivot_col_.push_back(j);
            pivot_inv_.push_back(inv);
        }
    }

    // Turns rows k0..k1 (columns [c0, c1)) into their normalized echelon form.
    void trsm(std::size_t k0, std::size_t k1, std::size_t c0, std::size_t c1) {
        if (k1 - k0 <= kTrsmBase) {
            for (std::size_t k = k0; k < k1; ++k) {
                u64* rk = row(k);
                for (std::size_t kk = k0; kk < k; ++kk) {
                    u64 m = rk[pivot_col_[kk]];
                    if (m == 0) continue;
                    ShoupMul f(p_ - m, p_);
                    const u64* rkk = row(kk);
                    for (std::size_t j = c0; j < c1; ++j) {
                        u64 s = rk[j] + f(rkk[j]);
                        rk[j] = s >= p_ ? s - p_ : s;
                    }
                }
                ShoupMul scale(pivot_inv_[k], p_);
                for (std::size_t j = c0; j < c1; ++j) rk[j] = scale(rk[j]);
            }
            return;
        }
        std::size_t km = k0 + (k1 - k0) / 2;
        trsm(k0, km, c0, c1);
        gemm(km, k1, k0, km, c0, c1);
        trsm(km, k1, c0, c1);
    }

    // Rows [rb, re), columns [c0, c1) -= multipliers of pivots [k0, k1) times their rows.
    void gemm(std::size_t rb, std::size_t re, std::size_t k0, std::size_t k1, std::size_t c0, std::size_t c1) {
        if (rb >= re || c0 >= c1) return;
        lrows_.resize(re - rb);
        for (std::size_t i = rb; i < re; ++i) lrows_[i - rb] = row(i);
        lcol_.assign(pivot_col_.begin() + static_cast<std::ptrdiff_t>(k0),
                     pivot_col_.begin() + static_cast<std::ptrdiff_t>(k1));
        urows_.resize(k1 - k0);
        for (std::size_t k = k0; k < k1; ++k) urows_[k - k0] = row(k) + c0;
        GemmOperands g{MatrixView{row(rb) + c0, stride_}, re - rb, c1 - c0, lrows_.data(), lcol_.data(),
                       urows_.data(), k1 - k0};
        gemm_(g);
    }

    PrimeField field_;
    u64 p_;
    std::size_t rows_;
    std::size_t cols_;
    std::size_t stride_;
    std::vector<u64> a_;
    std::vector<std::size_t> pivot_col_;
    std::vector<u64> pivot_inv_;
    GemmEngine gemm_;
    std::vector<const u64*> lrows_;
    std::vector<std::size_t> lcol_;
    std::vector<const u64*> urows_;
};

}  // namespace rkit::detail
