#pragma once

#include "rkit/field.hpp"

namespace rkit::detail {

inline u64 mulhi(u64 a, u64 b) { return static_cast<u64>((static_cast<u128>(a) * b) >> 64); }

// Reduction of arbitrary 64-bit values modulo a fixed p < 2^62.
class Barrett {
public:
    explicit Barrett(u64 p) : p_(p), mu_(static_cast<u64>((static_cast<u128>(1) << 64) / p)) {}
    u64 operator()(u64 x) const {
        u64 r = x - mulhi(x, mu_) * p_;
        while (r >= p_) r -= p_;
        return r;
    }
    u64 modulus() const { return p_; }

private:
    u64 p_;
    u64 mu_;
};

// Multiplication by a fixed residue w with a precomputed quotient (Shoup's trick).
struct ShoupMul {
    u64 w = 0;
    u64 wq = 0;
    u64 p = 1;

    ShoupMul() = default;
    ShoupMul(u64 w_, u64 p_) : w(w_), wq(static_cast<u64>((static_cast<u128>(w_) << 64) / p_)), p(p_) {}

    // x * w mod p for any 64-bit x.
    u64 operator()(u64 x) const {
        u64 r = x * w - mulhi(x, wq) * p;
        return r >= p ? r - p : r;
    }
};

}  // namespace rkit::detail
