#pragma once

#include <cstdint>
#include <string>

#include "rkit/errors.hpp"

namespace rkit {

using u64 = std::uint64_t;
using u32 = std::uint32_t;
using u128 = unsigned __int128;

inline constexpr u64 kModulusLimit = u64{1} << 62;

constexpr u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

constexpr u64 powmod(u64 base, u64 exp, u64 m) {
    u64 result = 1 % m;
    base %= m;
    while (exp != 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

// Deterministic Miller-Rabin; the seven bases are complete for all 64-bit inputs.
constexpr bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
        u64 x = powmod(a, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// Smallest prime >= v, for 2 <= v < 2^62.
inline u64 next_prime(u64 v) {
    if (v < 2) throw UsageError("next_prime: argument must be at least 2");
    if (v >= kModulusLimit) throw RangeError("next_prime: argument must be below 2^62");
    for (u64 p = v; p < kModulusLimit; ++p) {
        if (is_prime(p)) return p;
    }
    throw RangeError("next_prime: no prime below 2^62 at or above " + std::to_string(v));
}

inline unsigned bit_length(u64 x) { return x == 0 ? 0 : 64 - static_cast<unsigned>(__builtin_clzll(x)); }

class FieldElement;

// Arithmetic on raw residues in [0, p).
class PrimeField {
public:
    explicit PrimeField(u64 p) : p_(p) {
        if (p < 2 || p >= kModulusLimit) throw UsageError("field modulus must lie in [2, 2^62)");
        if (!is_prime(p)) throw UsageError("field modulus " + std::to_string(p) + " is not prime");
    }

    u64 modulus() const noexcept { return p_; }

    u64 reduce(u64 x) const noexcept { return x % p_; }
    u64 add(u64 a, u64 b) const noexcept {
        u64 s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + p_ - b; }
    u64 neg(u64 a) const noexcept { return a == 0 ? 0 : p_ - a; }
    u64 mul(u64 a, u64 b) const noexcept { return mulmod(a, b, p_); }
    u64 pow(u64 a, u64 e) const noexcept { return powmod(a, e, p_); }
    u64 inv(u64 a) const {
        if (a % p_ == 0) throw DomainError("inverse of zero");
        return powmod(a, p_ - 2, p_);
    }

    FieldElement element(u64 value) const;

    friend bool operator==(const PrimeField&, const PrimeField&) = default;

private:
    u64 p_;
};

// A residue tagged with its modulus; mixing moduli is a usage error.
class FieldElement {
public:
    FieldElement(u64 value, const PrimeField& field) : value_(value % field.modulus()), p_(field.modulus()) {}

    u64 value() const noexcept { return value_; }
    u64 modulus() const noexcept { return p_; }

    friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
        check(a, b);
        u64 s = a.value_ + b.value_;
        return {s >= a.p_ ? s - a.p_ : s, a.p_};
    }
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
        check(a, b);
        return {a.value_ >= b.value_ ? a.value_ - b.value_ : a.value_ + a.p_ - b.value_, a.p_};
    }
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
        check(a, b);
        return {mulmod(a.value_, b.value_, a.p_), a.p_};
    }
    friend FieldElement operator/(const FieldElement& a, const FieldElement& b) { return a * b.inv(); }
    FieldElement operator-() const { return {value_ == 0 ? 0 : p_ - value_, p_}; }

    FieldElement inv() const {
        if (value_ == 0) throw DomainError("inverse of zero");
        return {powmod(value_, p_ - 2, p_), p_};
    }
    FieldElement pow(u64 e) const { return {powmod(value_, e, p_), p_}; }

    friend bool operator==(const FieldElement&, const FieldElement&) = default;

private:
    FieldElement(u64 value, u64 p) : value_(value), p_(p) {}

    static void check(const FieldElement& a, const FieldElement& b) {
        if (a.p_ != b.p_) throw UsageError("field elements have different moduli");
    }

    u64 value_;
    u64 p_;
};

inline FieldElement PrimeField::element(u64 value) const { return FieldElement(value, *this); }

}  // namespace rkit
