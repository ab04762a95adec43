#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rkit/errors.hpp"
#include "rkit/field.hpp"

namespace rkit {

// Separates the independent uses of one seed.
enum class Domain : u64 {
    derive = 1,
    range = 2,
    dw_row = 3,
    dw_dummy = 4,
    coupon_key = 5,
    coupon_aug = 6,
    coupon_dummy = 7,
    entry_values = 8,
    permutation = 9,
    fingerprint = 10,
    kwise = 11,
    attempt = 12,
    group = 13,
    sample = 14,
};

// SplitMix64 finalizer.
constexpr u64 mix64(u64 x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline constexpr u64 kGolden = 0x9e3779b97f4a7c15ULL;

// 256-bit seed. The hex form is 64 digits: four 16-digit big-endian groups, group i giving words[i].
struct Seed {
    std::array<u64, 4> words{};

    static Seed from_u64(u64 x) {
        Seed s;
        for (auto& w : s.words) {
            x += kGolden;
            w = mix64(x);
        }
        return s;
    }

    static Seed from_hex(std::string_view hex) {
        if (hex.size() != 64) throw UsageError("seed must be exactly 64 hex characters");
        Seed s;
        for (std::size_t i = 0; i < 64; ++i) {
            char c = hex[i];
            u64 d;
            if (c >= '0' && c <= '9') d = static_cast<u64>(c - '0');
            else if (c >= 'a' && c <= 'f') d = static_cast<u64>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') d = static_cast<u64>(c - 'A' + 10);
            else throw UsageError("seed contains a non-hex character");
            s.words[i / 16] = (s.words[i / 16] << 4) | d;
        }
        return s;
    }

    std::string to_hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(64, '0');
        for (std::size_t i = 0; i < 64; ++i) {
            out[i] = digits[(words[i / 16] >> (60 - 4 * (i % 16))) & 0xf];
        }
        return out;
    }

    // Child seed for (domain, tag); children of distinct tags are unrelated.
    Seed derive(Domain domain, u64 tag) const;

    friend bool operator==(const Seed&, const Seed&) = default;
};

// Keyed 64-bit hash of (domain, key) under a seed: a chain of SplitMix64 finalizers
// absorbing one seed word per round.
constexpr u64 hash64(const Seed& s, Domain domain, u64 key) {
    u64 x = mix64(s.words[0] ^ (static_cast<u64>(domain) * kGolden));
    x = mix64(x ^ s.words[1] ^ key);
    x = mix64(x ^ s.words[2]);
    return mix64(x + s.words[3]);
}

inline Seed Seed::derive(Domain domain, u64 tag) const {
    Seed child;
    u64 base = hash64(*this, Domain::derive, hash64(*this, domain, tag));
    for (std::size_t i = 0; i < 4; ++i) child.words[i] = mix64(base + (i + 1) * kGolden);
    return child;
}

// Counter-based generator: SplitMix64 whose state starts at hash64(seed, domain, key).
class SeedStream {
public:
    SeedStream(const Seed& seed, Domain domain, u64 key) : state_(hash64(seed, domain, key)) {}

    u64 next() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform in [0, bound) by multiply-and-reject; bound >= 1.
    u64 below(u64 bound) {
        u128 product = static_cast<u128>(next()) * bound;
        u64 low = static_cast<u64>(product);
        if (low < bound) {
            u64 threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<u128>(next()) * bound;
                low = static_cast<u64>(product);
            }
        }
        return static_cast<u64>(product >> 64);
    }

private:
    u64 state_;
};

// Deterministic near-uniform map of key into [0, range) (multiply-shift of a 64-bit hash).
inline u64 hash_to_range(const Seed& seed, u64 key, u64 range) {
    if (range == 0) throw UsageError("hash_to_range: range must be positive");
    return static_cast<u64>((static_cast<u128>(hash64(seed, Domain::range, key)) * range) >> 64);
}

// Field of the k-wise polynomial families; keys are reduced into it.
inline constexpr u64 kKWiseModulus = (u64{1} << 61) - 1;

// Random polynomial of degree < k over F_p, evaluated by Horner's rule.
class KWisePoly {
public:
    KWisePoly(u64 modulus, std::vector<u64> coefficients) : p_(modulus), coef_(std::move(coefficients)) {
        if (!is_prime(p_) || p_ >= kModulusLimit) throw UsageError("KWisePoly: modulus must be a prime below 2^62");
        if (coef_.empty()) throw UsageError("KWisePoly: at least one coefficient required");
        for (auto& c : coef_) c %= p_;
    }

    static KWisePoly sample(const Seed& seed, unsigned k, u64 modulus = kKWiseModulus) {
        if (k == 0) throw UsageError("KWisePoly: independence k must be positive");
        SeedStream stream(seed, Domain::kwise, k);
        std::vector<u64> coef(k);
        for (auto& c : coef) c = stream.below(modulus);
        return KWisePoly(modulus, std::move(coef));
    }

    u64 modulus() const noexcept { return p_; }
    unsigned independence() const noexcept { return static_cast<unsigned>(coef_.size()); }
    const std::vector<u64>& coefficients() const noexcept { return coef_; }

    u64 operator()(u64 x) const noexcept {
        x %= p_;
        u64 acc = 0;
        for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) {
            acc = mulmod(acc, x, p_) + *it;
            if (acc >= p_) acc -= p_;
        }
        return acc;
    }

    // Evaluation scaled into [0, range).
    u64 to_range(u64 x, u64 range) const noexcept {
        return static_cast<u64>(static_cast<u128>((*this)(x)) * range / p_);
    }

    friend bool operator==(const KWisePoly&, const KWisePoly&) = default;

private:
    u64 p_;
    std::vector<u64> coef_;
};

inline FieldElement kwise_eval(const KWisePoly& h, u64 x) { return PrimeField(h.modulus()).element(h(x)); }

// A bijection on [0, m) with its inverse.
class SeededPermutation {
public:
    SeededPermutation() = default;
    SeededPermutation(std::vector<u32> forward) : forward_(std::move(forward)), inverse_(forward_.size()) {
        std::vector<bool> seen(forward_.size(), false);
        for (std::size_t j = 0; j < forward_.size(); ++j) {
            u32 target = forward_[j];
            if (target >= forward_.size() || seen[target]) throw IntegrityError("permutation table is not a bijection");
            seen[target] = true;
            inverse_[target] = static_cast<u32>(j);
        }
    }

    u32 size() const noexcept { return static_cast<u32>(forward_.size()); }
    u32 forward(u32 j) const noexcept { return forward_[j]; }
    u32 inverse(u32 j) const noexcept { return inverse_[j]; }
    const std::vector<u32>& forward_table() const noexcept { return forward_; }

    friend bool operator==(const SeededPermutation& a, const SeededPermutation& b) { return a.forward_ == b.forward_; }

private:
    std::vector<u32> forward_;
    std::vector<u32> inverse_;
};

// Fisher-Yates shuffle of the identity driven by SeedStream(seed, permutation, m).
inline SeededPermutation make_permutation(const Seed& seed, u64 m) {
    if (m == 0) throw UsageError("make_permutation: domain size must be positive");
    if (m > 0xffffffffULL) throw UsageError("make_permutation: domain size must fit in 32 bits");
    std::vector<u32> table(m);
    for (u64 i = 0; i < m; ++i) table[i] = static_cast<u32>(i);
    SeedStream stream(seed, Domain::permutation, m);
    for (u64 i = m - 1; i > 0; --i) {
        u64 j = stream.below(i + 1);
        std::swap(table[i], table[j]);
    }
    return SeededPermutation(std::move(table));
}

}  // namespace rkit
