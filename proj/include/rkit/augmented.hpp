#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rkit/bits.hpp"
#include "rkit/container.hpp"
#include "rkit/errors.hpp"
#include "rkit/field.hpp"
#include "rkit/hashing.hpp"
#include "rkit/linalg.hpp"
#include "rkit/retrieval.hpp"
#include "rkit/rowgen.hpp"

namespace rkit {

struct AugmentedConfig {
    u64 n = 0;
    u64 c = 4;
    u64 alpha = 4;
    u64 value_range = 0;  // V: values lie in [0, V)
    u64 gamma = 0;        // 0 selects max(3, ceil(log_n V))
    u64 universe = kMaxUniverse;
    unsigned max_attempts = 32;
    bool allow_small_v = false;

    u64 resolved_gamma() const { return gamma != 0 ? gamma : gamma_for(n, value_range); }
    u64 field_order() const {
        if (value_range < 2) throw ConfigError("value range V must be at least 2");
        return next_prime(value_range);
    }

    void validate() const {
        if (c < 2) throw ConfigError("c must exceed 1");
        if (n < c || n % c != 0) throw ConfigError("c must divide n");
        if (alpha == 0) throw ConfigError("alpha must be positive");
        if (value_range < 2) throw ConfigError("value range V must be at least 2");
        if (value_range >= kModulusLimit - 64) throw ConfigError("value range V must stay below 2^62");
        if (universe == 0 || universe > kMaxUniverse) throw ConfigError("key universe must lie in [1, 2^61 - 1]");
        if (max_attempts == 0) throw ConfigError("at least one build attempt is required");
        if (n > 0xffffffffULL) throw ConfigError("n must fit in 32 bits");
        u128 cube = static_cast<u128>(n) * n * n;
        if (!allow_small_v && static_cast<u128>(value_range) < cube)
            throw ConfigError("value range V must be at least n^3; use the small-V split path or allow_small_v");
    }
};

// Group-packed field elements: each group of k elements is stored as one base-p integer
// in the minimal number of bits.
class PackedMemory {
public:
    using BigInt = boost::multiprecision::cpp_int;

    PackedMemory() = default;

    static unsigned group_width(u64 p, unsigned k) {
        BigInt power = 1;
        for (unsigned i = 0; i < k; ++i) power *= p;
        return static_cast<unsigned>(boost::multiprecision::msb(BigInt(power - 1)) + 1);
    }

    static u64 total_bits(u64 p, unsigned k, std::size_t count) {
        std::size_t tail = count % k;
        return u64{count / k} * group_width(p, k) + (tail == 0 ? 0 : group_width(p, static_cast<unsigned>(tail)));
    }

    static void check_shape(u64 p, unsigned k) {
        if (k == 0) throw ConfigError("group size k must be positive");
        if (static_cast<double>(k) * std::log2(static_cast<double>(p)) >= 4096)
            throw ConfigError("group overflow: k * log2(p) must stay below 4096 bits");
    }

    static PackedMemory pack(std::span<const u64> elements, u64 p, unsigned k) {
        check_shape(p, k);
        PackedMemory pm;
        pm.p_ = p;
        pm.k_ = k;
        pm.count_ = elements.size();
        pm.layout();
        pm.words_.assign(words_for_bits(pm.bits()), 0);
        for (std::size_t g = 0; g < pm.groups(); ++g) {
            BigInt acc = 0;
            std::size_t lo = g * k;
            std::size_t hi = std::min(pm.count_, lo + k);
            for (std::size_t i = hi; i-- > lo;) {
                if (elements[i] >= p) throw UsageError("pack_memory: element is not a residue");
                acc = acc * p + elements[i];
            }
            u64 at = pm.offsets_[g];
            unsigned width = pm.width_of(g);
            for (unsigned done = 0; done < width; done += 64) {
                unsigned chunk = std::min(64u, width - done);
                write_bits(pm.words_.data(), at + done, chunk, static_cast<u64>(acc & u64{~u64{0}}));
                acc >>= 64;
            }
        }
        return pm;
    }

    static PackedMemory from_words(u64 p, unsigned k, std::size_t count, std::vector<u64> words) {
        check_shape(p, k);
        PackedMemory pm;
        pm.p_ = p;
        pm.k_ = k;
        pm.count_ = count;
        pm.layout();
        if (words.size() != words_for_bits(pm.bits())) throw IntegrityError("packed memory length mismatch");
        pm.words_ = std::move(words);
        return pm;
    }

    u64 modulus() const noexcept { return p_; }
    unsigned k() const noexcept { return k_; }
    std::size_t size() const noexcept { return count_; }
    std::size_t groups() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    u64 bits() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
    const std::vector<u64>& words() const noexcept { return words_; }

    std::vector<u64> unpack_group(std::size_t g) const {
        if (g >= groups()) throw UsageError("unpack_group: group index out of range");
        BigInt acc = 0;
        u64 at = offsets_[g];
        unsigned width = width_of(g);
        for (unsigned done = (width - 1) / 64 * 64 + 64; done > 0;) {
            done -= 64;
            unsigned chunk = std::min(64u, width - done);
            acc = (acc << 64) | read_bits(words_.data(), at + done, chunk);
        }
        std::size_t lo = g * k_;
        std::size_t hi = std::min(count_, lo + k_);
        std::vector<u64> out;
        out.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
            BigInt q, r;
            boost::multiprecision::divide_qr(acc, BigInt(p_), q, r);
            out.push_back(static_cast<u64>(r));
            acc = std::move(q);
        }
        if (acc != 0) throw IntegrityError("packed memory group exceeds its range");
        return out;
    }

    u64 element(std::size_t i) const {
        if (i >= count_) throw UsageError("packed memory index out of range");
        return unpack_group(i / k_)[i % k_];
    }

    std::vector<u64> unpack_all() const {
        std::vector<u64> out;
        out.reserve(count_);
        for (std::size_t g = 0; g < groups(); ++g) {
            auto part = unpack_group(g);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }

private:
    void layout() {
        std::size_t full = count_ / k_;
        std::size_t tail = count_ % k_;
        unsigned full_width = group_width(p_, k_);
        unsigned tail_width = tail == 0 ? 0 : group_width(p_, static_cast<unsigned>(tail));
        offsets_.assign(1, 0);
        for (std::size_t g = 0; g < full; ++g) offsets_.push_back(offsets_.back() + full_width);
        if (tail != 0) offsets_.push_back(offsets_.back() + tail_width);
    }
    unsigned width_of(std::size_t g) const { return static_cast<unsigned>(offsets_[g + 1] - offsets_[g]); }

    u64 p_ = 0;
    unsigned k_ = 0;
    std::size_t count_ = 0;
    std::vector<u64> offsets_;
    std::vector<u64> words_;
};

class AugmentedStructure;

namespace detail {
struct AugmentedAccess;
}

// n field elements answering n - n/c keyed queries and n/c indexed slots.
class AugmentedStructure {
public:
    AugmentedStructure() = default;

    const AugmentedConfig& config() const noexcept { return config_; }
    const AugmentedMatrixParams& matrix() const noexcept { return params_; }
    u64 field_order() const noexcept { return params_.p; }
    const Seed& seed() const noexcept { return params_.seed; }
    unsigned attempts() const noexcept { return attempts_; }
    const std::vector<u64>& memory() const noexcept { return memory_; }
    std::vector<u64>& mutable_memory() noexcept { return memory_; }
    u64 slot_count() const noexcept { return params_.block_count(); }
    unsigned element_bits() const noexcept { return bit_length(params_.p - 1); }

    u64 evaluate(const SparseRowFp& row, unsigned* ops = nullptr) const {
        const u64 p = params_.p;
        u64 acc = 0;
        for (const auto& e : row.entries) {
            acc += mulmod(e.value, memory_[e.column], p);
            if (acc >= p) acc -= p;
        }
        if (ops) *ops = static_cast<unsigned>(row.entries.size());
        return acc;
    }

    u64 query_key(u64 key, unsigned* ops = nullptr) const { return evaluate(coupon_row(params_, key), ops); }

    u64 query_aug(u64 j, unsigned* ops = nullptr) const {
        if (j >= slot_count()) throw UsageError("augmented index out of range");
        return evaluate(augmented_row(params_, j), ops);
    }

    PackedMemory pack_memory(unsigned k) const { return PackedMemory::pack(memory_, params_.p, k); }

    // packed_k = 0 stores one element per ceil(log2 p)-bit field.
    void write_body(ByteWriter& w, bool with_seed, unsigned packed_k = 0, SpaceReport* acct = nullptr) const;
    static AugmentedStructure read_body(ByteReader& r, const Seed* external_seed = nullptr,
                                        std::vector<SeededPermutation>* external_perms = nullptr);

    Bytes to_bytes(unsigned packed_k = 0) const {
        ByteWriter w;
        write_body(w, true, packed_k);
        return frame_container(StructureKind::augmented, packed_k != 0 ? 1 : 0, w.bytes());
    }
    static AugmentedStructure from_bytes(std::span<const std::uint8_t> bytes) {
        auto view = open_container(bytes);
        if (view.kind != StructureKind::augmented) throw IntegrityError("container does not hold an augmented structure");
        ByteReader r(view.body);
        auto s = read_body(r);
        r.expect_end();
        if ((view.flags & 1) != (s.stored_packed_ ? 1 : 0)) throw IntegrityError("packed-memory flag mismatch");
        return s;
    }

private:
    friend struct detail::AugmentedAccess;

    AugmentedConfig config_;
    AugmentedMatrixParams params_;
    unsigned attempts_ = 0;
    std::vector<u64> memory_;
    bool stored_packed_ = false;
};

namespace detail {

struct AugmentedAccess {
    static AugmentedStructure make(const AugmentedConfig& cfg, AugmentedMatrixParams params, unsigned attempts,
                                   std::vector<u64> memory) {
        AugmentedStructure s;
        s.config_ = cfg;
        s.params_ = std::move(params);
        s.attempts_ = attempts;
        s.memory_ = std::move(memory);
        return s;
    }
    static void set_packed(AugmentedStructure& s, bool packed) { s.stored_packed_ = packed; }
};

// Rows of the square system: retrieval keys then augmented indices.
inline std::vector<SparseRowFp> augmented_system(const AugmentedMatrixParams& params, std::span<const u64> keys) {
    std::vector<SparseRowFp> rows;
    rows.reserve(params.n);
    for (u64 k : keys) rows.push_back(coupon_row(params, k));
    for (u64 j = 0; j < params.block_count(); ++j) rows.push_back(augmented_row(params, j));
    return rows;
}

}  // namespace detail

// Solves one attempt over the given rows; empty when the realized matrix is singular.
inline std::optional<std::vector<u64>> solve_augmented_rows(const AugmentedMatrixParams& params,
                                                            std::span<const SparseRowFp> rows,
                                                            std::span<const u64> rhs) {
    auto solved = solve_fp(PrimeField(params.p), rows, rhs, static_cast<u32>(params.n));
    if (!solved.full_rank()) return std::nullopt;
    return std::move(solved.solution);
}

inline std::optional<std::vector<u64>> solve_augmented_attempt(const AugmentedMatrixParams& params,
                                                               std::span<const u64> keys, std::span<const u64> rhs) {
    return solve_augmented_rows(params, detail::augmented_system(params, keys), rhs);
}

inline AugmentedStructure build_augmented(std::span<const KeyValue> retrieval_pairs, std::span<const u64> aug_values,
                                          const AugmentedConfig& cfg, const Seed& master_seed) {
    cfg.validate();
    const u64 slots = cfg.n / cfg.c;
    if (retrieval_pairs.size() != cfg.n - slots)
        throw UsageError("expected n - n/c = " + std::to_string(cfg.n - slots) + " retrieval pairs");
    if (aug_values.size() != slots) throw UsageError("expected n/c = " + std::to_string(slots) + " augmented values");
    std::vector<u64> keys;
    std::vector<u64> rhs;
    keys.reserve(retrieval_pairs.size());
    rhs.reserve(cfg.n);
    for (const auto& kv : retrieval_pairs) {
        if (kv.key >= cfg.universe) throw UsageError("key " + std::to_string(kv.key) + " outside the universe");
        if (kv.value >= cfg.value_range) throw UsageError("value " + std::to_string(kv.value) + " not below V");
        keys.push_back(kv.key);
        rhs.push_back(kv.value);
    }
    for (u64 a : aug_values) {
        if (a >= cfg.value_range) throw UsageError("augmented value " + std::to_string(a) + " not below V");
        rhs.push_back(a);
    }
    {
        auto sorted = keys;
        std::sort(sorted.begin(), sorted.end());
        auto dup = std::adjacent_find(sorted.begin(), sorted.end());
        if (dup != sorted.end()) throw UsageError("duplicate key " + std::to_string(*dup));
    }
    const u64 p = cfg.field_order();
    const u64 gamma = cfg.resolved_gamma();
    for (unsigned attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        auto params = AugmentedMatrixParams::make(cfg.n, cfg.c, gamma, cfg.alpha, p, master_seed.derive(Domain::attempt, attempt));
        auto memory = solve_augmented_attempt(params, keys, rhs);
        if (memory) return detail::AugmentedAccess::make(cfg, std::move(params), attempt + 1, std::move(*memory));
    }
    throw BuildFailure("augmented build failed: all " + std::to_string(cfg.max_attempts) +
                           " attempts produced a singular matrix (n=" + std::to_string(cfg.n) +
                           ", c=" + std::to_string(cfg.c) + ", p=" + std::to_string(p) + ")",
                       cfg.max_attempts);
}

inline u64 query_key(const AugmentedStructure& s, u64 key) { return s.query_key(key); }
inline u64 query_aug(const AugmentedStructure& s, u64 j) { return s.query_aug(j); }
inline PackedMemory pack_memory(const AugmentedStructure& s, unsigned k) { return s.pack_memory(k); }
inline std::vector<u64> unpack_group(const PackedMemory& pm, std::size_t g) { return pm.unpack_group(g); }

// Body layout (64-bit words): config[10], seed[4] (optional), memory section. The memory
// section is a packing word (0 or k) followed by either n fields of ceil(log2 p) bits or
// the group-packed words.
inline void AugmentedStructure::write_body(ByteWriter& w, bool with_seed, unsigned packed_k, SpaceReport* acct) const {
    w.put_u64(config_.n);
    w.put_u64(config_.c);
    w.put_u64(config_.alpha);
    w.put_u64(config_.value_range);
    w.put_u64(params_.gamma);
    w.put_u64(params_.p);
    w.put_u64(config_.universe);
    w.put_u64(config_.max_attempts);
    w.put_u64(attempts_);
    w.put_u64(config_.allow_small_v ? 1 : 0);
    if (with_seed) w.put_words(std::vector<u64>(params_.seed.words.begin(), params_.seed.words.end()));
    w.put_u64(packed_k);
    u64 payload = 0;
    std::size_t words = 0;
    if (packed_k == 0) {
        PackedArray fields(memory_.size(), element_bits());
        for (std::size_t i = 0; i < memory_.size(); ++i) fields.set(i, memory_[i]);
        w.put_words(fields.words());
        payload = u64{memory_.size()} * element_bits();
        words = fields.words().size();
    } else {
        auto pm = pack_memory(packed_k);
        w.put_words(pm.words());
        payload = pm.bits();
        words = pm.words().size();
    }
    if (acct) {
        acct->n = config_.n;
        acct->seed_bits += with_seed ? 256 : 0;
        acct->payload_bits += payload;
        acct->overhead_bits += 11 * 64 + (words * 64 - payload);
    }
}

inline AugmentedStructure AugmentedStructure::read_body(ByteReader& r, const Seed* external_seed,
                                                        std::vector<SeededPermutation>* external_perms) {
    AugmentedConfig cfg;
    cfg.n = r.get_u64();
    cfg.c = r.get_u64();
    cfg.alpha = r.get_u64();
    cfg.value_range = r.get_u64();
    cfg.gamma = r.get_u64();
    u64 p = r.get_u64();
    cfg.universe = r.get_u64();
    u64 max_attempts = r.get_u64();
    u64 attempts = r.get_u64();
    u64 small = r.get_u64();
    if (max_attempts == 0 || max_attempts > 0xffffffffULL || attempts > max_attempts || small > 1)
        throw IntegrityError("augmented parameters out of range");
    cfg.max_attempts = static_cast<unsigned>(max_attempts);
    cfg.allow_small_v = small == 1;
    try {
        cfg.validate();
        if (p != cfg.field_order() || cfg.gamma < 3) throw ConfigError("field order mismatch");
        if (cfg.n > (u64{1} << 26)) throw ConfigError("n too large");
        if (cfg.alpha * cfg.c * cfg.c * cfg.gamma > (u64{1} << 20)) throw ConfigError("permutation count too large");
    } catch (const Error& e) {
        throw IntegrityError(std::string("augmented parameters invalid: ") + e.what());
    }
    Seed seed;
    if (external_seed) {
        seed = *external_seed;
    } else {
        auto words = r.get_words(4);
        std::copy(words.begin(), words.end(), seed.words.begin());
    }
    u64 packed_k = r.get_u64();
    std::vector<u64> memory;
    unsigned width = bit_length(p - 1);
    if (packed_k == 0) {
        PackedArray fields(static_cast<std::size_t>(cfg.n), width, r.get_words(words_for_bits(cfg.n * width)));
        memory.resize(static_cast<std::size_t>(cfg.n));
        for (std::size_t i = 0; i < memory.size(); ++i) memory[i] = fields.get(i);
    } else {
        if (packed_k > 4096) throw IntegrityError("packed group size out of range");
        auto k = static_cast<unsigned>(packed_k);
        u64 bits = 0;
        try {
            PackedMemory::check_shape(p, k);
            bits = PackedMemory::total_bits(p, k, static_cast<std::size_t>(cfg.n));
        } catch (const Error& e) {
            throw IntegrityError(std::string("packed memory invalid: ") + e.what());
        }
        auto pm = PackedMemory::from_words(p, k, static_cast<std::size_t>(cfg.n), r.get_words(words_for_bits(bits)));
        memory = pm.unpack_all();
    }
    for (u64 x : memory) {
        if (x >= p) throw IntegrityError("memory element is not a field residue");
    }
    auto params = external_perms ? AugmentedMatrixParams::with_permutations(cfg.n, cfg.c, cfg.gamma, cfg.alpha, p, seed,
                                                                            std::move(*external_perms))
                                 : AugmentedMatrixParams::make(cfg.n, cfg.c, cfg.gamma, cfg.alpha, p, seed);
    auto s = detail::AugmentedAccess::make(cfg, std::move(params), static_cast<unsigned>(attempts), std::move(memory));
    detail::AugmentedAccess::set_packed(s, packed_k != 0);
    return s;
}

inline SpaceReport measure_space(const AugmentedStructure& s, unsigned packed_k = 0) {
    SpaceReport rep;
    rep.kind = "augmented";
    ByteWriter w;
    s.write_body(w, true, packed_k, &rep);
    rep.overhead_bits += (kHeaderBytes + kTrailerBytes) * 8;
    rep.total_bits = (w.size() + kHeaderBytes + kTrailerBytes) * 8;
    rep.info_bits = static_cast<double>(s.config().n) * std::log2(static_cast<double>(s.config().value_range));
    return rep;
}

}  // namespace rkit
