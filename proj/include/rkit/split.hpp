#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rkit/augmented.hpp"
#include "rkit/bits.hpp"
#include "rkit/container.hpp"
#include "rkit/errors.hpp"
#include "rkit/filter.hpp"
#include "rkit/hashing.hpp"
#include "rkit/retrieval.hpp"
#include "rkit/rowgen.hpp"

namespace rkit {

enum class SplitKind : u64 { retrieval = 1, filter = 2, augmented = 3, small_v = 4 };

inline const char* split_kind_name(SplitKind k) {
    switch (k) {
        case SplitKind::retrieval: return "retrieval";
        case SplitKind::filter: return "filter";
        case SplitKind::augmented: return "augmented";
        case SplitKind::small_v: return "small_v";
    }
    return "unknown";
}

inline constexpr u64 kSmallVFloor = u64{1} << 16;

struct SplitConfig {
    SplitKind kind = SplitKind::retrieval;
    // Retrieval and filter buckets.
    u32 v = 8;
    u32 b = 8;
    SlackConstants slack;
    // Augmented buckets.
    u64 c = 4;
    u64 alpha = 4;
    u64 value_range = 0;
    bool allow_small_v = false;
    // Shared.
    u64 universe = kMaxUniverse;
    unsigned independence = 0;  // 0 selects max(8, ceil(log2 n))
    unsigned groups = 0;        // seed groups per master seed; 0 selects the kind default
    unsigned max_master_attempts = 16;

    bool keyed_values() const { return kind == SplitKind::retrieval || kind == SplitKind::filter; }
    bool augmented() const { return kind == SplitKind::augmented || kind == SplitKind::small_v; }
};

// Bucket count and per-bucket capacities for one configuration.
struct SplitShape {
    u64 n_total = 0;      // keys plus augmented slots
    u64 n_keys = 0;
    u64 n_aug = 0;
    u64 bucket_count = 1;
    double expected = 0;  // mean keys per bucket
    u64 capacity = 0;     // key slots per bucket
    u64 aug_slots = 0;    // augmented slots per bucket
    unsigned independence = 8;
    unsigned groups = 1;

    u64 bucket_size() const { return capacity + aug_slots; }

    static SplitShape make(const SplitConfig& cfg, u64 n_keys, u64 n_aug) {
        SplitShape s;
        s.n_keys = n_keys;
        s.n_aug = n_aug;
        s.n_total = n_keys + n_aug;
        if (s.n_total == 0) throw ConfigError("split build needs at least one item");
        const double n = static_cast<double>(s.n_total);
        const double lg = std::max(1.0, std::log2(n));
        s.independence = cfg.independence != 0 ? cfg.independence
                                               : std::max(8u, static_cast<unsigned>(std::ceil(std::log2(std::max(2.0, n)))));
        const double keys = static_cast<double>(n_keys);
        if (cfg.kind == SplitKind::small_v) {
            if (cfg.value_range < kSmallVFloor) throw ConfigError("small-V path requires V >= 2^16");
            double target = std::pow(static_cast<double>(cfg.value_range), 0.25);
            s.bucket_count = std::max<u64>(1, static_cast<u64>(std::llround(keys / target)));
            s.expected = keys / static_cast<double>(s.bucket_count);
            s.capacity = static_cast<u64>(std::ceil(s.expected + std::pow(static_cast<double>(cfg.value_range), 0.2)));
            s.groups = cfg.groups != 0 ? cfg.groups : 2 * static_cast<unsigned>(std::ceil(lg));
        } else {
            double target = std::pow(n, 2.0 / 3.0) * lg;
            u64 count = static_cast<u64>(std::llround(keys / target));
            count = std::min<u64>(count, n_keys / 64);
            s.bucket_count = std::max<u64>(1, count);
            s.expected = keys / static_cast<double>(s.bucket_count);
            s.capacity = static_cast<u64>(std::ceil(s.expected + s.expected / std::cbrt(n)));
            s.groups = cfg.groups != 0 ? cfg.groups : (cfg.keyed_values() ? 64u : 1u);
        }
        s.capacity = std::max<u64>(s.capacity, 1);
        if (cfg.augmented()) {
            if (cfg.c < 2) throw ConfigError("c must exceed 1");
            u64 per = (n_aug + s.bucket_count - 1) / s.bucket_count;
            u64 by_keys = (s.capacity + cfg.c - 2) / (cfg.c - 1);
            s.aug_slots = std::max<u64>({per, by_keys, 1});
            s.capacity = s.aug_slots * (cfg.c - 1);
        }
        if (s.groups == 0 || s.groups > 4096) throw ConfigError("seed group count must lie in [1, 4096]");
        return s;
    }
};

// Build statistics; not serialized.
struct SplitBuildStats {
    unsigned master_attempts = 0;
    unsigned overflows = 0;
    unsigned bucket_failures = 0;  // buckets for which every seed group failed
    u64 group_trials = 0;
    u64 group_successes = 0;
    std::vector<u64> max_loads;  // per master attempt
};

// Bits of a split structure by source. The components add up to total_bits - info_bits.
struct SplitSpaceReport {
    std::string kind;
    u64 n = 0;
    u64 bucket_count = 0;
    u64 seed_bits = 0;            // master seed, hash coefficients, permutation tables
    u64 pointer_bits = 0;         // bucket offset table
    u64 group_index_bits = 0;     // per-bucket seed-group choice
    u64 header_bits = 0;          // directory header and container framing
    u64 capacity_slack_bits = 0;  // value bits of padding slots
    u64 capacity_slack_slots = 0;
    u64 per_bucket_redundancy_bits = 0;
    double value_rounding_bits = 0;  // field-element rounding of real slots (augmented kinds)
    u64 total_bits = 0;
    double info_bits = 0;

    double redundancy() const { return static_cast<double>(total_bits) - info_bits; }
    double components_sum() const {
        return static_cast<double>(seed_bits + pointer_bits + group_index_bits + header_bits + capacity_slack_bits +
                                   per_bucket_redundancy_bits) +
               value_rounding_bits;
    }
};

class SplitStructure;

namespace detail {

struct SplitAccess;

// Rows of one retrieval bucket: real keys in order, then padding rows indexed by slot.
inline std::vector<TwoBlockRowGF2> bucket_dw_rows(const DWParams& dw, std::span<const u64> keys, u64 capacity) {
    std::vector<TwoBlockRowGF2> rows;
    rows.reserve(capacity);
    for (u64 k : keys) rows.push_back(dw_row(dw, k));
    for (u64 slot = keys.size(); slot < capacity; ++slot) rows.push_back(dw_row(dw, slot, Domain::dw_dummy));
    return rows;
}

inline std::vector<SparseRowFp> bucket_fp_rows(const AugmentedMatrixParams& params, std::span<const u64> keys,
                                               u64 capacity) {
    std::vector<SparseRowFp> rows;
    rows.reserve(params.n);
    for (u64 k : keys) rows.push_back(coupon_row(params, k, Domain::coupon_key));
    for (u64 slot = keys.size(); slot < capacity; ++slot) rows.push_back(coupon_row(params, slot, Domain::coupon_dummy));
    for (u64 j = 0; j < params.block_count(); ++j) rows.push_back(augmented_row(params, j));
    return rows;
}

inline RetrievalParams bucket_retrieval_params(const SplitConfig& cfg, const SplitShape& shape) {
    auto p = RetrievalParams::from_b(shape.capacity, cfg.v, cfg.b, cfg.slack);
    p.universe = cfg.universe;
    p.max_attempts = shape.groups;
    return p;
}

inline AugmentedConfig bucket_augmented_config(const SplitConfig& cfg, const SplitShape& shape) {
    AugmentedConfig a;
    a.n = shape.bucket_size();
    a.c = cfg.c;
    a.alpha = cfg.alpha;
    a.value_range = cfg.value_range;
    a.universe = cfg.universe;
    a.max_attempts = shape.groups;
    a.allow_small_v = cfg.allow_small_v || cfg.kind == SplitKind::small_v;
    return a;
}

}  // namespace detail

class SplitStructure {
public:
    using Bucket = std::variant<RetrievalStructure, AugmentedStructure>;

    SplitStructure() = default;

    SplitKind kind() const noexcept { return cfg_.kind; }
    const SplitConfig& config() const noexcept { return cfg_; }
    const SplitShape& shape() const noexcept { return shape_; }
    const Seed& seed() const noexcept { return seed_; }
    const KWisePoly& split_hash() const { return *hash_; }
    u64 bucket_count() const noexcept { return shape_.bucket_count; }
    const std::vector<Bucket>& buckets() const noexcept { return buckets_; }
    const std::vector<u32>& group_index() const noexcept { return group_; }
    const SplitBuildStats& stats() const noexcept { return stats_; }
    const std::vector<std::vector<SeededPermutation>>& group_permutations() const noexcept { return perms_; }

    Seed group_seed(unsigned g) const { return seed_.derive(Domain::group, g); }
    Seed fingerprint_seed() const { return seed_.derive(Domain::fingerprint, 0); }

    u64 bucket_of(u64 key) const { return hash_->to_range(key, shape_.bucket_count); }

    const RetrievalStructure& retrieval_bucket(u64 i) const { return std::get<RetrievalStructure>(buckets_.at(i)); }
    const AugmentedStructure& augmented_bucket(u64 i) const { return std::get<AugmentedStructure>(buckets_.at(i)); }

    u64 query(u64 key) const {
        if (!cfg_.keyed_values()) return query_key(key);
        return retrieval_bucket(bucket_of(key)).query(key);
    }

    bool contains(u64 key) const {
        if (cfg_.kind != SplitKind::filter) throw UsageError("membership queries need a filter split");
        return query(key) == FilterStructure::fingerprint(fingerprint_seed(), cfg_.v, key);
    }

    u64 query_key(u64 key) const {
        if (cfg_.keyed_values()) return query(key);
        return augmented_bucket(bucket_of(key)).query_key(key);
    }

    u64 query_aug(u64 j) const {
        if (!cfg_.augmented()) throw UsageError("augmented queries need an augmented split");
        if (j >= shape_.n_aug) throw UsageError("augmented index out of range");
        return augmented_bucket(j % shape_.bucket_count).query_aug(j / shape_.bucket_count);
    }

    Bytes to_bytes() const;
    static SplitStructure from_bytes(std::span<const std::uint8_t> bytes);

    void write_body(ByteWriter& w, SplitSpaceReport* acct = nullptr) const;
    static SplitStructure read_body(ByteReader& r);

    // Test hook for fault injection.
    std::vector<Bucket>& mutable_buckets() { return buckets_; }

private:
    friend struct detail::SplitAccess;

    SplitConfig cfg_;
    SplitShape shape_;
    Seed seed_;
    unsigned master_attempts_ = 0;
    std::optional<KWisePoly> hash_;
    std::vector<std::vector<SeededPermutation>> perms_;  // per seed group (augmented kinds)
    std::vector<u32> group_;
    std::vector<Bucket> buckets_;
    SplitBuildStats stats_;
};

namespace detail {

struct SplitAccess {
    static SplitStructure& set(SplitStructure& s, const SplitConfig& cfg, const SplitShape& shape, const Seed& seed,
                               unsigned attempts, KWisePoly hash) {
        s.cfg_ = cfg;
        s.shape_ = shape;
        s.seed_ = seed;
        s.master_attempts_ = attempts;
        s.hash_ = std::move(hash);
        return s;
    }
    static auto& perms(SplitStructure& s) { return s.perms_; }
    static auto& groups(SplitStructure& s) { return s.group_; }
    static auto& buckets(SplitStructure& s) { return s.buckets_; }
    static auto& stats(SplitStructure& s) { return s.stats_; }
    static unsigned master_attempts(const SplitStructure& s) { return s.master_attempts_; }
};

inline u64 gamma_for_bucket(const SplitConfig& cfg, const SplitShape& shape) {
    return gamma_for(shape.bucket_size(), cfg.value_range);
}

inline std::vector<std::vector<SeededPermutation>> group_permutation_tables(const SplitConfig& cfg,
                                                                            const SplitShape& shape,
                                                                            const Seed& master) {
    std::vector<std::vector<SeededPermutation>> out;
    const u64 n_b = shape.bucket_size();
    const u64 p = next_prime(cfg.value_range);
    const u64 gamma = gamma_for_bucket(cfg, shape);
    for (unsigned g = 0; g < shape.groups; ++g) {
        auto params = AugmentedMatrixParams::make(n_b, cfg.c, gamma, cfg.alpha, p, master.derive(Domain::group, g));
        out.push_back(std::move(params.perms));
    }
    return out;
}

// Routes keys to buckets; returns the per-bucket key lists in input order.
inline std::vector<std::vector<u32>> route(const KWisePoly& h, std::span<const u64> keys, u64 bucket_count) {
    std::vector<std::vector<u32>> out(bucket_count);
    for (std::size_t i = 0; i < keys.size(); ++i) out[h.to_range(keys[i], bucket_count)].push_back(static_cast<u32>(i));
    return out;
}

inline KWisePoly split_hash_for(const Seed& attempt_seed, unsigned independence) {
    return KWisePoly::sample(attempt_seed.derive(Domain::kwise, 0), independence);
}

// Builds one retrieval bucket by trying the seed groups in order.
inline std::optional<RetrievalStructure> build_retrieval_bucket(const SplitConfig& cfg, const SplitShape& shape,
                                                                const Seed& master, std::span<const u64> keys,
                                                                std::span<const u64> values, SplitBuildStats* stats,
                                                                u32* group_out) {
    auto params = bucket_retrieval_params(cfg, shape);
    std::vector<u64> padded(values.begin(), values.end());
    padded.resize(shape.capacity, 0);
    for (unsigned g = 0; g < shape.groups; ++g) {
        Seed gs = master.derive(Domain::group, g);
        auto rows = bucket_dw_rows(params.dw(gs), keys, shape.capacity);
        if (stats) ++stats->group_trials;
        auto built = assemble_retrieval(params, gs, rows, padded, false, g + 1);
        if (built) {
            if (stats) ++stats->group_successes;
            if (group_out) *group_out = g;
            return built;
        }
    }
    return std::nullopt;
}

inline std::optional<AugmentedStructure> build_augmented_bucket(const SplitConfig& cfg, const SplitShape& shape,
                                                                const Seed& master,
                                                                const std::vector<std::vector<SeededPermutation>>& perms,
                                                                std::span<const u64> keys, std::span<const u64> values,
                                                                std::span<const u64> aug_values, SplitBuildStats* stats,
                                                                u32* group_out) {
    auto acfg = bucket_augmented_config(cfg, shape);
    const u64 p = next_prime(cfg.value_range);
    const u64 gamma = gamma_for_bucket(cfg, shape);
    std::vector<u64> rhs(values.begin(), values.end());
    rhs.resize(shape.capacity, 0);
    rhs.insert(rhs.end(), aug_values.begin(), aug_values.end());
    rhs.resize(shape.bucket_size(), 0);
    for (unsigned g = 0; g < shape.groups; ++g) {
        auto params = AugmentedMatrixParams::with_permutations(acfg.n, acfg.c, gamma, acfg.alpha, p,
                                                               master.derive(Domain::group, g), perms[g]);
        auto rows = bucket_fp_rows(params, keys, shape.capacity);
        if (stats) ++stats->group_trials;
        auto memory = solve_augmented_rows(params, rows, rhs);
        if (memory) {
            if (stats) ++stats->group_successes;
            if (group_out) *group_out = g;
            acfg.gamma = gamma;
            return AugmentedAccess::make(acfg, std::move(params), g + 1, std::move(*memory));
        }
    }
    return std::nullopt;
}

inline void check_split_inputs(const SplitConfig& cfg, std::span<const u64> keys, std::span<const u64> values,
                               std::span<const u64> aug_values) {
    if (cfg.universe == 0 || cfg.universe > kMaxUniverse) throw ConfigError("key universe must lie in [1, 2^61 - 1]");
    if (cfg.max_master_attempts == 0) throw ConfigError("at least one master attempt is required");
    if (cfg.keyed_values()) {
        if (cfg.v == 0 || cfg.v > 64) throw ConfigError("value width v must lie in [1, 64]");
        if (cfg.b == 0 || cfg.b > 64) throw ConfigError("b must lie in [1, 64]");
    } else {
        if (cfg.value_range < 2 || cfg.value_range >= kModulusLimit - 64) throw ConfigError("value range V out of bounds");
        if (cfg.alpha == 0) throw ConfigError("alpha must be positive");
    }
    if (cfg.kind != SplitKind::filter && values.size() != keys.size())
        throw UsageError("one value per key required");
    if (!cfg.augmented() && !aug_values.empty()) throw UsageError("augmented values need an augmented split");
    std::vector<u64> sorted(keys.begin(), keys.end());
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) throw UsageError("duplicate key " + std::to_string(*dup));
    for (u64 k : keys) {
        if (k >= cfg.universe) throw UsageError("key " + std::to_string(k) + " outside the universe");
    }
    for (u64 x : values) {
        if (cfg.keyed_values() && cfg.v < 64 && x >> cfg.v != 0)
            throw UsageError("value " + std::to_string(x) + " does not fit in v bits");
        if (cfg.augmented() && x >= cfg.value_range) throw UsageError("value " + std::to_string(x) + " not below V");
    }
    for (u64 x : aug_values) {
        if (x >= cfg.value_range) throw UsageError("augmented value " + std::to_string(x) + " not below V");
    }
}

}  // namespace detail

// values: one per key (ignored for filters). aug_values: augmented slot values (augmented kinds).
inline SplitStructure split_build(const SplitConfig& cfg, std::span<const u64> keys, std::span<const u64> values,
                                  std::span<const u64> aug_values, const Seed& master_seed) {
    detail::check_split_inputs(cfg, keys, values, aug_values);
    const auto shape = SplitShape::make(cfg, keys.size(), aug_values.size());
    if (cfg.kind == SplitKind::augmented && !cfg.allow_small_v) {
        u128 n_b = shape.bucket_size();
        if (static_cast<u128>(cfg.value_range) < n_b * n_b * n_b)
            throw ConfigError("value range V must be at least the cube of the bucket size; use the small-V path");
    }
    SplitBuildStats stats;
    std::string diagnostics;
    for (unsigned attempt = 0; attempt < cfg.max_master_attempts; ++attempt) {
        ++stats.master_attempts;
        Seed seed = master_seed.derive(Domain::attempt, attempt);
        KWisePoly h = detail::split_hash_for(seed, shape.independence);
        auto members = detail::route(h, keys, shape.bucket_count);
        u64 max_load = 0;
        for (const auto& m : members) max_load = std::max<u64>(max_load, m.size());
        stats.max_loads.push_back(max_load);
        if (max_load > shape.capacity) {
            ++stats.overflows;
            diagnostics += " attempt " + std::to_string(attempt) + ": bucket overflow (max load " +
                           std::to_string(max_load) + " > capacity " + std::to_string(shape.capacity) + ");";
            continue;
        }
        SplitStructure s;
        detail::SplitAccess::set(s, cfg, shape, seed, attempt + 1, h);
        if (cfg.augmented()) detail::SplitAccess::perms(s) = detail::group_permutation_tables(cfg, shape, seed);
        auto& groups = detail::SplitAccess::groups(s);
        auto& buckets = detail::SplitAccess::buckets(s);
        groups.assign(shape.bucket_count, 0);
        buckets.reserve(shape.bucket_count);
        Seed fp = seed.derive(Domain::fingerprint, 0);
        bool failed = false;
        for (u64 bkt = 0; bkt < shape.bucket_count && !failed; ++bkt) {
            std::vector<u64> bkeys;
            std::vector<u64> bvalues;
            for (u32 i : members[bkt]) {
                bkeys.push_back(keys[i]);
                bvalues.push_back(cfg.kind == SplitKind::filter ? FilterStructure::fingerprint(fp, cfg.v, keys[i]) : values[i]);
            }
            if (cfg.keyed_values()) {
                auto built = detail::build_retrieval_bucket(cfg, shape, seed, bkeys, bvalues, &stats, &groups[bkt]);
                if (built) buckets.emplace_back(std::move(*built));
                else failed = true;
            } else {
                std::vector<u64> baug;
                for (u64 j = bkt; j < aug_values.size(); j += shape.bucket_count) baug.push_back(aug_values[j]);
                auto built = detail::build_augmented_bucket(cfg, shape, seed, detail::SplitAccess::perms(s), bkeys, bvalues,
                                                            baug, &stats, &groups[bkt]);
                if (built) buckets.emplace_back(std::move(*built));
                else failed = true;
            }
            if (failed) {
                ++stats.bucket_failures;
                diagnostics += " attempt " + std::to_string(attempt) + ": bucket " + std::to_string(bkt) + " failed under all " +
                               std::to_string(shape.groups) + " seed groups;";
            }
        }
        if (failed) continue;
        detail::SplitAccess::stats(s) = stats;
        return s;
    }
    throw BuildFailure("split build failed after " + std::to_string(cfg.max_master_attempts) + " master seeds:" + diagnostics,
                       cfg.max_master_attempts);
}

// Directory body layout (64-bit words): header[18], seed[4], split-hash coefficients[k],
// permutation tables (augmented kinds), group index, bucket offset table, bucket bodies.
inline void SplitStructure::write_body(ByteWriter& w, SplitSpaceReport* acct) const {
    const std::size_t start = w.size();
    w.put_u64(static_cast<u64>(cfg_.kind));
    w.put_u64(shape_.n_keys);
    w.put_u64(shape_.n_aug);
    w.put_u64(cfg_.v);
    w.put_u64(cfg_.b);
    w.put_f64(cfg_.slack.c1);
    w.put_f64(cfg_.slack.c2);
    w.put_u64(cfg_.slack.c3);
    w.put_u64(cfg_.c);
    w.put_u64(cfg_.alpha);
    w.put_u64(cfg_.value_range);
    w.put_u64(cfg_.allow_small_v ? 1 : 0);
    w.put_u64(cfg_.universe);
    w.put_u64(shape_.independence);
    w.put_u64(shape_.groups);
    w.put_u64(shape_.bucket_count);
    w.put_u64(master_attempts_);
    w.put_u64(cfg_.max_master_attempts);
    const std::size_t header_end = w.size();
    w.put_words(std::vector<u64>(seed_.words.begin(), seed_.words.end()));
    w.put_words(hash_->coefficients());
    if (cfg_.augmented()) {
        unsigned width = bit_length(shape_.aug_slots - 1);
        std::size_t entries = 0;
        for (const auto& g : perms_) entries += g.size() * shape_.aug_slots;
        PackedArray table(entries, width);
        std::size_t at = 0;
        for (const auto& g : perms_) {
            for (const auto& perm : g) {
                for (u32 x : perm.forward_table()) table.set(at++, x);
            }
        }
        w.put_words(table.words());
    }
    const std::size_t seeds_end = w.size();
    PackedArray gidx(group_.size(), bit_length(shape_.groups - 1));
    for (std::size_t i = 0; i < group_.size(); ++i) gidx.set(i, group_[i]);
    w.put_words(gidx.words());
    const std::size_t group_end = w.size();

    std::vector<Bytes> bodies;
    bodies.reserve(buckets_.size());
    u64 bucket_overhead = 0;
    for (const auto& b : buckets_) {
        ByteWriter bw;
        if (cfg_.keyed_values()) {
            std::get<RetrievalStructure>(b).write_body(bw, false);
        } else {
            std::get<AugmentedStructure>(b).write_body(bw, false);
        }
        bucket_overhead += bw.size() * 8;
        bodies.push_back(bw.take());
    }
    u64 offset = 0;
    for (const auto& body : bodies) {
        w.put_u64(offset);
        offset += body.size();
    }
    for (const auto& body : bodies) w.put_bytes(body);

    if (acct) {
        acct->kind = split_kind_name(cfg_.kind);
        acct->n = shape_.n_total;
        acct->bucket_count = shape_.bucket_count;
        acct->header_bits += (header_end - start) * 8;
        acct->seed_bits += (seeds_end - header_end) * 8;
        acct->group_index_bits += (group_end - seeds_end) * 8;
        acct->pointer_bits += shape_.bucket_count * 64;
        u64 real_keys = shape_.n_keys;
        u64 slots = shape_.capacity * shape_.bucket_count;
        acct->capacity_slack_slots = slots - real_keys;
        if (cfg_.keyed_values()) {
            acct->capacity_slack_bits += acct->capacity_slack_slots * cfg_.v;
            acct->per_bucket_redundancy_bits += bucket_overhead - slots * cfg_.v;
            acct->info_bits = static_cast<double>(real_keys) * cfg_.v;
        } else {
            const unsigned width = bit_length(next_prime(cfg_.value_range) - 1);
            u64 all_slots = shape_.bucket_size() * shape_.bucket_count;
            u64 dummy = all_slots - real_keys - shape_.n_aug;
            acct->capacity_slack_slots = dummy;
            acct->capacity_slack_bits += dummy * width;
            acct->per_bucket_redundancy_bits += bucket_overhead - all_slots * width;
            acct->info_bits = static_cast<double>(shape_.n_total) * std::log2(static_cast<double>(cfg_.value_range));
            acct->value_rounding_bits = static_cast<double>(shape_.n_total * width) - acct->info_bits;
        }
    }
}

inline SplitStructure SplitStructure::read_body(ByteReader& r) {
    SplitConfig cfg;
    u64 kind = r.get_u64();
    if (kind < 1 || kind > 4) throw IntegrityError("unknown split kind");
    cfg.kind = static_cast<SplitKind>(kind);
    u64 n_keys = r.get_u64();
    u64 n_aug = r.get_u64();
    u64 v = r.get_u64();
    u64 b = r.get_u64();
    cfg.slack.c1 = r.get_f64();
    cfg.slack.c2 = r.get_f64();
    cfg.slack.c3 = r.get_u64();
    cfg.c = r.get_u64();
    cfg.alpha = r.get_u64();
    cfg.value_range = r.get_u64();
    u64 small = r.get_u64();
    cfg.universe = r.get_u64();
    u64 independence = r.get_u64();
    u64 groups = r.get_u64();
    u64 bucket_count = r.get_u64();
    u64 attempts = r.get_u64();
    u64 max_attempts = r.get_u64();
    if (v > 64 || b > 64 || small > 1 || independence == 0 || independence > 4096 || groups == 0 || groups > 4096 ||
        max_attempts == 0 || max_attempts > 0xffffffffULL || attempts == 0 || attempts > max_attempts ||
        n_keys > (u64{1} << 40) || n_aug > (u64{1} << 40))
        throw IntegrityError("split header out of range");
    cfg.v = static_cast<u32>(v);
    cfg.b = static_cast<u32>(b);
    cfg.allow_small_v = small == 1;
    cfg.independence = static_cast<unsigned>(independence);
    cfg.groups = static_cast<unsigned>(groups);
    cfg.max_master_attempts = static_cast<unsigned>(max_attempts);
    SplitShape shape;
    try {
        std::vector<u64> none;
        detail::check_split_inputs(cfg, none, none, none);
        shape = SplitShape::make(cfg, n_keys, n_aug);
    } catch (const Error& e) {
        throw IntegrityError(std::string("split parameters invalid: ") + e.what());
    }
    if (shape.bucket_count != bucket_count) throw IntegrityError("bucket count mismatch");
    Seed seed;
    auto words = r.get_words(4);
    std::copy(words.begin(), words.end(), seed.words.begin());
    auto coefficients = r.get_words(independence);
    for (u64 x : coefficients) {
        if (x >= kKWiseModulus) throw IntegrityError("split hash coefficient out of range");
    }
    KWisePoly h(kKWiseModulus, std::move(coefficients));
    SplitStructure s;
    detail::SplitAccess::set(s, cfg, shape, seed, static_cast<unsigned>(attempts), h);
    if (cfg.augmented()) {
        const u64 n_b = shape.bucket_size();
        const u64 tau_perm = cfg.alpha * cfg.c * cfg.c * detail::gamma_for_bucket(cfg, shape);
        const u64 entries = u64{shape.groups} * tau_perm * shape.aug_slots;
        if (entries > (u64{1} << 32) || n_b > (u64{1} << 26)) throw IntegrityError("permutation tables too large");
        unsigned width = bit_length(shape.aug_slots - 1);
        PackedArray table(static_cast<std::size_t>(entries), width, r.get_words(words_for_bits(entries * width)));
        auto& perms = detail::SplitAccess::perms(s);
        std::size_t at = 0;
        for (unsigned g = 0; g < shape.groups; ++g) {
            std::vector<SeededPermutation> group;
            for (u64 i = 0; i < tau_perm; ++i) {
                std::vector<u32> forward(static_cast<std::size_t>(shape.aug_slots));
                for (auto& x : forward) x = static_cast<u32>(table.get(at++));
                group.emplace_back(std::move(forward));
            }
            perms.push_back(std::move(group));
        }
    }
    unsigned gwidth = bit_length(shape.groups - 1);
    PackedArray gidx(static_cast<std::size_t>(bucket_count), gwidth, r.get_words(words_for_bits(bucket_count * gwidth)));
    auto& group = detail::SplitAccess::groups(s);
    for (std::size_t i = 0; i < bucket_count; ++i) {
        u64 g = gidx.get(i);
        if (g >= shape.groups) throw IntegrityError("group index out of range");
        group.push_back(static_cast<u32>(g));
    }
    auto offsets = r.get_words(bucket_count);
    const std::size_t base = r.position();
    auto& buckets = detail::SplitAccess::buckets(s);
    for (std::size_t i = 0; i < bucket_count; ++i) {
        if (offsets[i] != r.position() - base) throw IntegrityError("bucket offset table mismatch");
        if (i > 0 && offsets[i] <= offsets[i - 1]) throw IntegrityError("bucket offsets must increase");
        Seed gs = s.group_seed(group[i]);
        if (cfg.keyed_values()) {
            auto bucket = RetrievalStructure::read_body(r, &gs);
            auto expected = detail::bucket_retrieval_params(cfg, shape);
            const auto& got = bucket.params();
            if (got.n != expected.n || got.v != expected.v || got.ell != expected.ell || got.m != expected.m ||
                got.window != expected.window || got.universe != expected.universe)
                throw IntegrityError("bucket parameters disagree with the directory");
            buckets.emplace_back(std::move(bucket));
        } else {
            auto perms = detail::SplitAccess::perms(s)[group[i]];
            AugmentedStructure bucket;
            try {
                bucket = AugmentedStructure::read_body(r, &gs, &perms);
            } catch (const UsageError& e) {
                throw IntegrityError(std::string("augmented bucket invalid: ") + e.what());
            }
            if (bucket.config().n != shape.bucket_size() || bucket.config().c != cfg.c ||
                bucket.config().value_range != cfg.value_range)
                throw IntegrityError("bucket parameters disagree with the directory");
            buckets.emplace_back(std::move(bucket));
        }
    }
    return s;
}

inline Bytes SplitStructure::to_bytes() const {
    ByteWriter w;
    write_body(w);
    return frame_container(StructureKind::split, static_cast<std::uint8_t>(cfg_.kind), w.bytes());
}

inline SplitStructure SplitStructure::from_bytes(std::span<const std::uint8_t> bytes) {
    auto view = open_container(bytes);
    if (view.kind != StructureKind::split) throw IntegrityError("container does not hold a split structure");
    ByteReader r(view.body);
    auto s = read_body(r);
    r.expect_end();
    if (view.flags != static_cast<std::uint8_t>(s.kind())) throw IntegrityError("split kind flag mismatch");
    return s;
}

inline SplitSpaceReport space_report(const SplitStructure& s) {
    SplitSpaceReport rep;
    ByteWriter w;
    s.write_body(w, &rep);
    rep.header_bits += (kHeaderBytes + kTrailerBytes) * 8;
    rep.total_bits = (w.size() + kHeaderBytes + kTrailerBytes) * 8;
    return rep;
}

inline u64 split_query(const SplitStructure& s, u64 key) { return s.query(key); }

}  // namespace rkit
