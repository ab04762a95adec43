#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rkit/bits.hpp"
#include "rkit/container.hpp"
#include "rkit/errors.hpp"
#include "rkit/hashing.hpp"
#include "rkit/linalg.hpp"
#include "rkit/rowgen.hpp"
#include "rkit/succinct.hpp"

namespace rkit {

// Keys must be below this bound; larger values are reserved for padding slots.
inline constexpr u64 kMaxUniverse = kKWiseModulus;

struct KeyValue {
    u64 key;
    u64 value;
    friend bool operator==(const KeyValue&, const KeyValue&) = default;
};

// Extra columns: m = n + ceil(c1 * n / 2^(ell / c2)) + c3 * ceil(log2 n).
struct SlackConstants {
    double c1 = 2;
    double c2 = 4;
    u64 c3 = 64;
};

struct RetrievalParams {
    u64 n = 0;
    u32 v = 0;
    u64 universe = kMaxUniverse;
    u32 ell = 0;
    u32 m = 0;
    u32 window = 0;
    SlackConstants slack;
    unsigned max_attempts = 64;

    double t() const { return static_cast<double>(ell) * v / 64.0; }

    DWParams dw(const Seed& seed) const { return DWParams{n, ell, m, window, seed}; }

    static u32 columns_for(u64 n, u32 ell, const SlackConstants& s) {
        u64 lg = n <= 1 ? 0 : bit_length(n - 1);
        double extra = std::ceil(s.c1 * static_cast<double>(n) / std::pow(2.0, static_cast<double>(ell) / s.c2));
        u64 m = n + static_cast<u64>(extra) + s.c3 * lg;
        m = std::max<u64>({m, n + 1, 2 * u64{ell}});
        m = (m + ell - 1) / ell * ell;
        if (m > 0xffffffffULL) throw ConfigError("column count exceeds 32 bits");
        return static_cast<u32>(m);
    }

    static RetrievalParams from_b(u64 n, u32 v, u32 b, const SlackConstants& slack = {}) {
        if (v == 0 || v > 64) throw ConfigError("value width v must lie in [1, 64]");
        if (b == 0) throw ConfigError("b = floor(64 t / v) must be at least 1");
        if (b > 64) throw ConfigError("b = floor(64 t / v) must not exceed 64");
        if (n == 0) throw ConfigError("at least one key is required");
        if (slack.c1 < 0 || slack.c2 <= 0) throw ConfigError("slack constants must be positive");
        RetrievalParams p;
        p.n = n;
        p.v = v;
        p.ell = b;
        p.slack = slack;
        p.m = columns_for(n, b, slack);
        p.window = DWParams::default_window(b, p.m / b);
        return p;
    }

    static RetrievalParams from_t(u64 n, u32 v, double t, const SlackConstants& slack = {}) {
        if (v == 0 || v > 64) throw ConfigError("value width v must lie in [1, 64]");
        if (!(t > 0)) throw ConfigError("time knob t must be positive");
        double b = std::floor(64.0 * t / v);
        if (b > 64) throw ConfigError("b = floor(64 t / v) must not exceed 64");
        return from_b(n, v, static_cast<u32>(b), slack);
    }

    void validate() const {
        if (v == 0 || v > 64) throw ConfigError("value width v must lie in [1, 64]");
        if (universe == 0 || universe > kMaxUniverse) throw ConfigError("key universe must lie in [1, 2^61 - 1]");
        if (max_attempts == 0) throw ConfigError("at least one build attempt is required");
        dw(Seed{}).validate();
    }
};

struct QueryStats {
    unsigned payload_words = 0;
    unsigned dict_steps = 0;
};

class RetrievalStructure;

namespace detail {
std::optional<RetrievalStructure> assemble_retrieval(const RetrievalParams& params, const Seed& seed,
                                                     std::span<const TwoBlockRowGF2> rows, std::span<const u64> values,
                                                     bool retain_oracle, unsigned attempts = 1);
}

class RetrievalStructure {
public:
    RetrievalStructure() = default;

    const RetrievalParams& params() const noexcept { return params_; }
    const Seed& seed() const noexcept { return seed_; }
    unsigned attempts() const noexcept { return attempts_; }
    const std::vector<u64>& payload() const noexcept { return payload_; }
    const RankBitVector& free_bits() const noexcept { return free_; }
    const FreeBlockDictionary& free_dict() const noexcept { return dict_; }
    bool has_oracle() const noexcept { return oracle_.has_value(); }
    const std::vector<u64>& oracle_solution() const {
        if (!oracle_) throw UnavailableError("structure was built without the uncompressed solution");
        return *oracle_;
    }

    TwoBlockRowGF2 row_for(u64 key, Domain domain = Domain::dw_row) const { return dw_row(dw_, key, domain); }

    u64 query(u64 key, QueryStats* stats = nullptr) const { return query_row(row_for(key), stats); }

    // XOR of the payload fields of the row's pivot columns.
    u64 query_row(const TwoBlockRowGF2& row, QueryStats* stats = nullptr) const {
        u64 answer = 0;
        answer ^= gather(row.block_a, row.pattern_a, stats);
        answer ^= gather(row.block_b, row.pattern_b, stats);
        return answer;
    }

    void write_body(ByteWriter& w, bool with_seed, SpaceReport* acct = nullptr) const;
    static RetrievalStructure read_body(ByteReader& r, const Seed* external_seed = nullptr);

    Bytes to_bytes() const {
        ByteWriter w;
        write_body(w, true);
        return frame_container(StructureKind::retrieval, 0, w.bytes());
    }
    static RetrievalStructure from_bytes(std::span<const std::uint8_t> bytes) {
        auto view = open_container(bytes);
        if (view.kind != StructureKind::retrieval) throw IntegrityError("container does not hold a retrieval structure");
        ByteReader r(view.body);
        auto s = read_body(r);
        r.expect_end();
        return s;
    }

    // Test hooks for fault injection.
    std::vector<u64>& mutable_payload() { return payload_; }
    void replace_dictionary(FreeBlockDictionary d) { dict_ = std::move(d); }

private:
    friend std::optional<RetrievalStructure> detail::assemble_retrieval(const RetrievalParams&, const Seed&,
                                                                         std::span<const TwoBlockRowGF2>,
                                                                         std::span<const u64>, bool, unsigned);

    u64 gather(u32 block, u64 pattern, QueryStats* stats) const {
        if (pattern == 0) return 0;
        unsigned steps = 0;
        u64 free = dict_.free_mask(block, &steps);
        if (stats) stats->dict_steps = std::max(stats->dict_steps, steps);
        u64 pivots = ~free & low_mask(params_.ell);
        u64 selected = pattern & pivots;
        if (selected == 0) return 0;
        u64 first_col = u64{block} * params_.ell;
        u64 base = first_col - free_.rank1(first_col);
        u64 answer = 0;
        u64 lo_bit = ~u64{0};
        u64 hi_bit = 0;
        while (selected != 0) {
            unsigned j = static_cast<unsigned>(std::countr_zero(selected));
            selected &= selected - 1;
            u64 offset = (base + static_cast<u64>(std::popcount(pivots & low_mask(j)))) * params_.v;
            answer ^= read_bits(payload_.data(), offset, params_.v);
            lo_bit = std::min(lo_bit, offset);
            hi_bit = std::max(hi_bit, offset + params_.v - 1);
        }
        if (stats) stats->payload_words += static_cast<unsigned>(hi_bit / 64 - lo_bit / 64 + 1);
        return answer;
    }

    RetrievalParams params_;
    DWParams dw_;
    Seed seed_;
    unsigned attempts_ = 0;
    std::vector<u64> payload_;
    RankBitVector free_;
    FreeBlockDictionary dict_;
    std::optional<std::vector<u64>> oracle_;
};

namespace detail {

inline std::optional<RetrievalStructure> assemble_retrieval(const RetrievalParams& params, const Seed& seed,
                                                            std::span<const TwoBlockRowGF2> rows,
                                                            std::span<const u64> values, bool retain_oracle,
                                                            unsigned attempts) {
    auto solved = solve_gf2_planes(rows, values, params.m, params.ell);
    if (!solved.full_rank()) return std::nullopt;
    RetrievalStructure s;
    s.params_ = params;
    s.dw_ = params.dw(seed);
    s.seed_ = seed;
    s.attempts_ = attempts;

    std::vector<u64> free_words(words_for_bits(params.m), ~u64{0});
    for (u32 c : solved.pivot_columns) free_words[c / 64] &= ~(u64{1} << (c % 64));
    s.free_ = RankBitVector(std::move(free_words), params.m);

    std::vector<std::pair<u64, u64>> entries;
    const u32 blocks = params.m / params.ell;
    for (u32 b = 0; b < blocks; ++b) {
        u64 mask = read_bits(s.free_.words().data(), u64{b} * params.ell, params.ell);
        if (mask != 0) entries.emplace_back(b, mask);
    }
    s.dict_ = FreeBlockDictionary(blocks, params.ell, entries);

    s.payload_.assign(words_for_bits(params.n * params.v), 0);
    u64 rank = 0;
    for (u32 c : solved.pivot_columns) {
        write_bits(s.payload_.data(), rank * params.v, params.v, solved.solution[c]);
        ++rank;
    }
    if (retain_oracle) s.oracle_ = std::move(solved.solution);
    return s;
}

inline void validate_pairs(std::span<const KeyValue> pairs, const RetrievalParams& params) {
    if (pairs.size() != params.n) throw UsageError("pair count does not match n");
    std::vector<u64> keys;
    keys.reserve(pairs.size());
    for (const auto& kv : pairs) {
        if (kv.key >= params.universe) throw UsageError("key " + std::to_string(kv.key) + " outside the universe");
        if (params.v < 64 && kv.value >> params.v != 0)
            throw UsageError("value " + std::to_string(kv.value) + " does not fit in v bits");
        keys.push_back(kv.key);
    }
    std::sort(keys.begin(), keys.end());
    auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end()) throw UsageError("duplicate key " + std::to_string(*dup));
}

}  // namespace detail

struct RetrievalBuildOptions {
    bool retain_oracle = false;
};

inline RetrievalStructure build_retrieval_attempts(std::span<const KeyValue> pairs, const RetrievalParams& params,
                                                   const Seed& master, bool retain_oracle) {
    params.validate();
    detail::validate_pairs(pairs, params);
    std::vector<TwoBlockRowGF2> rows(pairs.size());
    std::vector<u64> values(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) values[i] = pairs[i].value;
    for (unsigned attempt = 0; attempt < params.max_attempts; ++attempt) {
        Seed seed = master.derive(Domain::attempt, attempt);
        DWParams dw = params.dw(seed);
        for (std::size_t i = 0; i < pairs.size(); ++i) rows[i] = dw_row(dw, pairs[i].key);
        auto built = detail::assemble_retrieval(params, seed, rows, values, retain_oracle, attempt + 1);
        if (built) return std::move(*built);
    }
    throw BuildFailure("retrieval build failed: all " + std::to_string(params.max_attempts) +
                           " attempts produced a rank-deficient system (n=" + std::to_string(params.n) +
                           ", m=" + std::to_string(params.m) + ", ell=" + std::to_string(params.ell) + ")",
                       params.max_attempts);
}

inline RetrievalStructure build_retrieval(std::span<const KeyValue> pairs, const RetrievalParams& params,
                                          const Seed& master_seed, const RetrievalBuildOptions& options = {}) {
    return build_retrieval_attempts(pairs, params, master_seed, options.retain_oracle);
}

inline u64 query(const RetrievalStructure& s, u64 key) { return s.query(key); }

// Body layout (64-bit words): params[11], seed[4] (optional), payload word count and
// words, column count and free-bit words and rank index, dictionary entry count,
// key words, mask words and directory words.
inline void RetrievalStructure::write_body(ByteWriter& w, bool with_seed, SpaceReport* acct) const {
    const auto& p = params_;
    w.put_u64(p.n);
    w.put_u64(p.v);
    w.put_u64(p.universe);
    w.put_u64(p.ell);
    w.put_u64(p.m);
    w.put_u64(p.window);
    w.put_f64(p.slack.c1);
    w.put_f64(p.slack.c2);
    w.put_u64(p.slack.c3);
    w.put_u64(p.max_attempts);
    w.put_u64(attempts_);
    if (with_seed) w.put_words(std::vector<u64>(seed_.words.begin(), seed_.words.end()));
    w.put_u64(payload_.size());
    w.put_words(payload_);
    w.put_u64(free_.size());
    w.put_words(free_.words());
    w.put_words(free_.index());
    w.put_u64(dict_.size());
    w.put_words(dict_.keys().words());
    w.put_words(dict_.masks().words());
    w.put_words(dict_.directory().words());
    if (acct) {
        u64 payload_words = payload_.size() * 64;
        acct->n = p.n;
        acct->seed_bits += with_seed ? 256 : 0;
        acct->payload_bits += p.n * p.v;
        acct->rank_bits += (free_.words().size() + free_.index().size()) * 64;
        acct->dict_bits += dict_.serialized_bits();
        acct->overhead_bits += 11 * 64 + 3 * 64 + (payload_words - p.n * p.v);
    }
}

inline RetrievalStructure RetrievalStructure::read_body(ByteReader& r, const Seed* external_seed) {
    RetrievalStructure s;
    auto& p = s.params_;
    p.n = r.get_u64();
    u64 v = r.get_u64();
    p.universe = r.get_u64();
    u64 ell = r.get_u64();
    u64 m = r.get_u64();
    u64 window = r.get_u64();
    p.slack.c1 = r.get_f64();
    p.slack.c2 = r.get_f64();
    p.slack.c3 = r.get_u64();
    u64 max_attempts = r.get_u64();
    s.attempts_ = static_cast<unsigned>(r.get_u64());
    if (v == 0 || v > 64 || ell == 0 || ell > 64 || m == 0 || m > 0xffffffffULL || window == 0 ||
        window > 0xffffffffULL || max_attempts == 0 || max_attempts > 0xffffffffULL || p.n >= m)
        throw IntegrityError("retrieval parameters out of range");
    p.v = static_cast<u32>(v);
    p.ell = static_cast<u32>(ell);
    p.m = static_cast<u32>(m);
    p.window = static_cast<u32>(window);
    p.max_attempts = static_cast<unsigned>(max_attempts);
    try {
        p.validate();
    } catch (const Error& e) {
        throw IntegrityError(std::string("retrieval parameters invalid: ") + e.what());
    }
    if (external_seed) {
        s.seed_ = *external_seed;
    } else {
        auto words = r.get_words(4);
        std::copy(words.begin(), words.end(), s.seed_.words.begin());
    }
    s.dw_ = p.dw(s.seed_);

    u64 payload_words = r.get_u64();
    if (payload_words != words_for_bits(p.n * p.v)) throw IntegrityError("payload length mismatch");
    s.payload_ = r.get_words(payload_words);

    if (r.get_u64() != p.m) throw IntegrityError("free-bit vector length mismatch");
    auto bits = r.get_words(words_for_bits(p.m));
    s.free_ = RankBitVector(std::move(bits), p.m);
    auto index = r.get_words(s.free_.index().size());
    if (index != s.free_.index()) throw IntegrityError("rank index does not match the free bits");
    if (s.free_.ones() != p.m - p.n) throw IntegrityError("free column count mismatch");

    u64 entries = r.get_u64();
    u64 blocks = p.m / p.ell;
    if (entries > blocks) throw IntegrityError("dictionary larger than the block count");
    unsigned key_width = FreeBlockDictionary::key_width(blocks);
    std::size_t groups = FreeBlockDictionary::group_count(blocks);
    unsigned dir_width = bit_length(entries);
    PackedArray keys(static_cast<std::size_t>(entries), key_width, r.get_words(words_for_bits(entries * key_width)));
    PackedArray masks(static_cast<std::size_t>(entries), p.ell, r.get_words(words_for_bits(entries * p.ell)));
    PackedArray dir_array(groups + 1, dir_width, r.get_words(words_for_bits((groups + 1) * u64{dir_width})));
    s.dict_ = FreeBlockDictionary(blocks, p.ell, std::move(keys), std::move(masks), std::move(dir_array));
    for (std::size_t g = 0; g <= groups; ++g) {
        if (s.dict_.directory().get(g) > entries || (g > 0 && s.dict_.directory().get(g) < s.dict_.directory().get(g - 1)))
            throw IntegrityError("dictionary directory is not monotone");
    }
    return s;
}

inline SpaceReport measure_space(const RetrievalStructure& s) {
    SpaceReport rep;
    rep.kind = "retrieval";
    ByteWriter w;
    s.write_body(w, true, &rep);
    rep.overhead_bits += (kHeaderBytes + kTrailerBytes) * 8;
    rep.total_bits = (w.size() + kHeaderBytes + kTrailerBytes) * 8;
    rep.info_bits = static_cast<double>(s.params().n) * s.params().v;
    return rep;
}

}  // namespace rkit
