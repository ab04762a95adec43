#pragma once

#include <span>
#include <vector>

#include "rkit/container.hpp"
#include "rkit/hashing.hpp"
#include "rkit/retrieval.hpp"

namespace rkit {

// Approximate membership with false-positive rate 2^-v: a retrieval structure mapping each
// key to its v-bit fingerprint.
class FilterStructure {
public:
    FilterStructure() = default;
    FilterStructure(RetrievalStructure inner, Seed fingerprint_seed)
        : inner_(std::move(inner)), fp_seed_(fingerprint_seed) {}

    const RetrievalStructure& inner() const noexcept { return inner_; }
    RetrievalStructure& mutable_inner() noexcept { return inner_; }
    const Seed& fingerprint_seed() const noexcept { return fp_seed_; }
    u32 v() const noexcept { return inner_.params().v; }
    double epsilon() const { return std::ldexp(1.0, -static_cast<int>(v())); }

    static u64 fingerprint(const Seed& fp_seed, u32 v, u64 key) {
        return v == 64 ? hash64(fp_seed, Domain::fingerprint, key) : hash_to_range(fp_seed, key, u64{1} << v);
    }
    u64 fingerprint(u64 key) const { return fingerprint(fp_seed_, v(), key); }

    bool contains(u64 key) const { return inner_.query(key) == fingerprint(key); }

    void write_body(ByteWriter& w, bool with_seed, SpaceReport* acct = nullptr) const {
        if (with_seed) {
            w.put_words(std::vector<u64>(fp_seed_.words.begin(), fp_seed_.words.end()));
            if (acct) acct->seed_bits += 256;
        }
        inner_.write_body(w, with_seed, acct);
    }
    static FilterStructure read_body(ByteReader& r, const Seed* external_master = nullptr) {
        Seed fp;
        if (external_master) {
            fp = external_master->derive(Domain::fingerprint, 0);
        } else {
            auto words = r.get_words(4);
            std::copy(words.begin(), words.end(), fp.words.begin());
        }
        auto inner = RetrievalStructure::read_body(r, nullptr);
        return FilterStructure(std::move(inner), fp);
    }

    Bytes to_bytes() const {
        ByteWriter w;
        write_body(w, true);
        return frame_container(StructureKind::filter, 0, w.bytes());
    }
    static FilterStructure from_bytes(std::span<const std::uint8_t> bytes) {
        auto view = open_container(bytes);
        if (view.kind != StructureKind::filter) throw IntegrityError("container does not hold a filter");
        ByteReader r(view.body);
        auto f = read_body(r);
        r.expect_end();
        return f;
    }

private:
    RetrievalStructure inner_;
    Seed fp_seed_;
};

inline RetrievalParams filter_params(u64 n, u32 v, u32 b, const SlackConstants& slack = {}) {
    return RetrievalParams::from_b(n, v, b, slack);
}

inline FilterStructure build_filter(std::span<const u64> keys, const RetrievalParams& params, const Seed& seed,
                                    const RetrievalBuildOptions& options = {}) {
    if (params.v == 0 || params.v > 64) throw ConfigError("fingerprint width v must lie in [1, 64]");
    Seed fp = seed.derive(Domain::fingerprint, 0);
    std::vector<KeyValue> pairs;
    pairs.reserve(keys.size());
    for (u64 k : keys) pairs.push_back({k, FilterStructure::fingerprint(fp, params.v, k)});
    return FilterStructure(build_retrieval(pairs, params, seed, options), fp);
}

inline bool query_filter(const FilterStructure& f, u64 key) { return f.contains(key); }

inline SpaceReport measure_space(const FilterStructure& f) {
    SpaceReport rep;
    rep.kind = "filter";
    ByteWriter w;
    f.write_body(w, true, &rep);
    rep.overhead_bits += (kHeaderBytes + kTrailerBytes) * 8;
    rep.total_bits = (w.size() + kHeaderBytes + kTrailerBytes) * 8;
    rep.info_bits = static_cast<double>(f.inner().params().n) * f.v();
    return rep;
}

}  // namespace rkit
