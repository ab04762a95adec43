#pragma once

#include <bit>
#include <cstddef>
#include <utility>
#include <vector>

#include "rkit/bits.hpp"
#include "rkit/errors.hpp"
#include "rkit/field.hpp"

namespace rkit {

// Bit vector with constant-time rank. Every 512-bit superblock stores its absolute rank
// and seven 9-bit ranks of its words relative to the superblock start.
class RankBitVector {
public:
    RankBitVector() = default;

    RankBitVector(std::vector<u64> bits, u64 size) : size_(size), bits_(std::move(bits)) {
        if (bits_.size() != words_for_bits(size_)) throw UsageError("RankBitVector: word count does not match size");
        if (size_ % 64 != 0 && !bits_.empty()) bits_.back() &= low_mask(static_cast<unsigned>(size_ % 64));
        build_index();
    }

    u64 size() const noexcept { return size_; }
    u64 ones() const noexcept { return ones_; }
    const std::vector<u64>& words() const noexcept { return bits_; }
    const std::vector<u64>& index() const noexcept { return index_; }

    bool get(u64 i) const { return (bits_[i / 64] >> (i % 64)) & 1; }

    // Number of ones in positions [0, i).
    u64 rank1(u64 i) const {
        if (i > size_) throw UsageError("rank1: position beyond the end of the vector");
        if (i == size_) return ones_;
        std::size_t w = static_cast<std::size_t>(i / 64);
        std::size_t sb = w / 8;
        std::size_t sub = w % 8;
        u64 r = index_[2 * sb];
        if (sub != 0) r += (index_[2 * sb + 1] >> (9 * (sub - 1))) & 0x1ff;
        return r + static_cast<u64>(std::popcount(bits_[w] & low_mask(static_cast<unsigned>(i % 64))));
    }

    u64 index_bits() const { return u64{index_.size()} * 64; }

    friend bool operator==(const RankBitVector& a, const RankBitVector& b) {
        return a.size_ == b.size_ && a.bits_ == b.bits_;
    }

private:
    void build_index() {
        std::size_t superblocks = (bits_.size() + 7) / 8;
        index_.assign(2 * superblocks, 0);
        u64 total = 0;
        for (std::size_t sb = 0; sb < superblocks; ++sb) {
            index_[2 * sb] = total;
            u64 rel = 0;
            u64 packed = 0;
            for (std::size_t sub = 0; sub < 8; ++sub) {
                std::size_t w = sb * 8 + sub;
                if (sub != 0) packed |= rel << (9 * (sub - 1));
                if (w < bits_.size()) rel += static_cast<u64>(std::popcount(bits_[w]));
            }
            index_[2 * sb + 1] = packed;
            total += rel;
        }
        ones_ = total;
    }

    u64 size_ = 0;
    u64 ones_ = 0;
    std::vector<u64> bits_;
    std::vector<u64> index_;
};

// Map from block index to the nonzero mask of its free columns. Entries are sorted by
// block; a directory over groups of 128 consecutive blocks bounds every lookup to two
// directory reads plus a binary search over at most 128 entries, so keys are stored
// relative to their group. Keys and masks live in separate packed arrays.
class FreeBlockDictionary {
public:
    static constexpr unsigned kGroupShift = 7;

    FreeBlockDictionary() = default;

    // entries: (block, mask) sorted by block, masks nonzero and within ell bits.
    FreeBlockDictionary(u64 block_count, unsigned ell, const std::vector<std::pair<u64, u64>>& entries)
        : block_count_(block_count), ell_(ell) {
        if (ell == 0 || ell > 64) throw UsageError("FreeBlockDictionary: mask width must lie in [1, 64]");
        key_width_ = key_width(block_count);
        std::size_t groups = group_count(block_count);
        keys_ = PackedArray(entries.size(), key_width_);
        masks_ = PackedArray(entries.size(), ell_);
        directory_ = PackedArray(groups + 1, bit_length(entries.size()));
        std::size_t g = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            auto [block, mask] = entries[i];
            if (block >= block_count) throw UsageError("FreeBlockDictionary: block index out of range");
            if (mask == 0 || (mask & ~low_mask(ell)) != 0) throw UsageError("FreeBlockDictionary: invalid mask");
            if (i > 0 && entries[i - 1].first >= block) throw UsageError("FreeBlockDictionary: blocks must increase");
            while (g <= (block >> kGroupShift)) directory_.set(g++, i);
            keys_.set(i, block & low_mask(key_width_));
            masks_.set(i, mask);
        }
        while (g <= groups) directory_.set(g++, entries.size());
    }

    FreeBlockDictionary(u64 block_count, unsigned ell, PackedArray keys, PackedArray masks, PackedArray directory)
        : block_count_(block_count), ell_(ell), key_width_(key_width(block_count)), keys_(std::move(keys)),
          masks_(std::move(masks)), directory_(std::move(directory)) {
        if (ell == 0 || ell > 64 || keys_.width() != key_width_ || masks_.width() != ell_ ||
            masks_.size() != keys_.size() || directory_.size() != group_count(block_count) + 1)
            throw IntegrityError("free-block dictionary has an inconsistent shape");
    }

    static unsigned key_width(u64 block_count) {
        unsigned w = bit_length(block_count > 1 ? block_count - 1 : 1);
        return w < kGroupShift ? w : kGroupShift;
    }

    static std::size_t group_count(u64 block_count) {
        return static_cast<std::size_t>((block_count + (u64{1} << kGroupShift) - 1) >> kGroupShift);
    }

    u64 block_count() const noexcept { return block_count_; }
    unsigned ell() const noexcept { return ell_; }
    std::size_t size() const noexcept { return keys_.size(); }
    const PackedArray& keys() const noexcept { return keys_; }
    const PackedArray& masks() const noexcept { return masks_; }
    const PackedArray& directory() const noexcept { return directory_; }

    // Mask of free columns in block (zero when absent); steps receives the search length.
    u64 free_mask(u64 block, unsigned* steps = nullptr) const {
        if (block >= block_count_) throw UsageError("free_mask: block index out of range");
        std::size_t g = static_cast<std::size_t>(block >> kGroupShift);
        std::size_t lo = static_cast<std::size_t>(directory_.get(g));
        std::size_t hi = static_cast<std::size_t>(directory_.get(g + 1));
        u64 key = block & low_mask(key_width_);
        unsigned probes = 0;
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo) / 2;
            ++probes;
            u64 k = keys_.get(mid);
            if (k == key) {
                if (steps) *steps = probes;
                return masks_.get(mid);
            }
            if (k < key) lo = mid + 1;
            else hi = mid;
        }
        if (steps) *steps = probes;
        return 0;
    }

    u64 serialized_bits() const {
        return u64{keys_.words().size() + masks_.words().size() + directory_.words().size()} * 64;
    }

    friend bool operator==(const FreeBlockDictionary&, const FreeBlockDictionary&) = default;

private:
    u64 block_count_ = 0;
    unsigned ell_ = 0;
    unsigned key_width_ = 0;
    PackedArray keys_;
    PackedArray masks_;
    PackedArray directory_;
};

}  // namespace rkit
