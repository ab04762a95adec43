#pragma once

#include <cstddef>
#include <vector>

#include "rkit/errors.hpp"
#include "rkit/field.hpp"

namespace rkit {

inline constexpr u64 low_mask(unsigned width) { return width >= 64 ? ~u64{0} : (u64{1} << width) - 1; }

inline std::size_t words_for_bits(u64 bits) { return static_cast<std::size_t>((bits + 63) / 64); }

// Reads width <= 64 bits starting at bit offset (bit i of a word array is word[i/64] >> (i%64)).
inline u64 read_bits(const u64* words, u64 offset, unsigned width) {
    if (width == 0) return 0;
    std::size_t w = static_cast<std::size_t>(offset / 64);
    unsigned shift = static_cast<unsigned>(offset % 64);
    u64 value = words[w] >> shift;
    if (shift + width > 64) value |= words[w + 1] << (64 - shift);
    return value & low_mask(width);
}

inline void write_bits(u64* words, u64 offset, unsigned width, u64 value) {
    if (width == 0) return;
    value &= low_mask(width);
    std::size_t w = static_cast<std::size_t>(offset / 64);
    unsigned shift = static_cast<unsigned>(offset % 64);
    words[w] = (words[w] & ~(low_mask(width) << shift)) | (value << shift);
    if (shift + width > 64) {
        unsigned spill = shift + width - 64;
        words[w + 1] = (words[w + 1] & ~low_mask(spill)) | (value >> (64 - shift));
    }
}

// Fixed-width unsigned integers packed back to back.
class PackedArray {
public:
    PackedArray() = default;
    PackedArray(std::size_t size, unsigned width) : size_(size), width_(width), words_(words_for_bits(u64{size} * width), 0) {
        if (width > 64) throw UsageError("PackedArray: width above 64 bits");
    }
    PackedArray(std::size_t size, unsigned width, std::vector<u64> words)
        : size_(size), width_(width), words_(std::move(words)) {
        if (width > 64 || words_.size() != words_for_bits(u64{size} * width))
            throw IntegrityError("packed array has an inconsistent shape");
    }

    std::size_t size() const noexcept { return size_; }
    unsigned width() const noexcept { return width_; }
    const std::vector<u64>& words() const noexcept { return words_; }

    u64 get(std::size_t i) const { return read_bits(words_.data(), u64{i} * width_, width_); }
    void set(std::size_t i, u64 value) { write_bits(words_.data(), u64{i} * width_, width_, value); }

    friend bool operator==(const PackedArray&, const PackedArray&) = default;

private:
    std::size_t size_ = 0;
    unsigned width_ = 0;
    std::vector<u64> words_;
};

}  // namespace rkit
