#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "rkit/errors.hpp"
#include "rkit/field.hpp"

namespace rkit {

enum class StructureKind : std::uint8_t { retrieval = 1, filter = 2, augmented = 3, split = 4 };

inline constexpr char kMagic[4] = {'R', 'K', 'I', 'T'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;
inline constexpr std::size_t kTrailerBytes = 8;

using Bytes = std::vector<std::uint8_t>;

// Little-endian writer. Sections are sequences of 64-bit words, so offsets stay 8-byte aligned.
class ByteWriter {
public:
    void put_u8(std::uint8_t x) { buf_.push_back(x); }
    void put_u16(std::uint16_t x) { put_le(x, 2); }
    void put_u32(std::uint32_t x) { put_le(x, 4); }
    void put_u64(u64 x) { put_le(x, 8); }
    void put_f64(double x) {
        u64 bits;
        std::memcpy(&bits, &x, sizeof bits);
        put_u64(bits);
    }
    void put_words(const std::vector<u64>& words) {
        for (u64 w : words) put_u64(w);
    }
    void put_bytes(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
    void align8() {
        while (buf_.size() % 8 != 0) buf_.push_back(0);
    }

    std::size_t size() const noexcept { return buf_.size(); }
    Bytes& bytes() noexcept { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    void put_le(u64 x, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    }

    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8() { return static_cast<std::uint8_t>(get_le(1)); }
    std::uint16_t get_u16() { return static_cast<std::uint16_t>(get_le(2)); }
    std::uint32_t get_u32() { return static_cast<std::uint32_t>(get_le(4)); }
    u64 get_u64() { return get_le(8); }
    double get_f64() {
        u64 bits = get_u64();
        double x;
        std::memcpy(&x, &bits, sizeof x);
        return x;
    }
    std::vector<u64> get_words(u64 count) {
        if (count > remaining() / 8) throw IntegrityError("container truncated");
        std::vector<u64> out(static_cast<std::size_t>(count));
        for (auto& w : out) w = get_u64();
        return out;
    }
    std::span<const std::uint8_t> get_bytes(u64 count) {
        if (count > remaining()) throw IntegrityError("container truncated");
        auto out = data_.subspan(pos_, static_cast<std::size_t>(count));
        pos_ += static_cast<std::size_t>(count);
        return out;
    }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    void expect_end() const {
        if (pos_ != data_.size()) throw IntegrityError("container has trailing bytes");
    }

private:
    u64 get_le(int n) {
        if (remaining() < static_cast<std::size_t>(n)) throw IntegrityError("container truncated");
        u64 x = 0;
        for (int i = 0; i < n; ++i) x |= u64{data_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return x;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < bytes.size()) {
        auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
        crc = crc32(crc, bytes.data() + done, chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

// Header: magic, u16 version, u8 kind, u8 flags, u64 body length. Trailer: u32 CRC32 of
// header and body, u32 zero padding.
inline Bytes frame_container(StructureKind kind, std::uint8_t flags, std::span<const std::uint8_t> body) {
    if (body.size() % 8 != 0) throw UsageError("container body must be 8-byte aligned");
    ByteWriter w;
    for (char c : kMagic) w.put_u8(static_cast<std::uint8_t>(c));
    w.put_u16(kFormatVersion);
    w.put_u8(static_cast<std::uint8_t>(kind));
    w.put_u8(flags);
    w.put_u64(body.size());
    w.put_bytes(body);
    w.put_u32(crc32_of(w.bytes()));
    w.put_u32(0);
    return w.take();
}

struct ContainerView {
    StructureKind kind;
    std::uint8_t flags;
    std::span<const std::uint8_t> body;
};

inline ContainerView open_container(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes + kTrailerBytes) throw IntegrityError("container truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IntegrityError("bad container magic");
    ByteReader r(bytes.subspan(4));
    std::uint16_t version = r.get_u16();
    if (version != kFormatVersion) throw IntegrityError("unsupported container version " + std::to_string(version));
    std::uint8_t kind = r.get_u8();
    std::uint8_t flags = r.get_u8();
    u64 length = r.get_u64();
    if (length % 8 != 0 || length != bytes.size() - kHeaderBytes - kTrailerBytes)
        throw IntegrityError("container length mismatch");
    std::size_t crc_at = kHeaderBytes + static_cast<std::size_t>(length);
    ByteReader tail(bytes.subspan(crc_at));
    std::uint32_t stored = tail.get_u32();
    if (stored != crc32_of(bytes.subspan(0, crc_at))) throw IntegrityError("container checksum mismatch");
    if (kind < 1 || kind > 4) throw IntegrityError("unknown structure kind");
    return {static_cast<StructureKind>(kind), flags, bytes.subspan(kHeaderBytes, static_cast<std::size_t>(length))};
}

inline Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw UsageError("failed writing " + path);
}

// Bits of a serialized structure by source. Sources sum to total_bits, which equals the
// container size in bits; info_bits is the information-theoretic payload.
struct SpaceReport {
    std::string kind;
    u64 n = 0;
    u64 payload_bits = 0;
    u64 rank_bits = 0;
    u64 dict_bits = 0;
    u64 seed_bits = 0;
    u64 overhead_bits = 0;
    u64 total_bits = 0;
    double info_bits = 0;

    double redundancy() const { return static_cast<double>(total_bits) - info_bits; }
};

}  // namespace rkit
